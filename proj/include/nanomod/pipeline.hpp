#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nanomod/bench.hpp"
#include "nanomod/errors.hpp"
#include "nanomod/json_io.hpp"
#include "nanomod/kinds.hpp"
#include "nanomod/process_spec.hpp"

namespace nanomod {

/// Error raised inside a pipeline stage; what() is prefixed with the stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct Seeds {
  std::optional<std::uint64_t> deposit;
  std::optional<std::uint64_t> defect;
  std::optional<std::uint64_t> vision;
  std::optional<std::uint64_t> shorts;
};

/// Everything one run needs. Relative paths resolve against `base_dir`.
struct RunManifest {
  std::string spec_path;  // empty: built-in defaults
  std::vector<std::pair<std::string, std::string>> spec_overrides;
  std::string netlist_path;
  /// Bench source instead of a netlist file: {"scenario": name} or
  /// {"generator": "random_logic" | "flipflop_chain" | "differential_pair" |
  /// "555_like", ...generator arguments}.
  std::optional<Json> bench;
  Seeds seeds;
  std::string out = "out";
  bool keep_truth = false;
  std::optional<Thresholds> thresholds;  // replaces the scenario's thresholds
  LayoutPolicy policy = LayoutPolicy::lattice;
  double defect_classification_accuracy = 1.0;
  std::uint64_t shorts_trials = 1000;
  std::filesystem::path base_dir = ".";
};

/// Reads a manifest object. Throws ParseError for malformed fields.
RunManifest manifest_from_json(const Json& j, const std::filesystem::path& base_dir);
/// Throws ConfigError naming every stochastic stage without a seed.
void require_seeds(const Seeds& seeds);

/// Bench source of a manifest, resolved to a scenario.
BenchScenario bench_from_json(const Json& j);

/// Spec, netlist and thresholds a manifest resolves to. Scenario overrides
/// apply before the manifest's own.
struct ResolvedInputs {
  ProcessSpec spec;
  Netlist netlist;
  Thresholds thresholds;
};
ResolvedInputs resolve_inputs(const RunManifest& manifest);

/// Each stage reads the serialized output of the one before it.
std::string stage_deposit(const ProcessSpec& spec, const Netlist& netlist, LayoutPolicy policy,
                          std::uint64_t seed_deposit, std::uint64_t seed_defect);
std::string stage_observe(const ProcessSpec& spec, const std::string& substrate_json, double accuracy,
                          std::uint64_t seed_vision, bool keep_truth);
std::string stage_assign(const Netlist& netlist, const std::string& observed_json);
std::string stage_route(const ProcessSpec& spec, const Netlist& netlist, const std::string& observed_json,
                        const std::string& assignment_json);
std::string stage_report(const ProcessSpec& spec, const Netlist& netlist, const std::string& observed_json,
                         const std::string& assignment_json, const std::string& layout_json,
                         std::uint64_t seed_shorts, std::uint64_t trials);
std::string stage_render(const std::string& layout_json, double scale);

struct CheckRow {
  std::string key;     // threshold key, e.g. "min_routed_fraction"
  std::optional<double> value;
  double limit = 0.0;
  bool pass = false;
};
/// One row per threshold, in key order. A missing or null metric fails.
/// Throws ConfigError for a key that is not min_/max_ of a known metric.
std::vector<CheckRow> check_thresholds(const std::map<std::string, std::optional<double>>& metrics,
                                       const Thresholds& thresholds);
bool all_pass(const std::vector<CheckRow>& rows);
/// Fixed-width pass/fail table, one line per row.
std::string format_checks(const std::vector<CheckRow>& rows);

/// The six artifact files in write order.
inline const std::vector<std::string>& artifact_names() {
  static const std::vector<std::string> names = {"substrate.json", "observed.json", "assignment.json",
                                                 "layout.json",    "report.json",   "layout.svg"};
  return names;
}

struct RunResult {
  std::map<std::string, std::string> files;  // artifact name -> contents
  std::vector<CheckRow> checks;
  bool pass = false;
};
/// Runs every stage in memory. Throws StageError tagged with the failing stage.
RunResult run_pipeline(const RunManifest& manifest);
/// run_pipeline, then writes the artifacts under manifest.out.
RunResult cmd_run(const RunManifest& manifest);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace nanomod

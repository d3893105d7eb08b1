#include "nanomod/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nanomod/analyze.hpp"
#include "nanomod/assign.hpp"
#include "nanomod/deposition.hpp"
#include "nanomod/errors.hpp"
#include "nanomod/route.hpp"
#include "nanomod/svg.hpp"
#include "nanomod/vision.hpp"

namespace nanomod {

namespace {

std::string scalar_text(const Json& v, const std::string& what) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean()) return v.dump();
  throw ParseError(0, what + ": expected a string or number");
}

std::optional<std::uint64_t> seed_field(const Json& seeds, const char* key) {
  if (!seeds.contains(key) || seeds[key].is_null()) return std::nullopt;
  const Json& v = seeds[key];
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ParseError(0, std::string("manifest.seeds.") + key + ": expected a u64");
  }
  return seeds[key].get<std::uint64_t>();
}

template <class F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

std::size_t size_arg(const Json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j[key];
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ParseError(0, std::string("bench.") + key + ": expected an unsigned integer");
  }
  return j[key].get<std::size_t>();
}

}  // namespace

void require_seeds(const Seeds& s) {
  std::string missing;
  auto need = [&](const std::optional<std::uint64_t>& v, const char* name) {
    if (!v) missing += missing.empty() ? name : std::string(", ") + name;
  };
  need(s.deposit, "deposit");
  need(s.defect, "defect");
  need(s.vision, "vision");
  need(s.shorts, "shorts");
  if (!missing.empty()) throw ConfigError("manifest is missing seeds: " + missing);
}

RunManifest manifest_from_json(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ParseError(0, "manifest: expected an object");
  static const std::vector<std::string> known = {
      "spec", "spec_overrides", "netlist", "bench", "seeds", "out", "keep_truth", "thresholds",
      "policy", "defect_classification_accuracy", "shorts_trials"};
  for (const auto& [k, v] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ParseError(0, "manifest: unknown key " + k);
  }
  RunManifest m;
  m.base_dir = base_dir;
  try {
    if (j.contains("spec")) m.spec_path = j["spec"].get<std::string>();
    if (j.contains("spec_overrides")) {
      const Json& o = j["spec_overrides"];
      if (!o.is_object()) throw ParseError(0, "manifest.spec_overrides: expected an object");
      for (const auto& [k, v] : o.items()) m.spec_overrides.emplace_back(k, scalar_text(v, "manifest.spec_overrides." + k));
    }
    if (j.contains("netlist")) m.netlist_path = j["netlist"].get<std::string>();
    if (j.contains("bench")) m.bench = j["bench"];
    if (j.contains("seeds")) {
      const Json& s = j["seeds"];
      if (!s.is_object()) throw ParseError(0, "manifest.seeds: expected an object");
      m.seeds = {seed_field(s, "deposit"), seed_field(s, "defect"), seed_field(s, "vision"), seed_field(s, "shorts")};
    }
    if (j.contains("out")) m.out = j["out"].get<std::string>();
    if (j.contains("keep_truth")) m.keep_truth = j["keep_truth"].get<bool>();
    if (j.contains("thresholds")) m.thresholds = thresholds_from_json(j["thresholds"]);
    if (j.contains("policy")) {
      const auto p = j["policy"].get<std::string>();
      if (p == "lattice") m.policy = LayoutPolicy::lattice;
      else if (p == "poisson") m.policy = LayoutPolicy::poisson;
      else throw ParseError(0, "manifest.policy: expected \"lattice\" or \"poisson\"");
    }
    if (j.contains("defect_classification_accuracy")) {
      m.defect_classification_accuracy = j["defect_classification_accuracy"].get<double>();
    }
    if (j.contains("shorts_trials")) m.shorts_trials = j["shorts_trials"].get<std::uint64_t>();
  } catch (const Json::exception& e) {
    throw ParseError(0, std::string("manifest: ") + e.what());
  }
  if (m.netlist_path.empty() == !m.bench.has_value()) {
    throw ConfigError("manifest needs exactly one of \"netlist\" and \"bench\"");
  }
  return m;
}

BenchScenario bench_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError(0, "bench: expected an object");
  if (j.contains("scenario")) {
    if (!j["scenario"].is_string()) throw ParseError(0, "bench.scenario: expected a string");
    return bench_scenario(j["scenario"].get<std::string>());
  }
  if (!j.contains("generator") || !j["generator"].is_string()) {
    throw ParseError(0, "bench: needs \"scenario\" or \"generator\"");
  }
  const auto g = j["generator"].get<std::string>();
  if (g == "random_logic") {
    const auto n = size_arg(j, "n", 1000);
    const auto fanout = size_arg(j, "fanout", 5);
    const auto spacing = static_cast<std::int64_t>(size_arg(j, "spacing_nm", 10'000));
    const auto seed = static_cast<std::uint64_t>(size_arg(j, "seed", 0));
    return gen_random_logic(n, fanout, spacing, seed);
  }
  if (g == "flipflop_chain") return gen_flipflop_chain(size_arg(j, "stages", 1));
  if (g == "differential_pair") return gen_differential_pair();
  if (g == "555_like") return gen_555_like();
  throw ConfigError("unknown bench generator " + g);
}

ResolvedInputs resolve_inputs(const RunManifest& m) {
  ResolvedInputs in;
  if (!m.spec_path.empty()) in.spec = load_process_spec(read_file(m.base_dir / m.spec_path));
  if (m.bench) {
    const BenchScenario sc = bench_from_json(*m.bench);
    in.spec = scenario_spec(sc, in.spec);
    in.netlist = sc.netlist;
    in.thresholds = sc.thresholds;
  } else {
    in.netlist = netlist_from_json(parse_json(read_file(m.base_dir / m.netlist_path), m.netlist_path));
  }
  for (const auto& [k, v] : m.spec_overrides) apply_spec_override(in.spec, k, v);
  check_invariants(in.spec);
  if (m.thresholds) in.thresholds = *m.thresholds;
  const ValidationReport vr = validate_netlist(in.netlist, standard_kinds());
  if (!vr.ok) {
    std::string msg = "netlist is invalid:";
    for (const auto& issue : vr.issues) {
      if (issue.severity == Severity::error) msg += " [" + issue.locus + "] " + issue.message + ";";
    }
    throw ConfigError(msg);
  }
  return in;
}

std::string stage_deposit(const ProcessSpec& spec, const Netlist& netlist, LayoutPolicy policy,
                          std::uint64_t seed_deposit, std::uint64_t seed_defect) {
  const KindLibrary kinds = standard_kinds();
  Substrate s = deposit(spec, kind_mix_for(netlist, kinds), policy, seed_deposit);
  s = inject_defects(std::move(s), spec.defect_rate, seed_defect);
  return dump_json(substrate_to_json(s));
}

std::string stage_observe(const ProcessSpec& spec, const std::string& substrate_json, double accuracy,
                          std::uint64_t seed_vision, bool keep_truth) {
  const Substrate s = substrate_from_json(parse_json(substrate_json, "substrate"));
  const ObservedField f = observe(s, spec, standard_kinds(), accuracy, seed_vision);
  return dump_json(observed_to_json(f, keep_truth));
}

std::string stage_assign(const Netlist& netlist, const std::string& observed_json) {
  const ObservedField f = observed_from_json(parse_json(observed_json, "observed"));
  return dump_json(assignment_to_json(assign(netlist, f, standard_kinds())));
}

std::string stage_route(const ProcessSpec& spec, const Netlist& netlist, const std::string& observed_json,
                        const std::string& assignment_json) {
  const ObservedField f = observed_from_json(parse_json(observed_json, "observed"));
  const Assignment a = assignment_from_json(parse_json(assignment_json, "assignment"));
  return dump_json(layout_to_json(route_design(netlist, f, standard_kinds(), a, spec)));
}

std::string stage_report(const ProcessSpec& spec, const Netlist& netlist, const std::string& observed_json,
                         const std::string& assignment_json, const std::string& layout_json,
                         std::uint64_t seed_shorts, std::uint64_t trials) {
  const ObservedField f = observed_from_json(parse_json(observed_json, "observed"));
  const Assignment a = assignment_from_json(parse_json(assignment_json, "assignment"));
  const RoutedLayout l = layout_from_json(parse_json(layout_json, "layout"));
  const FabricationReport r = make_report(netlist, f, a, l, standard_kinds(), spec, seed_shorts, trials);
  return dump_json(report_to_json(r));
}

std::string stage_render(const std::string& layout_json, double scale) {
  return render_svg(layout_from_json(parse_json(layout_json, "layout")), standard_kinds(), scale);
}

std::vector<CheckRow> check_thresholds(const std::map<std::string, std::optional<double>>& metrics,
                                       const Thresholds& thresholds) {
  const auto& names = metric_names();
  std::vector<CheckRow> rows;
  for (const auto& [key, limit] : thresholds) {
    const bool is_min = key.rfind("min_", 0) == 0;
    const bool is_max = key.rfind("max_", 0) == 0;
    const std::string metric = key.size() > 4 ? key.substr(4) : "";
    if ((!is_min && !is_max) || std::find(names.begin(), names.end(), metric) == names.end()) {
      throw ConfigError("unknown threshold key " + key);
    }
    CheckRow row{key, std::nullopt, limit, false};
    const auto it = metrics.find(metric);
    if (it != metrics.end() && it->second) {
      row.value = it->second;
      row.pass = is_min ? *row.value >= limit : *row.value <= limit;
    }
    rows.push_back(row);
  }
  return rows;
}

bool all_pass(const std::vector<CheckRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.pass; });
}

std::string format_checks(const std::vector<CheckRow>& rows) {
  std::string out;
  char buf[256];
  for (const auto& r : rows) {
    const std::string value = r.value ? [&] {
      char v[64];
      std::snprintf(v, sizeof v, "%.6g", *r.value);
      return std::string(v);
    }() : std::string("missing");
    std::snprintf(buf, sizeof buf, "%-4s %-28s %14s %s %-14.6g\n", r.pass ? "PASS" : "FAIL", r.key.c_str(),
                  value.c_str(), r.key.rfind("min_", 0) == 0 ? ">=" : "<=", r.limit);
    out += buf;
  }
  return out;
}

RunResult run_pipeline(const RunManifest& m) {
  in_stage("manifest", [&] { require_seeds(m.seeds); });
  const ResolvedInputs in = in_stage("inputs", [&] { return resolve_inputs(m); });
  RunResult res;
  auto& files = res.files;
  files["substrate.json"] = in_stage("deposit", [&] {
    return stage_deposit(in.spec, in.netlist, m.policy, *m.seeds.deposit, *m.seeds.defect);
  });
  files["observed.json"] = in_stage("observe", [&] {
    return stage_observe(in.spec, files["substrate.json"], m.defect_classification_accuracy, *m.seeds.vision,
                         m.keep_truth);
  });
  files["assignment.json"] = in_stage("assign", [&] { return stage_assign(in.netlist, files["observed.json"]); });
  files["layout.json"] = in_stage("route", [&] {
    return stage_route(in.spec, in.netlist, files["observed.json"], files["assignment.json"]);
  });
  files["report.json"] = in_stage("report", [&] {
    return stage_report(in.spec, in.netlist, files["observed.json"], files["assignment.json"], files["layout.json"],
                        *m.seeds.shorts, m.shorts_trials);
  });
  files["layout.svg"] = in_stage("render", [&] { return stage_render(files["layout.json"], 1.0); });
  res.checks = in_stage("check", [&] {
    return check_thresholds(report_metrics_from_json(parse_json(files["report.json"], "report")), in.thresholds);
  });
  res.pass = all_pass(res.checks);
  return res;
}

RunResult cmd_run(const RunManifest& m) {
  RunResult res = run_pipeline(m);
  const std::filesystem::path out = m.base_dir / m.out;
  in_stage("write", [&] {
    std::filesystem::create_directories(out);
    for (const auto& name : artifact_names()) write_file(out / name, res.files.at(name));
  });
  return res;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << contents;
  if (!out) throw ConfigError("write failed for " + path.string());
}

}  // namespace nanomod

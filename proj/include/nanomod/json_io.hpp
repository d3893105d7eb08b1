#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nanomod/analyze.hpp"
#include "nanomod/assign.hpp"
#include "nanomod/bench.hpp"
#include "nanomod/deposition.hpp"
#include "nanomod/netlist.hpp"
#include "nanomod/route.hpp"
#include "nanomod/vision.hpp"

namespace nanomod {

/// Keys keep insertion order so serialized artifacts have a fixed layout.
using Json = nlohmann::ordered_json;

/// Rounds to `digits` significant decimal digits; non-finite values pass through.
double round_sig(double v, int digits = 9);

/// Parses JSON text; syntax errors become ParseError prefixed with `what`.
Json parse_json(std::string_view text, const std::string& what);
/// Two-space indented text with a trailing newline.
std::string dump_json(const Json& j);

Json netlist_to_json(const Netlist& netlist);
Netlist netlist_from_json(const Json& j);

Json substrate_to_json(const Substrate& substrate);
Substrate substrate_from_json(const Json& j);

/// Ground-truth fields (phys_id, missed) are written only when `keep_truth`.
Json observed_to_json(const ObservedField& field, bool keep_truth);
ObservedField observed_from_json(const Json& j);

Json assignment_to_json(const Assignment& assignment);
Assignment assignment_from_json(const Json& j);

/// Each branch is written as consecutive constant-width runs that partition
/// its points.
Json layout_to_json(const RoutedLayout& layout);
RoutedLayout layout_from_json(const Json& j);

/// Report metrics by name. Metrics that do not apply (no analyzable net)
/// are nullopt.
std::map<std::string, std::optional<double>> report_metrics(const FabricationReport& report);
/// Names accepted after "min_" / "max_" in a threshold key.
const std::vector<std::string>& metric_names();

Json report_to_json(const FabricationReport& report);
/// Metrics section of a serialized report.
std::map<std::string, std::optional<double>> report_metrics_from_json(const Json& j);

Thresholds thresholds_from_json(const Json& j);

}  // namespace nanomod

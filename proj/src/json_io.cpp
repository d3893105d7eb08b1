#include "nanomod/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "nanomod/errors.hpp"
#include "nanomod/process_spec.hpp"

namespace nanomod {

namespace {

const Json& field(const Json& j, const char* key, const std::string& what) {
  if (!j.is_object()) throw ParseError(0, what + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(0, what + ": missing \"" + key + "\"");
  return *it;
}

template <class T>
T get(const Json& j, const char* key, const std::string& what) {
  const Json& v = field(j, key, what);
  try {
    return v.get<T>();
  } catch (const Json::exception& e) {
    throw ParseError(0, what + "." + key + ": " + e.what());
  }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback, const std::string& what) {
  if (!j.is_object()) throw ParseError(0, what + ": expected an object");
  return j.contains(key) ? get<T>(j, key, what) : fallback;
}

const Json& array(const Json& j, const char* key, const std::string& what) {
  const Json& v = field(j, key, what);
  if (!v.is_array()) throw ParseError(0, what + "." + key + ": expected an array");
  return v;
}

Json point(PointNm p) { return Json::array({p.x, p.y}); }

PointNm point_from(const Json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw ParseError(0, what + ": expected [x_nm, y_nm] integers");
  }
  return {j[0].get<std::int64_t>(), j[1].get<std::int64_t>()};
}

Json region(Region r) { return Json{{"width_nm", r.width}, {"height_nm", r.height}}; }

Region region_from(const Json& j, const std::string& what) {
  const Json& r = field(j, "region", what);
  return {get<std::int64_t>(r, "width_nm", what + ".region"), get<std::int64_t>(r, "height_nm", what + ".region")};
}

double angle(double deg) { return quantize_deg(deg); }

Json metric_value(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return round_sig(*v);
}

}  // namespace

double round_sig(double v, int digits) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits - 1, v);
  return std::strtod(buf, nullptr);
}

Json parse_json(std::string_view text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw ParseError(0, what + ": " + e.what());
  }
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json netlist_to_json(const Netlist& nl) {
  Json inst = Json::array();
  for (const auto& i : nl.instances) {
    Json o{{"id", i.id}, {"kind", i.kind}};
    if (i.placement_hint) {
      o["x_nm"] = i.placement_hint->x;
      o["y_nm"] = i.placement_hint->y;
    }
    inst.push_back(std::move(o));
  }
  Json nets = Json::array();
  for (const auto& n : nl.nets) {
    Json pins = Json::array();
    for (const auto& p : n.pins) pins.push_back(Json::array({p.instance, p.pin}));
    nets.push_back(Json{{"id", n.id}, {"pins", std::move(pins)}});
  }
  Json groups = Json::array();
  for (const auto& g : nl.redundancy_groups) groups.push_back(g);
  return Json{{"instances", std::move(inst)}, {"nets", std::move(nets)}, {"redundancy_groups", std::move(groups)}};
}

Netlist netlist_from_json(const Json& j) {
  const std::string what = "netlist";
  Netlist nl;
  for (const auto& i : array(j, "instances", what)) {
    Instance inst{get<std::string>(i, "id", what + ".instances"), get<std::string>(i, "kind", what + ".instances"),
                  std::nullopt};
    if (i.contains("x_nm") || i.contains("y_nm")) {
      inst.placement_hint =
          PointNm{get<std::int64_t>(i, "x_nm", what + ".instances"), get<std::int64_t>(i, "y_nm", what + ".instances")};
    }
    nl.instances.push_back(std::move(inst));
  }
  for (const auto& n : array(j, "nets", what)) {
    Net net{get<std::string>(n, "id", what + ".nets"), {}};
    for (const auto& p : array(n, "pins", what + ".nets")) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string()) {
        throw ParseError(0, what + ".nets." + net.id + ": pins are [\"instance\", \"pin\"] pairs");
      }
      net.pins.push_back({p[0].get<std::string>(), p[1].get<std::string>()});
    }
    nl.nets.push_back(std::move(net));
  }
  if (j.contains("redundancy_groups")) {
    for (const auto& g : array(j, "redundancy_groups", what)) {
      try {
        nl.redundancy_groups.push_back(g.get<std::vector<std::string>>());
      } catch (const Json::exception& e) {
        throw ParseError(0, what + ".redundancy_groups: " + e.what());
      }
    }
  }
  return nl;
}

Json substrate_to_json(const Substrate& s) {
  Json comps = Json::array();
  for (const auto& c : s.components) {
    Json o{{"phys_id", c.phys_id},      {"kind", c.kind},
           {"x_nm", c.center.x},        {"y_nm", c.center.y},
           {"theta_deg", angle(c.orientation)}, {"defective", c.defective}};
    if (c.target) {
      o["target"] = Json{{"x_nm", c.target->position.x},
                         {"y_nm", c.target->position.y},
                         {"theta_deg", angle(c.target->theta_deg)},
                         {"clamped", c.target->clamped}};
    }
    comps.push_back(std::move(o));
  }
  Json overlaps = Json::array();
  for (const auto& [a, b] : s.overlaps) overlaps.push_back(Json::array({a, b}));
  return Json{{"region", region(s.region)},
              {"seed", s.seed},
              {"components", std::move(comps)},
              {"overlaps", std::move(overlaps)}};
}

Substrate substrate_from_json(const Json& j) {
  const std::string what = "substrate";
  Substrate s;
  s.region = region_from(j, what);
  s.seed = get_or<std::uint64_t>(j, "seed", 0, what);
  const std::string cw = what + ".components";
  for (const auto& c : array(j, "components", what)) {
    PlacedComponent p;
    p.phys_id = get<std::uint32_t>(c, "phys_id", cw);
    p.kind = get<std::string>(c, "kind", cw);
    p.center = {get<std::int64_t>(c, "x_nm", cw), get<std::int64_t>(c, "y_nm", cw)};
    p.orientation = get<double>(c, "theta_deg", cw);
    p.defective = get_or<bool>(c, "defective", false, cw);
    if (c.contains("target")) {
      const Json& t = c["target"];
      p.target = TargetPose{{get<std::int64_t>(t, "x_nm", cw), get<std::int64_t>(t, "y_nm", cw)},
                            get<double>(t, "theta_deg", cw), get_or<bool>(t, "clamped", false, cw)};
    }
    s.components.push_back(std::move(p));
  }
  if (j.contains("overlaps")) {
    for (const auto& o : array(j, "overlaps", what)) {
      if (!o.is_array() || o.size() != 2) throw ParseError(0, what + ".overlaps: expected [a, b] pairs");
      s.overlaps.emplace_back(o[0].get<std::uint32_t>(), o[1].get<std::uint32_t>());
    }
  }
  return s;
}

Json observed_to_json(const ObservedField& f, bool keep_truth) {
  const bool truth = keep_truth && f.has_truth;
  Json obs = Json::array();
  for (const auto& o : f.observations) {
    Json e{{"obs_id", o.obs_id}};
    if (truth) e["phys_id"] = o.phys_id;
    e["kind"] = o.kind;
    e["x_nm"] = o.center_est.x;
    e["y_nm"] = o.center_est.y;
    e["theta_deg"] = angle(o.orientation_est);
    e["defective"] = o.classified_defective;
    obs.push_back(std::move(e));
  }
  Json out{{"region", region(f.region)}, {"has_truth", truth}, {"observations", std::move(obs)}};
  if (truth) out["missed"] = f.missed;
  return out;
}

ObservedField observed_from_json(const Json& j) {
  const std::string what = "observed";
  ObservedField f;
  f.region = region_from(j, what);
  f.has_truth = get_or<bool>(j, "has_truth", false, what);
  const std::string ow = what + ".observations";
  for (const auto& o : array(j, "observations", what)) {
    ObservedComponent c;
    c.obs_id = get<std::uint32_t>(o, "obs_id", ow);
    c.phys_id = f.has_truth ? get<std::uint32_t>(o, "phys_id", ow) : 0;
    c.kind = get<std::string>(o, "kind", ow);
    c.center_est = {get<std::int64_t>(o, "x_nm", ow), get<std::int64_t>(o, "y_nm", ow)};
    c.orientation_est = get<double>(o, "theta_deg", ow);
    c.classified_defective = get_or<bool>(o, "defective", false, ow);
    f.observations.push_back(std::move(c));
  }
  if (f.has_truth && j.contains("missed")) f.missed = get<std::vector<std::uint32_t>>(j, "missed", what);
  return f;
}

Json assignment_to_json(const Assignment& a) {
  Json mapping = Json::array();
  for (const auto& [inst, obs] : a.mapping) mapping.push_back(Json{{"instance", inst}, {"obs_id", obs}});
  return Json{{"mapping", std::move(mapping)},
              {"unassigned", a.unassigned_logical},
              {"unused_physical", a.unused_physical},
              {"cost_nm", round_sig(a.cost)}};
}

Assignment assignment_from_json(const Json& j) {
  const std::string what = "assignment";
  Assignment a;
  for (const auto& m : array(j, "mapping", what)) {
    const auto inst = get<std::string>(m, "instance", what + ".mapping");
    if (!a.mapping.emplace(inst, get<std::uint32_t>(m, "obs_id", what + ".mapping")).second) {
      throw ParseError(0, what + ".mapping: instance " + inst + " listed twice");
    }
  }
  a.unassigned_logical = get_or<std::vector<std::string>>(j, "unassigned", {}, what);
  a.unused_physical = get_or<std::vector<std::uint32_t>>(j, "unused_physical", {}, what);
  a.cost = get_or<double>(j, "cost_nm", 0.0, what);
  return a;
}

Json layout_to_json(const RoutedLayout& l) {
  Json nets = Json::array();
  for (const auto& p : l.paths) {
    Json wires = Json::array();
    for (std::size_t b = 0; b < p.branches.size(); ++b) {
      Json runs = Json::array();
      const auto& pts = p.branches[b];
      const auto& ws = p.widths[b];
      for (std::size_t i = 0; i < pts.size();) {
        std::size_t k = i;
        Json run_pts = Json::array();
        while (k < pts.size() && ws[k] == ws[i]) run_pts.push_back(point(pts[k++]));
        runs.push_back(Json{{"width_nm", ws[i]}, {"points", std::move(run_pts)}});
        i = k;
      }
      wires.push_back(std::move(runs));
    }
    Json bridges = Json::array();
    for (const auto& br : p.bridges) {
      bridges.push_back(Json{{"x_nm", br.at.x}, {"y_nm", br.at.y}, {"crossed", br.crossed_net}});
    }
    Json terms = Json::array();
    for (const auto& t : p.terminals) terms.push_back(point(t));
    nets.push_back(Json{{"id", p.net_id},
                        {"complete", p.complete},
                        {"terminals", std::move(terms)},
                        {"wires", std::move(wires)},
                        {"bridges", std::move(bridges)},
                        {"length_nm", p.moves() * l.pitch}});
  }
  Json failed = Json::array();
  for (const auto& f : l.failed) failed.push_back(Json{{"id", f.net_id}, {"reason", f.reason}});
  Json comps = Json::array();
  for (const auto& c : l.components) {
    comps.push_back(Json{{"obs_id", c.obs_id},
                         {"kind", c.kind},
                         {"x_nm", c.center.x},
                         {"y_nm", c.center.y},
                         {"theta_deg", angle(c.theta_deg)},
                         {"instance", c.instance}});
  }
  return Json{{"region", region(l.region)},
              {"pitch_nm", l.pitch},
              {"assignment", assignment_to_json(l.assignment)},
              {"nets", std::move(nets)},
              {"failed", std::move(failed)},
              {"components", std::move(comps)},
              {"totals",
               Json{{"wire_length_nm", l.total_wire_length},
                    {"bridge_count", l.bridge_count},
                    {"footprint_mm2", round_sig(l.footprint_mm2)}}}};
}

RoutedLayout layout_from_json(const Json& j) {
  const std::string what = "layout";
  RoutedLayout l;
  l.region = region_from(j, what);
  l.pitch = get<std::int64_t>(j, "pitch_nm", what);
  if (l.pitch <= 0) throw ParseError(0, what + ".pitch_nm: must be positive");
  l.assignment = assignment_from_json(field(j, "assignment", what));
  const std::string nw = what + ".nets";
  for (const auto& n : array(j, "nets", what)) {
    Path p;
    p.net_id = get<std::string>(n, "id", nw);
    p.complete = get_or<bool>(n, "complete", true, nw);
    for (const auto& t : array(n, "terminals", nw)) p.terminals.push_back(point_from(t, nw + ".terminals"));
    for (const auto& runs : array(n, "wires", nw)) {
      if (!runs.is_array()) throw ParseError(0, nw + ".wires: each wire is a list of runs");
      std::vector<PointNm> pts;
      std::vector<std::int64_t> ws;
      for (const auto& run : runs) {
        const auto w = get<std::int64_t>(run, "width_nm", nw + ".wires");
        for (const auto& q : array(run, "points", nw + ".wires")) {
          pts.push_back(point_from(q, nw + ".wires"));
          ws.push_back(w);
        }
      }
      p.branches.push_back(std::move(pts));
      p.widths.push_back(std::move(ws));
    }
    if (n.contains("bridges")) {
      for (const auto& br : array(n, "bridges", nw)) {
        p.bridges.push_back({{get<std::int64_t>(br, "x_nm", nw + ".bridges"), get<std::int64_t>(br, "y_nm", nw + ".bridges")},
                             get<std::string>(br, "crossed", nw + ".bridges")});
      }
    }
    l.bridge_count += p.bridges.size();
    l.total_wire_length += p.moves() * l.pitch;
    l.paths.push_back(std::move(p));
  }
  for (const auto& f : array(j, "failed", what)) {
    l.failed.push_back({get<std::string>(f, "id", what + ".failed"), get<std::string>(f, "reason", what + ".failed")});
  }
  const std::string cw = what + ".components";
  for (const auto& c : array(j, "components", what)) {
    l.components.push_back({get<std::uint32_t>(c, "obs_id", cw), get<std::string>(c, "kind", cw),
                            {get<std::int64_t>(c, "x_nm", cw), get<std::int64_t>(c, "y_nm", cw)},
                            get<double>(c, "theta_deg", cw), get_or<std::string>(c, "instance", "", cw)});
  }
  if (j.contains("totals")) l.footprint_mm2 = get_or<double>(j["totals"], "footprint_mm2", 0.0, what + ".totals");
  return l;
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {
      "components_total", "components_assigned", "components_routed", "routed_fraction",
      "nets_total",       "nets_routed",         "net_failure_fraction", "wires",
      "total_wire_length_nm", "print_time_s",    "worst_net_delay_s",  "max_frequency_hz",
      "expected_shorts",  "yield",               "yield_ci_low",       "yield_ci_high",
      "short_trials",     "short_failures",      "footprint_mm2",      "bridge_count"};
  return names;
}

std::map<std::string, std::optional<double>> report_metrics(const FabricationReport& r) {
  auto d = [](auto v) { return std::optional<double>(static_cast<double>(v)); };
  return {{"components_total", d(r.components_total)},
          {"components_assigned", d(r.components_assigned)},
          {"components_routed", d(r.components_routed)},
          {"routed_fraction", r.routed_fraction},
          {"nets_total", d(r.nets_total)},
          {"nets_routed", d(r.nets_routed)},
          {"net_failure_fraction", r.net_failure_fraction},
          {"wires", d(r.wires)},
          {"total_wire_length_nm", d(r.total_wire_length_nm)},
          {"print_time_s", r.print_time_s},
          {"worst_net_delay_s", r.worst_net_delay_s},
          {"max_frequency_hz", r.max_frequency_hz},
          {"expected_shorts", r.expected_shorts},
          {"yield", r.yield.yield},
          {"yield_ci_low", r.yield.ci_low},
          {"yield_ci_high", r.yield.ci_high},
          {"short_trials", d(r.yield.trials)},
          {"short_failures", d(r.yield.failures)},
          {"footprint_mm2", r.footprint_mm2},
          {"bridge_count", d(r.bridge_count)}};
}

Json report_to_json(const FabricationReport& r) {
  const auto m = report_metrics(r);
  Json metrics = Json::object();
  for (const auto& name : metric_names()) {
    const auto& v = m.at(name);
    const bool integral = name == "components_total" || name == "components_assigned" ||
                          name == "components_routed" || name == "nets_total" || name == "nets_routed" ||
                          name == "wires" || name == "total_wire_length_nm" || name == "short_trials" ||
                          name == "short_failures" || name == "bridge_count";
    if (integral) {
      metrics[name] = static_cast<std::int64_t>(*v);
    } else {
      metrics[name] = metric_value(v);
    }
  }
  return Json{{"metrics", std::move(metrics)}, {"spec", serialize_process_spec(r.spec)}};
}

std::map<std::string, std::optional<double>> report_metrics_from_json(const Json& j) {
  const Json& m = field(j, "metrics", "report");
  if (!m.is_object()) throw ParseError(0, "report.metrics: expected an object");
  std::map<std::string, std::optional<double>> out;
  for (const auto& [k, v] : m.items()) {
    if (v.is_null()) {
      out[k] = std::nullopt;
    } else if (v.is_number()) {
      out[k] = v.get<double>();
    } else {
      throw ParseError(0, "report.metrics." + k + ": expected a number or null");
    }
  }
  return out;
}

Thresholds thresholds_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError(0, "thresholds: expected an object of numbers");
  Thresholds t;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) throw ParseError(0, "thresholds." + k + ": expected a number");
    t[k] = v.get<double>();
  }
  return t;
}

}  // namespace nanomod

#include "nanomod/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "nanomod/errors.hpp"
#include "nanomod/rng.hpp"
#include "nanomod/routing_grid.hpp"

namespace nanomod {

double print_time(std::int64_t length_nm, const ProcessSpec& spec) {
  return static_cast<double>(length_nm) / (spec.print_rate * 1e6);
}

double print_time(const RoutedLayout& layout, const ProcessSpec& spec) {
  return print_time(layout.total_wire_length, spec);
}

double wire_resistance(double length_nm, double width_nm, const ProcessSpec& spec) {
  if (!(width_nm > 0.0)) throw InvariantError("width", "wire segment width must be positive");
  const double rho = 1e-2 / spec.conductivity;  // ohm m
  return rho * length_nm / (width_nm * width_nm) * 1e9;
}

double wire_resistance(const Path& path, std::int64_t pitch, const ProcessSpec& spec) {
  double r = 0.0;
  for (std::size_t b = 0; b < path.branches.size(); ++b) {
    for (std::size_t i = 1; i < path.branches[b].size(); ++i) {
      r += wire_resistance(static_cast<double>(pitch), static_cast<double>(path.widths[b][i]), spec);
    }
  }
  return r;
}

double contact_resistance(double area_nm2, const ProcessSpec& spec) {
  if (!(area_nm2 > 0.0)) throw InvariantError("contact_area", "must be positive");
  return spec.contact_resistivity * 1e-6 / (area_nm2 * 1e-14);
}

double wire_capacitance_per_m(const ProcessSpec& spec) { return kEpsilon0 * spec.insulator_kappa; }

double delay_estimate(const DelayInputs& in) {
  const double c_total = in.c_wire + in.c_load;
  const double switching = c_total == 0.0 ? 0.0 : c_total * in.supply_v / in.i_drive;
  return switching + in.r_path * in.c_wire;
}

namespace {

/// Lookup tables over a netlist for per-net queries.
struct NetlistIndex {
  std::unordered_map<std::string, const Net*> nets;
  std::unordered_map<std::string, const ComponentKind*> kind_of;

  NetlistIndex(const Netlist& netlist, const KindLibrary& kinds) {
    for (const auto& n : netlist.nets) nets.emplace(n.id, &n);
    for (const auto& i : netlist.instances) kind_of.emplace(i.id, kinds.find(i.kind));
  }
  const Net* net(const std::string& id) const {
    const auto it = nets.find(id);
    return it == nets.end() ? nullptr : it->second;
  }
  const ComponentKind* kind(const std::string& instance) const {
    const auto it = kind_of.find(instance);
    return it == kind_of.end() ? nullptr : it->second;
  }
  /// Driver kind and pin when the net's first pin is electrical, else null.
  std::pair<const ComponentKind*, const PinDef*> driver(const Net& net) const {
    if (net.pins.empty()) return {nullptr, nullptr};
    const ComponentKind* k = kind(net.pins.front().instance);
    if (!k || !k->electrical) return {nullptr, nullptr};
    const int pin = k->pin_index(net.pins.front().pin);
    if (pin < 0) return {nullptr, nullptr};
    return {k, &k->pins[static_cast<std::size_t>(pin)]};
  }
};

double net_delay(const Path& path, const RoutedLayout& layout, const NetlistIndex& index, const ProcessSpec& spec) {
  const Net* net = index.net(path.net_id);
  if (!net) throw IntegrityError("layout net " + path.net_id + " is not in the netlist");
  const auto [driver, driver_pin] = index.driver(*net);
  if (!driver) throw ConfigError("net " + path.net_id + ": driver has no electrical parameters");

  DelayInputs in;
  const double length_nm = static_cast<double>(path.moves() * layout.pitch);
  in.c_wire = wire_capacitance_per_m(spec) * length_nm * 1e-9;
  for (std::size_t i = 1; i < net->pins.size(); ++i) {
    const auto& ref = net->pins[i];
    if (!layout.assignment.mapping.contains(ref.instance)) continue;
    const ComponentKind* k = index.kind(ref.instance);
    if (!k || !k->electrical) continue;
    const int pin = k->pin_index(ref.pin);
    if (pin < 0) continue;
    const double area_um2 = static_cast<double>(k->pins[static_cast<std::size_t>(pin)].contact_area) * 1e-6;
    in.c_load += k->electrical->c_junction * area_um2 * 1e-15;
  }
  in.supply_v = driver->electrical->supply_voltage;
  in.i_drive = driver->electrical->i_dsat * (static_cast<double>(driver->body_width) * 1e-3) * 1e-3;
  in.r_path = wire_resistance(path, layout.pitch, spec) +
              2.0 * contact_resistance(static_cast<double>(driver_pin->contact_area), spec);
  return delay_estimate(in);
}

/// Worst delay over routed nets with an electrical driver, or -1.
double worst_delay(const RoutedLayout& layout, const NetlistIndex& index, const ProcessSpec& spec) {
  double worst = -1.0;
  for (const auto& path : layout.paths) {
    const Net* net = index.net(path.net_id);
    if (!net || !index.driver(*net).first) continue;
    worst = std::max(worst, net_delay(path, layout, index, spec));
  }
  return worst;
}

}  // namespace

double net_delay(const Path& path, const RoutedLayout& layout, const Netlist& netlist, const KindLibrary& kinds,
                 const ProcessSpec& spec) {
  return net_delay(path, layout, NetlistIndex(netlist, kinds), spec);
}

double max_frequency(const RoutedLayout& layout, const Netlist& netlist, const KindLibrary& kinds,
                     const ProcessSpec& spec) {
  const double worst = worst_delay(layout, NetlistIndex(netlist, kinds), spec);
  if (worst < 0.0) throw ConfigError("no routed net has an electrical driver");
  return worst == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / (2.0 * worst);
}

std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials) {
  if (trials == 0) return {0.0, 1.0};
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

std::vector<bool> wire_redundancy(const RoutedLayout& layout, const Netlist& netlist) {
  std::unordered_set<std::string> grouped;
  for (const auto& g : netlist.redundancy_groups) {
    if (g.size() >= 2) grouped.insert(g.begin(), g.end());
  }
  std::unordered_map<std::string, const Net*> nets;
  for (const auto& n : netlist.nets) nets.emplace(n.id, &n);
  std::vector<bool> out;
  for (const auto& path : layout.paths) {
    const auto it = nets.find(path.net_id);
    const Net* net = it == nets.end() ? nullptr : it->second;
    bool redundant = net && !net->pins.empty();
    if (net) {
      for (const auto& ref : net->pins) redundant = redundant && grouped.contains(ref.instance);
    }
    out.insert(out.end(), path.branches.size(), redundant);
  }
  return out;
}

YieldEstimate simulate_shorts(const std::vector<bool>& redundant, const ProcessSpec& spec, std::uint64_t trials,
                              std::uint64_t seed) {
  if (trials == 0) throw ConfigError("simulate_shorts needs at least one trial");
  const double q = spec.short_rate;
  const std::size_t n = redundant.size();
  const bool any_fragile = std::find(redundant.begin(), redundant.end(), false) != redundant.end();
  YieldEstimate y;
  y.trials = trials;
  if (q > 0.0 && any_fragile) {
    const double log_keep = std::log1p(-q);
    for (std::uint64_t t = 0; t < trials; ++t) {
      if (q >= 1.0) {
        ++y.failures;
        continue;
      }
      // Geometric skipping: the gap to the next shorted wire is Geometric(q).
      Xoshiro256ss rng = substream(seed, t);
      double idx = -1.0;
      for (;;) {
        idx += std::floor(std::log1p(-rng.uniform()) / log_keep) + 1.0;
        if (idx >= static_cast<double>(n)) break;
        if (!redundant[static_cast<std::size_t>(idx)]) {
          ++y.failures;
          break;
        }
      }
    }
  }
  const std::uint64_t clean = trials - y.failures;
  y.yield = static_cast<double>(clean) / static_cast<double>(trials);
  y.failure_probability = static_cast<double>(y.failures) / static_cast<double>(trials);
  std::tie(y.ci_low, y.ci_high) = wilson_interval(clean, trials);
  return y;
}

YieldEstimate simulate_shorts(const RoutedLayout& layout, const Netlist& netlist, const ProcessSpec& spec,
                              std::uint64_t trials, std::uint64_t seed) {
  return simulate_shorts(wire_redundancy(layout, netlist), spec, trials, seed);
}

double diffusion_time_ratio(double d1_nm, double d2_nm) {
  if (!(d1_nm > 0.0) || !(d2_nm > 0.0)) throw InvariantError("distance", "diffusion distances must be positive");
  const double r = d2_nm / d1_nm;
  return r * r;
}

FabricationReport make_report(const Netlist& netlist, const ObservedField& field, const Assignment& assignment,
                              const RoutedLayout& layout, const KindLibrary& kinds, const ProcessSpec& spec,
                              std::uint64_t shorts_seed, std::uint64_t shorts_trials) {
  if (!(layout.assignment == assignment)) throw IntegrityError("layout was routed from a different assignment");
  std::unordered_map<std::string, std::size_t> net_index;
  for (std::size_t n = 0; n < netlist.nets.size(); ++n) net_index.emplace(netlist.nets[n].id, n);
  std::vector<int> seen(netlist.nets.size(), 0);
  std::unordered_map<std::string, const Path*> path_of;
  for (const auto& p : layout.paths) {
    const auto it = net_index.find(p.net_id);
    if (it == net_index.end()) throw IntegrityError("layout routes unknown net " + p.net_id);
    ++seen[it->second];
    path_of.emplace(p.net_id, &p);
  }
  for (const auto& f : layout.failed) {
    const auto it = net_index.find(f.net_id);
    if (it == net_index.end()) throw IntegrityError("layout fails unknown net " + f.net_id);
    ++seen[it->second];
  }
  for (std::size_t n = 0; n < seen.size(); ++n) {
    if (seen[n] != 1) throw IntegrityError("net " + netlist.nets[n].id + " appears " + std::to_string(seen[n]) +
                                           " times in the layout");
  }
  std::unordered_map<std::uint32_t, const ObservedComponent*> obs;
  for (const auto& o : field.observations) obs.emplace(o.obs_id, &o);
  for (const auto& [inst, id] : assignment.mapping) {
    if (!obs.contains(id)) throw IntegrityError("assignment maps " + inst + " to obs_id " + std::to_string(id) +
                                                " missing from the observed field");
  }
  std::unordered_map<std::uint32_t, const LayoutComponent*> placed;
  for (const auto& c : layout.components) placed.emplace(c.obs_id, &c);

  FabricationReport r;
  r.spec = spec;
  r.components_total = netlist.instances.size();
  r.components_assigned = assignment.mapping.size();

  std::unordered_map<std::string, std::vector<std::pair<const Net*, const PinRef*>>> pins_of;
  for (const auto& net : netlist.nets) {
    for (const auto& ref : net.pins) pins_of[ref.instance].emplace_back(&net, &ref);
  }
  for (const auto& inst : netlist.instances) {
    const auto m = assignment.mapping.find(inst.id);
    if (m == assignment.mapping.end()) continue;
    const auto pc = placed.find(m->second);
    const ComponentKind* kind = kinds.find(inst.kind);
    if (pc == placed.end() || !kind) continue;
    ObservedComponent o;
    o.center_est = pc->second->center;
    o.orientation_est = pc->second->theta_deg;
    bool routed = true;
    for (const auto& [net, ref] : pins_of[inst.id]) {
      const auto p = path_of.find(net->id);
      const int pin = kind->pin_index(ref->pin);
      if (p == path_of.end() || pin < 0) {
        routed = false;
        break;
      }
      const PointNm cell = snap_to_center(pin_position(o, kind->pins[static_cast<std::size_t>(pin)]), layout.region,
                                          layout.pitch);
      const auto& terms = p->second->terminals;
      if (std::find(terms.begin(), terms.end(), cell) == terms.end()) {
        routed = false;
        break;
      }
    }
    if (routed) ++r.components_routed;
  }
  r.routed_fraction =
      r.components_total == 0 ? 0.0 : static_cast<double>(r.components_routed) / static_cast<double>(r.components_total);
  r.nets_total = netlist.nets.size();
  r.nets_routed = layout.paths.size();
  r.net_failure_fraction =
      r.nets_total == 0 ? 0.0 : static_cast<double>(layout.failed.size()) / static_cast<double>(r.nets_total);
  for (const auto& p : layout.paths) r.wires += p.branches.size();
  r.total_wire_length_nm = layout.total_wire_length;
  r.print_time_s = print_time(layout, spec);

  const double worst = worst_delay(layout, NetlistIndex(netlist, kinds), spec);
  if (worst >= 0.0) {
    r.worst_net_delay_s = worst;
    r.max_frequency_hz = worst == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / (2.0 * worst);
  }
  r.expected_shorts = static_cast<double>(r.wires) * spec.short_rate;
  r.yield = simulate_shorts(layout, netlist, spec, shorts_trials, shorts_seed);
  r.footprint_mm2 = layout.footprint_mm2;
  r.bridge_count = layout.bridge_count;
  return r;
}

}  // namespace nanomod

#include "nanomod/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <tuple>

#include "nanomod/errors.hpp"
#include "nanomod/rng.hpp"

namespace nanomod {

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Spec overrides that put a cols x rows deposition lattice at `spacing_nm`.
/// A border of 2/5 spacing per side adds no lattice site and keeps the pads
/// of displaced edge components inside the area.
std::vector<std::pair<std::string, std::string>> lattice_overrides(std::size_t cols, std::size_t rows,
                                                                   std::int64_t spacing_nm) {
  const double density = 1e6 / (static_cast<double>(spacing_nm) * static_cast<double>(spacing_nm));
  const std::int64_t border = 2 * (2 * spacing_nm / 5);
  return {{"component_density_target", shortest(density)},
          {"deposition_area", std::to_string(static_cast<std::int64_t>(cols) * spacing_nm + border) + " x " +
                                  std::to_string(static_cast<std::int64_t>(rows) * spacing_nm + border)}};
}

std::pair<std::size_t, std::size_t> lattice_shape(std::size_t n) {
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  return {cols, (n + cols - 1) / cols};
}

void add_net(Netlist& nl, std::string id, std::vector<PinRef> pins) { nl.nets.push_back({std::move(id), std::move(pins)}); }

/// Appends one twelve-transistor flip-flop stage.
void add_flipflop(Netlist& nl, const std::string& p, const std::string& clk, const std::string& d,
                  const std::string& q, const std::string& vdd, const std::string& gnd) {
  for (int i = 0; i < 6; ++i) {
    nl.instances.push_back({p + "P" + std::to_string(i), "pmos", std::nullopt});
    nl.instances.push_back({p + "N" + std::to_string(i), "nmos", std::nullopt});
  }
  const std::string clkb = p + "CLKB", m = p + "M", mb = p + "MB", s = p + "S";
  auto pin = [&](const std::string& inst, const char* name) { return PinRef{p + inst, name}; };
  auto find_or_add = [&](const std::string& id) -> Net& {
    for (auto& n : nl.nets) {
      if (n.id == id) return n;
    }
    nl.nets.push_back({id, {}});
    return nl.nets.back();
  };
  auto append = [&](const std::string& id, std::vector<PinRef> pins) {
    Net& n = find_or_add(id);
    n.pins.insert(n.pins.end(), pins.begin(), pins.end());
  };
  append(clk, {pin("P0", "G"), pin("N0", "G"), pin("P1", "G"), pin("N3", "G")});
  append(vdd, {pin("P0", "S"), pin("P2", "S"), pin("P4", "S"), pin("P5", "S")});
  append(gnd, {pin("N0", "S"), pin("N2", "S"), pin("N4", "S"), pin("N5", "S")});
  append(d, {pin("N1", "S"), pin("P1", "S")});
  add_net(nl, clkb, {pin("N0", "D"), pin("P0", "D"), pin("N1", "G"), pin("P3", "G")});
  add_net(nl, m, {pin("N1", "D"), pin("P1", "D"), pin("P2", "G"), pin("N2", "G"), pin("P5", "D"), pin("N5", "D")});
  add_net(nl, mb, {pin("P2", "D"), pin("N2", "D"), pin("N3", "S"), pin("P3", "S"), pin("P5", "G"), pin("N5", "G")});
  add_net(nl, s, {pin("N3", "D"), pin("P3", "D"), pin("P4", "G"), pin("N4", "G")});
  append(q, {pin("P4", "D"), pin("N4", "D")});
}

/// Resistor-loaded nMOS pair; outputs are named by the caller.
void add_diff_pair(Netlist& nl, const std::string& p, const std::string& in_pos, const std::string& in_neg,
                   const std::string& outn, const std::string& outp, const std::string& vdd,
                   const std::string& tail_return) {
  nl.instances.push_back({p + "M1", "nmos", std::nullopt});
  nl.instances.push_back({p + "M2", "nmos", std::nullopt});
  nl.instances.push_back({p + "RL1", "resistor", std::nullopt});
  nl.instances.push_back({p + "RL2", "resistor", std::nullopt});
  nl.instances.push_back({p + "RT", "resistor", std::nullopt});
  auto find_or_add = [&](const std::string& id) -> Net& {
    for (auto& n : nl.nets) {
      if (n.id == id) return n;
    }
    nl.nets.push_back({id, {}});
    return nl.nets.back();
  };
  auto append = [&](const std::string& id, std::vector<PinRef> pins) {
    Net& n = find_or_add(id);
    n.pins.insert(n.pins.end(), pins.begin(), pins.end());
  };
  append(p + "TAIL", {{p + "M1", "S"}, {p + "M2", "S"}, {p + "RT", "A"}});
  append(outn, {{p + "M1", "D"}, {p + "RL1", "B"}});
  append(outp, {{p + "M2", "D"}, {p + "RL2", "B"}});
  append(vdd, {{p + "RL1", "A"}, {p + "RL2", "A"}});
  append(in_pos, {{p + "M1", "G"}});
  append(in_neg, {{p + "M2", "G"}});
  if (!tail_return.empty()) append(tail_return, {{p + "RT", "B"}});
}

}  // namespace

BenchScenario gen_random_logic(std::size_t n, std::size_t fanout, std::int64_t spacing_nm, std::uint64_t seed) {
  if (n < 2) throw ConfigError("random logic needs at least 2 components");
  if (fanout < 1) throw ConfigError("fanout must be at least 1");
  if (fanout >= n) throw ConfigError("fanout " + std::to_string(fanout) + " needs more than " + std::to_string(n) +
                                     " components");
  // Greedy pad selection needs one spare gate pad per receiver.
  if (fanout > 7) throw ConfigError("fanout is limited to 7 of the 8 gate pads of logic_fet");
  if (spacing_nm <= 0) throw ConfigError("spacing must be positive");

  const ComponentKind fet = standard_kinds().at("logic_fet");
  std::vector<std::size_t> gates;
  for (std::size_t k = 0; k < fet.pins.size(); ++k) {
    if (fet.pins[k].id[0] == 'G') gates.push_back(k);
  }
  const PinDef& drain = fet.pins[static_cast<std::size_t>(fet.pin_index("D"))];

  const auto [cols, rows] = lattice_shape(n);
  BenchScenario sc;
  sc.name = "random_logic_" + std::to_string(n);
  sc.seed = seed;
  sc.spec_overrides = lattice_overrides(cols, rows, spacing_nm);
  sc.thresholds = {{"min_routed_fraction", 0.5}};
  if (n >= 10'000) sc.thresholds["max_print_time_s"] = 600.0;

  auto site = [&](std::size_t i) {
    return PointNm{static_cast<std::int64_t>(i % cols) * spacing_nm + spacing_nm / 2,
                   static_cast<std::int64_t>(i / cols) * spacing_nm + spacing_nm / 2};
  };
  Netlist& nl = sc.netlist;
  for (std::size_t i = 0; i < n; ++i) nl.instances.push_back({"U" + std::to_string(i), "logic_fet", site(i)});

  std::vector<std::vector<bool>> pad_used(n, std::vector<bool>(gates.size(), false));
  for (std::size_t i = 0; i < n; ++i) {
    Xoshiro256ss rng = substream(seed, i);
    const auto ci = static_cast<std::int64_t>(i % cols), ri = static_cast<std::int64_t>(i / cols);
    std::vector<std::tuple<std::int64_t, std::uint64_t, std::size_t>> cands;
    for (std::int64_t reach = 3;; reach *= 2) {
      cands.clear();
      for (std::int64_t r = std::max<std::int64_t>(0, ri - reach); r <= ri + reach; ++r) {
        for (std::int64_t c = std::max<std::int64_t>(0, ci - reach);
             c <= std::min<std::int64_t>(static_cast<std::int64_t>(cols) - 1, ci + reach); ++c) {
          const auto j = static_cast<std::size_t>(r) * cols + static_cast<std::size_t>(c);
          if (j >= n || j == i) continue;
          cands.emplace_back((r - ri) * (r - ri) + (c - ci) * (c - ci), 0, j);
        }
      }
      std::size_t with_pads = 0;
      for (const auto& cand : cands) {
        const auto& used = pad_used[std::get<2>(cand)];
        if (std::find(used.begin(), used.end(), false) != used.end()) ++with_pads;
      }
      const bool whole = reach >= static_cast<std::int64_t>(std::max(cols, rows));
      if (with_pads >= fanout + 2 || whole) break;
    }
    std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) { return std::get<2>(a) < std::get<2>(b); });
    for (auto& cand : cands) std::get<1>(cand) = rng.next();
    std::sort(cands.begin(), cands.end());

    const PointNm from = site(i);
    const PointNm src{from.x + drain.offset.x, from.y + drain.offset.y};
    Net net{"N" + std::to_string(i), {{nl.instances[i].id, "D"}}};
    for (const auto& cand : cands) {
      if (net.pins.size() == fanout + 1) break;
      const std::size_t j = std::get<2>(cand);
      const PointNm to = site(j);
      std::size_t best = gates.size();
      double best_d = 0.0;
      for (std::size_t g = 0; g < gates.size(); ++g) {
        if (pad_used[j][g]) continue;
        const PinDef& pad = fet.pins[gates[g]];
        const double dx = static_cast<double>(to.x + pad.offset.x - src.x);
        const double dy = static_cast<double>(to.y + pad.offset.y - src.y);
        const double d = dx * dx + dy * dy;
        if (best == gates.size() || d < best_d) {
          best = g;
          best_d = d;
        }
      }
      if (best == gates.size()) continue;
      pad_used[j][best] = true;
      net.pins.push_back({nl.instances[j].id, fet.pins[gates[best]].id});
    }
    if (net.pins.size() != fanout + 1) {
      throw ConfigError("random logic: no free gate pads left for the receivers of U" + std::to_string(i));
    }
    nl.nets.push_back(std::move(net));
  }
  return sc;
}

BenchScenario gen_flipflop_chain(std::size_t stages) {
  if (stages < 1) throw ConfigError("flip-flop chain needs at least one stage");
  BenchScenario sc;
  sc.name = "flipflop_" + std::to_string(stages);
  sc.seed = 0x5EED0001;
  for (std::size_t s = 0; s < stages; ++s) {
    add_flipflop(sc.netlist, "F" + std::to_string(s) + "_", "CLK", "D" + std::to_string(s),
                 "D" + std::to_string(s + 1), "VDD", "GND");
  }
  const auto [cols, rows] = lattice_shape(sc.netlist.instances.size() + 1);
  sc.spec_overrides = lattice_overrides(cols, rows, 10'000);
  sc.thresholds = {{"min_max_frequency_hz", 1e8}, {"max_footprint_mm2", 0.05}, {"min_routed_fraction", 1.0}};
  return sc;
}

BenchScenario gen_differential_pair() {
  BenchScenario sc;
  sc.name = "diffpair";
  sc.seed = 0x5EED0002;
  Netlist& nl = sc.netlist;
  nl.instances = {{"M1", "nmos", std::nullopt},
                  {"M2", "nmos", std::nullopt},
                  {"RL1", "resistor", std::nullopt},
                  {"RL2", "resistor", std::nullopt},
                  {"RT", "resistor", std::nullopt}};
  nl.nets = {{"TAIL", {{"M1", "S"}, {"M2", "S"}, {"RT", "A"}}},
             {"OUTN", {{"M1", "D"}, {"RL1", "B"}}},
             {"OUTP", {{"M2", "D"}, {"RL2", "B"}}},
             {"VDD", {{"RL1", "A"}, {"RL2", "A"}}},
             {"VIN", {{"M1", "G"}, {"M2", "G"}}}};
  sc.spec_overrides = lattice_overrides(3, 3, 10'000);
  sc.thresholds = {{"min_max_frequency_hz", 1e8}, {"min_routed_fraction", 1.0}};
  return sc;
}

BenchScenario gen_555_like() {
  BenchScenario sc;
  sc.name = "timer555";
  sc.seed = 0x5EED0555;
  Netlist& nl = sc.netlist;
  for (const char* r : {"R1", "R2", "R3"}) nl.instances.push_back({r, "resistor", std::nullopt});
  add_net(nl, "VCC", {{"R1", "A"}});
  add_net(nl, "TH_REF", {{"R1", "B"}, {"R2", "A"}});
  add_net(nl, "TR_REF", {{"R2", "B"}, {"R3", "A"}});
  add_net(nl, "GND", {{"R3", "B"}});
  add_diff_pair(nl, "C1_", "CAP", "TH_REF", "C1_OUTN", "RESET", "VCC", "GND");
  add_diff_pair(nl, "C2_", "CAP", "TR_REF", "C2_OUTN", "TRIG", "VCC", "GND");
  add_flipflop(nl, "FF_", "TRIG", "RESET", "Q", "VCC", "GND");
  nl.instances.push_back({"OUT_P", "pmos", std::nullopt});
  nl.instances.push_back({"OUT_N", "nmos", std::nullopt});
  nl.instances.push_back({"DIS", "nmos", std::nullopt});
  for (auto& n : nl.nets) {
    if (n.id == "Q") n.pins.insert(n.pins.end(), {{"OUT_P", "G"}, {"OUT_N", "G"}, {"DIS", "G"}});
    if (n.id == "VCC") n.pins.push_back({"OUT_P", "S"});
    if (n.id == "GND") n.pins.insert(n.pins.end(), {{"OUT_N", "S"}, {"DIS", "S"}});
    if (n.id == "CAP") n.pins.push_back({"DIS", "D"});
  }
  add_net(nl, "OUT", {{"OUT_P", "D"}, {"OUT_N", "D"}});
  const auto [cols, rows] = lattice_shape(nl.instances.size() + 2);
  sc.spec_overrides = lattice_overrides(cols, rows, 10'000);
  sc.thresholds = {{"min_routed_fraction", 0.5}};
  return sc;
}

std::vector<std::string> bench_scenario_names() {
  return {"random_logic_1k", "random_logic_10k", "flipflop", "diffpair", "timer555"};
}

BenchScenario bench_scenario(const std::string& name) {
  if (name == "random_logic_1k") {
    BenchScenario sc = gen_random_logic(1000, 5, 10'000, 0xA3A3);
    sc.name = name;
    sc.spec_overrides.push_back({"defect_rate", "0.02"});
    return sc;
  }
  if (name == "random_logic_10k") {
    BenchScenario sc = gen_random_logic(10'000, 5, 10'000, 0xA3A4);
    sc.name = name;
    sc.spec_overrides.push_back({"defect_rate", "0.02"});
    // 10,000 components at 50 nm pitch would need 4e8 cells.
    sc.spec_overrides.push_back({"grid_pitch", "150"});
    return sc;
  }
  if (name == "flipflop") {
    BenchScenario sc = gen_flipflop_chain(2);
    sc.name = name;
    return sc;
  }
  if (name == "diffpair") return gen_differential_pair();
  if (name == "timer555") return gen_555_like();
  throw ConfigError("unknown bench scenario " + name);
}

ProcessSpec scenario_spec(const BenchScenario& scenario, ProcessSpec base) {
  for (const auto& [k, v] : scenario.spec_overrides) apply_spec_override(base, k, v);
  check_invariants(base);
  return base;
}

std::vector<KindShare> kind_mix_for(const Netlist& netlist, const KindLibrary& kinds) {
  if (netlist.instances.empty()) throw ConfigError("kind mix of an empty netlist");
  std::map<std::string, std::size_t> counts;
  for (const auto& i : netlist.instances) ++counts[i.kind];
  std::vector<KindShare> mix;
  for (const auto& [k, c] : counts) {
    const ComponentKind* kind = kinds.find(k);
    if (!kind) throw ConfigError("netlist uses unknown kind " + k);
    mix.push_back({*kind, static_cast<double>(c) / static_cast<double>(netlist.instances.size())});
  }
  return mix;
}

}  // namespace nanomod

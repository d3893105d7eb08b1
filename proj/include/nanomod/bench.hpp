#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nanomod/deposition.hpp"
#include "nanomod/kinds.hpp"
#include "nanomod/netlist.hpp"
#include "nanomod/process_spec.hpp"

namespace nanomod {

/// Threshold keys are "min_<metric>" or "max_<metric>" over report metrics.
using Thresholds = std::map<std::string, double>;

struct BenchScenario {
  std::string name;
  Netlist netlist;
  std::vector<std::pair<std::string, std::string>> spec_overrides;  // applied in order
  std::uint64_t seed = 0;
  Thresholds thresholds;
  LayoutPolicy policy = LayoutPolicy::lattice;
};

/// `n` logic_fet instances on a square lattice of pitch `spacing_nm`, each
/// driving `fanout` distinct receivers chosen among its nearest lattice
/// neighbours (ties broken at random). Each receiver gets the free gate pad
/// closest to the driver. Net "N<i>" is driven by pin D of "U<i>". The
/// region override makes the deposition lattice coincide with the design.
/// Throws ConfigError for n < 2, fanout < 1, fanout >= n or fanout > 7.
BenchScenario gen_random_logic(std::size_t n, std::size_t fanout, std::int64_t spacing_nm, std::uint64_t seed);

/// D flip-flops in series. Each stage "F<s>_" is twelve transistors:
///   P0/N0 clock inverter        CLK   -> CLKB
///   N1/P1 master pass gate      D     -> M     (gates CLKB / CLK)
///   P2/N2 master inverter       M     -> MB
///   N3/P3 slave pass gate       MB    -> S     (gates CLK / CLKB)
///   P4/N4 slave inverter        S     -> Q
///   P5/N5 master keeper         MB    -> M
/// CLK, VDD and GND are shared; stage s output Q<s> is stage s+1 input.
BenchScenario gen_flipflop_chain(std::size_t stages);

/// Resistor-loaded nMOS pair M1/M2 with load resistors RL1/RL2 and tail
/// resistor RT. Nets TAIL, OUTN, OUTP, VDD, VIN.
BenchScenario gen_differential_pair();

/// Mixed netlist shaped like a 555 timer (28 instances): resistor divider
/// R1-R3, threshold and trigger comparators (two resistor-loaded pairs),
/// one flip-flop stage, an output inverter and a discharge transistor.
BenchScenario gen_555_like();

/// Scenario by name: "random_logic_1k", "random_logic_10k", "flipflop",
/// "diffpair", "timer555". Throws ConfigError for anything else.
BenchScenario bench_scenario(const std::string& name);
std::vector<std::string> bench_scenario_names();

/// Spec with the scenario's overrides applied on top of `base`.
ProcessSpec scenario_spec(const BenchScenario& scenario, ProcessSpec base = {});

/// Kind mix proportional to instance counts per kind. Throws ConfigError
/// for an empty netlist or an unknown kind.
std::vector<KindShare> kind_mix_for(const Netlist& netlist, const KindLibrary& kinds);

}  // namespace nanomod

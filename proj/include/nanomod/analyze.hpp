#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nanomod/assign.hpp"
#include "nanomod/kinds.hpp"
#include "nanomod/netlist.hpp"
#include "nanomod/process_spec.hpp"
#include "nanomod/route.hpp"
#include "nanomod/vision.hpp"

namespace nanomod {

/// Vacuum permittivity, F/m.
inline constexpr double kEpsilon0 = 8.8541878128e-12;

/// Seconds to print `length_nm` of wire at spec.print_rate (mm/s).
double print_time(std::int64_t length_nm, const ProcessSpec& spec);
double print_time(const RoutedLayout& layout, const ProcessSpec& spec);

/// Square cross-section wire: R = rho * L / w^2. Throws InvariantError for a
/// non-positive width.
double wire_resistance(double length_nm, double width_nm, const ProcessSpec& spec);
/// Sum over every step of every branch, each at the width of the cell it
/// enters.
double wire_resistance(const Path& path, std::int64_t pitch, const ProcessSpec& spec);

/// Areal contact resistivity divided by the contact area.
double contact_resistance(double area_nm2, const ProcessSpec& spec);

/// Parallel-plate capacitance per metre with insulator thickness equal to
/// the wire width: eps0 * kappa * w / t = eps0 * kappa.
double wire_capacitance_per_m(const ProcessSpec& spec);

struct DelayInputs {
  double c_wire = 0.0;     // F
  double c_load = 0.0;     // F
  double supply_v = 0.0;   // V
  double i_drive = 0.0;    // A
  double r_path = 0.0;     // ohm
};

/// Single-stage estimate: (C_wire + C_load) * V / I + R_path * C_wire.
double delay_estimate(const DelayInputs& in);

/// Delay of one routed net. The driver is the net's first pin; its drive
/// current is i_dsat times the driver body width. Loads are the junction
/// capacitances of the other mapped pins. Throws ConfigError when the driver
/// has no electrical parameters.
double net_delay(const Path& path, const RoutedLayout& layout, const Netlist& netlist, const KindLibrary& kinds,
                 const ProcessSpec& spec);

/// 1 / (2 * worst delay) over every routed net whose driver is electrical.
/// Infinity when the worst delay is zero; ConfigError when no net qualifies.
double max_frequency(const RoutedLayout& layout, const Netlist& netlist, const KindLibrary& kinds,
                     const ProcessSpec& spec);

struct YieldEstimate {
  double yield = 1.0;           // fraction of clean trials
  double failure_probability = 0.0;
  double ci_low = 0.0;          // Wilson 95% interval on the yield
  double ci_high = 1.0;
  std::uint64_t trials = 0;
  std::uint64_t failures = 0;
};

/// Wilson score interval at 95% for `successes` out of `trials`.
std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials);

/// One entry per printed wire (path branch): whether its net tolerates a
/// short through redundancy.
std::vector<bool> wire_redundancy(const RoutedLayout& layout, const Netlist& netlist);

/// Monte Carlo over `trials`: every wire shorts independently with
/// spec.short_rate; a trial fails when a short lands on a non-redundant
/// wire. Trial t draws from its own substream.
YieldEstimate simulate_shorts(const std::vector<bool>& redundant, const ProcessSpec& spec, std::uint64_t trials,
                              std::uint64_t seed);
YieldEstimate simulate_shorts(const RoutedLayout& layout, const Netlist& netlist, const ProcessSpec& spec,
                              std::uint64_t trials, std::uint64_t seed);

/// (d2 / d1)^2: how much longer diffusion takes over d2 than over d1.
double diffusion_time_ratio(double d1_nm, double d2_nm);

struct FabricationReport {
  std::size_t components_total = 0;  // logical instances
  std::size_t components_assigned = 0;
  std::size_t components_routed = 0;
  double routed_fraction = 0.0;
  std::size_t nets_total = 0;
  std::size_t nets_routed = 0;
  double net_failure_fraction = 0.0;
  std::size_t wires = 0;
  std::int64_t total_wire_length_nm = 0;
  double print_time_s = 0.0;
  std::optional<double> worst_net_delay_s;
  std::optional<double> max_frequency_hz;  // nullopt when no net is analyzable
  double expected_shorts = 0.0;
  YieldEstimate yield;
  double footprint_mm2 = 0.0;
  std::size_t bridge_count = 0;
  ProcessSpec spec;
};

/// Aggregates every metric. A component counts as routed when it is mapped
/// and each of its nets is routed with that pin connected. Throws
/// IntegrityError when the layout was not built from `assignment` and
/// `netlist`.
FabricationReport make_report(const Netlist& netlist, const ObservedField& field, const Assignment& assignment,
                              const RoutedLayout& layout, const KindLibrary& kinds, const ProcessSpec& spec,
                              std::uint64_t shorts_seed, std::uint64_t shorts_trials = 1000);

}  // namespace nanomod

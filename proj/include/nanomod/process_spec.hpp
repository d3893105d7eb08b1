#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "nanomod/geometry.hpp"

namespace nanomod {

/// Design rules and physical constants for every pipeline stage. Lengths are
/// integer nm, angles degrees, probabilities in [0, 1].
struct ProcessSpec {
  double component_density_target = 0.01;  // components per um^2
  Region deposition_area{100'000, 100'000};
  double position_sigma = 2000.0;      // nm
  double orientation_sigma = 20.0;     // degrees
  double defect_rate = 0.0;
  double vision_position_error_max = 65.0;     // nm, half of a 130 nm gate
  double vision_orientation_error_max = 15.0;  // degrees
  double vision_miss_rate = 0.0;
  std::int64_t contact_wire_width = 150;
  std::int64_t interconnect_wire_width_max = 1000;
  std::int64_t min_wire_spacing = 150;  // tracks contact_wire_width unless set
  std::int64_t grid_pitch = 50;
  double conductivity = 1e5;         // (ohm cm)^-1
  double contact_resistivity = 1.0;  // micro-ohm cm^2
  double insulator_kappa = 3.9;
  double print_rate = 1.0;  // mm/s
  double short_rate = 1e-4;
  double max_process_temp = 200.0;  // deg C, recorded only

  friend bool operator==(const ProcessSpec&, const ProcessSpec&) = default;
};

/// Throws InvariantError naming the first field outside its bound.
void check_invariants(const ProcessSpec& spec);

/// Parses `key = value` lines with `#` comments. Missing keys keep defaults;
/// `min_wire_spacing` follows `contact_wire_width` when absent.
ProcessSpec load_process_spec(std::string_view text);

/// Writes every key in canonical order; load_process_spec reads it back unchanged.
std::string serialize_process_spec(const ProcessSpec& spec);

/// Applies a single override to an existing spec (same syntax as one line).
void apply_spec_override(ProcessSpec& spec, const std::string& key, const std::string& value);

}  // namespace nanomod

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nanomod/geometry.hpp"

namespace nanomod {

/// Transistor parameters of the 180 nm generation. Only supply_voltage,
/// i_dsat and c_junction feed the delay estimate; the rest are carried
/// along for reporting.
struct ElectricalParams {
  double supply_voltage = 1.5;       // V
  double oxide_thickness = 3.0;      // nm
  double gate_length = 130.0;        // nm
  double threshold_voltage = 0.3;    // V
  double i_dsat = 0.94;              // mA/um
  double i_off = 3.0;                // nA/um
  double c_junction = 0.65;          // fF/um^2
  double silicide_sheet_res = 4.0;   // ohm/sq
};

struct PinDef {
  std::string id;
  PointNm offset;              // from body centre, unrotated
  std::int64_t contact_area;   // nm^2
};

struct ComponentKind {
  std::string id;
  std::int64_t body_width = 0;   // nm, along the local x axis
  std::int64_t body_height = 0;  // nm
  std::vector<PinDef> pins;
  std::int64_t critical_dimension = 0;  // nm
  std::optional<ElectricalParams> electrical;
  std::optional<double> resistance_ohm;

  /// Index of `pin_id` in `pins`, or -1.
  int pin_index(const std::string& pin_id) const;
};

/// Throws InvariantError when a kind breaks its geometric or electrical bounds.
void check_kind(const ComponentKind& kind);

class KindLibrary {
 public:
  KindLibrary() = default;

  /// Adds or replaces a kind after checking its invariants.
  void add(ComponentKind kind);
  const ComponentKind* find(const std::string& id) const;
  const ComponentKind& at(const std::string& id) const;
  bool contains(const std::string& id) const { return kinds_.contains(id); }
  const std::map<std::string, ComponentKind>& all() const { return kinds_; }

 private:
  std::map<std::string, ComponentKind> kinds_;
};

ElectricalParams nmos_180nm();
ElectricalParams pmos_180nm();

/// Built-in kinds: "nmos", "pmos", "resistor" (3-pin/2-pin devices) and
/// "logic_fet", a nanowire transistor with one drain output "D", a source "S"
/// and eight gate contact pads "G0".."G7" used by the random-logic bench.
KindLibrary standard_kinds();

}  // namespace nanomod

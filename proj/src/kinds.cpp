#include "nanomod/kinds.hpp"

#include <algorithm>

#include "nanomod/errors.hpp"

namespace nanomod {

int ComponentKind::pin_index(const std::string& pin_id) const {
  for (std::size_t i = 0; i < pins.size(); ++i) {
    if (pins[i].id == pin_id) return static_cast<int>(i);
  }
  return -1;
}

void check_kind(const ComponentKind& k) {
  const std::string where = "kind '" + k.id + "'";
  if (k.id.empty()) throw InvariantError("kind_id", "must not be empty");
  if (k.body_width <= 0 || k.body_height <= 0) throw InvariantError(where + ".body", "dimensions must be > 0");
  if (k.critical_dimension <= 0 || k.critical_dimension > std::min(k.body_width, k.body_height)) {
    throw InvariantError(where + ".critical_dimension", "must be in (0, min(body dims)]");
  }
  for (const auto& p : k.pins) {
    if (2 * std::abs(p.offset.x) > k.body_width || 2 * std::abs(p.offset.y) > k.body_height) {
      throw InvariantError(where + ".pin " + p.id, "offset must lie on or inside the body");
    }
    if (p.contact_area <= 0) throw InvariantError(where + ".pin " + p.id, "contact area must be > 0");
  }
  for (std::size_t i = 0; i < k.pins.size(); ++i) {
    for (std::size_t j = i + 1; j < k.pins.size(); ++j) {
      if (k.pins[i].id == k.pins[j].id) throw InvariantError(where + ".pin " + k.pins[i].id, "duplicate pin id");
    }
  }
  if (k.electrical) {
    const auto& e = *k.electrical;
    if (e.supply_voltage < 1.3 || e.supply_voltage > 1.5) {
      throw InvariantError(where + ".supply_voltage", "must be in [1.3, 1.5] V");
    }
    if (e.gate_length <= 0.0) throw InvariantError(where + ".gate_length", "must be > 0");
    if (e.i_dsat <= 0.0) throw InvariantError(where + ".i_dsat", "must be > 0");
  }
  if (k.resistance_ohm && *k.resistance_ohm <= 0.0) throw InvariantError(where + ".resistance", "must be > 0");
}

void KindLibrary::add(ComponentKind kind) {
  check_kind(kind);
  const std::string id = kind.id;
  kinds_.insert_or_assign(id, std::move(kind));
}

const ComponentKind* KindLibrary::find(const std::string& id) const {
  const auto it = kinds_.find(id);
  return it == kinds_.end() ? nullptr : &it->second;
}

const ComponentKind& KindLibrary::at(const std::string& id) const {
  const ComponentKind* k = find(id);
  if (k == nullptr) throw ConfigError("unknown component kind '" + id + "'");
  return *k;
}

ElectricalParams nmos_180nm() { return {}; }

ElectricalParams pmos_180nm() {
  ElectricalParams p;
  p.gate_length = 150.0;
  p.threshold_voltage = -0.24;
  p.i_dsat = 0.42;
  p.c_junction = 0.95;
  return p;
}

KindLibrary standard_kinds() {
  constexpr std::int64_t kPad = 150 * 150;
  KindLibrary lib;

  ComponentKind nmos;
  nmos.id = "nmos";
  nmos.body_width = 1000;
  nmos.body_height = 400;
  nmos.pins = {{"S", {-500, 0}, kPad}, {"G", {0, 200}, kPad}, {"D", {500, 0}, kPad}};
  nmos.critical_dimension = 130;
  nmos.electrical = nmos_180nm();
  lib.add(nmos);

  ComponentKind pmos = nmos;
  pmos.id = "pmos";
  pmos.critical_dimension = 150;
  pmos.electrical = pmos_180nm();
  lib.add(pmos);

  ComponentKind res;
  res.id = "resistor";
  res.body_width = 1000;
  res.body_height = 300;
  res.pins = {{"A", {-500, 0}, kPad}, {"B", {500, 0}, kPad}};
  res.critical_dimension = 300;
  res.resistance_ohm = 10'000.0;
  lib.add(res);

  // Gate pads sit 700 nm apart on both long edges so that neighbouring
  // contacts keep their wire clearance after rotation and grid snapping.
  ComponentKind logic;
  logic.id = "logic_fet";
  logic.body_width = 3600;
  logic.body_height = 800;
  logic.pins = {{"D", {1800, 0}, kPad}, {"S", {-1800, 0}, kPad}};
  const std::int64_t xs[4] = {-1050, -350, 350, 1050};
  int g = 0;
  for (std::int64_t y : {400, -400}) {
    for (std::int64_t x : xs) logic.pins.push_back({"G" + std::to_string(g++), {x, y}, kPad});
  }
  logic.critical_dimension = 130;
  logic.electrical = nmos_180nm();
  lib.add(logic);
  return lib;
}

}  // namespace nanomod

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nanomod/assign.hpp"
#include "nanomod/geometry.hpp"
#include "nanomod/kinds.hpp"
#include "nanomod/netlist.hpp"
#include "nanomod/process_spec.hpp"
#include "nanomod/routing_grid.hpp"
#include "nanomod/vision.hpp"

namespace nanomod {

enum class NetOrder { span_ascending, netlist };

struct RouteOptions {
  int bridge_penalty = 20;  // cells
  int rip_rounds = 3;
  int rip_victims = 5;
  /// Rip-up is skipped when the victims plus the nets bridging over them
  /// exceed this count.
  int rip_cascade_max = 30;
  /// Extra cost per foreign cell while searching a rip-up corridor.
  int corridor_penalty = 8;
  NetOrder order = NetOrder::span_ascending;
  /// Width away from pins; 0 means spec.contact_wire_width.
  std::int64_t interconnect_width = 0;
};

struct Bridge {
  PointNm at;             // centre of the crossed wire cell
  std::string crossed_net;
  friend bool operator==(const Bridge&, const Bridge&) = default;
};

/// A routed net as printed: one polyline per Steiner branch, each running
/// from a cell already on the tree to the next terminal.
struct Path {
  std::string net_id;
  std::vector<std::vector<PointNm>> branches;      // cell centres
  std::vector<std::vector<std::int64_t>> widths;   // per branch point, nm
  std::vector<Bridge> bridges;
  std::vector<PointNm> terminals;  // connected pin cells
  /// Every pin of the net is connected. False when some instance is
  /// unassigned or a pin could not be reserved.
  bool complete = true;

  std::int64_t moves() const;
  friend bool operator==(const Path&, const Path&) = default;
};

struct RouteFailure {
  std::string net_id;
  std::string reason;
  friend bool operator==(const RouteFailure&, const RouteFailure&) = default;
};

/// Observed component as the layout saw it, with the instance mapped to it.
struct LayoutComponent {
  std::uint32_t obs_id = 0;
  std::string kind;
  PointNm center;
  double theta_deg = 0.0;
  std::string instance;  // empty when unused
  friend bool operator==(const LayoutComponent&, const LayoutComponent&) = default;
};

struct RoutedLayout {
  Region region;
  std::int64_t pitch = 0;
  Assignment assignment;
  std::vector<Path> paths;            // routing order
  std::vector<RouteFailure> failed;   // routing order
  std::int64_t total_wire_length = 0; // nm
  std::size_t bridge_count = 0;
  double footprint_mm2 = 0.0;
  std::vector<LayoutComponent> components;

  friend bool operator==(const RoutedLayout&, const RoutedLayout&) = default;
};

struct NetRoute {
  bool ok = false;
  Path path;
  std::string failure;
};

/// Routes one net over the whole grid and commits it: sequential Steiner
/// (nearest terminal to the tree) with one A* search per terminal. Steps cost
/// 1; crossing a perpendicular wire as an insulated bridge costs its span
/// plus `bridge_penalty`. `net` is the occupancy index; terminals must be
/// usable by it. On failure the grid is left unchanged.
NetRoute route_net(RoutingGrid& grid, const std::vector<PointNm>& terminals, std::int32_t net,
                   const std::string& net_id, const RouteOptions& options = {}, std::int64_t contact_width = 150,
                   std::int64_t interconnect_width = 150);

/// Routes every net of `netlist` under `assignment`, then repairs failures by
/// rip-up and reroute. Deterministic. Throws IntegrityError when the
/// assignment names components missing from `field` or of the wrong kind.
RoutedLayout route_all(RoutingGrid& grid, const Netlist& netlist, const ObservedField& field,
                       const KindLibrary& kinds, const Assignment& assignment, const ProcessSpec& spec,
                       const RouteOptions& options = {});

/// Builds the grid from `field` and routes.
RoutedLayout route_design(const Netlist& netlist, const ObservedField& field, const KindLibrary& kinds,
                          const Assignment& assignment, const ProcessSpec& spec, const RouteOptions& options = {});

}  // namespace nanomod

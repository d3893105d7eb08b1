#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nanomod/kinds.hpp"
#include "nanomod/netlist.hpp"
#include "nanomod/vision.hpp"

namespace nanomod {

struct AssignParams {
  /// Added once for every mapped component that appears in an overlap pair.
  double overlap_penalty_nm = 10'000.0;
  int max_passes = 50;
  /// Refinement candidates per instance when the kind pool is large.
  std::size_t candidate_count = 12;
  /// Pools up to this size are scanned completely during refinement.
  std::size_t full_scan_limit = 64;
  /// Seed instances with a placement hint at the nearest free component.
  bool use_placement_hints = true;
  /// Netlists up to this many instances retry the greedy seed from several anchors.
  std::size_t multistart_limit = 16;
};

struct Assignment {
  std::map<std::string, std::uint32_t> mapping;  // instance id -> obs_id
  std::vector<std::string> unassigned_logical;   // sorted
  std::vector<std::uint32_t> unused_physical;    // sorted
  double cost = 0.0;                             // nm

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

inline constexpr std::size_t kExhaustiveLimit = 8;

/// Cost shared by both assigners: for every net, the Euclidean minimum
/// spanning length over the centres of its mapped members, plus the overlap
/// penalty for each mapped impaired component. A component is impaired when
/// its observed body overlaps another or one of its pads lies outside the
/// region.
double assignment_cost(const Netlist& netlist, const ObservedField& field, const KindLibrary& kinds,
                       const std::map<std::string, std::uint32_t>& mapping, const AssignParams& params = {});

/// Greedy seeding followed by move/swap local search. Maps only components
/// that are not classified defective; impaired components are used only
/// when a kind has too few clean ones. Deterministic.
Assignment assign(const Netlist& netlist, const ObservedField& field, const KindLibrary& kinds,
                  const AssignParams& params = {});

/// Global optimum of the same cost by enumeration, maximizing the number of
/// mapped instances first. Ties go to the lexicographically smallest
/// (instance_id, obs_id) list. Refuses more than kExhaustiveLimit instances.
Assignment assign_exhaustive(const Netlist& netlist, const ObservedField& field, const KindLibrary& kinds,
                             const AssignParams& params = {});

}  // namespace nanomod

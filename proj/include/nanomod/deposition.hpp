#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nanomod/geometry.hpp"
#include "nanomod/kinds.hpp"
#include "nanomod/process_spec.hpp"

namespace nanomod {

enum class LayoutPolicy { lattice, poisson };

struct KindShare {
  ComponentKind kind;
  double fraction = 0.0;
};

/// Where the printer aimed. `clamped` marks a landing that fell outside the
/// region and was pulled back onto its boundary.
struct TargetPose {
  PointNm position;
  double theta_deg = 0.0;
  bool clamped = false;
};

struct PlacedComponent {
  std::uint32_t phys_id = 0;
  std::string kind;
  PointNm center;
  double orientation = 0.0;  // [0, 360)
  bool defective = false;
  std::optional<TargetPose> target;
};

using IdPair = std::pair<std::uint32_t, std::uint32_t>;

struct Substrate {
  Region region;
  std::vector<PlacedComponent> components;
  std::uint64_t seed = 0;
  std::vector<IdPair> overlaps;  // sorted, first < second
};

/// Lattice pitch for the spec's density target, in nm.
double lattice_pitch_nm(const ProcessSpec& spec);

/// Stochastic printing of components onto spec.deposition_area.
///
/// Lattice: one component per square-lattice site (pitch 1/sqrt(density)),
/// kinds allocated in proportion to the mix then shuffled, Gaussian position
/// and orientation noise clamped at +/-3 sigma. Poisson: count drawn from
/// Poisson(density x area), uniform positions and orientations.
/// Deterministic in (spec, mix, policy, seed); every site draws from its own
/// substream.
Substrate deposit(const ProcessSpec& spec, const std::vector<KindShare>& mix, LayoutPolicy policy,
                  std::uint64_t seed);

/// Flags each component defective with probability `rate` (replaces flags).
Substrate inject_defects(Substrate substrate, double rate, std::uint64_t seed);

/// Index pairs (i < j) of intersecting rectangles, via a uniform bucket grid.
std::vector<std::pair<std::size_t, std::size_t>> find_overlapping_pairs(std::span<const OrientedRect> bodies);

OrientedRect body_of(const PlacedComponent& c, const ComponentKind& kind);

/// phys_id pairs whose oriented bodies intersect.
std::vector<IdPair> detect_overlaps(const Substrate& substrate, const KindLibrary& kinds);

}  // namespace nanomod

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nanomod/deposition.hpp"
#include "nanomod/geometry.hpp"
#include "nanomod/kinds.hpp"
#include "nanomod/process_spec.hpp"

namespace nanomod {

struct ObservedComponent {
  std::uint32_t obs_id = 0;
  std::uint32_t phys_id = 0;  // ground-truth link; stripped from exports by default
  std::string kind;
  PointNm center_est;
  double orientation_est = 0.0;
  bool classified_defective = false;
};

struct ObservedField {
  Region region;
  std::vector<ObservedComponent> observations;
  std::vector<std::uint32_t> missed;  // ground truth only
  bool has_truth = true;

  /// Position of `obs_id` in observations, or -1. obs ids are dense from 0
  /// for freshly observed fields.
  int index_of(std::uint32_t obs_id) const;
};

/// Simulated recognition. Each component is missed with vision_miss_rate,
/// otherwise reported with position error uniform over the disc of radius
/// e = vision_position_error_max (each axis truncated toward zero to whole nm),
/// uniform orientation error within vision_orientation_error_max, and a
/// defect label that matches the truth with probability
/// `defect_classification_accuracy`. Throws ConfigError naming the kind when
/// e exceeds half of a present kind's critical dimension.
ObservedField observe(const Substrate& substrate, const ProcessSpec& spec, const KindLibrary& kinds,
                      double defect_classification_accuracy, std::uint64_t seed);

OrientedRect body_of(const ObservedComponent& c, const ComponentKind& kind);

/// Observed-pose bodies that intersect, as obs_id pairs.
std::vector<IdPair> detect_observed_overlaps(const ObservedField& field, const KindLibrary& kinds);

}  // namespace nanomod

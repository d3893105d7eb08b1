#include "nanomod/vision.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "nanomod/errors.hpp"
#include "nanomod/rng.hpp"

namespace nanomod {

int ObservedField::index_of(std::uint32_t obs_id) const {
  if (obs_id < observations.size() && observations[obs_id].obs_id == obs_id) return static_cast<int>(obs_id);
  for (std::size_t i = 0; i < observations.size(); ++i) {
    if (observations[i].obs_id == obs_id) return static_cast<int>(i);
  }
  return -1;
}

ObservedField observe(const Substrate& substrate, const ProcessSpec& spec, const KindLibrary& kinds,
                      double defect_classification_accuracy, std::uint64_t seed) {
  if (defect_classification_accuracy < 0.0 || defect_classification_accuracy > 1.0) {
    throw ConfigError("defect classification accuracy must be in [0, 1]");
  }
  std::set<std::string> present;
  for (const auto& c : substrate.components) present.insert(c.kind);
  for (const auto& id : present) {
    const ComponentKind& k = kinds.at(id);
    if (spec.vision_position_error_max > 0.5 * static_cast<double>(k.critical_dimension)) {
      throw ConfigError("vision position error bound exceeds half the critical dimension of kind '" + id + "'");
    }
  }

  const double e = spec.vision_position_error_max;
  const double e_theta = spec.vision_orientation_error_max;
  ObservedField out;
  out.region = substrate.region;
  for (const auto& c : substrate.components) {
    // Fixed draw order per component: miss, (dx, dy) until inside the disc
    // of radius e, dtheta, classification.
    Xoshiro256ss rng = substream(seed, c.phys_id);
    const double u_miss = rng.uniform();
    double ex = 0.0, ey = 0.0;
    do {
      ex = rng.uniform(-e, e);
      ey = rng.uniform(-e, e);
    } while (ex * ex + ey * ey > e * e);
    ex = std::trunc(ex);
    ey = std::trunc(ey);
    const double et = std::trunc(rng.uniform(-e_theta, e_theta) * 1e6) / 1e6;
    const double u_class = rng.uniform();
    if (u_miss < spec.vision_miss_rate) {
      out.missed.push_back(c.phys_id);
      continue;
    }
    ObservedComponent o;
    o.obs_id = static_cast<std::uint32_t>(out.observations.size());
    o.phys_id = c.phys_id;
    o.kind = c.kind;
    // Clamping into the region only moves the estimate toward the true centre.
    o.center_est = {std::clamp<std::int64_t>(c.center.x + static_cast<std::int64_t>(ex), 0, out.region.width),
                    std::clamp<std::int64_t>(c.center.y + static_cast<std::int64_t>(ey), 0, out.region.height)};
    o.orientation_est = quantize_deg(c.orientation + et);
    o.classified_defective = u_class < defect_classification_accuracy ? c.defective : !c.defective;
    out.observations.push_back(std::move(o));
  }
  return out;
}

OrientedRect body_of(const ObservedComponent& c, const ComponentKind& kind) {
  return {{static_cast<double>(c.center_est.x), static_cast<double>(c.center_est.y)},
          static_cast<double>(kind.body_width), static_cast<double>(kind.body_height), c.orientation_est};
}

std::vector<IdPair> detect_observed_overlaps(const ObservedField& field, const KindLibrary& kinds) {
  std::vector<OrientedRect> bodies;
  bodies.reserve(field.observations.size());
  for (const auto& o : field.observations) bodies.push_back(body_of(o, kinds.at(o.kind)));
  std::vector<IdPair> out;
  for (const auto& [i, j] : find_overlapping_pairs(bodies)) {
    const auto a = field.observations[i].obs_id;
    const auto b = field.observations[j].obs_id;
    out.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace nanomod

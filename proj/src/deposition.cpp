#include "nanomod/deposition.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "nanomod/errors.hpp"
#include "nanomod/rng.hpp"

namespace nanomod {

namespace {

constexpr std::uint64_t kGlobalStream = 0;

std::int64_t clamp_coord(double v, std::int64_t hi, bool& clamped) {
  auto r = static_cast<std::int64_t>(std::llround(v));
  if (r < 0) { r = 0; clamped = true; }
  if (r > hi) { r = hi; clamped = true; }
  return r;
}

std::size_t pick_kind(const std::vector<KindShare>& mix, double u) {
  double acc = 0.0;
  for (std::size_t k = 0; k < mix.size(); ++k) {
    acc += mix[k].fraction;
    if (u < acc) return k;
  }
  return mix.size() - 1;
}

// Largest-remainder allocation of `sites` among the mix, then a seeded shuffle.
std::vector<std::size_t> lattice_kinds(const std::vector<KindShare>& mix, std::size_t sites, Xoshiro256ss& rng) {
  std::vector<std::size_t> counts(mix.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t used = 0;
  for (std::size_t k = 0; k < mix.size(); ++k) {
    const double exact = mix[k].fraction * static_cast<double>(sites);
    counts[k] = static_cast<std::size_t>(std::floor(exact));
    used += counts[k];
    remainders.emplace_back(-(exact - std::floor(exact)), k);
  }
  std::sort(remainders.begin(), remainders.end());
  for (std::size_t i = 0; used < sites; ++i, ++used) ++counts[remainders[i % remainders.size()].second];

  std::vector<std::size_t> out;
  out.reserve(sites);
  for (std::size_t k = 0; k < mix.size(); ++k) out.insert(out.end(), counts[k], k);
  for (std::size_t i = out.size(); i > 1; --i) std::swap(out[i - 1], out[rng.below(i)]);
  return out;
}

}  // namespace

double lattice_pitch_nm(const ProcessSpec& spec) { return 1000.0 / std::sqrt(spec.component_density_target); }

Substrate deposit(const ProcessSpec& spec, const std::vector<KindShare>& mix, LayoutPolicy policy,
                  std::uint64_t seed) {
  check_invariants(spec);
  const Region region = spec.deposition_area;
  if (region.width <= 0 || region.height <= 0) throw ConfigError("deposition area has zero size");
  if (mix.empty()) throw ConfigError("kind mix is empty");
  double total = 0.0;
  for (const auto& share : mix) {
    if (share.fraction < 0.0) throw ConfigError("kind '" + share.kind.id + "' has a negative fraction");
    total += share.fraction;
  }
  if (std::fabs(total - 1.0) > 1e-9) throw ConfigError("kind fractions must sum to 1");
  const double area_um2 = static_cast<double>(region.width) * static_cast<double>(region.height) / 1e6;
  if (spec.component_density_target * area_um2 < 1.0) {
    throw ConfigError("density x area is below one component");
  }

  KindLibrary local;
  for (const auto& share : mix) local.add(share.kind);

  Substrate out;
  out.region = region;
  out.seed = seed;
  Xoshiro256ss global = substream(seed, kGlobalStream);

  if (policy == LayoutPolicy::lattice) {
    const double pitch = lattice_pitch_nm(spec);
    const auto nx = static_cast<std::size_t>(std::floor(static_cast<double>(region.width) / pitch + 1e-9));
    const auto ny = static_cast<std::size_t>(std::floor(static_cast<double>(region.height) / pitch + 1e-9));
    if (nx == 0 || ny == 0) throw ConfigError("deposition area holds no lattice site at the target density");
    const double x0 = (static_cast<double>(region.width) - static_cast<double>(nx) * pitch) / 2.0;
    const double y0 = (static_cast<double>(region.height) - static_cast<double>(ny) * pitch) / 2.0;
    const auto kinds = lattice_kinds(mix, nx * ny, global);
    out.components.reserve(nx * ny);
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t i = 0; i < nx; ++i) {
        const std::size_t site = j * nx + i;
        Xoshiro256ss rng = substream(seed, site + 1);
        const double tx = x0 + (static_cast<double>(i) + 0.5) * pitch;
        const double ty = y0 + (static_cast<double>(j) + 0.5) * pitch;
        const double dx = clamped_normal(rng, spec.position_sigma);
        const double dy = clamped_normal(rng, spec.position_sigma);
        const double dtheta = clamped_normal(rng, spec.orientation_sigma);
        PlacedComponent c;
        c.phys_id = static_cast<std::uint32_t>(site);
        c.kind = mix[kinds[site]].kind.id;
        TargetPose target{{std::llround(tx), std::llround(ty)}, 0.0, false};
        c.center = {clamp_coord(tx + dx, region.width, target.clamped),
                    clamp_coord(ty + dy, region.height, target.clamped)};
        c.orientation = quantize_deg(dtheta);
        c.target = target;
        out.components.push_back(std::move(c));
      }
    }
  } else {
    const std::uint64_t count = poisson(global, spec.component_density_target * area_um2);
    out.components.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) {
      Xoshiro256ss rng = substream(seed, k + 1);
      PlacedComponent c;
      c.phys_id = static_cast<std::uint32_t>(k);
      c.kind = mix[pick_kind(mix, rng.uniform())].kind.id;
      bool unused = false;
      c.center = {clamp_coord(rng.uniform(0.0, static_cast<double>(region.width)), region.width, unused),
                  clamp_coord(rng.uniform(0.0, static_cast<double>(region.height)), region.height, unused)};
      c.orientation = quantize_deg(rng.uniform(0.0, 360.0));
      out.components.push_back(std::move(c));
    }
  }
  out.overlaps = detect_overlaps(out, local);
  return out;
}

Substrate inject_defects(Substrate substrate, double rate, std::uint64_t seed) {
  for (auto& c : substrate.components) {
    Xoshiro256ss rng = substream(seed, c.phys_id);
    c.defective = rng.uniform() < rate;
  }
  return substrate;
}

OrientedRect body_of(const PlacedComponent& c, const ComponentKind& kind) {
  return {{static_cast<double>(c.center.x), static_cast<double>(c.center.y)},
          static_cast<double>(kind.body_width), static_cast<double>(kind.body_height), c.orientation};
}

std::vector<std::pair<std::size_t, std::size_t>> find_overlapping_pairs(std::span<const OrientedRect> bodies) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (bodies.size() < 2) return out;
  std::vector<std::array<double, 4>> boxes;
  boxes.reserve(bodies.size());
  double cell = 1.0;
  for (const auto& b : bodies) {
    boxes.push_back(b.bounds());
    cell = std::max({cell, boxes.back()[2] - boxes.back()[0], boxes.back()[3] - boxes.back()[1]});
  }
  // Each body lands in every bucket its bounding box touches; a pair is
  // tested only in the bucket holding the lower-left of their box overlap.
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
  auto key = [](std::int64_t bx, std::int64_t by) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(bx)) << 32) | static_cast<std::uint32_t>(by);
  };
  auto bucket = [cell](double v) { return static_cast<std::int64_t>(std::floor(v / cell)); };
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const auto& b = boxes[i];
    for (auto bx = bucket(b[0]); bx <= bucket(b[2]); ++bx) {
      for (auto by = bucket(b[1]); by <= bucket(b[3]); ++by) buckets[key(bx, by)].push_back(i);
    }
  }
  for (const auto& [k, members] : buckets) {
    const auto bx = static_cast<std::int32_t>(k >> 32);
    const auto by = static_cast<std::int32_t>(k & 0xffffffffu);
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        const std::size_t i = std::min(members[a], members[b]);
        const std::size_t j = std::max(members[a], members[b]);
        const auto& bi = boxes[i];
        const auto& bj = boxes[j];
        if (bucket(std::max(bi[0], bj[0])) != bx || bucket(std::max(bi[1], bj[1])) != by) continue;
        if (intersects(bodies[i], bodies[j])) out.emplace_back(i, j);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<IdPair> detect_overlaps(const Substrate& substrate, const KindLibrary& kinds) {
  std::vector<OrientedRect> bodies;
  bodies.reserve(substrate.components.size());
  for (const auto& c : substrate.components) bodies.push_back(body_of(c, kinds.at(c.kind)));
  std::vector<IdPair> out;
  for (const auto& [i, j] : find_overlapping_pairs(bodies)) {
    const auto a = substrate.components[i].phys_id;
    const auto b = substrate.components[j].phys_id;
    out.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace nanomod

#include "nanomod/fingerprint.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <tuple>

#include "nanomod/errors.hpp"
#include "nanomod/rng.hpp"

namespace nanomod {

Fingerprint layout_fingerprint(const std::vector<Pose>& poses, const FingerprintConfig& config) {
  if (poses.empty()) throw ConfigError("fingerprint of an empty layout");
  if (config.position_bucket_nm <= 0 || config.orientation_bucket_deg <= 0.0 || config.bits == 0) {
    throw ConfigError("fingerprint buckets and length must be positive");
  }
  std::int64_t min_x = poses.front().center.x, min_y = poses.front().center.y;
  for (const auto& p : poses) {
    min_x = std::min(min_x, p.center.x);
    min_y = std::min(min_y, p.center.y);
  }
  const auto turns = static_cast<std::int64_t>(std::llround(360.0 / config.orientation_bucket_deg));
  std::vector<std::tuple<std::int64_t, std::int64_t, std::int64_t>> buckets;
  buckets.reserve(poses.size());
  for (const auto& p : poses) {
    const std::int64_t bx = (p.center.x - min_x) / config.position_bucket_nm;
    const std::int64_t by = (p.center.y - min_y) / config.position_bucket_nm;
    std::int64_t bt = static_cast<std::int64_t>(std::floor(normalize_deg(p.theta_deg) / config.orientation_bucket_deg));
    if (turns > 0) bt %= turns;
    buckets.emplace_back(bx, by, bt);
  }
  std::sort(buckets.begin(), buckets.end());

  Fingerprint fp;
  fp.bits = config.bits;
  const std::size_t lanes = (config.bits + 63) / 64;
  fp.words.resize(lanes);
  for (std::size_t lane = 0; lane < lanes; ++lane) {
    std::uint64_t h = mix64(0x9E3779B97F4A7C15ULL * (lane + 1));
    for (const auto& [bx, by, bt] : buckets) {
      h = mix64(h ^ static_cast<std::uint64_t>(bx));
      h = mix64(h ^ static_cast<std::uint64_t>(by));
      h = mix64(h ^ static_cast<std::uint64_t>(bt));
    }
    fp.words[lane] = mix64(h ^ buckets.size());
  }
  if (config.bits % 64 != 0) fp.words.back() &= (std::uint64_t{1} << (config.bits % 64)) - 1;
  return fp;
}

Fingerprint layout_fingerprint(const Substrate& substrate, const FingerprintConfig& config) {
  std::vector<Pose> poses;
  poses.reserve(substrate.components.size());
  for (const auto& c : substrate.components) poses.push_back({c.center, c.orientation});
  return layout_fingerprint(poses, config);
}

Fingerprint layout_fingerprint(const RoutedLayout& layout, const FingerprintConfig& config) {
  std::vector<Pose> poses;
  poses.reserve(layout.components.size());
  for (const auto& c : layout.components) poses.push_back({c.center, c.theta_deg});
  return layout_fingerprint(poses, config);
}

std::size_t fingerprint_distance(const Fingerprint& a, const Fingerprint& b) {
  if (a.bits != b.bits || a.words.size() != b.words.size()) throw ConfigError("fingerprint lengths differ");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.words.size(); ++i) d += static_cast<std::size_t>(std::popcount(a.words[i] ^ b.words[i]));
  return d;
}

}  // namespace nanomod

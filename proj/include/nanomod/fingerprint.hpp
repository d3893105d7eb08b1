#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nanomod/deposition.hpp"
#include "nanomod/route.hpp"

namespace nanomod {

struct FingerprintConfig {
  std::int64_t position_bucket_nm = 100;
  double orientation_bucket_deg = 5.0;
  std::size_t bits = 256;
};

struct Pose {
  PointNm center;
  double theta_deg = 0.0;
};

struct Fingerprint {
  std::vector<std::uint64_t> words;  // little-endian bit order
  std::size_t bits = 0;
  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;
};

/// Poses are bucketed relative to the lowest x and y present, so the
/// fingerprint ignores where the pattern sits on the substrate. The sorted
/// bucket multiset is folded through splitmix64 into independent 64-bit
/// lanes. Throws ConfigError for an empty input.
Fingerprint layout_fingerprint(const std::vector<Pose>& poses, const FingerprintConfig& config = {});
Fingerprint layout_fingerprint(const Substrate& substrate, const FingerprintConfig& config = {});
Fingerprint layout_fingerprint(const RoutedLayout& layout, const FingerprintConfig& config = {});

/// Hamming distance. Throws ConfigError on length mismatch.
std::size_t fingerprint_distance(const Fingerprint& a, const Fingerprint& b);

}  // namespace nanomod

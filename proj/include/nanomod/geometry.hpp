#pragma once

#include <array>
#include <cstdint>

namespace nanomod {

/// Integer nanometre point. All layout coordinates use this base unit.
struct PointNm {
  std::int64_t x = 0;
  std::int64_t y = 0;
  friend bool operator==(const PointNm&, const PointNm&) = default;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Axis-aligned region anchored at the origin, in nm.
struct Region {
  std::int64_t width = 0;
  std::int64_t height = 0;
  friend bool operator==(const Region&, const Region&) = default;
  bool contains(PointNm p) const { return p.x >= 0 && p.y >= 0 && p.x <= width && p.y <= height; }
};

/// Right-handed rotation by `degrees`: (x, y) -> (x cos - y sin, x sin + y cos).
Vec2 rotate(Vec2 v, double degrees);

/// Maps any angle into [0, 360).
double normalize_deg(double degrees);

/// Absolute shortest-arc difference between two angles, in [0, 180].
double angle_diff_deg(double a, double b);

/// Rounds to whole micro-degrees and renormalizes.
double quantize_deg(double degrees);

/// Rectangle of size (width x height) centred at `center`, rotated by theta.
struct OrientedRect {
  Vec2 center;
  double width = 0.0;
  double height = 0.0;
  double theta_deg = 0.0;

  std::array<Vec2, 4> corners() const;
  /// Bounding box as {min_x, min_y, max_x, max_y}.
  std::array<double, 4> bounds() const;
  /// Strict interior test; points on the boundary are outside.
  bool contains_strict(Vec2 p) const;
};

/// Separating-axis test on closed rectangles (touching counts as intersecting).
bool intersects(const OrientedRect& a, const OrientedRect& b);

}  // namespace nanomod

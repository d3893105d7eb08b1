#include "nanomod/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nanomod {

namespace {

// Exact values at quarter turns keep axis-aligned rotations free of drift.
void sin_cos_deg(double degrees, double& s, double& c) {
  const double d = normalize_deg(degrees);
  if (d == 0.0) { s = 0.0; c = 1.0; return; }
  if (d == 90.0) { s = 1.0; c = 0.0; return; }
  if (d == 180.0) { s = 0.0; c = -1.0; return; }
  if (d == 270.0) { s = -1.0; c = 0.0; return; }
  const double r = d * std::numbers::pi / 180.0;
  s = std::sin(r);
  c = std::cos(r);
}

}  // namespace

Vec2 rotate(Vec2 v, double degrees) {
  double s, c;
  sin_cos_deg(degrees, s, c);
  return {v.x * c - v.y * s, v.x * s + v.y * c};
}

double normalize_deg(double degrees) {
  double d = std::fmod(degrees, 360.0);
  if (d < 0.0) d += 360.0;
  if (d >= 360.0) d -= 360.0;
  return d;
}

double angle_diff_deg(double a, double b) {
  const double d = normalize_deg(a - b);
  return d > 180.0 ? 360.0 - d : d;
}

double quantize_deg(double degrees) {
  return normalize_deg(std::round(normalize_deg(degrees) * 1e6) / 1e6);
}

std::array<Vec2, 4> OrientedRect::corners() const {
  const double hw = width / 2.0;
  const double hh = height / 2.0;
  const std::array<Vec2, 4> local{{{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}}};
  std::array<Vec2, 4> out;
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec2 r = rotate(local[i], theta_deg);
    out[i] = {center.x + r.x, center.y + r.y};
  }
  return out;
}

std::array<double, 4> OrientedRect::bounds() const {
  const auto c = corners();
  std::array<double, 4> b{c[0].x, c[0].y, c[0].x, c[0].y};
  for (const auto& p : c) {
    b[0] = std::min(b[0], p.x);
    b[1] = std::min(b[1], p.y);
    b[2] = std::max(b[2], p.x);
    b[3] = std::max(b[3], p.y);
  }
  return b;
}

bool OrientedRect::contains_strict(Vec2 p) const {
  const Vec2 local = rotate({p.x - center.x, p.y - center.y}, -theta_deg);
  return std::fabs(local.x) < width / 2.0 && std::fabs(local.y) < height / 2.0;
}

bool intersects(const OrientedRect& a, const OrientedRect& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  const std::array<Vec2, 4> axes{rotate({1, 0}, a.theta_deg), rotate({0, 1}, a.theta_deg),
                                 rotate({1, 0}, b.theta_deg), rotate({0, 1}, b.theta_deg)};
  for (const auto& axis : axes) {
    double amin = INFINITY, amax = -INFINITY, bmin = INFINITY, bmax = -INFINITY;
    for (const auto& p : ca) {
      const double t = p.x * axis.x + p.y * axis.y;
      amin = std::min(amin, t);
      amax = std::max(amax, t);
    }
    for (const auto& p : cb) {
      const double t = p.x * axis.x + p.y * axis.y;
      bmin = std::min(bmin, t);
      bmax = std::max(bmax, t);
    }
    // A tiny relative slack absorbs rounding in the corner computation.
    const double slack = 1e-9 * std::max({1.0, std::fabs(amax), std::fabs(bmax)});
    if (amax < bmin - slack || bmax < amin - slack) return false;
  }
  return true;
}

}  // namespace nanomod

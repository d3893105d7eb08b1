#include "nanomod/routing_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nanomod/errors.hpp"

namespace nanomod {

int clearance_radius(std::int64_t pitch, std::int64_t max_width, std::int64_t spacing) {
  const std::int64_t cells = (max_width + spacing + pitch - 1) / pitch;
  return static_cast<int>(std::max<std::int64_t>(0, cells - 1));
}

RoutingGrid::RoutingGrid(Region region, std::int64_t pitch, int halo_radius)
    : region_(region), pitch_(pitch), radius_(std::max(0, halo_radius)) {
  if (pitch <= 0) throw ConfigError("grid pitch must be positive");
  const std::int64_t nx = (region.width + pitch - 1) / pitch;
  const std::int64_t ny = (region.height + pitch - 1) / pitch;
  if (nx < 2 || ny < 2) {
    throw ConfigError("region " + std::to_string(region.width) + " x " + std::to_string(region.height) +
                      " nm is smaller than 2 x 2 cells at pitch " + std::to_string(pitch));
  }
  if (nx * ny > (std::int64_t{1} << 31)) throw ConfigError("routing grid exceeds 2^31 cells");
  nx_ = static_cast<int>(nx);
  ny_ = static_cast<int>(ny);
  const auto n = static_cast<std::size_t>(nx * ny);
  state_.assign(n, kFree);
  flags_.assign(n, 0);
  halo_count_.assign(n, 0);
  halo_owner_.assign(n, kNone);
}

std::size_t RoutingGrid::snap(PointNm p) const {
  auto axis = [this](std::int64_t v, int n) {
    // ceil(v / p) - 1 picks the nearer centre and the lower one on ties.
    const std::int64_t i = v <= 0 ? 0 : (v + pitch_ - 1) / pitch_ - 1;
    return static_cast<int>(std::clamp<std::int64_t>(i, 0, n - 1));
  };
  return index(axis(p.x, nx_), axis(p.y, ny_));
}

std::size_t RoutingGrid::cell_at(PointNm p) const {
  const std::int64_t h = pitch_ / 2;
  if (p.x < h || p.y < h || (p.x - h) % pitch_ != 0 || (p.y - h) % pitch_ != 0) return size();
  const std::int64_t i = (p.x - h) / pitch_;
  const std::int64_t j = (p.y - h) / pitch_;
  if (i >= nx_ || j >= ny_) return size();
  return index(static_cast<int>(i), static_cast<int>(j));
}

void RoutingGrid::stamp(std::size_t c, std::int32_t net) {
  const int cx = x_of(c), cy = y_of(c);
  const int x0 = std::max(0, cx - radius_), x1 = std::min(nx_ - 1, cx + radius_);
  const int y0 = std::max(0, cy - radius_), y1 = std::min(ny_ - 1, cy + radius_);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const std::size_t q = index(x, y);
      std::int32_t& owner = halo_owner_[q];
      if (halo_count_[q] == 0) {
        owner = net;
      } else if (owner != net) {
        owner = kMulti;
      }
      ++halo_count_[q];
    }
  }
}

void RoutingGrid::unstamp(std::size_t c, std::int32_t /*net*/) {
  const int cx = x_of(c), cy = y_of(c);
  const int x0 = std::max(0, cx - radius_), x1 = std::min(nx_ - 1, cx + radius_);
  const int y0 = std::max(0, cy - radius_), y1 = std::min(ny_ - 1, cy + radius_);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const std::size_t q = index(x, y);
      if (--halo_count_[q] == 0) {
        halo_owner_[q] = kNone;
      } else if (halo_owner_[q] == kMulti) {
        rescan_owner(q);
      }
    }
  }
}

void RoutingGrid::rescan_owner(std::size_t c) {
  // Every cell with a net state contributes one stamp for that net; a bridge
  // cell additionally carries one for the bridging net, an escape cell one
  // for its holder.
  std::int32_t owner = kNone;
  const int cx = x_of(c), cy = y_of(c);
  const int x0 = std::max(0, cx - radius_), x1 = std::min(nx_ - 1, cx + radius_);
  const int y0 = std::max(0, cy - radius_), y1 = std::min(ny_ - 1, cy + radius_);
  auto add = [&](std::int32_t net) {
    if (owner == kNone) owner = net;
    else if (owner != net) owner = kMulti;
  };
  for (int y = y0; y <= y1 && owner != kMulti; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const std::size_t q = index(x, y);
      if (state_[q] >= 0) add(state_[q]);
      if (flags_[q] & kBridge) add(bridging_net(q));
      if (flags_[q] & kEscape) add(escape_net(q));
    }
  }
  halo_owner_[c] = owner;
}

std::int32_t RoutingGrid::bridging_net(std::size_t c) const {
  const auto it = bridges_.find(c);
  return it == bridges_.end() ? -1 : it->second;
}

void RoutingGrid::set_bridge(std::size_t c, std::int32_t net) {
  bridges_[c] = net;
  flags_[c] |= kBridge;
}

void RoutingGrid::clear_bridge(std::size_t c) {
  bridges_.erase(c);
  flags_[c] &= static_cast<std::uint8_t>(~kBridge);
}

void RoutingGrid::set_escape(std::size_t c, std::int32_t net) {
  escapes_[c] = net;
  flags_[c] |= kEscape;
  stamp(c, net);
}

void RoutingGrid::clear_escape(std::size_t c) {
  const std::int32_t net = escape_net(c);
  escapes_.erase(c);
  flags_[c] &= static_cast<std::uint8_t>(~kEscape);
  unstamp(c, net);
}

std::int32_t RoutingGrid::escape_net(std::size_t c) const {
  const auto it = escapes_.find(c);
  return it == escapes_.end() ? -1 : it->second;
}

const std::vector<std::size_t>* RoutingGrid::landings(std::uint32_t obs_id) const {
  const auto it = landings_.find(obs_id);
  return it == landings_.end() ? nullptr : &it->second;
}

bool RoutingGrid::is_pin_conflicted(std::uint32_t obs_id) const {
  return std::binary_search(pin_conflicts_.begin(), pin_conflicts_.end(), obs_id);
}

std::size_t RoutingGrid::blocked_count() const {
  return static_cast<std::size_t>(std::count(state_.begin(), state_.end(), kBlocked));
}

PointNm pin_position(const ObservedComponent& c, const PinDef& pin) {
  const Vec2 r = rotate({static_cast<double>(pin.offset.x), static_cast<double>(pin.offset.y)}, c.orientation_est);
  return {c.center_est.x + std::llround(r.x), c.center_est.y + std::llround(r.y)};
}

PointNm snap_to_center(PointNm p, Region region, std::int64_t pitch) {
  auto axis = [pitch](std::int64_t v, std::int64_t extent) {
    const std::int64_t n = (extent + pitch - 1) / pitch;
    const std::int64_t i = std::clamp<std::int64_t>(v <= 0 ? 0 : (v + pitch - 1) / pitch - 1, 0, n - 1);
    return i * pitch + pitch / 2;
  };
  return {axis(p.x, region.width), axis(p.y, region.height)};
}

RoutingGrid build_routing_grid(const ObservedField& field, const KindLibrary& kinds, const ProcessSpec& spec,
                               const GridOptions& options) {
  const std::int64_t width = options.max_wire_width > 0 ? options.max_wire_width : spec.contact_wire_width;
  const int radius =
      options.halo_radius >= 0 ? options.halo_radius : clearance_radius(spec.grid_pitch, width, spec.min_wire_spacing);
  RoutingGrid grid(field.region, spec.grid_pitch, radius);
  const std::int64_t p = grid.pitch();

  for (const auto& obs : field.observations) {
    const ComponentKind* kind = kinds.find(obs.kind);
    if (!kind) throw ConfigError("observation " + std::to_string(obs.obs_id) + " has unknown kind " + obs.kind);
    const OrientedRect body = body_of(obs, *kind);
    const auto b = body.bounds();
    const auto lo_x = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(b[0] / p)));
    const auto lo_y = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(b[1] / p)));
    const auto hi_x = std::min<std::int64_t>(grid.nx() - 1, static_cast<std::int64_t>(std::ceil(b[2] / p)));
    const auto hi_y = std::min<std::int64_t>(grid.ny() - 1, static_cast<std::int64_t>(std::ceil(b[3] / p)));
    for (std::int64_t y = lo_y; y <= hi_y; ++y) {
      for (std::int64_t x = lo_x; x <= hi_x; ++x) {
        const std::size_t c = grid.index(static_cast<int>(x), static_cast<int>(y));
        const PointNm ctr = grid.center(c);
        if (body.contains_strict({static_cast<double>(ctr.x), static_cast<double>(ctr.y)})) {
          grid.set_state(c, RoutingGrid::kBlocked);
        }
      }
    }
  }

  std::vector<std::uint32_t> conflicts;
  for (const auto& obs : field.observations) {
    const ComponentKind& kind = kinds.at(obs.kind);
    std::vector<std::size_t> cells;
    cells.reserve(kind.pins.size());
    bool outside = false;
    for (const auto& pin : kind.pins) {
      const PointNm at = pin_position(obs, pin);
      outside = outside || !field.region.contains(at);
      cells.push_back(grid.snap(at));
    }
    std::vector<std::size_t> sorted = cells;
    std::sort(sorted.begin(), sorted.end());
    if (outside || std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) conflicts.push_back(obs.obs_id);
    grid.set_landings(obs.obs_id, std::move(cells));
  }
  for (const auto& obs : field.observations) {
    for (std::size_t c : *grid.landings(obs.obs_id)) {
      grid.set_state(c, RoutingGrid::kPin);
      grid.set_flag(c, RoutingGrid::kLanding);
    }
  }
  std::sort(conflicts.begin(), conflicts.end());
  for (auto id : conflicts) grid.add_pin_conflict(id);
  return grid;
}

}  // namespace nanomod

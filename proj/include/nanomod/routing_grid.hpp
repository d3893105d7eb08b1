#pragma once

#include <cstddef>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "nanomod/geometry.hpp"
#include "nanomod/kinds.hpp"
#include "nanomod/process_spec.hpp"
#include "nanomod/vision.hpp"

namespace nanomod {

/// Chebyshev radius (in cells) around a wire cell that no other net may use,
/// so that any two distinct-net cells satisfy centre distance minus half
/// widths >= spacing.
int clearance_radius(std::int64_t pitch, std::int64_t max_width, std::int64_t spacing);

/// Uniform routing grid over a region. Cell (i, j) covers
/// [i*p, (i+1)*p) x [j*p, (j+1)*p); its centre is (i*p + p/2, j*p + p/2).
///
/// Every cell carries an occupancy state (free, blocked, unclaimed pin, or a
/// net index) and a clearance halo: the number of net cells within the halo
/// radius and the single net that owns them (or kMulti).
class RoutingGrid {
 public:
  static constexpr std::int32_t kFree = -1;
  static constexpr std::int32_t kBlocked = -2;
  static constexpr std::int32_t kPin = -3;
  static constexpr std::int32_t kNone = -1;
  static constexpr std::int32_t kMulti = -2;

  static constexpr std::uint8_t kLanding = 1;  // pin landing cell
  static constexpr std::uint8_t kBridge = 2;   // wire cell crossed by another net
  static constexpr std::uint8_t kSpan = 4;     // cell of a bridge span
  static constexpr std::uint8_t kEscape = 8;   // pad escape held by a net's halo

  RoutingGrid(Region region, std::int64_t pitch, int halo_radius);

  Region region() const { return region_; }
  std::int64_t pitch() const { return pitch_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return state_.size(); }
  int halo_radius() const { return radius_; }

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * nx_ + x; }
  int x_of(std::size_t c) const { return static_cast<int>(c % nx_); }
  int y_of(std::size_t c) const { return static_cast<int>(c / nx_); }
  PointNm center(std::size_t c) const { return {x_of(c) * pitch_ + pitch_ / 2, y_of(c) * pitch_ + pitch_ / 2}; }
  /// Nearest cell centre, ties toward the lower index; clamped into the grid.
  std::size_t snap(PointNm p) const;
  /// Cell whose centre is exactly `p`, or size() when `p` is not a centre.
  std::size_t cell_at(PointNm p) const;

  std::int32_t state(std::size_t c) const { return state_[c]; }
  void set_state(std::size_t c, std::int32_t s) { state_[c] = s; }
  std::uint8_t flags(std::size_t c) const { return flags_[c]; }
  void set_flag(std::size_t c, std::uint8_t f) { flags_[c] |= f; }
  void clear_flag(std::size_t c, std::uint8_t f) { flags_[c] &= static_cast<std::uint8_t>(~f); }

  std::uint16_t halo_count(std::size_t c) const { return halo_count_[c]; }
  std::int32_t halo_owner(std::size_t c) const { return halo_owner_[c]; }

  /// Free or already owned by `net`, and outside every other net's halo.
  bool usable(std::size_t c, std::int32_t net) const {
    const std::int32_t s = state_[c];
    const std::int32_t h = halo_owner_[c];
    return (s == kFree || s == net) && (h == kNone || h == net);
  }

  /// Adds or removes one halo contribution of `net` centred on `c`.
  void stamp(std::size_t c, std::int32_t net);
  void unstamp(std::size_t c, std::int32_t net);

  /// Net that bridges over wire cell `c`, or -1.
  std::int32_t bridging_net(std::size_t c) const;
  void set_bridge(std::size_t c, std::int32_t net);
  void clear_bridge(std::size_t c);

  /// Holds a free cell for `net` by stamping its halo there without
  /// occupying the cell. One escape per cell.
  void set_escape(std::size_t c, std::int32_t net);
  void clear_escape(std::size_t c);
  /// Net holding escape cell `c`, or -1.
  std::int32_t escape_net(std::size_t c) const;

  /// Landing cells of an observed component, in its kind's pin order.
  const std::vector<std::size_t>* landings(std::uint32_t obs_id) const;
  void set_landings(std::uint32_t obs_id, std::vector<std::size_t> cells) { landings_[obs_id] = std::move(cells); }
  /// Components with two pins on one cell; the router leaves them unconnected.
  const std::vector<std::uint32_t>& pin_conflicts() const { return pin_conflicts_; }
  void add_pin_conflict(std::uint32_t obs_id) { pin_conflicts_.push_back(obs_id); }
  bool is_pin_conflicted(std::uint32_t obs_id) const;

  std::size_t blocked_count() const;

 private:
  void rescan_owner(std::size_t c);

  Region region_;
  std::int64_t pitch_;
  int nx_ = 0;
  int ny_ = 0;
  int radius_ = 0;
  std::vector<std::int32_t> state_;
  std::vector<std::uint8_t> flags_;
  std::vector<std::uint16_t> halo_count_;
  std::vector<std::int32_t> halo_owner_;
  std::unordered_map<std::size_t, std::int32_t> bridges_;
  std::unordered_map<std::size_t, std::int32_t> escapes_;
  std::unordered_map<std::uint32_t, std::vector<std::size_t>> landings_;
  std::vector<std::uint32_t> pin_conflicts_;  // sorted
};

struct GridOptions {
  /// Halo radius in cells; negative derives it from the widest wire and the
  /// spacing rule.
  int halo_radius = -1;
  /// Widest wire the router will print; 0 means spec.contact_wire_width.
  std::int64_t max_wire_width = 0;
};

/// Blocks every cell whose centre lies strictly inside an observed body,
/// then opens the pin landing cells (pin offsets rotated by the estimated
/// orientation, translated by the estimated centre, snapped to the nearest
/// cell). Throws ConfigError when the region is smaller than 2 x 2 cells.
RoutingGrid build_routing_grid(const ObservedField& field, const KindLibrary& kinds, const ProcessSpec& spec,
                               const GridOptions& options = {});

/// Landing point of pin `pin` on an observed component, before snapping.
PointNm pin_position(const ObservedComponent& c, const PinDef& pin);

/// Centre of the cell RoutingGrid::snap would pick, without building a grid.
PointNm snap_to_center(PointNm p, Region region, std::int64_t pitch);

}  // namespace nanomod

#include "nanomod/route.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <queue>
#include <unordered_map>

#include "nanomod/errors.hpp"

namespace nanomod {

std::int64_t Path::moves() const {
  std::int64_t m = 0;
  for (const auto& b : branches) m += b.empty() ? 0 : static_cast<std::int64_t>(b.size()) - 1;
  return m;
}

namespace {

constexpr std::size_t kMaxWindowCells = 4'000'000;
constexpr int kWindowLevels = 3;
constexpr std::int64_t kContactZoneNm = 1000;

struct Window {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive
  int w() const { return x1 - x0 + 1; }
  int h() const { return y1 - y0 + 1; }
  std::size_t cells() const { return static_cast<std::size_t>(w()) * static_cast<std::size_t>(h()); }
  bool contains(int x, int y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  bool meets(const Window& o) const { return x0 <= o.x1 && o.x0 <= x1 && y0 <= o.y1 && o.y0 <= y1; }
  bool operator==(const Window&) const = default;
};

Window full_window(const RoutingGrid& g) { return {0, 0, g.nx() - 1, g.ny() - 1}; }

/// Terminal bounding box grown by `margin` cells, clamped to the grid.
Window window_around(const RoutingGrid& g, const std::vector<std::size_t>& cells, int margin) {
  Window w{g.nx(), g.ny(), -1, -1};
  for (std::size_t c : cells) {
    w.x0 = std::min(w.x0, g.x_of(c));
    w.y0 = std::min(w.y0, g.y_of(c));
    w.x1 = std::max(w.x1, g.x_of(c));
    w.y1 = std::max(w.y1, g.y_of(c));
  }
  w.x0 = std::max(0, w.x0 - margin);
  w.y0 = std::max(0, w.y0 - margin);
  w.x1 = std::min(g.nx() - 1, w.x1 + margin);
  w.y1 = std::min(g.ny() - 1, w.y1 + margin);
  return w;
}

/// Search windows of growing margin; the last one that fits the cell budget
/// ends the list.
std::vector<Window> window_ladder(const RoutingGrid& g, const std::vector<std::size_t>& terminals) {
  const Window box = window_around(g, terminals, 0);
  int margin = std::max(16, (box.w() + box.h()) / 4);
  std::vector<Window> out;
  for (int level = 0; level < kWindowLevels; ++level, margin *= 4) {
    const Window w = window_around(g, terminals, margin);
    if (!out.empty() && (w.cells() > kMaxWindowCells || w == out.back())) break;
    out.push_back(w);
    if (w == full_window(g)) break;
  }
  return out;
}

enum class CellRole : std::uint8_t { wire, span, bridge };

/// One Steiner branch: cells from a tree cell (front) to the reached terminal.
struct Hop {
  std::vector<std::size_t> cells;
  std::vector<CellRole> roles;
};

enum class Mode { hard, soft };

struct HeapItem {
  std::int32_t f;
  std::int32_t g;
  std::uint32_t local;
};

struct HeapOrder {
  bool operator()(const HeapItem& a, const HeapItem& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    return a.local > b.local;
  }
};

constexpr int kDx[4] = {1, -1, 0, 0};
constexpr int kDy[4] = {0, 0, 1, -1};

class Searcher {
 public:
  Searcher(RoutingGrid& grid, const RouteOptions& options) : grid_(grid), options_(options) {}

  /// A* from every cell of `sources` to `target` inside `win`.
  std::optional<Hop> search(const std::vector<std::size_t>& sources, std::size_t target, std::int32_t net,
                            const Window& win, Mode mode) {
    prepare(win.cells());
    const int tx = grid_.x_of(target), ty = grid_.y_of(target);
    if (!win.contains(tx, ty)) return std::nullopt;
    auto local = [&](int x, int y) { return static_cast<std::uint32_t>((y - win.y0) * win.w() + (x - win.x0)); };
    auto heuristic = [&](int x, int y) { return std::abs(x - tx) + std::abs(y - ty); };

    std::priority_queue<HeapItem, std::vector<HeapItem>, HeapOrder> heap;
    auto relax = [&](int x, int y, std::int32_t g, std::int32_t parent, bool jump) {
      const std::uint32_t l = local(x, y);
      if (gen_[l] == stamp_ && g >= g_[l]) return;
      gen_[l] = stamp_;
      g_[l] = g;
      parent_[l] = parent;
      state_[l] = jump ? kJump : 0;
      heap.push({g + heuristic(x, y), g, l});
    };
    for (std::size_t s : sources) {
      const int x = grid_.x_of(s), y = grid_.y_of(s);
      if (win.contains(x, y)) relax(x, y, 0, -1, false);
    }
    const std::uint32_t goal = local(tx, ty);
    while (!heap.empty()) {
      const HeapItem top = heap.top();
      heap.pop();
      if (state_[top.local] & kClosed || top.g != g_[top.local]) continue;
      state_[top.local] |= kClosed;
      if (top.local == goal) return reconstruct(win, goal);
      const int x = win.x0 + static_cast<int>(top.local % static_cast<std::uint32_t>(win.w()));
      const int y = win.y0 + static_cast<int>(top.local / static_cast<std::uint32_t>(win.w()));
      for (int d = 0; d < 4; ++d) {
        const int nx = x + kDx[d], ny = y + kDy[d];
        if (!win.contains(nx, ny)) continue;
        const std::size_t c = grid_.index(nx, ny);
        if (mode == Mode::hard) {
          if (grid_.usable(c, net)) {
            relax(nx, ny, top.g + 1, static_cast<std::int32_t>(top.local), false);
          } else if (auto k = bridge_reach(x, y, d, net, win)) {
            relax(x + kDx[d] * k->steps, y + kDy[d] * k->steps,
                  top.g + k->steps + options_.bridge_penalty * k->crossings, static_cast<std::int32_t>(top.local),
                  true);
          }
        } else if (soft_passable(c, net)) {
          relax(nx, ny, top.g + 1 + (foreign(c, net) ? options_.corridor_penalty : 0),
                static_cast<std::int32_t>(top.local), false);
        }
      }
    }
    return std::nullopt;
  }

  /// True when `start` sits in a pocket of at most `budget` cells, reachable
  /// by steps and bridges, that holds no other cell of `net`. Lets a sealed
  /// pad fail without searching the whole window.
  bool sealed(std::size_t start, std::int32_t net, const Window& win, std::size_t budget) {
    prepare(win.cells());
    const int sx = grid_.x_of(start), sy = grid_.y_of(start);
    if (!win.contains(sx, sy)) return false;
    auto local = [&](int x, int y) { return static_cast<std::uint32_t>((y - win.y0) * win.w() + (x - win.x0)); };
    std::vector<std::pair<int, int>>& queue = probe_;
    queue.clear();
    queue.emplace_back(sx, sy);
    gen_[local(sx, sy)] = stamp_;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      if (queue.size() > budget) return false;
      const auto [x, y] = queue[head];
      for (int d = 0; d < 4; ++d) {
        int nx = x + kDx[d], ny = y + kDy[d];
        if (!win.contains(nx, ny)) continue;
        if (!grid_.usable(grid_.index(nx, ny), net)) {
          const auto k = bridge_reach(x, y, d, net, win);
          if (!k) continue;
          nx = x + kDx[d] * k->steps;
          ny = y + kDy[d] * k->steps;
        }
        const std::size_t c = grid_.index(nx, ny);
        if (c != start && grid_.state(c) == net) return false;
        const std::uint32_t l = local(nx, ny);
        if (gen_[l] == stamp_) continue;
        gen_[l] = stamp_;
        queue.emplace_back(nx, ny);
      }
    }
    return true;
  }

  bool foreign(std::size_t c, std::int32_t net) const {
    const std::int32_t s = grid_.state(c), h = grid_.halo_owner(c);
    return (s >= 0 && s != net) || (h != RoutingGrid::kNone && h != net);
  }

 private:
  static constexpr int kMaxCrossings = 3;
  static constexpr std::uint8_t kJump = 1;
  static constexpr std::uint8_t kClosed = 2;

  void prepare(std::size_t n) {
    if (g_.size() < n) {
      g_.resize(n);
      parent_.resize(n);
      gen_.resize(n, 0);
      state_.resize(n);
    }
    if (++stamp_ == 0) {
      std::fill(gen_.begin(), gen_.end(), 0);
      stamp_ = 1;
    }
    // Closed flags live in state_, which is reset lazily through relax().
  }

  bool soft_passable(std::size_t c, std::int32_t net) const {
    const std::int32_t s = grid_.state(c);
    if (s == RoutingGrid::kBlocked || s == RoutingGrid::kPin) return false;
    if ((grid_.flags(c) & RoutingGrid::kLanding) && s != net) return false;
    return true;
  }

  struct Reach {
    int steps = 0;
    int crossings = 0;
  };

  /// Landing of a bridge leaving (x, y) in direction d, or nullopt. The span
  /// crosses between 1 and kMaxCrossings foreign wire cells, each entered and
  /// left by its wire perpendicular to d, and every foreign halo over the
  /// span belongs to a net it crosses.
  /// A span may enter a foreign halo only within r steps of a crossing of
  /// that same net, so it never runs alongside a wire it does not cross.
  std::optional<Reach> bridge_reach(int x, int y, int d, std::int32_t net, const Window& win) const {
    const int r = grid_.halo_radius();
    std::int32_t crossed[kMaxCrossings];
    int crossed_at[kMaxCrossings];
    int wires = 0;
    std::vector<std::pair<std::int32_t, int>>& touched = touched_;
    touched.clear();
    auto near_crossing = [&](std::int32_t m, int k) {
      for (int i = 0; i < wires; ++i) {
        if (crossed[i] == m && std::abs(crossed_at[i] - k) <= r) return true;
      }
      return false;
    };
    for (int k = 1; k <= kMaxCrossings * (2 * r + 2); ++k) {
      const int cx = x + kDx[d] * k, cy = y + kDy[d] * k;
      if (!win.contains(cx, cy)) return std::nullopt;
      const std::size_t c = grid_.index(cx, cy);
      if (k >= 2 && grid_.usable(c, net)) {
        if (wires == 0) return std::nullopt;
        for (const auto& [m, at] : touched) {
          if (!near_crossing(m, at)) return std::nullopt;
        }
        return Reach{k, wires};
      }
      if (grid_.flags(c) & (RoutingGrid::kLanding | RoutingGrid::kBridge | RoutingGrid::kSpan | RoutingGrid::kEscape)) {
        return std::nullopt;
      }
      const std::int32_t s = grid_.state(c), h = grid_.halo_owner(c);
      if (s >= 0 && s != net) {
        const int px = kDy[d], py = kDx[d];  // perpendicular
        for (int sgn : {-1, 1}) {
          const int qx = cx + sgn * px, qy = cy + sgn * py;
          if (qx < 0 || qy < 0 || qx >= grid_.nx() || qy >= grid_.ny()) return std::nullopt;
          if (grid_.state(grid_.index(qx, qy)) != s) return std::nullopt;
        }
        if (wires == kMaxCrossings) return std::nullopt;
        crossed_at[wires] = k;
        crossed[wires++] = s;
      } else if (s != RoutingGrid::kFree) {
        return std::nullopt;
      }
      if (h >= 0 && h != net) {
        touched.emplace_back(h, k);
      } else if (h == RoutingGrid::kMulti) {
        scratch_.clear();
        halo_nets(c, net, scratch_);
        for (std::int32_t m : scratch_) touched.emplace_back(m, k);
      }
    }
    return std::nullopt;
  }

  /// Adds every net other than `net` with a halo over `c` to `out`.
  void halo_nets(std::size_t c, std::int32_t net, std::vector<std::int32_t>& out) const {
    const int r = grid_.halo_radius();
    const int cx = grid_.x_of(c), cy = grid_.y_of(c);
    auto add = [&](std::int32_t m) {
      if (m >= 0 && m != net && std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    };
    for (int y = std::max(0, cy - r); y <= std::min(grid_.ny() - 1, cy + r); ++y) {
      for (int x = std::max(0, cx - r); x <= std::min(grid_.nx() - 1, cx + r); ++x) {
        const std::size_t q = grid_.index(x, y);
        add(grid_.state(q));
        const std::uint8_t f = grid_.flags(q);
        if (f & RoutingGrid::kBridge) add(grid_.bridging_net(q));
        if (f & RoutingGrid::kEscape) add(grid_.escape_net(q));
      }
    }
  }

  Hop reconstruct(const Window& win, std::uint32_t goal) const {
    Hop hop;
    auto cell = [&](std::uint32_t l) {
      return grid_.index(win.x0 + static_cast<int>(l % static_cast<std::uint32_t>(win.w())),
                         win.y0 + static_cast<int>(l / static_cast<std::uint32_t>(win.w())));
    };
    std::int32_t l = static_cast<std::int32_t>(goal);
    while (l >= 0) {
      const std::size_t c = cell(static_cast<std::uint32_t>(l));
      hop.cells.push_back(c);
      hop.roles.push_back(CellRole::wire);
      const std::int32_t p = parent_[l];
      if (p >= 0 && (state_[l] & kJump)) {
        const std::size_t u = cell(static_cast<std::uint32_t>(p));
        const int dx = (grid_.x_of(u) > grid_.x_of(c)) - (grid_.x_of(u) < grid_.x_of(c));
        const int dy = (grid_.y_of(u) > grid_.y_of(c)) - (grid_.y_of(u) < grid_.y_of(c));
        int x = grid_.x_of(c) + dx, y = grid_.y_of(c) + dy;
        while (grid_.index(x, y) != u) {
          const std::size_t s = grid_.index(x, y);
          hop.cells.push_back(s);
          hop.roles.push_back(grid_.state(s) >= 0 ? CellRole::bridge : CellRole::span);
          x += dx;
          y += dy;
        }
      }
      l = p;
    }
    std::reverse(hop.cells.begin(), hop.cells.end());
    std::reverse(hop.roles.begin(), hop.roles.end());
    return hop;
  }

  RoutingGrid& grid_;
  const RouteOptions& options_;
  std::vector<std::int32_t> g_;
  std::vector<std::int32_t> parent_;
  std::vector<std::uint32_t> gen_;
  std::vector<std::uint8_t> state_;
  std::uint32_t stamp_ = 0;
  mutable std::vector<std::pair<std::int32_t, int>> touched_;
  mutable std::vector<std::int32_t> scratch_;
  std::vector<std::pair<int, int>> probe_;
};

/// Occupancy bookkeeping for one net.
struct NetWork {
  std::int32_t id = 0;
  std::vector<std::size_t> terminals;  // reserved, driver first
  bool pins_complete = true;
  bool routed = false;
  std::vector<Hop> hops;
  std::vector<std::size_t> stamped;  // wire, span and bridge cells
  std::string failure;
  std::vector<int> escape_dirs;      // per terminal, outward step or -1
  std::vector<std::size_t> escapes;  // held escape cells
};

/// Holds a straight run of free cells leading away from each pad so that
/// no other net can seal the pad before this net is routed.
void hold_escapes(RoutingGrid& grid, NetWork& nw) {
  const int len = grid.halo_radius() + 1;
  for (std::size_t t = 0; t < nw.terminals.size(); ++t) {
    const int d = nw.escape_dirs[t];
    if (d < 0) continue;
    int x = grid.x_of(nw.terminals[t]), y = grid.y_of(nw.terminals[t]);
    for (int k = 0; k < len; ++k) {
      x += kDx[d];
      y += kDy[d];
      if (x < 0 || y < 0 || x >= grid.nx() || y >= grid.ny()) break;
      const std::size_t c = grid.index(x, y);
      const std::int32_t h = grid.halo_owner(c);
      if (grid.state(c) != RoutingGrid::kFree || grid.flags(c) != 0) break;
      if (h != RoutingGrid::kNone && h != nw.id) break;
      grid.set_escape(c, nw.id);
      nw.escapes.push_back(c);
    }
  }
}

void drop_escapes(RoutingGrid& grid, NetWork& nw) {
  for (auto it = nw.escapes.rbegin(); it != nw.escapes.rend(); ++it) grid.clear_escape(*it);
  nw.escapes.clear();
}

void commit_hop(RoutingGrid& grid, NetWork& nw, const Hop& hop) {
  for (std::size_t i = 1; i < hop.cells.size(); ++i) {
    const std::size_t c = hop.cells[i];
    switch (hop.roles[i]) {
      case CellRole::bridge:
        grid.set_bridge(c, nw.id);
        grid.stamp(c, nw.id);
        nw.stamped.push_back(c);
        break;
      case CellRole::span:
        grid.set_state(c, nw.id);
        grid.set_flag(c, RoutingGrid::kSpan);
        grid.stamp(c, nw.id);
        nw.stamped.push_back(c);
        break;
      case CellRole::wire:
        if (grid.state(c) == RoutingGrid::kFree) {
          grid.set_state(c, nw.id);
          grid.stamp(c, nw.id);
          nw.stamped.push_back(c);
        }
        break;
    }
  }
  nw.hops.push_back(hop);
}

void rip_wires(RoutingGrid& grid, NetWork& nw) {
  for (auto it = nw.stamped.rbegin(); it != nw.stamped.rend(); ++it) {
    const std::size_t c = *it;
    if ((grid.flags(c) & RoutingGrid::kBridge) && grid.bridging_net(c) == nw.id) {
      grid.clear_bridge(c);
    } else {
      grid.set_state(c, RoutingGrid::kFree);
      grid.clear_flag(c, RoutingGrid::kSpan);
    }
    grid.unstamp(c, nw.id);
  }
  nw.stamped.clear();
  nw.hops.clear();
  nw.routed = false;
  hold_escapes(grid, nw);
}

void restore_wires(RoutingGrid& grid, NetWork& nw, const std::vector<Hop>& hops) {
  drop_escapes(grid, nw);
  for (const auto& hop : hops) commit_hop(grid, nw, hop);
  nw.routed = true;
}

std::string cell_text(const RoutingGrid& grid, std::size_t c) {
  const PointNm p = grid.center(c);
  return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
}

/// Sequential Steiner construction. Hard mode commits each branch as it is
/// found and rolls back on failure; soft mode only returns the cells.
struct SteinerResult {
  bool ok = false;
  std::vector<Hop> hops;
  std::size_t unreachable = 0;
};

constexpr std::size_t kPocketCells = 20'000;

SteinerResult steiner(Searcher& searcher, RoutingGrid& grid, NetWork& nw, const std::vector<Window>& ladder,
                      Mode mode) {
  SteinerResult out;
  std::vector<std::size_t> tree{nw.terminals.front()};
  std::vector<std::size_t> remaining(nw.terminals.begin() + 1, nw.terminals.end());
  while (!remaining.empty()) {
    std::size_t pick = 0;
    long best = std::numeric_limits<long>::max();
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      const int tx = grid.x_of(remaining[i]), ty = grid.y_of(remaining[i]);
      long d = std::numeric_limits<long>::max();
      for (std::size_t c : tree) d = std::min<long>(d, std::abs(grid.x_of(c) - tx) + std::abs(grid.y_of(c) - ty));
      if (d < best) {
        best = d;
        pick = i;
      }
    }
    const std::size_t target = remaining[pick];
    std::optional<Hop> hop;
    for (std::size_t level = 0; level < ladder.size() && !hop; ++level) {
      // Once the tight window fails, a sealed pad fails without a wide search.
      if (level == 1 && mode == Mode::hard &&
          (searcher.sealed(target, nw.id, ladder.back(), kPocketCells) ||
           (tree.size() == 1 && searcher.sealed(tree.front(), nw.id, ladder.back(), kPocketCells)))) {
        break;
      }
      hop = searcher.search(tree, target, nw.id, ladder[level], mode);
    }
    if (!hop) {
      if (mode == Mode::hard) rip_wires(grid, nw);
      out.unreachable = target;
      return out;
    }
    if (mode == Mode::hard) commit_hop(grid, nw, *hop);
    for (std::size_t i = 0; i < hop->cells.size(); ++i) {
      if (i > 0 && hop->roles[i] == CellRole::wire) tree.push_back(hop->cells[i]);
    }
    std::sort(tree.begin(), tree.end());
    tree.erase(std::unique(tree.begin(), tree.end()), tree.end());
    remaining.erase(std::remove_if(remaining.begin(), remaining.end(),
                                   [&](std::size_t t) { return std::binary_search(tree.begin(), tree.end(), t); }),
                    remaining.end());
    out.hops.push_back(std::move(*hop));
  }
  if (mode == Mode::hard) nw.routed = true;
  out.ok = true;
  return out;
}

/// Grid step (index into kDx/kDy) pointing out of the body through pin
/// `pin`, or -1 for a pin at the body centre.
int outward_step(const ComponentKind& kind, std::size_t pin, double theta_deg) {
  const PointNm o = kind.pins[pin].offset;
  const double ux = static_cast<double>(o.x) / std::max<double>(1.0, static_cast<double>(kind.body_width) / 2.0);
  const double uy = static_cast<double>(o.y) / std::max<double>(1.0, static_cast<double>(kind.body_height) / 2.0);
  if (ux == 0.0 && uy == 0.0) return -1;
  const Vec2 n = std::abs(ux) >= std::abs(uy) ? Vec2{ux > 0 ? 1.0 : -1.0, 0.0} : Vec2{0.0, uy > 0 ? 1.0 : -1.0};
  const Vec2 r = rotate(n, theta_deg);
  if (std::abs(r.x) >= std::abs(r.y)) return r.x > 0 ? 0 : 1;
  return r.y > 0 ? 2 : 3;
}

bool reserve(RoutingGrid& grid, std::int32_t net, std::size_t c) {
  const std::int32_t s = grid.state(c);
  if (s != RoutingGrid::kPin && s != RoutingGrid::kFree) return false;
  const std::int32_t h = grid.halo_owner(c);
  if (h != RoutingGrid::kNone && h != net) return false;
  grid.set_state(c, net);
  grid.stamp(c, net);
  return true;
}

void release(RoutingGrid& grid, std::size_t c, std::int32_t net) {
  grid.set_state(c, (grid.flags(c) & RoutingGrid::kLanding) ? RoutingGrid::kPin : RoutingGrid::kFree);
  grid.unstamp(c, net);
}

Path to_path(const RoutingGrid& grid, const NetWork& nw, const std::string& net_id,
             const std::vector<std::string>& net_names, std::int64_t contact_width, std::int64_t interconnect_width) {
  Path path;
  path.net_id = net_id;
  path.complete = nw.pins_complete;
  std::vector<PointNm> term;
  for (std::size_t t : nw.terminals) term.push_back(grid.center(t));
  path.terminals = term;
  const double zone2 = static_cast<double>(kContactZoneNm) * kContactZoneNm;
  for (const auto& hop : nw.hops) {
    std::vector<PointNm> pts;
    std::vector<std::int64_t> widths;
    for (std::size_t i = 0; i < hop.cells.size(); ++i) {
      const PointNm p = grid.center(hop.cells[i]);
      pts.push_back(p);
      bool near = false;
      for (const auto& t : term) {
        const double dx = static_cast<double>(p.x - t.x), dy = static_cast<double>(p.y - t.y);
        if (dx * dx + dy * dy <= zone2) {
          near = true;
          break;
        }
      }
      widths.push_back(near ? contact_width : interconnect_width);
      if (hop.roles[i] == CellRole::bridge) {
        path.bridges.push_back({p, net_names.at(static_cast<std::size_t>(grid.state(hop.cells[i])))});
      }
    }
    path.branches.push_back(std::move(pts));
    path.widths.push_back(std::move(widths));
  }
  return path;
}

double spanning_length(const RoutingGrid& grid, const std::vector<std::size_t>& cells) {
  const std::size_t n = cells.size();
  if (n < 2) return 0.0;
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<bool> done(n, false);
  double total = 0.0;
  std::size_t cur = 0;
  done[0] = true;
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t pick = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (done[j]) continue;
      const double dx = grid.x_of(cells[cur]) - grid.x_of(cells[j]);
      const double dy = grid.y_of(cells[cur]) - grid.y_of(cells[j]);
      best[j] = std::min(best[j], std::sqrt(dx * dx + dy * dy));
      if (pick == n || best[j] < best[pick]) pick = j;
    }
    done[pick] = true;
    total += best[pick];
    cur = pick;
  }
  return total;
}

}  // namespace

NetRoute route_net(RoutingGrid& grid, const std::vector<PointNm>& terminals, std::int32_t net,
                   const std::string& net_id, const RouteOptions& options, std::int64_t contact_width,
                   std::int64_t interconnect_width) {
  NetRoute out;
  NetWork nw;
  nw.id = net;
  for (const auto& t : terminals) {
    const std::size_t c = grid.snap(t);
    if (std::find(nw.terminals.begin(), nw.terminals.end(), c) == nw.terminals.end()) nw.terminals.push_back(c);
  }
  if (nw.terminals.size() < 2) {
    out.failure = "fewer than 2 distinct terminals";
    return out;
  }
  // Bare terminals have no pad to escape from.
  nw.escape_dirs.assign(nw.terminals.size(), -1);
  std::vector<std::size_t> reserved;
  for (std::size_t c : nw.terminals) {
    if (grid.state(c) == net) continue;
    if (!reserve(grid, net, c)) {
      for (std::size_t r : reserved) release(grid, r, net);
      out.failure = "terminal " + cell_text(grid, c) + " is not usable";
      return out;
    }
    reserved.push_back(c);
  }
  Searcher searcher(grid, options);
  const SteinerResult res = steiner(searcher, grid, nw, {full_window(grid)}, Mode::hard);
  if (!res.ok) {
    for (std::size_t r : reserved) release(grid, r, net);
    out.failure = "terminal " + cell_text(grid, res.unreachable) + " unreachable";
    return out;
  }
  std::vector<std::string> names;
  // Crossed nets are only known by index here.
  std::int32_t max_state = net;
  for (const auto& hop : nw.hops) {
    for (std::size_t c : hop.cells) max_state = std::max(max_state, grid.state(c));
  }
  for (std::int32_t i = 0; i <= max_state; ++i) names.push_back(std::to_string(i));
  names[static_cast<std::size_t>(net)] = net_id;
  out.path = to_path(grid, nw, net_id, names, contact_width, interconnect_width);
  out.ok = true;
  return out;
}

RoutedLayout route_all(RoutingGrid& grid, const Netlist& netlist, const ObservedField& field,
                       const KindLibrary& kinds, const Assignment& assignment, const ProcessSpec& spec,
                       const RouteOptions& options) {
  const std::int64_t contact_width = spec.contact_wire_width;
  const std::int64_t interconnect_width = options.interconnect_width > 0 ? options.interconnect_width : contact_width;

  std::unordered_map<std::uint32_t, const ObservedComponent*> by_obs;
  for (const auto& o : field.observations) by_obs.emplace(o.obs_id, &o);
  std::unordered_map<std::string, const Instance*> by_inst;
  for (const auto& inst : netlist.instances) by_inst.emplace(inst.id, &inst);
  std::map<std::uint32_t, std::string> instance_of;
  for (const auto& [inst, obs] : assignment.mapping) {
    const auto o = by_obs.find(obs);
    if (o == by_obs.end()) throw IntegrityError("assignment maps " + inst + " to unknown obs_id " + std::to_string(obs));
    const auto i = by_inst.find(inst);
    if (i == by_inst.end()) throw IntegrityError("assignment names unknown instance " + inst);
    if (i->second->kind != o->second->kind) {
      throw IntegrityError("assignment maps " + inst + " (" + i->second->kind + ") to obs_id " + std::to_string(obs) +
                           " (" + o->second->kind + ")");
    }
    if (!instance_of.emplace(obs, inst).second) {
      throw IntegrityError("assignment maps two instances to obs_id " + std::to_string(obs));
    }
  }

  const std::size_t n_nets = netlist.nets.size();
  std::vector<std::string> names;
  names.reserve(n_nets);
  for (const auto& net : netlist.nets) names.push_back(net.id);

  std::vector<NetWork> work(n_nets);
  std::vector<std::vector<std::size_t>> wanted(n_nets);
  std::vector<std::vector<int>> wanted_dir(n_nets);
  for (std::size_t n = 0; n < n_nets; ++n) {
    NetWork& nw = work[n];
    nw.id = static_cast<std::int32_t>(n);
    for (const auto& ref : netlist.nets[n].pins) {
      const auto m = assignment.mapping.find(ref.instance);
      if (m == assignment.mapping.end() || grid.is_pin_conflicted(m->second)) {
        nw.pins_complete = false;
        continue;
      }
      const ComponentKind* kind = kinds.find(by_obs.at(m->second)->kind);
      const int pin = kind ? kind->pin_index(ref.pin) : -1;
      const auto* cells = grid.landings(m->second);
      if (pin < 0 || !cells) {
        nw.pins_complete = false;
        continue;
      }
      const std::size_t c = (*cells)[static_cast<std::size_t>(pin)];
      if (std::find(wanted[n].begin(), wanted[n].end(), c) == wanted[n].end()) {
        wanted[n].push_back(c);
        wanted_dir[n].push_back(outward_step(*kind, static_cast<std::size_t>(pin), by_obs.at(m->second)->orientation_est));
      }
    }
  }

  std::vector<std::size_t> order(n_nets);
  for (std::size_t n = 0; n < n_nets; ++n) order[n] = n;
  if (options.order == NetOrder::span_ascending) {
    std::vector<double> span(n_nets);
    for (std::size_t n = 0; n < n_nets; ++n) span[n] = spanning_length(grid, wanted[n]);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return span[a] < span[b]; });
  }

  // Pads are claimed in routing order; a pad inside an earlier net's
  // clearance is dropped from the later net.
  for (std::size_t n : order) {
    NetWork& nw = work[n];
    for (std::size_t i = 0; i < wanted[n].size(); ++i) {
      const std::size_t c = wanted[n][i];
      if (reserve(grid, nw.id, c)) {
        nw.terminals.push_back(c);
        nw.escape_dirs.push_back(wanted_dir[n][i]);
      } else {
        nw.pins_complete = false;
      }
    }
    if (nw.terminals.size() < 2) {
      for (std::size_t c : nw.terminals) release(grid, c, nw.id);
      nw.terminals.clear();
      nw.escape_dirs.clear();
      nw.failure = "fewer than 2 routable terminals";
    }
  }
  for (std::size_t n : order) hold_escapes(grid, work[n]);

  Searcher searcher(grid, options);
  std::vector<std::vector<Window>> ladders(n_nets);
  auto route_one = [&](std::size_t n, std::size_t levels) {
    NetWork& nw = work[n];
    if (ladders[n].empty()) ladders[n] = window_ladder(grid, nw.terminals);
    const std::vector<Window> ladder(ladders[n].begin(),
                                     ladders[n].begin() + static_cast<std::ptrdiff_t>(std::min(levels, ladders[n].size())));
    const SteinerResult res = steiner(searcher, grid, nw, ladder, Mode::hard);
    if (res.ok) drop_escapes(grid, nw);
    nw.failure = res.ok ? "" : "terminal " + cell_text(grid, res.unreachable) + " unreachable";
    return res.ok;
  };

  std::vector<std::size_t> failed;
  for (std::size_t n : order) {
    if (work[n].terminals.empty()) continue;
    if (!route_one(n, kWindowLevels)) failed.push_back(n);
  }

  std::vector<std::size_t> rank(n_nets);
  for (std::size_t i = 0; i < n_nets; ++i) rank[order[i]] = i;

  // After the first round a failed net is retried only when a repair in the
  // previous round changed wiring near it.
  std::vector<Window> changed;
  for (int round = 0; round < options.rip_rounds && !failed.empty(); ++round) {
    std::vector<std::size_t> still;
    std::vector<Window> repaired;
    for (std::size_t f : failed) {
      NetWork& fw = work[f];
      if (round > 0 && std::none_of(changed.begin(), changed.end(),
                                    [&](const Window& w) { return w.meets(ladders[f].front()); })) {
        still.push_back(f);
        continue;
      }
      const SteinerResult corridor = steiner(searcher, grid, fw, {ladders[f].back()}, Mode::soft);
      if (!corridor.ok) {
        still.push_back(f);
        continue;
      }
      std::map<std::size_t, int> conflicts;
      const int r = grid.halo_radius();
      for (const auto& hop : corridor.hops) {
        for (std::size_t c : hop.cells) {
          if (!searcher.foreign(c, fw.id)) continue;
          std::vector<std::int32_t> nets;
          const std::int32_t s = grid.state(c), h = grid.halo_owner(c);
          if (s >= 0 && s != fw.id) nets.push_back(s);
          if (h >= 0 && h != fw.id) nets.push_back(h);
          if (h == RoutingGrid::kMulti) {
            const int cx = grid.x_of(c), cy = grid.y_of(c);
            for (int y = std::max(0, cy - r); y <= std::min(grid.ny() - 1, cy + r); ++y) {
              for (int x = std::max(0, cx - r); x <= std::min(grid.nx() - 1, cx + r); ++x) {
                const std::int32_t q = grid.state(grid.index(x, y));
                if (q >= 0 && q != fw.id) nets.push_back(q);
              }
            }
          }
          std::sort(nets.begin(), nets.end());
          nets.erase(std::unique(nets.begin(), nets.end()), nets.end());
          for (std::int32_t m : nets) {
            if (work[static_cast<std::size_t>(m)].routed) ++conflicts[static_cast<std::size_t>(m)];
          }
        }
      }
      if (conflicts.empty()) {
        still.push_back(f);
        continue;
      }
      std::vector<std::pair<int, std::size_t>> ranked;
      for (const auto& [m, count] : conflicts) ranked.emplace_back(-count, m);
      std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return names[a.second] < names[b.second];
      });
      if (ranked.size() > static_cast<std::size_t>(options.rip_victims)) ranked.resize(options.rip_victims);

      // Ripping a wire also rips every net bridging over it.
      std::vector<std::size_t> victims;
      std::vector<std::size_t> stack;
      for (const auto& v : ranked) stack.push_back(v.second);
      while (!stack.empty()) {
        const std::size_t m = stack.back();
        stack.pop_back();
        if (std::find(victims.begin(), victims.end(), m) != victims.end() || !work[m].routed) continue;
        victims.push_back(m);
        for (std::size_t c : work[m].stamped) {
          if (grid.flags(c) & RoutingGrid::kBridge) {
            const std::int32_t b = grid.bridging_net(c);
            if (b >= 0 && static_cast<std::size_t>(b) != m) stack.push_back(static_cast<std::size_t>(b));
          }
        }
      }
      if (victims.size() > static_cast<std::size_t>(options.rip_cascade_max)) {
        still.push_back(f);
        continue;
      }
      std::sort(victims.begin(), victims.end(), [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
      std::vector<std::vector<Hop>> saved;
      for (std::size_t m : victims) {
        saved.push_back(work[m].hops);
        rip_wires(grid, work[m]);
      }
      std::vector<std::size_t> rerouted;
      bool ok = route_one(f, kWindowLevels);
      if (ok) rerouted.push_back(f);
      for (std::size_t m : victims) {
        if (!ok) break;
        ok = route_one(m, kWindowLevels);
        if (ok) rerouted.push_back(m);
      }
      if (!ok) {
        for (auto it = rerouted.rbegin(); it != rerouted.rend(); ++it) rip_wires(grid, work[*it]);
        for (std::size_t i = 0; i < victims.size(); ++i) {
          restore_wires(grid, work[victims[i]], saved[i]);
          work[victims[i]].failure.clear();
        }
        fw.failure = "unroutable after rip-up";
        still.push_back(f);
      } else {
        for (std::size_t m : rerouted) repaired.push_back(ladders[m].front());
      }
    }
    changed = std::move(repaired);
    const bool progress = still.size() < failed.size();
    failed = std::move(still);
    if (!progress) break;
  }

  RoutedLayout layout;
  layout.region = field.region;
  layout.pitch = grid.pitch();
  layout.assignment = assignment;
  double bx0 = std::numeric_limits<double>::infinity(), by0 = bx0;
  double bx1 = -bx0, by1 = -bx0;
  auto extend = [&](double x0, double y0, double x1, double y1) {
    bx0 = std::min(bx0, x0);
    by0 = std::min(by0, y0);
    bx1 = std::max(bx1, x1);
    by1 = std::max(by1, y1);
  };
  for (std::size_t n : order) {
    const NetWork& nw = work[n];
    if (!nw.routed) {
      layout.failed.push_back({names[n], nw.failure.empty() ? "unroutable" : nw.failure});
      continue;
    }
    Path path = to_path(grid, nw, names[n], names, contact_width, interconnect_width);
    layout.total_wire_length += path.moves() * grid.pitch();
    layout.bridge_count += path.bridges.size();
    for (std::size_t b = 0; b < path.branches.size(); ++b) {
      for (std::size_t i = 0; i < path.branches[b].size(); ++i) {
        const PointNm p = path.branches[b][i];
        const double hw = static_cast<double>(path.widths[b][i]) / 2.0;
        extend(p.x - hw, p.y - hw, p.x + hw, p.y + hw);
      }
    }
    layout.paths.push_back(std::move(path));
  }
  for (const auto& o : field.observations) {
    LayoutComponent lc{o.obs_id, o.kind, o.center_est, o.orientation_est, {}};
    const auto it = instance_of.find(o.obs_id);
    if (it != instance_of.end()) {
      lc.instance = it->second;
      const auto b = body_of(o, kinds.at(o.kind)).bounds();
      extend(b[0], b[1], b[2], b[3]);
    }
    layout.components.push_back(std::move(lc));
  }
  if (bx1 >= bx0) layout.footprint_mm2 = (bx1 - bx0) * (by1 - by0) * 1e-12;
  return layout;
}

RoutedLayout route_design(const Netlist& netlist, const ObservedField& field, const KindLibrary& kinds,
                          const Assignment& assignment, const ProcessSpec& spec, const RouteOptions& options) {
  GridOptions go;
  go.max_wire_width = std::max(spec.contact_wire_width, options.interconnect_width);
  RoutingGrid grid = build_routing_grid(field, kinds, spec, go);
  return route_all(grid, netlist, field, kinds, assignment, spec, options);
}

}  // namespace nanomod

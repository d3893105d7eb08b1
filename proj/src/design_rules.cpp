#include "nanomod/design_rules.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "nanomod/routing_grid.hpp"

namespace nanomod {

const char* rule_name(RuleKind rule) {
  switch (rule) {
    case RuleKind::width: return "width";
    case RuleKind::spacing: return "spacing";
    case RuleKind::blocked: return "blocked";
    case RuleKind::foreign_pin: return "foreign_pin";
    case RuleKind::overlap: return "overlap";
  }
  return "unknown";
}

namespace {

std::string at_text(PointNm p) { return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")"; }

}  // namespace

std::vector<Violation> check_design_rules(const RoutedLayout& layout, const KindLibrary& kinds,
                                          const ProcessSpec& spec) {
  std::vector<Violation> out;
  ObservedField field;
  field.region = layout.region;
  field.has_truth = false;
  for (const auto& c : layout.components) {
    ObservedComponent o;
    o.obs_id = c.obs_id;
    o.kind = c.kind;
    o.center_est = c.center;
    o.orientation_est = c.theta_deg;
    field.observations.push_back(std::move(o));
  }
  ProcessSpec grid_spec = spec;
  grid_spec.grid_pitch = layout.pitch;
  const RoutingGrid grid = build_routing_grid(field, kinds, grid_spec, GridOptions{0, 0});
  const std::int64_t p = grid.pitch();
  const double zone2 = 1000.0 * 1000.0;

  std::int64_t max_width = 0;
  for (const auto& path : layout.paths) {
    for (const auto& ws : path.widths) {
      for (auto w : ws) max_width = std::max(max_width, w);
    }
  }
  const int reach = clearance_radius(p, max_width, spec.min_wire_spacing);

  std::vector<std::int32_t> owner(grid.size(), -1);
  std::vector<std::int32_t> width(grid.size(), 0);
  std::vector<std::size_t> touched;

  for (std::size_t a = 0; a < layout.paths.size(); ++a) {
    const Path& path = layout.paths[a];
    std::unordered_set<std::size_t> bridge_cells;
    for (const auto& b : path.bridges) bridge_cells.insert(grid.cell_at(b.at));
    std::unordered_set<std::size_t> terminals;
    for (const auto& t : path.terminals) terminals.insert(grid.cell_at(t));

    for (std::size_t b = 0; b < path.branches.size(); ++b) {
      for (std::size_t i = 0; i < path.branches[b].size(); ++i) {
        const PointNm pt = path.branches[b][i];
        const std::int64_t w = i < path.widths[b].size() ? path.widths[b][i] : 0;
        bool near = false;
        for (const auto& t : path.terminals) {
          const double dx = static_cast<double>(pt.x - t.x), dy = static_cast<double>(pt.y - t.y);
          if (dx * dx + dy * dy <= zone2) near = true;
        }
        const std::int64_t limit = near ? spec.contact_wire_width : spec.interconnect_wire_width_max;
        if (w <= 0 || w > limit) {
          out.push_back({RuleKind::width, path.net_id, {}, pt,
                         "width " + std::to_string(w) + " nm outside (0, " + std::to_string(limit) + "] at " +
                             at_text(pt)});
        }
        const std::size_t c = grid.cell_at(pt);
        if (c >= grid.size()) {
          out.push_back({RuleKind::blocked, path.net_id, {}, pt, "point " + at_text(pt) + " is off the grid"});
          continue;
        }
        if (bridge_cells.contains(c)) continue;
        if (grid.state(c) == RoutingGrid::kBlocked) {
          out.push_back({RuleKind::blocked, path.net_id, {}, pt, "wire crosses a component body at " + at_text(pt)});
        }
        if ((grid.flags(c) & RoutingGrid::kLanding) && !terminals.contains(c)) {
          out.push_back({RuleKind::foreign_pin, path.net_id, {}, pt, "wire touches a foreign pad at " + at_text(pt)});
        }
        const auto net = static_cast<std::int32_t>(a);
        if (owner[c] < 0) {
          owner[c] = net;
          width[c] = static_cast<std::int32_t>(w);
          touched.push_back(c);
        } else if (owner[c] == net) {
          width[c] = std::max(width[c], static_cast<std::int32_t>(w));
        } else {
          out.push_back({RuleKind::overlap, path.net_id, layout.paths[owner[c]].net_id, pt,
                         "nets share the cell at " + at_text(pt)});
        }
      }
    }
  }

  std::unordered_map<std::string, std::int32_t> index_of;
  for (std::size_t a = 0; a < layout.paths.size(); ++a) index_of.emplace(layout.paths[a].net_id, static_cast<std::int32_t>(a));

  auto too_close = [&](std::size_t c, std::int32_t wc, std::size_t q) {
    const double dx = static_cast<double>(grid.x_of(c) - grid.x_of(q)) * static_cast<double>(p);
    const double dy = static_cast<double>(grid.y_of(c) - grid.y_of(q)) * static_cast<double>(p);
    return std::sqrt(dx * dx + dy * dy) - (wc + width[q]) / 2.0 < static_cast<double>(spec.min_wire_spacing) - 1e-9;
  };
  auto conflicts_with = [&](std::size_t c, std::int32_t wc, std::int32_t net) {
    const int cx = grid.x_of(c), cy = grid.y_of(c);
    for (int y = std::max(0, cy - reach); y <= std::min(grid.ny() - 1, cy + reach); ++y) {
      for (int x = std::max(0, cx - reach); x <= std::min(grid.nx() - 1, cx + reach); ++x) {
        const std::size_t q = grid.index(x, y);
        if (owner[q] == net && too_close(c, wc, q)) return true;
      }
    }
    return false;
  };

  // Bridge spans: the straight run through each crossed cell that lies within
  // spacing of the crossed net.
  std::unordered_map<std::size_t, std::vector<std::int32_t>> exempt;
  for (std::size_t a = 0; a < layout.paths.size(); ++a) {
    const Path& path = layout.paths[a];
    for (const auto& br : path.bridges) {
      const auto m = index_of.find(br.crossed_net);
      if (m == index_of.end()) continue;
      const std::size_t w = grid.cell_at(br.at);
      for (std::size_t b = 0; b < path.branches.size(); ++b) {
        const auto& pts = path.branches[b];
        const auto it = std::find(pts.begin(), pts.end(), br.at);
        if (it == pts.end()) continue;
        const auto i = static_cast<std::size_t>(it - pts.begin());
        for (int dir : {-1, 1}) {
          std::int64_t prev_dx = 0, prev_dy = 0;
          for (std::size_t j = i;;) {
            const std::size_t next = dir < 0 ? j - 1 : j + 1;
            if ((dir < 0 && j == 0) || next >= pts.size()) break;
            const std::int64_t dx = pts[next].x - pts[j].x, dy = pts[next].y - pts[j].y;
            if (j != i && (dx != prev_dx || dy != prev_dy)) break;
            prev_dx = dx;
            prev_dy = dy;
            const std::size_t c = grid.cell_at(pts[next]);
            if (c >= grid.size() || !conflicts_with(c, width[c], m->second)) break;
            exempt[c].push_back(m->second);
            j = next;
          }
        }
        exempt[w].push_back(static_cast<std::int32_t>(a));
        break;
      }
    }
  }
  auto is_exempt = [&](std::size_t c, std::int32_t other) {
    const auto it = exempt.find(c);
    return it != exempt.end() && std::find(it->second.begin(), it->second.end(), other) != it->second.end();
  };

  std::sort(touched.begin(), touched.end());
  for (std::size_t c : touched) {
    const int cx = grid.x_of(c), cy = grid.y_of(c);
    for (int y = std::max(0, cy - reach); y <= std::min(grid.ny() - 1, cy + reach); ++y) {
      for (int x = std::max(0, cx - reach); x <= std::min(grid.nx() - 1, cx + reach); ++x) {
        const std::size_t q = grid.index(x, y);
        if (q <= c || owner[q] < 0 || owner[q] == owner[c]) continue;
        if (!too_close(c, width[c], q)) continue;
        if (is_exempt(c, owner[q]) || is_exempt(q, owner[c])) continue;
        out.push_back({RuleKind::spacing, layout.paths[owner[c]].net_id, layout.paths[owner[q]].net_id,
                       grid.center(c), "spacing below " + std::to_string(spec.min_wire_spacing) + " nm between " +
                                           at_text(grid.center(c)) + " and " + at_text(grid.center(q))});
      }
    }
  }
  return out;
}

}  // namespace nanomod

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "nanomod/bench.hpp"
#include "nanomod/design_rules.hpp"
#include "nanomod/kinds.hpp"
#include "nanomod/route.hpp"
#include "nanomod/routing_grid.hpp"
#include "nanomod/rng.hpp"

using namespace nanomod;

namespace {

constexpr std::int64_t kPitch = 50;

RoutingGrid bare_grid(int nx, int ny) { return RoutingGrid({nx * kPitch, ny * kPitch}, kPitch, 0); }

PointNm at(int x, int y) { return {x * kPitch + kPitch / 2, y * kPitch + kPitch / 2}; }

// Breadth-first distance over cells that are free or terminals; -1 when
// unreachable.
int bfs(const RoutingGrid& g, std::size_t from, std::size_t to) {
  std::vector<int> dist(g.size(), -1);
  std::deque<std::size_t> q{from};
  dist[from] = 0;
  const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
  while (!q.empty()) {
    const std::size_t c = q.front();
    q.pop_front();
    if (c == to) return dist[c];
    for (int d = 0; d < 4; ++d) {
      const int x = g.x_of(c) + dx[d], y = g.y_of(c) + dy[d];
      if (x < 0 || y < 0 || x >= g.nx() || y >= g.ny()) continue;
      const std::size_t n = g.index(x, y);
      if (dist[n] >= 0) continue;
      if (g.state(n) != RoutingGrid::kFree && n != to) continue;
      dist[n] = dist[c] + 1;
      q.push_back(n);
    }
  }
  return -1;
}

// Cells of a path; each branch is a 4-connected chain.
std::set<std::size_t> path_cells(const RoutingGrid& g, const Path& p, bool& chained) {
  std::set<std::size_t> cells;
  chained = true;
  for (const auto& br : p.branches) {
    for (std::size_t i = 0; i < br.size(); ++i) {
      cells.insert(g.cell_at(br[i]));
      if (i == 0) continue;
      const auto d = std::llabs(br[i].x - br[i - 1].x) + std::llabs(br[i].y - br[i - 1].y);
      chained = chained && d == g.pitch();
    }
  }
  return cells;
}

bool connected(const RoutingGrid& g, const std::set<std::size_t>& cells) {
  if (cells.empty()) return true;
  std::set<std::size_t> seen{*cells.begin()};
  std::vector<std::size_t> stack{*cells.begin()};
  while (!stack.empty()) {
    const std::size_t c = stack.back();
    stack.pop_back();
    const int x = g.x_of(c), y = g.y_of(c);
    for (auto [nx, ny] : {std::pair{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}}) {
      if (nx < 0 || ny < 0 || nx >= g.nx() || ny >= g.ny()) continue;
      const std::size_t n = g.index(nx, ny);
      if (cells.contains(n) && seen.insert(n).second) stack.push_back(n);
    }
  }
  return seen.size() == cells.size();
}

ObservedComponent component(std::uint32_t id, const std::string& kind, PointNm c, double theta = 0.0) {
  ObservedComponent o;
  o.obs_id = id;
  o.phys_id = id;
  o.kind = kind;
  o.center_est = c;
  o.orientation_est = theta;
  return o;
}

}  // namespace

TEST_CASE("straight route on an empty grid") {
  RoutingGrid g = bare_grid(120, 10);
  const NetRoute r = route_net(g, {at(0, 0), at(100, 0)}, 0, "n");
  REQUIRE(r.ok);
  CHECK(r.path.moves() == 100);
  CHECK(r.path.bridges.empty());
}

TEST_CASE("wall with one gap matches BFS") {
  RoutingGrid g = bare_grid(40, 40);
  for (int y = 0; y < 40; ++y) {
    if (y != 31) g.set_state(g.index(20, y), RoutingGrid::kBlocked);
  }
  const int expect = bfs(g, g.index(5, 5), g.index(35, 5));
  REQUIRE(expect > 0);
  const NetRoute r = route_net(g, {at(5, 5), at(35, 5)}, 0, "n");
  REQUIRE(r.ok);
  CHECK(r.path.moves() == expect);
  CHECK(expect == 30 + 2 * 26);
}

TEST_CASE("two-terminal routes equal BFS shortest paths") {
  Xoshiro256ss rng(64);
  int mismatches = 0, routed = 0;
  for (int t = 0; t < 1000; ++t) {
    const int nx = 2 + static_cast<int>(rng.below(63)), ny = 2 + static_cast<int>(rng.below(63));
    RoutingGrid g = bare_grid(nx, ny);
    const double density = rng.uniform(0.0, 0.45);
    for (std::size_t c = 0; c < g.size(); ++c) {
      if (rng.uniform() < density) g.set_state(c, RoutingGrid::kBlocked);
    }
    const std::size_t a = rng.below(g.size());
    std::size_t b = rng.below(g.size());
    if (a == b) b = (a + 1) % g.size();
    g.set_state(a, RoutingGrid::kFree);
    g.set_state(b, RoutingGrid::kFree);
    const int expect = bfs(g, a, b);
    const NetRoute r = route_net(g, {g.center(a), g.center(b)}, 0, "n");
    if (expect < 0) {
      mismatches += r.ok;
    } else {
      ++routed;
      mismatches += !r.ok || r.path.moves() != expect;
    }
  }
  CHECK(mismatches == 0);
  CHECK(routed > 300);
}

TEST_CASE("adding blocked cells never shortens a route") {
  Xoshiro256ss rng(5);
  for (int t = 0; t < 200; ++t) {
    RoutingGrid g = bare_grid(32, 32);
    for (std::size_t c = 0; c < g.size(); ++c) {
      if (rng.uniform() < 0.2) g.set_state(c, RoutingGrid::kBlocked);
    }
    const std::size_t a = g.index(0, 0), b = g.index(31, 31);
    g.set_state(a, RoutingGrid::kFree);
    g.set_state(b, RoutingGrid::kFree);
    RoutingGrid more = g;
    for (std::size_t c = 0; c < more.size(); ++c) {
      if (c != a && c != b && rng.uniform() < 0.1) more.set_state(c, RoutingGrid::kBlocked);
    }
    const NetRoute before = route_net(g, {g.center(a), g.center(b)}, 0, "n");
    const NetRoute after = route_net(more, {more.center(a), more.center(b)}, 0, "n");
    if (before.ok && after.ok) CHECK(after.path.moves() >= before.path.moves());
    if (!before.ok) CHECK_FALSE(after.ok);
  }
}

TEST_CASE("multi-terminal routes are connected and reach every terminal") {
  Xoshiro256ss rng(77);
  for (int t = 0; t < 100; ++t) {
    RoutingGrid g = bare_grid(48, 48);
    for (std::size_t c = 0; c < g.size(); ++c) {
      if (rng.uniform() < 0.15) g.set_state(c, RoutingGrid::kBlocked);
    }
    std::vector<PointNm> terms;
    std::set<std::size_t> term_cells;
    for (int k = 0; k < 2 + static_cast<int>(rng.below(4)); ++k) {
      const std::size_t c = rng.below(g.size());
      g.set_state(c, RoutingGrid::kFree);
      terms.push_back(g.center(c));
      term_cells.insert(c);
    }
    const NetRoute r = route_net(g, terms, 0, "n");
    if (!r.ok) {
      CHECK(r.failure.find("terminal") != std::string::npos);
      continue;
    }
    bool chained = false;
    const auto cells = path_cells(g, r.path, chained);
    CHECK(chained);
    CHECK(connected(g, cells));
    for (std::size_t c : term_cells) CHECK(cells.contains(c));
  }
}

TEST_CASE("crossing a perpendicular wire: bridge when cheaper than the detour") {
  RouteOptions opt;
  opt.bridge_penalty = 20;
  SUBCASE("detour of 30 extra cells loses to the bridge") {
    RoutingGrid g = bare_grid(40, 40);
    REQUIRE(route_net(g, {at(10, 0), at(10, 19)}, 0, "wall", opt).ok);
    const NetRoute r = route_net(g, {at(5, 5), at(15, 5)}, 1, "cross", opt);
    REQUIRE(r.ok);
    CHECK(r.path.bridges.size() == 1);
    CHECK(r.path.bridges[0].crossed_net == "0");
    CHECK(r.path.moves() == 10);
  }
  SUBCASE("detour of 10 extra cells beats the bridge") {
    RoutingGrid g = bare_grid(40, 40);
    REQUIRE(route_net(g, {at(10, 0), at(10, 9)}, 0, "wall", opt).ok);
    const NetRoute r = route_net(g, {at(5, 5), at(15, 5)}, 1, "cross", opt);
    REQUIRE(r.ok);
    CHECK(r.path.bridges.empty());
    CHECK(r.path.moves() == 20);
  }
}

TEST_CASE("two nets through one single-cell gap") {
  RoutingGrid g = bare_grid(10, 10);
  for (int y = 0; y < 10; ++y) {
    if (y != 5) g.set_state(g.index(5, y), RoutingGrid::kBlocked);
  }
  const NetRoute first = route_net(g, {at(1, 5), at(8, 5)}, 0, "a");
  REQUIRE(first.ok);
  CHECK(first.path.moves() == 7);
  // The only way across is the gap, where a crossing would run along the
  // first wire instead of across it.
  const NetRoute second = route_net(g, {at(1, 2), at(8, 2)}, 1, "b");
  CHECK_FALSE(second.ok);
  CHECK(second.failure.find("unreachable") != std::string::npos);
}

TEST_CASE("grid construction") {
  ProcessSpec spec;
  spec.deposition_area = {20'000, 20'000};
  const KindLibrary kinds = standard_kinds();
  SUBCASE("empty field") {
    ObservedField f;
    f.region = spec.deposition_area;
    CHECK(build_routing_grid(f, kinds, spec).blocked_count() == 0);
  }
  SUBCASE("identity rotation puts pins at offset / pitch") {
    ObservedField f;
    f.region = spec.deposition_area;
    f.observations = {component(0, "resistor", {10'025, 10'025})};
    const RoutingGrid g = build_routing_grid(f, kinds, spec);
    const auto* land = g.landings(0);
    REQUIRE(land);
    REQUIRE(land->size() == 2);
    const std::size_t centre = g.snap({10'025, 10'025});
    CHECK(g.x_of((*land)[0]) - g.x_of(centre) == -10);
    CHECK(g.x_of((*land)[1]) - g.x_of(centre) == 10);
    CHECK(g.y_of((*land)[0]) == g.y_of(centre));
    CHECK(g.blocked_count() > 0);
    for (std::size_t c : *land) CHECK(g.state(c) != RoutingGrid::kBlocked);
  }
  SUBCASE("90 degrees maps (d, 0) to (0, d)") {
    ObservedField f;
    f.region = spec.deposition_area;
    f.observations = {component(0, "resistor", {10'025, 10'025}, 90.0)};
    const RoutingGrid g = build_routing_grid(f, kinds, spec);
    const std::size_t centre = g.snap({10'025, 10'025});
    const std::size_t b = (*g.landings(0))[1];  // pin B at (+500, 0)
    CHECK(g.x_of(b) == g.x_of(centre));
    CHECK(g.y_of(b) - g.y_of(centre) == 10);
  }
  SUBCASE("too small a region") {
    ObservedField f;
    f.region = {40, 40};
    CHECK_THROWS(build_routing_grid(f, kinds, spec));
  }
}

TEST_CASE("snapping ties go to the lower cell") {
  const RoutingGrid g = bare_grid(10, 10);
  CHECK(g.x_of(g.snap({50, 25})) == 0);  // equidistant from centres 25 and 75
  CHECK(g.x_of(g.snap({51, 25})) == 1);
  CHECK(g.y_of(g.snap({25, 100})) == 1);
}

namespace {

struct Pairs {
  Netlist netlist;
  ObservedField field;
  Assignment assignment;
};

// Ten resistor pairs facing each other, far apart from every other pair.
Pairs distant_pairs() {
  Pairs p;
  p.field.region = {200'000, 200'000};
  for (int i = 0; i < 10; ++i) {
    const std::int64_t x = 20'000 + (i % 5) * 40'000, y = 40'000 + (i / 5) * 100'000;
    const std::string a = "RA" + std::to_string(i), b = "RB" + std::to_string(i);
    p.netlist.instances.push_back({a, "resistor", {}});
    p.netlist.instances.push_back({b, "resistor", {}});
    p.netlist.nets.push_back({"N" + std::to_string(i), {{a, "B"}, {b, "A"}}});
    const auto ia = static_cast<std::uint32_t>(2 * i), ib = ia + 1;
    p.field.observations.push_back(component(ia, "resistor", {x, y}));
    p.field.observations.push_back(component(ib, "resistor", {x + 8'000, y + 3'000}));
    p.assignment.mapping[a] = ia;
    p.assignment.mapping[b] = ib;
  }
  return p;
}

}  // namespace

TEST_CASE("distant two-pin nets all route at BFS length") {
  const Pairs p = distant_pairs();
  ProcessSpec spec;
  spec.deposition_area = p.field.region;
  const KindLibrary kinds = standard_kinds();
  const RoutingGrid fresh = build_routing_grid(p.field, kinds, spec);
  const RoutedLayout l = route_design(p.netlist, p.field, kinds, p.assignment, spec);
  CHECK(l.failed.empty());
  REQUIRE(l.paths.size() == 10);
  std::int64_t total = 0;
  for (const auto& path : l.paths) {
    REQUIRE(path.terminals.size() == 2);
    const int expect = bfs(fresh, fresh.cell_at(path.terminals[0]), fresh.cell_at(path.terminals[1]));
    CHECK(path.moves() == expect);
    total += path.moves() * l.pitch;
  }
  CHECK(l.total_wire_length == total);
  CHECK(check_design_rules(l, kinds, spec).empty());
}

TEST_CASE("empty netlist routes to an empty layout") {
  ObservedField f;
  f.region = {10'000, 10'000};
  ProcessSpec spec;
  spec.deposition_area = f.region;
  const RoutedLayout l = route_design({}, f, standard_kinds(), {}, spec);
  CHECK(l.paths.empty());
  CHECK(l.failed.empty());
  CHECK(l.total_wire_length == 0);
}

TEST_CASE("every net lands exactly once in paths or failures") {
  const BenchScenario sc = gen_random_logic(36, 3, 10'000, 4);
  const ProcessSpec spec = scenario_spec(sc);
  const KindLibrary kinds = standard_kinds();
  const Substrate s = deposit(spec, kind_mix_for(sc.netlist, kinds), LayoutPolicy::lattice, 1);
  const ObservedField f = observe(s, spec, kinds, 1.0, 2);
  const Assignment a = assign(sc.netlist, f, kinds);
  const RoutedLayout l = route_design(sc.netlist, f, kinds, a, spec);
  std::multiset<std::string> seen;
  for (const auto& p : l.paths) seen.insert(p.net_id);
  for (const auto& x : l.failed) seen.insert(x.net_id);
  CHECK(seen.size() == sc.netlist.nets.size());
  for (const auto& n : sc.netlist.nets) CHECK(seen.count(n.id) == 1);
  CHECK(check_design_rules(l, kinds, spec).empty());
  SUBCASE("deterministic") { CHECK(route_design(sc.netlist, f, kinds, a, spec) == l); }
  SUBCASE("paths are connected") {
    const RoutingGrid g(l.region, l.pitch, 0);
    for (const auto& p : l.paths) {
      bool chained = false;
      const auto cells = path_cells(g, p, chained);
      CHECK(chained);
      CHECK(connected(g, cells));
      for (const auto& t : p.terminals) CHECK(cells.contains(g.cell_at(t)));
    }
  }
}

TEST_CASE("design rule checker: hand-built layouts") {
  ProcessSpec spec;
  spec.deposition_area = {10'000, 10'000};
  const KindLibrary kinds = standard_kinds();
  RoutedLayout l;
  l.region = spec.deposition_area;
  l.pitch = 50;
  auto straight = [&](const std::string& id, int y, int x0, int x1) {
    Path p;
    p.net_id = id;
    std::vector<PointNm> pts;
    for (int x = x0; x <= x1; ++x) pts.push_back(at(x, y));
    p.branches = {pts};
    p.widths = {std::vector<std::int64_t>(pts.size(), 150)};
    p.terminals = {pts.front(), pts.back()};
    return p;
  };
  SUBCASE("parallel nets one cell apart") {
    l.paths = {straight("a", 50, 10, 60), straight("b", 51, 10, 60)};
    const auto v = check_design_rules(l, kinds, spec);
    REQUIRE_FALSE(v.empty());
    CHECK(std::any_of(v.begin(), v.end(), [](const Violation& x) { return x.rule == RuleKind::spacing; }));
  }
  SUBCASE("parallel nets far enough apart") {
    l.paths = {straight("a", 50, 10, 60), straight("b", 56, 10, 60)};
    CHECK(check_design_rules(l, kinds, spec).empty());
  }
  SUBCASE("path through a component body") {
    l.components = {{0, "resistor", at(40, 50), 0.0, ""}};
    l.paths = {straight("a", 50, 10, 60)};
    const auto v = check_design_rules(l, kinds, spec);
    CHECK(std::any_of(v.begin(), v.end(), [](const Violation& x) { return x.rule == RuleKind::blocked; }));
  }
  SUBCASE("over-wide contact wire") {
    Path p = straight("a", 50, 10, 60);
    p.widths[0][0] = 400;
    l.paths = {p};
    const auto v = check_design_rules(l, kinds, spec);
    CHECK(std::any_of(v.begin(), v.end(), [](const Violation& x) { return x.rule == RuleKind::width; }));
  }
}

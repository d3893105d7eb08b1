#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <set>

#include "nanomod/assign.hpp"
#include "nanomod/errors.hpp"
#include "nanomod/kinds.hpp"
#include "nanomod/rng.hpp"

using namespace nanomod;

namespace {

ObservedComponent obs(std::uint32_t id, const std::string& kind, std::int64_t x, std::int64_t y, bool bad = false,
                      double theta = 0.0) {
  ObservedComponent o;
  o.obs_id = id;
  o.phys_id = id;
  o.kind = kind;
  o.center_est = {x, y};
  o.orientation_est = theta;
  o.classified_defective = bad;
  return o;
}

// Prim over Euclidean distances.
double mst(const std::vector<PointNm>& pts) {
  if (pts.size() < 2) return 0.0;
  std::vector<double> best(pts.size(), std::numeric_limits<double>::infinity());
  std::vector<bool> in(pts.size(), false);
  best[0] = 0.0;
  double total = 0.0;
  for (std::size_t step = 0; step < pts.size(); ++step) {
    std::size_t u = pts.size();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!in[i] && (u == pts.size() || best[i] < best[u])) u = i;
    }
    in[u] = true;
    total += best[u];
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double d = std::hypot(static_cast<double>(pts[i].x - pts[u].x), static_cast<double>(pts[i].y - pts[u].y));
      if (!in[i]) best[i] = std::min(best[i], d);
    }
  }
  return total;
}

struct Oracle {
  std::size_t mapped = 0;
  double cost = std::numeric_limits<double>::infinity();
};

// Enumerates every partial injection onto clean components of the right
// kind; keeps the cheapest among those mapping the most instances.
Oracle brute_force(const Netlist& nl, const ObservedField& f, const KindLibrary& kinds, double penalty) {
  const auto overlaps = detect_observed_overlaps(f, kinds);
  std::set<std::uint32_t> penalized;
  for (const auto& [a, b] : overlaps) {
    penalized.insert(a);
    penalized.insert(b);
  }
  for (const auto& c : f.observations) {
    const double a = c.orientation_est * std::numbers::pi / 180.0;
    for (const auto& pin : kinds.at(c.kind).pins) {
      const double x = c.center_est.x + std::round(pin.offset.x * std::cos(a) - pin.offset.y * std::sin(a));
      const double y = c.center_est.y + std::round(pin.offset.x * std::sin(a) + pin.offset.y * std::cos(a));
      if (x < 0 || y < 0 || x > f.region.width || y > f.region.height) penalized.insert(c.obs_id);
    }
  }
  Oracle best;
  std::vector<int> choice(nl.instances.size(), -1);
  std::vector<bool> used(f.observations.size(), false);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == nl.instances.size()) {
      std::size_t mapped = 0;
      double cost = 0.0;
      for (std::size_t k = 0; k < choice.size(); ++k) {
        if (choice[k] < 0) continue;
        ++mapped;
        if (penalized.contains(f.observations[choice[k]].obs_id)) cost += penalty;
      }
      for (const auto& net : nl.nets) {
        std::vector<PointNm> pts;
        std::set<int> members;
        for (const auto& pin : net.pins) members.insert(nl.instance_index(pin.instance));
        for (int m : members) {
          if (choice[m] >= 0) pts.push_back(f.observations[choice[m]].center_est);
        }
        cost += mst(pts);
      }
      if (mapped > best.mapped || (mapped == best.mapped && cost < best.cost)) best = {mapped, cost};
      return;
    }
    choice[i] = -1;
    rec(i + 1);
    for (std::size_t o = 0; o < f.observations.size(); ++o) {
      const auto& c = f.observations[o];
      if (used[o] || c.classified_defective || c.kind != nl.instances[i].kind) continue;
      used[o] = true;
      choice[i] = static_cast<int>(o);
      rec(i + 1);
      used[o] = false;
      choice[i] = -1;
    }
  };
  rec(0);
  return best;
}

struct Instance3 {
  Netlist netlist;
  ObservedField field;
};

Instance3 random_instance(Xoshiro256ss& rng, std::size_t max_inst, std::size_t max_obs) {
  static const char* kinds[] = {"nmos", "pmos", "resistor"};
  static const char* pins[][3] = {{"S", "G", "D"}, {"S", "G", "D"}, {"A", "B", ""}};
  Instance3 out;
  const std::size_t n = 1 + rng.below(max_inst);
  std::vector<int> kind_of(n);
  for (std::size_t i = 0; i < n; ++i) {
    kind_of[i] = static_cast<int>(rng.below(3));
    out.netlist.instances.push_back({"I" + std::to_string(i), kinds[kind_of[i]], {}});
  }
  const std::size_t nets = rng.below(n + 2);
  for (std::size_t k = 0; k < nets; ++k) {
    Net net{"N" + std::to_string(k), {}};
    const std::size_t deg = 2 + rng.below(3);
    for (std::size_t d = 0; d < deg; ++d) {
      const std::size_t i = rng.below(n);
      const int npins = kind_of[i] == 2 ? 2 : 3;
      net.pins.push_back({out.netlist.instances[i].id, pins[kind_of[i]][rng.below(npins)]});
    }
    out.netlist.nets.push_back(net);
  }
  out.field.region = {60'000, 60'000};
  const std::size_t m = n + rng.below(max_obs - n + 1);
  for (std::size_t o = 0; o < m; ++o) {
    const char* kind = o < n ? kinds[kind_of[o]] : kinds[rng.below(3)];
    out.field.observations.push_back(obs(static_cast<std::uint32_t>(o), kind,
                                         static_cast<std::int64_t>(rng.below(60'000)),
                                         static_cast<std::int64_t>(rng.below(60'000)), rng.uniform() < 0.1,
                                         rng.uniform(0, 360)));
  }
  return out;
}

void check_structure(const Assignment& a, const Netlist& nl, const ObservedField& f) {
  std::set<std::uint32_t> used;
  for (const auto& [inst, o] : a.mapping) {
    CHECK(used.insert(o).second);
    const int i = nl.instance_index(inst);
    REQUIRE(i >= 0);
    const int k = f.index_of(o);
    REQUIRE(k >= 0);
    CHECK(f.observations[k].kind == nl.instances[i].kind);
    CHECK_FALSE(f.observations[k].classified_defective);
  }
  CHECK(a.mapping.size() + a.unassigned_logical.size() == nl.instances.size());
  CHECK(std::is_sorted(a.unassigned_logical.begin(), a.unassigned_logical.end()));
  CHECK(std::is_sorted(a.unused_physical.begin(), a.unused_physical.end()));
}

}  // namespace

TEST_CASE("single resistor, no nets") {
  Netlist nl;
  nl.instances = {{"R1", "resistor", {}}};
  ObservedField f;
  f.region = {10'000, 10'000};
  f.observations = {obs(0, "resistor", 5000, 5000)};
  const Assignment a = assign(nl, f, standard_kinds());
  CHECK(a.mapping.at("R1") == 0);
  CHECK(a.cost == 0.0);
  CHECK(a.unassigned_logical.empty());
}

TEST_CASE("defective component leaves the instance unassigned") {
  Netlist nl;
  nl.instances = {{"R1", "resistor", {}}};
  ObservedField f;
  f.region = {10'000, 10'000};
  f.observations = {obs(0, "resistor", 5000, 5000, true)};
  for (const Assignment& a : {assign(nl, f, standard_kinds()), assign_exhaustive(nl, f, standard_kinds())}) {
    CHECK(a.mapping.empty());
    CHECK(a.unassigned_logical == std::vector<std::string>{"R1"});
    CHECK(a.unused_physical == std::vector<std::uint32_t>{0});
  }
}

TEST_CASE("two linked instances choose the close pair") {
  Netlist nl;
  nl.instances = {{"A", "resistor", {}}, {"B", "resistor", {}}};
  nl.nets = {{"N", {{"A", "A"}, {"B", "A"}}}};
  ObservedField f;
  f.region = {200'000, 10'000};
  f.observations = {obs(0, "resistor", 5'000, 5'000), obs(1, "resistor", 15'000, 5'000),
                    obs(2, "resistor", 105'000, 5'000)};
  const Assignment ex = assign_exhaustive(nl, f, standard_kinds());
  CHECK(ex.mapping.at("A") == 0);
  CHECK(ex.mapping.at("B") == 1);
  CHECK(ex.cost == doctest::Approx(10'000.0));
  const Assignment h = assign(nl, f, standard_kinds());
  CHECK(h.cost == doctest::Approx(10'000.0));
  CHECK(brute_force(nl, f, standard_kinds(), AssignParams{}.overlap_penalty_nm).cost == doctest::Approx(10'000.0));
}

TEST_CASE("exhaustive assignment limits") {
  const Assignment empty = assign_exhaustive({}, {}, standard_kinds());
  CHECK(empty.mapping.empty());
  CHECK(empty.cost == 0.0);
  Netlist big;
  for (int i = 0; i < 9; ++i) big.instances.push_back({"R" + std::to_string(i), "resistor", {}});
  try {
    assign_exhaustive(big, {}, standard_kinds());
    FAIL("expected refusal");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("8") != std::string::npos);
  }
}

TEST_CASE("square of four: exhaustive beats every permutation") {
  Netlist nl;
  for (int i = 0; i < 4; ++i) nl.instances.push_back({"R" + std::to_string(i), "resistor", {}});
  nl.nets = {{"a", {{"R0", "A"}, {"R1", "A"}}}, {"b", {{"R1", "B"}, {"R2", "A"}}}, {"c", {{"R2", "B"}, {"R3", "A"}}}};
  ObservedField f;
  f.region = {20'000, 20'000};
  f.observations = {obs(0, "resistor", 0, 0), obs(1, "resistor", 10'000, 0), obs(2, "resistor", 10'000, 10'000),
                    obs(3, "resistor", 0, 10'000)};
  const KindLibrary kinds = standard_kinds();
  const Assignment ex = assign_exhaustive(nl, f, kinds);
  std::vector<std::uint32_t> perm = {0, 1, 2, 3};
  int count = 0;
  do {
    std::map<std::string, std::uint32_t> m;
    for (int i = 0; i < 4; ++i) m["R" + std::to_string(i)] = perm[i];
    CHECK(ex.cost <= assignment_cost(nl, f, kinds, m) + 1e-9);
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(count == 24);
}

TEST_CASE("exhaustive search agrees with an independent enumeration") {
  Xoshiro256ss rng(31);
  const KindLibrary kinds = standard_kinds();
  const double penalty = AssignParams{}.overlap_penalty_nm;
  for (int t = 0; t < 150; ++t) {
    const Instance3 in = random_instance(rng, 4, 6);
    const Assignment ex = assign_exhaustive(in.netlist, in.field, kinds);
    const Oracle o = brute_force(in.netlist, in.field, kinds, penalty);
    CHECK(ex.mapping.size() == o.mapped);
    CHECK(ex.cost == doctest::Approx(o.cost).epsilon(1e-9));
    CHECK(assignment_cost(in.netlist, in.field, kinds, ex.mapping) == doctest::Approx(ex.cost).epsilon(1e-12));
  }
}

TEST_CASE("heuristic stays within 1.5x of the optimum") {
  Xoshiro256ss rng(7);
  const KindLibrary kinds = standard_kinds();
  for (int t = 0; t < 300; ++t) {
    const Instance3 in = random_instance(rng, 8, 10);
    const Assignment h = assign(in.netlist, in.field, kinds);
    const Assignment ex = assign_exhaustive(in.netlist, in.field, kinds);
    check_structure(h, in.netlist, in.field);
    check_structure(ex, in.netlist, in.field);
    CHECK(h.mapping.size() == ex.mapping.size());
    CHECK(h.cost <= 1.5 * ex.cost + 1e-6);
    CHECK(assignment_cost(in.netlist, in.field, kinds, h.mapping) == doctest::Approx(h.cost).epsilon(1e-12));
  }
}

TEST_CASE("translation leaves the mapping and cost unchanged") {
  Xoshiro256ss rng(12);
  const KindLibrary kinds = standard_kinds();
  for (int t = 0; t < 50; ++t) {
    Instance3 in = random_instance(rng, 8, 12);
    // Margins keep every pad inside both regions.
    in.field.region = {in.field.region.width + 20'000, in.field.region.height + 20'000};
    for (auto& o : in.field.observations) {
      o.center_est.x += 10'000;
      o.center_est.y += 10'000;
    }
    ObservedField moved = in.field;
    moved.region = {in.field.region.width + 30'000, in.field.region.height + 30'000};
    for (auto& o : moved.observations) {
      o.center_est.x += 12'345;
      o.center_est.y += 23'456;
    }
    const Assignment a = assign(in.netlist, in.field, kinds);
    const Assignment b = assign(in.netlist, moved, kinds);
    CHECK(a.mapping == b.mapping);
    CHECK(b.cost == doctest::Approx(a.cost).epsilon(1e-9));
  }
}

TEST_CASE("assign is deterministic") {
  Xoshiro256ss rng(99);
  const KindLibrary kinds = standard_kinds();
  const Instance3 in = random_instance(rng, 8, 12);
  CHECK(assign(in.netlist, in.field, kinds) == assign(in.netlist, in.field, kinds));
}

TEST_CASE("a component with a pad outside the region is penalized") {
  Netlist nl;
  nl.instances = {{"A", "resistor", {}}, {"B", "resistor", {}}};
  nl.nets = {{"N", {{"A", "A"}, {"B", "A"}}}};
  ObservedField f;
  f.region = {40'000, 10'000};
  f.observations = {obs(0, "resistor", 5'000, 5'000), obs(1, "resistor", 0, 5'000),
                    obs(2, "resistor", 25'000, 5'000)};
  const Assignment h = assign(nl, f, standard_kinds());
  CHECK(h.mapping.at("A") != 1);
  CHECK(h.mapping.at("B") != 1);
  CHECK(h.cost == doctest::Approx(20'000.0));
  CHECK(assignment_cost(nl, f, standard_kinds(), {{"A", 0}, {"B", 1}}) ==
        doctest::Approx(5'000.0 + AssignParams{}.overlap_penalty_nm));
}

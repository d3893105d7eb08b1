#include <doctest.h>

#include <cmath>
#include <set>

#include "nanomod/analyze.hpp"
#include "nanomod/bench.hpp"
#include "nanomod/errors.hpp"
#include "nanomod/fingerprint.hpp"
#include "nanomod/rng.hpp"

using namespace nanomod;

namespace {

// A layout of `n` two-cell wires on distinct nets of resistors; the
// netlist maps every net to a pair of plain instances.
struct Wires {
  RoutedLayout layout;
  Netlist netlist;
};

Wires wires(std::size_t n) {
  Wires w;
  w.layout.pitch = 50;
  w.layout.region = {1'000'000, 1'000'000};
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "W" + std::to_string(i);
    Path p;
    p.net_id = id;
    p.branches = {{{25, 25}, {75, 25}}};
    p.widths = {{150, 150}};
    w.layout.paths.push_back(p);
    w.netlist.nets.push_back({id, {{"A" + std::to_string(i), "A"}, {"B" + std::to_string(i), "A"}}});
  }
  return w;
}

// A single routed net whose driver is an nmos of the standard library.
struct OneNet {
  RoutedLayout layout;
  Netlist netlist;
};

OneNet one_net(int cells, std::size_t receivers) {
  OneNet o;
  o.layout.pitch = 50;
  o.layout.region = {1'000'000, 1'000'000};
  o.netlist.instances = {{"M0", "nmos", {}}};
  o.layout.assignment.mapping["M0"] = 0;
  Net net{"N", {{"M0", "D"}}};
  for (std::size_t r = 0; r < receivers; ++r) {
    const std::string id = "M" + std::to_string(r + 1);
    o.netlist.instances.push_back({id, "nmos", {}});
    o.layout.assignment.mapping[id] = static_cast<std::uint32_t>(r + 1);
    net.pins.push_back({id, "G"});
  }
  o.netlist.nets.push_back(net);
  Path p;
  p.net_id = "N";
  std::vector<PointNm> pts;
  for (int i = 0; i <= cells; ++i) pts.push_back({25 + 50 * i, 25});
  p.branches = {pts};
  p.widths = {std::vector<std::int64_t>(pts.size(), 150)};
  o.layout.paths.push_back(p);
  o.layout.total_wire_length = cells * 50;
  return o;
}

}  // namespace

TEST_CASE("print time") {
  ProcessSpec spec;
  CHECK(print_time(500'000'000LL, spec) == doctest::Approx(500.0));  // 500 mm at 1 mm/s
  CHECK(print_time(0, spec) == 0.0);
  spec.print_rate = 2.0;
  CHECK(print_time(1'000'000, spec) == doctest::Approx(0.5));
  // 10,000 components x fan-out 5 x 10 um
  spec.print_rate = 1.0;
  CHECK(print_time(10'000LL * 5 * 10'000, spec) == doctest::Approx(500.0));
  CHECK(print_time(10'000LL * 5 * 10'000, spec) < 600.0);
}

TEST_CASE("print time times rate recovers the length") {
  Xoshiro256ss rng(1);
  for (int i = 0; i < 100; ++i) {
    ProcessSpec spec;
    spec.print_rate = rng.uniform(1.0, 8.0);
    const auto len = static_cast<std::int64_t>(rng.below(1'000'000'000'000ULL));
    CHECK(print_time(len, spec) * spec.print_rate * 1e6 == doctest::Approx(static_cast<double>(len)).epsilon(1e-12));
  }
}

TEST_CASE("wire resistance") {
  ProcessSpec spec;  // 1e5 per ohm cm
  CHECK(std::abs(wire_resistance(10'000, 1'000, spec) - 1.0) <= 1e-9);
  CHECK(wire_resistance(20'000, 1'000, spec) == doctest::Approx(2.0 * wire_resistance(10'000, 1'000, spec)));
  CHECK(wire_resistance(10'000, 150, spec) == doctest::Approx(44.444444).epsilon(1e-6));
  CHECK_THROWS_AS(wire_resistance(10'000, 0, spec), InvariantError);
}

TEST_CASE("contact resistance") {
  ProcessSpec spec;  // 1 micro-ohm cm^2
  CHECK(std::abs(contact_resistance(150.0 * 150.0, spec) - 4444.4) <= 0.1);
  CHECK(contact_resistance(1e14, spec) == doctest::Approx(1e-6));  // 1 cm^2
  CHECK(contact_resistance(2 * 22'500.0, spec) == doctest::Approx(contact_resistance(22'500.0, spec) / 2));
}

TEST_CASE("capacitance and delay") {
  ProcessSpec spec;
  // 34.5 aF per um of 1 um wire
  CHECK(wire_capacitance_per_m(spec) * 1e-6 == doctest::Approx(34.5e-18).epsilon(0.01));
  DelayInputs in;
  in.c_load = 1e-15;
  in.supply_v = 1.5;
  in.i_drive = 0.94e-3;
  CHECK(delay_estimate(in) == doctest::Approx(1.6e-12).epsilon(0.01));
  CHECK(1.0 / (2.0 * delay_estimate(in)) == doctest::Approx(312e9).epsilon(0.01));
  CHECK(delay_estimate(DelayInputs{0, 0, 1.5, 1e-3, 0}) == 0.0);
  CHECK(1.0 / (2.0 * 5e-9) == doctest::Approx(100e6));
}

TEST_CASE("net delay is monotone in length, load and contact resistance") {
  const KindLibrary kinds = standard_kinds();
  ProcessSpec spec;
  double prev = -1.0;
  for (int cells : {0, 10, 100, 1000}) {
    const OneNet o = one_net(cells, 1);
    const double d = net_delay(o.layout.paths[0], o.layout, o.netlist, kinds, spec);
    CHECK(d >= prev);
    prev = d;
  }
  prev = -1.0;
  double prev_f = std::numeric_limits<double>::infinity();
  for (std::size_t loads : {0u, 1u, 3u, 6u}) {
    const OneNet o = one_net(100, loads);
    const double d = net_delay(o.layout.paths[0], o.layout, o.netlist, kinds, spec);
    const double f = max_frequency(o.layout, o.netlist, kinds, spec);
    CHECK(d >= prev);
    CHECK(f <= prev_f);
    prev = d;
    prev_f = f;
  }
  const OneNet o = one_net(100, 2);
  ProcessSpec hi = spec;
  hi.contact_resistivity = 0.5;
  CHECK(net_delay(o.layout.paths[0], o.layout, o.netlist, kinds, spec) >=
        net_delay(o.layout.paths[0], o.layout, o.netlist, kinds, hi));
}

TEST_CASE("max frequency needs an electrical driver") {
  Wires w = wires(3);
  for (std::size_t i = 0; i < 3; ++i) {
    w.netlist.instances.push_back({"A" + std::to_string(i), "resistor", {}});
    w.netlist.instances.push_back({"B" + std::to_string(i), "resistor", {}});
  }
  CHECK_THROWS_AS(max_frequency(w.layout, w.netlist, standard_kinds(), ProcessSpec{}), ConfigError);
}

TEST_CASE("short yield edge cases") {
  ProcessSpec spec;
  spec.short_rate = 0.0;
  CHECK(simulate_shorts(std::vector<bool>(1000, false), spec, 500, 1).yield == 1.0);
  spec.short_rate = 1.0;
  CHECK(simulate_shorts(std::vector<bool>(1, false), spec, 500, 1).yield == 0.0);
  spec.short_rate = 0.5;
  CHECK(simulate_shorts(std::vector<bool>(50, true), spec, 500, 1).yield == 1.0);
  CHECK_THROWS_AS(simulate_shorts(std::vector<bool>(1, false), spec, 0, 1), ConfigError);
}

TEST_CASE("short yield matches the closed form") {
  ProcessSpec spec;
  spec.short_rate = 1e-4;
  const std::vector<bool> fragile(10'000, false);
  const double p = std::pow(1.0 - 1e-4, 10'000);
  CHECK(p == doctest::Approx(0.3679).epsilon(1e-3));
  for (std::uint64_t trials : {100u, 1000u, 10'000u}) {
    const YieldEstimate y = simulate_shorts(fragile, spec, trials, 2024);
    const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(trials));
    CHECK(std::abs(y.yield - p) < 3.0 * sigma);
    CHECK(y.trials == trials);
    CHECK(y.failures + static_cast<std::uint64_t>(std::llround(y.yield * trials)) == trials);
  }
  const YieldEstimate big = simulate_shorts(fragile, spec, 10'000, 7);
  CHECK(big.ci_low <= p);
  CHECK(p <= big.ci_high);
}

TEST_CASE("short yield on a layout counts one wire per branch") {
  Wires w = wires(10'000);
  ProcessSpec spec;
  spec.short_rate = 1e-4;
  CHECK(wire_redundancy(w.layout, w.netlist).size() == 10'000);
  const YieldEstimate a = simulate_shorts(w.layout, w.netlist, spec, 2000, 3);
  const YieldEstimate b = simulate_shorts(w.layout, w.netlist, spec, 2000, 3);
  CHECK(a.failures == b.failures);
  // Putting every instance in a redundancy group makes every wire tolerant.
  std::vector<std::string> group;
  for (std::size_t i = 0; i < 10'000; ++i) {
    group.push_back("A" + std::to_string(i));
    group.push_back("B" + std::to_string(i));
  }
  w.netlist.redundancy_groups = {group};
  CHECK(simulate_shorts(w.layout, w.netlist, spec, 200, 3).yield == 1.0);
}

TEST_CASE("wilson interval") {
  const auto [lo, hi] = wilson_interval(50, 100);
  CHECK(lo == doctest::Approx(0.4038).epsilon(1e-3));
  CHECK(hi == doctest::Approx(0.5962).epsilon(1e-3));
  const auto [lo0, hi0] = wilson_interval(0, 10);
  CHECK(lo0 == 0.0);
  CHECK(hi0 > 0.0);
}

TEST_CASE("diffusion time ratio") {
  CHECK(diffusion_time_ratio(10.0, 10'000.0) == 1e6);
  CHECK(diffusion_time_ratio(7.0, 7.0) == 1.0);
  CHECK(diffusion_time_ratio(1.0, 3.0) == 9.0);
}

TEST_CASE("fingerprints") {
  ProcessSpec spec;  // milestone variances: 2 um, 20 degrees
  const auto mix = std::vector<KindShare>{{standard_kinds().at("nmos"), 1.0}};
  const Substrate s = deposit(spec, mix, LayoutPolicy::lattice, 1);
  SUBCASE("identical layouts") { CHECK(fingerprint_distance(layout_fingerprint(s), layout_fingerprint(s)) == 0); }
  SUBCASE("sub-bucket translation") {
    std::vector<Pose> poses;
    for (const auto& c : s.components) {
      // Shift onto bucket-aligned coordinates first so that a 40 nm shift
      // stays inside every bucket.
      poses.push_back({{c.center.x / 100 * 100 + 1000, c.center.y / 100 * 100 + 1000}, 2.0 + 5.0 * std::floor(c.orientation / 5.0)});
    }
    std::vector<Pose> moved = poses;
    for (auto& p : moved) {
      p.center.x += 40;
      p.center.y += 40;
    }
    CHECK(fingerprint_distance(layout_fingerprint(poses), layout_fingerprint(moved)) == 0);
  }
  SUBCASE("empty input") { CHECK_THROWS_AS(layout_fingerprint(std::vector<Pose>{}), ConfigError); }
  SUBCASE("distance is a metric") {
    std::vector<Fingerprint> f;
    for (int seed = 0; seed < 12; ++seed) f.push_back(layout_fingerprint(deposit(spec, mix, LayoutPolicy::lattice, seed)));
    for (const auto& a : f) {
      CHECK(fingerprint_distance(a, a) == 0);
      CHECK(a.bits == 256);
      for (const auto& b : f) {
        CHECK(fingerprint_distance(a, b) == fingerprint_distance(b, a));
        if (!(a == b)) CHECK(fingerprint_distance(a, b) > 0);
        for (const auto& c : f) CHECK(fingerprint_distance(a, c) <= fingerprint_distance(a, b) + fingerprint_distance(b, c));
      }
    }
  }
}

TEST_CASE("fingerprints of distinct seeds look independent") {
  ProcessSpec spec;
  const auto mix = std::vector<KindShare>{{standard_kinds().at("nmos"), 1.0}};
  std::vector<Fingerprint> f;
  std::set<std::vector<std::uint64_t>> distinct;
  for (int seed = 0; seed < 100; ++seed) {
    f.push_back(layout_fingerprint(deposit(spec, mix, LayoutPolicy::lattice, 1000 + seed)));
    distinct.insert(f.back().words);
  }
  CHECK(distinct.size() >= 99);
  double sum = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (std::size_t j = i + 1; j < f.size(); ++j) {
      sum += static_cast<double>(fingerprint_distance(f[i], f[j]));
      ++pairs;
    }
  }
  const double mean = sum / pairs;
  CHECK(mean >= 113.0);
  CHECK(mean <= 143.0);
}

TEST_CASE("empty pipeline report") {
  ObservedField f;
  f.region = {10'000, 10'000};
  RoutedLayout l;
  l.region = f.region;
  l.pitch = 50;
  ProcessSpec spec;
  spec.deposition_area = f.region;
  const FabricationReport r = make_report({}, f, {}, l, standard_kinds(), spec, 1, 100);
  CHECK(r.components_total == 0);
  CHECK(r.routed_fraction == 0.0);
  CHECK(r.total_wire_length_nm == 0);
  CHECK(r.print_time_s == 0.0);
  CHECK(r.yield.yield == 1.0);
  CHECK_FALSE(r.max_frequency_hz);
}

TEST_CASE("report rejects a layout from another assignment") {
  const BenchScenario sc = gen_differential_pair();
  const ProcessSpec spec = scenario_spec(sc);
  const KindLibrary kinds = standard_kinds();
  const ObservedField f = observe(deposit(spec, kind_mix_for(sc.netlist, kinds), LayoutPolicy::lattice, 1), spec, kinds, 1.0, 2);
  const Assignment a = assign(sc.netlist, f, kinds);
  const RoutedLayout l = route_design(sc.netlist, f, kinds, a, spec);
  const FabricationReport r = make_report(sc.netlist, f, a, l, kinds, spec, 3, 100);
  CHECK(r.routed_fraction >= 0.0);
  CHECK(r.routed_fraction <= 1.0);
  CHECK(r.print_time_s * spec.print_rate * 1e6 == doctest::Approx(static_cast<double>(r.total_wire_length_nm)));
  Assignment other = a;
  REQUIRE_FALSE(other.mapping.empty());
  other.mapping.erase(other.mapping.begin());
  CHECK_THROWS_AS(make_report(sc.netlist, f, other, l, kinds, spec, 3, 100), IntegrityError);
}

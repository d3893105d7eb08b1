#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "nanomod/deposition.hpp"
#include "nanomod/errors.hpp"
#include "nanomod/kinds.hpp"
#include "nanomod/rng.hpp"

using namespace nanomod;

namespace {

std::vector<KindShare> one_kind(const std::string& id) { return {{standard_kinds().at(id), 1.0}}; }

// Standard deviation of a normal truncated at +/- k sigma, per unit sigma.
double truncated_sd(double k) {
  const double phi = std::exp(-0.5 * k * k) / std::sqrt(2.0 * M_PI);
  const double mass = std::erf(k / std::sqrt(2.0));
  return std::sqrt(1.0 - 2.0 * k * phi / mass);
}

std::set<std::pair<std::size_t, std::size_t>> brute_pairs(const std::vector<OrientedRect>& r) {
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = i + 1; j < r.size(); ++j) {
      if (intersects(r[i], r[j])) out.insert({i, j});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("poisson count has the expected mean") {
  ProcessSpec spec;  // 0.01 per um^2 over 100 x 100 um: mean 100
  double total = 0.0;
  const int seeds = 400;
  for (int s = 0; s < seeds; ++s) total += deposit(spec, one_kind("nmos"), LayoutPolicy::poisson, s).components.size();
  const double mean = total / seeds;
  CHECK(std::abs(mean - 100.0) < 3.0 * std::sqrt(100.0 / seeds));
}

TEST_CASE("zero noise lattice sits exactly on target") {
  ProcessSpec spec;
  spec.position_sigma = 0.0;
  spec.orientation_sigma = 0.0;
  const Substrate s = deposit(spec, one_kind("resistor"), LayoutPolicy::lattice, 9);
  REQUIRE(s.components.size() == 100);
  for (const auto& c : s.components) {
    REQUIRE(c.target);
    CHECK(c.center == c.target->position);
    CHECK(c.orientation == 0.0);
  }
}

TEST_CASE("half square centimetre holds 5e5 components at 0.01 per um^2") {
  ProcessSpec spec;
  spec.deposition_area = {7'071'068, 7'071'068};  // 0.5 cm^2
  const double area_um2 = 7071.068 * 7071.068;
  CHECK(spec.component_density_target * area_um2 == doctest::Approx(5e5).epsilon(1e-6));
}

TEST_CASE("deposit rejects bad inputs") {
  ProcessSpec spec;
  CHECK_THROWS_AS(deposit(spec, {}, LayoutPolicy::lattice, 1), ConfigError);
  spec.deposition_area = {0, 1000};
  CHECK_THROWS_AS(deposit(spec, one_kind("nmos"), LayoutPolicy::lattice, 1), Error);
}

TEST_CASE("deposit is deterministic and seed-sensitive") {
  ProcessSpec spec;
  const auto mix = std::vector<KindShare>{{standard_kinds().at("nmos"), 0.5}, {standard_kinds().at("pmos"), 0.5}};
  for (auto policy : {LayoutPolicy::lattice, LayoutPolicy::poisson}) {
    const Substrate a = deposit(spec, mix, policy, 77);
    const Substrate b = deposit(spec, mix, policy, 77);
    const Substrate c = deposit(spec, mix, policy, 78);
    REQUIRE(a.components.size() == b.components.size());
    bool same = true, differs = false;
    for (std::size_t i = 0; i < a.components.size(); ++i) {
      same = same && a.components[i].center == b.components[i].center &&
             a.components[i].orientation == b.components[i].orientation && a.components[i].kind == b.components[i].kind;
      if (i < c.components.size()) differs = differs || !(a.components[i].center == c.components[i].center);
    }
    CHECK(same);
    CHECK(a.overlaps == b.overlaps);
    CHECK(differs);
  }
}

TEST_CASE("placed components stay inside the region with normalized orientation") {
  ProcessSpec spec;
  spec.position_sigma = 5000.0;
  for (auto policy : {LayoutPolicy::lattice, LayoutPolicy::poisson}) {
    const Substrate s = deposit(spec, one_kind("nmos"), policy, 4);
    for (const auto& c : s.components) {
      CHECK(s.region.contains(c.center));
      CHECK(c.orientation >= 0.0);
      CHECK(c.orientation < 360.0);
    }
  }
}

TEST_CASE("lattice noise moments match the truncated normal") {
  ProcessSpec spec;
  spec.position_sigma = 2000.0;
  spec.orientation_sigma = 20.0;
  spec.deposition_area = {1'000'000, 1'000'000};  // keeps clamping rare
  double sx = 0, sy = 0, st = 0;
  std::size_t n = 0;
  for (int seed = 0; seed < 100; ++seed) {
    const Substrate s = deposit(spec, one_kind("nmos"), LayoutPolicy::lattice, seed);
    for (const auto& c : s.components) {
      if (c.target->clamped) continue;
      const double dx = static_cast<double>(c.center.x - c.target->position.x);
      const double dy = static_cast<double>(c.center.y - c.target->position.y);
      const double dt = c.orientation > 180.0 ? c.orientation - 360.0 : c.orientation;
      sx += dx * dx;
      sy += dy * dy;
      st += dt * dt;
      ++n;
    }
  }
  REQUIRE(n >= 100'000);
  const double k = truncated_sd(3.0);
  CHECK(std::abs(std::sqrt(sx / n) / (spec.position_sigma * k) - 1.0) < 0.1);
  CHECK(std::abs(std::sqrt(sy / n) / (spec.position_sigma * k) - 1.0) < 0.1);
  CHECK(std::abs(std::sqrt(st / n) / (spec.orientation_sigma * k) - 1.0) < 0.1);
}

TEST_CASE("inject_defects edge rates") {
  ProcessSpec spec;
  const Substrate s = deposit(spec, one_kind("nmos"), LayoutPolicy::lattice, 1);
  const Substrate none = inject_defects(s, 0.0, 5);
  const Substrate all = inject_defects(s, 1.0, 5);
  CHECK(std::none_of(none.components.begin(), none.components.end(), [](const auto& c) { return c.defective; }));
  CHECK(std::all_of(all.components.begin(), all.components.end(), [](const auto& c) { return c.defective; }));
}

TEST_CASE("inject_defects follows the binomial mean") {
  ProcessSpec spec;
  spec.deposition_area = {1'000'000, 1'000'000};  // 10,000 lattice sites
  const Substrate s = deposit(spec, one_kind("nmos"), LayoutPolicy::lattice, 1);
  REQUIRE(s.components.size() == 10'000);
  const double p = 0.05, n = 10'000.0;
  double total = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    const Substrate d = inject_defects(s, p, seed);
    total += std::count_if(d.components.begin(), d.components.end(), [](const auto& c) { return c.defective; });
  }
  const double mean = total / 100.0;
  const double sigma = std::sqrt(n * p * (1 - p));
  CHECK(std::abs(mean - 500.0) <= 3.0 * sigma);
}

TEST_CASE("overlap detection examples") {
  const OrientedRect a{{0, 0}, 1000, 1000, 0};
  SUBCASE("identical bodies") {
    const auto pairs = find_overlapping_pairs(std::vector<OrientedRect>{a, a});
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0] == std::pair<std::size_t, std::size_t>{0, 1});
  }
  SUBCASE("10 um apart") {
    const OrientedRect b{{10'000, 0}, 1000, 1000, 0};
    CHECK(find_overlapping_pairs(std::vector<OrientedRect>{a, b}).empty());
  }
}

TEST_CASE("overlap detection equals the all-pairs oracle") {
  Xoshiro256ss rng(2024);
  for (int round = 0; round < 20; ++round) {
    std::vector<OrientedRect> rects;
    const double side = round % 2 == 0 ? 60'000.0 : 20'000.0;
    for (int i = 0; i < 1000; ++i) {
      rects.push_back({{rng.uniform(0, side), rng.uniform(0, side)}, rng.uniform(100, 4000), rng.uniform(100, 1200),
                       rng.uniform(0, 360)});
    }
    const auto got = find_overlapping_pairs(rects);
    const std::set<std::pair<std::size_t, std::size_t>> fast(got.begin(), got.end());
    CHECK(fast.size() == got.size());
    CHECK(fast == brute_pairs(rects));
  }
}

TEST_CASE("detect_overlaps is permutation invariant") {
  ProcessSpec spec;
  spec.component_density_target = 0.2;
  spec.deposition_area = {40'000, 40'000};
  const Substrate s = deposit(spec, one_kind("nmos"), LayoutPolicy::poisson, 3);
  const KindLibrary kinds = standard_kinds();
  const auto base = detect_overlaps(s, kinds);
  CHECK_FALSE(base.empty());
  CHECK(base == s.overlaps);
  Substrate p = s;
  Xoshiro256ss rng(8);
  for (std::size_t k = p.components.size(); k > 1; --k) std::swap(p.components[k - 1], p.components[rng.below(k)]);
  CHECK(detect_overlaps(p, kinds) == base);
  for (const auto& [i, j] : base) CHECK(i < j);
}

// Acceptance run: one PASS/FAIL line per criterion. Exit status 0 only when
// every selected criterion passes.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nanomod/analyze.hpp"
#include "nanomod/assign.hpp"
#include "nanomod/bench.hpp"
#include "nanomod/deposition.hpp"
#include "nanomod/fingerprint.hpp"
#include "nanomod/json_io.hpp"
#include "nanomod/kinds.hpp"
#include "nanomod/pipeline.hpp"
#include "nanomod/rng.hpp"
#include "nanomod/route.hpp"
#include "nanomod/routing_grid.hpp"
#include "nanomod/vision.hpp"

namespace fs = std::filesystem;
using namespace nanomod;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Json bench_manifest(const std::string& scenario, const std::string& out) {
  const BenchScenario sc = bench_scenario(scenario);
  return Json{{"bench", Json{{"scenario", scenario}}},
              {"seeds", Json{{"deposit", sc.seed}, {"defect", sc.seed + 1}, {"vision", sc.seed + 2},
                             {"shorts", sc.seed + 3}}},
              {"out", out}};
}

struct Run {
  std::map<std::string, std::optional<double>> metrics;
  double seconds = 0.0;
};

Run run_scenario(const std::string& scenario, const fs::path& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunResult res = run_pipeline(manifest_from_json(bench_manifest(scenario, "out"), dir));
  Run r;
  r.seconds = seconds_since(t0);
  r.metrics = report_metrics_from_json(parse_json(res.files.at("report.json"), "report"));
  return r;
}

double metric(const Run& r, const std::string& name) {
  const auto& v = r.metrics.at(name);
  return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

// Shared by criteria 1 and 2.
std::optional<Run> g_run_10k;
const Run& run_10k(const fs::path& dir) {
  if (!g_run_10k) g_run_10k = run_scenario("random_logic_10k", dir);
  return *g_run_10k;
}

Outcome criterion_1(const fs::path& dir) {
  const Run small = run_scenario("random_logic_1k", dir);
  const Run& big = run_10k(dir);
  const double rf = metric(small, "routed_fraction");
  const double rf_big = metric(big, "routed_fraction");
  const bool pass = rf >= 0.5 && small.seconds <= 60.0 && big.seconds <= 900.0;
  return {pass, "1k routed_fraction " + fmt("%.4f", rf) + " (>= 0.5) in " + fmt("%.1f", small.seconds) +
                    " s (<= 60 s); 10k routed_fraction " + fmt("%.4f", rf_big) + " in " + fmt("%.1f", big.seconds) +
                    " s (<= 900 s)"};
}

Outcome criterion_2(const fs::path& dir) {
  const Run& big = run_10k(dir);
  const double t = metric(big, "print_time_s");
  return {t <= 600.0 && t >= 400.0, "10k print_time " + fmt("%.2f", t) + " s (<= 600 s, expected 500 s +/- 20%)"};
}

Outcome criterion_3() {
  ProcessSpec spec;
  spec.deposition_area = {330'000, 330'000};
  const KindLibrary kinds = standard_kinds();
  std::vector<KindShare> mix;
  for (const auto& [id, k] : kinds.all()) {
    if (0.5 * static_cast<double>(k.critical_dimension) >= spec.vision_position_error_max) mix.push_back({k, 1.0});
  }
  for (auto& share : mix) share.fraction = 1.0 / static_cast<double>(mix.size());
  std::size_t total = 0, bad = 0;
  double worst_pos = 0.0, worst_theta = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Substrate s = deposit(spec, mix, LayoutPolicy::lattice, 3000 + seed);
    const ObservedField f = observe(s, spec, kinds, 1.0, 5000 + seed);
    for (const auto& o : f.observations) {
      const auto& c = s.components[o.phys_id];
      const double pos = std::hypot(static_cast<double>(o.center_est.x - c.center.x),
                                    static_cast<double>(o.center_est.y - c.center.y));
      const double theta = angle_diff_deg(o.orientation_est, c.orientation);
      const double cd = static_cast<double>(kinds.at(o.kind).critical_dimension);
      worst_pos = std::max(worst_pos, pos / cd);
      worst_theta = std::max(worst_theta, theta);
      bad += pos > 0.5 * cd || theta > 15.0;
      ++total;
    }
  }
  return {total >= 100'000 && bad == 0,
          std::to_string(total) + " observations, " + std::to_string(bad) + " out of bounds; worst position " +
              fmt("%.3f", worst_pos) + " CD (<= 0.5), worst orientation " + fmt("%.3f", worst_theta) + " deg (<= 15)"};
}

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
      if (dist[n] >= 0 || (g.state(n) != RoutingGrid::kFree && n != to)) continue;
      dist[n] = dist[c] + 1;
      q.push_back(n);
    }
  }
  return -1;
}

Outcome criterion_4() {
  constexpr std::int64_t pitch = 50;
  Xoshiro256ss rng(404);
  int mismatches = 0, reachable = 0;
  for (int t = 0; t < 1000; ++t) {
    const int nx = 2 + static_cast<int>(rng.below(63)), ny = 2 + static_cast<int>(rng.below(63));
    RoutingGrid g({nx * pitch, ny * pitch}, pitch, 0);
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
    if (expect >= 0) ++reachable;
    mismatches += expect < 0 ? r.ok : (!r.ok || r.path.moves() != expect);
  }
  return {mismatches == 0, "1000 grids (" + std::to_string(reachable) + " connected), " + std::to_string(mismatches) +
                               " mismatches against BFS"};
}

Outcome criterion_5() {
  static const char* kind_ids[] = {"nmos", "pmos", "resistor"};
  static const char* pins[][3] = {{"S", "G", "D"}, {"S", "G", "D"}, {"A", "B", ""}};
  const KindLibrary kinds = standard_kinds();
  Xoshiro256ss rng(505);
  int over = 0, structure = 0;
  double worst = 1.0;
  for (int t = 0; t < 1000; ++t) {
    Netlist nl;
    const std::size_t n = 1 + rng.below(8);
    std::vector<int> kind_of(n);
    for (std::size_t i = 0; i < n; ++i) {
      kind_of[i] = static_cast<int>(rng.below(3));
      nl.instances.push_back({"I" + std::to_string(i), kind_ids[kind_of[i]], std::nullopt});
    }
    const std::size_t nets = 1 + rng.below(n + 1);
    for (std::size_t k = 0; k < nets; ++k) {
      Net net{"N" + std::to_string(k), {}};
      const std::size_t deg = 2 + rng.below(3);
      for (std::size_t d = 0; d < deg; ++d) {
        const std::size_t i = rng.below(n);
        net.pins.push_back({nl.instances[i].id, pins[kind_of[i]][rng.below(kind_of[i] == 2 ? 2 : 3)]});
      }
      nl.nets.push_back(net);
    }
    ObservedField f;
    f.region = {60'000, 60'000};
    const std::size_t m = n + rng.below(12 - n + 1);
    for (std::size_t o = 0; o < m; ++o) {
      ObservedComponent c;
      c.obs_id = static_cast<std::uint32_t>(o);
      c.phys_id = c.obs_id;
      c.kind = o < n ? kind_ids[kind_of[o]] : kind_ids[rng.below(3)];
      c.center_est = {static_cast<std::int64_t>(rng.below(60'000)), static_cast<std::int64_t>(rng.below(60'000))};
      c.orientation_est = rng.uniform(0.0, 360.0);
      c.classified_defective = rng.uniform() < 0.1;
      f.observations.push_back(c);
    }
    const Assignment h = assign(nl, f, kinds);
    const Assignment ex = assign_exhaustive(nl, f, kinds);
    if (h.cost > 1.5 * ex.cost + 1e-6) ++over;
    if (ex.cost > 0) worst = std::max(worst, h.cost / ex.cost);
    for (const Assignment* a : {&h, &ex}) {
      std::set<std::uint32_t> used;
      for (const auto& [inst, o] : a->mapping) {
        const auto& c = f.observations[static_cast<std::size_t>(f.index_of(o))];
        structure += !used.insert(o).second;
        structure += c.kind != nl.instances[static_cast<std::size_t>(nl.instance_index(inst))].kind;
        structure += c.classified_defective;
      }
    }
  }
  return {over == 0 && structure == 0, "1000 instances: " + std::to_string(over) + " above 1.5x optimum (worst ratio " +
                                           fmt("%.3f", worst) + "), " + std::to_string(structure) +
                                           " injectivity/kind/defect violations"};
}

Outcome criterion_6() {
  RoutedLayout layout;
  layout.pitch = 50;
  layout.region = {1'000'000, 1'000'000};
  Netlist nl;
  for (int i = 0; i < 10'000; ++i) {
    const std::string id = "W" + std::to_string(i);
    Path p;
    p.net_id = id;
    p.branches = {{{25, 25}, {75, 25}}};
    p.widths = {{150, 150}};
    layout.paths.push_back(p);
    nl.nets.push_back({id, {{"A" + std::to_string(i), "A"}, {"B" + std::to_string(i), "A"}}});
  }
  ProcessSpec spec;
  spec.short_rate = 1e-4;
  const YieldEstimate y = simulate_shorts(layout, nl, spec, 10'000, 606);
  const double exact = std::pow(1.0 - 1e-4, 10'000);
  return {y.ci_low <= exact && exact <= y.ci_high,
          "MC clean probability " + fmt("%.4f", y.yield) + ", Wilson 95% [" + fmt("%.4f", y.ci_low) + ", " +
              fmt("%.4f", y.ci_high) + "] contains " + fmt("%.4f", exact)};
}

Outcome criterion_7() {
  ProcessSpec spec;
  spec.conductivity = 1e5;
  spec.contact_resistivity = 1.0;
  const double r = wire_resistance(10'000.0, 1'000.0, spec);
  const double rc = contact_resistance(150.0 * 150.0, spec);
  const double ratio = diffusion_time_ratio(10.0, 10'000.0);
  const bool pass = std::abs(r - 1.0) <= 1e-9 && std::abs(rc - 4444.4) <= 0.1 && ratio == 1e6;
  return {pass, "wire " + fmt("%.12f", r) + " ohm, contact " + fmt("%.4f", rc) + " ohm, diffusion ratio " +
                    fmt("%.1f", ratio)};
}

int check_cli(const fs::path& report, const Thresholds& thresholds, const fs::path& dir) {
  Json t = Json::object();
  for (const auto& [k, v] : thresholds) t[k] = v;
  const fs::path file = dir / "thresholds.json";
  write_file(file, dump_json(t));
  const std::string cmd =
      std::string(NANOMOD_CLI) + " check " + report.string() + " --thresholds " + file.string() + " > /dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome criterion_8(const fs::path& dir) {
  std::ostringstream detail;
  bool pass = true;
  for (const std::string name : {"flipflop", "diffpair"}) {
    const fs::path sub = dir / name;
    fs::create_directories(sub);
    const RunManifest m = manifest_from_json(bench_manifest(name, "out"), sub);
    cmd_run(m);
    const auto metrics = report_metrics_from_json(parse_json(read_file(sub / "out" / "report.json"), "report"));
    const double f = metrics.at("max_frequency_hz").value_or(0.0);
    const double area = metrics.at("footprint_mm2").value_or(1e9);
    const double routed = metrics.at("nets_routed").value_or(0.0);
    const double nets = metrics.at("nets_total").value_or(-1.0);
    const double rf = metrics.at("routed_fraction").value_or(0.0);
    const int exit = check_cli(sub / "out" / "report.json", bench_scenario(name).thresholds, sub);
    bool ok = f >= 1e8 && routed == nets && rf == 1.0 && exit == 0;
    if (name == "flipflop") ok = ok && area <= 0.05;
    pass = pass && ok;
    detail << name << ": f_max " << fmt("%.3g", f) << " Hz, footprint " << fmt("%.4g", area) << " mm2, nets "
           << routed << "/" << nets << ", check exit " << exit << "; ";
  }
  std::string d = detail.str();
  d.resize(d.size() - 2);
  return {pass, d};
}

Outcome criterion_9() {
  ProcessSpec spec;
  const KindLibrary kinds = standard_kinds();
  const std::vector<KindShare> mix = {{kinds.at("nmos"), 0.5}, {kinds.at("pmos"), 0.5}};
  std::vector<Fingerprint> prints;
  std::set<std::vector<std::uint64_t>> distinct;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    prints.push_back(layout_fingerprint(deposit(spec, mix, LayoutPolicy::lattice, 9000 + seed)));
    distinct.insert(prints.back().words);
  }
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < prints.size(); ++i) {
    for (std::size_t j = i + 1; j < prints.size(); ++j) {
      sum += static_cast<double>(fingerprint_distance(prints[i], prints[j]));
      ++pairs;
    }
  }
  const double mean = sum / static_cast<double>(pairs);
  return {distinct.size() >= 99 && mean >= 113.0 && mean <= 143.0,
          std::to_string(distinct.size()) + " distinct of 100 (>= 99), mean Hamming distance " + fmt("%.2f", mean) +
              " (in [113, 143])"};
}

Outcome criterion_10(const fs::path& dir) {
  std::size_t same = 0, total = 0;
  for (const std::string name : {"timer555", "random_logic_1k"}) {
    const fs::path sub = dir / ("determinism_" + name);
    fs::create_directories(sub);
    const RunManifest m = manifest_from_json(bench_manifest(name, "out"), sub);
    cmd_run(m);
    std::map<std::string, std::string> first;
    for (const auto& f : artifact_names()) first[f] = read_file(sub / "out" / f);
    cmd_run(m);
    for (const auto& f : artifact_names()) {
      same += read_file(sub / "out" / f) == first[f];
      ++total;
    }
  }
  return {same == total, std::to_string(same) + "/" + std::to_string(total) + " artifacts byte-identical across two runs"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  std::string work = (fs::temp_directory_path() / "nanomod_acceptance").string();
  app.add_option("--only", only, "criterion numbers to run (default: all)");
  app.add_option("--work", work, "scratch directory");
  CLI11_PARSE(app, argc, argv);

  const fs::path dir = fs::absolute(work);
  fs::remove_all(dir);
  fs::create_directories(dir);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"random logic routing", [&] { return criterion_1(dir); }},
      {"print time", [&] { return criterion_2(dir); }},
      {"vision bound", criterion_3},
      {"router oracle", criterion_4},
      {"assignment oracle", criterion_5},
      {"short yield", criterion_6},
      {"physics spot values", criterion_7},
      {"flip-flop and diff-pair", [&] { return criterion_8(dir); }},
      {"fingerprint uniqueness", criterion_9},
      {"determinism", [&] { return criterion_10(dir); }},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), number) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("%s %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", number, criteria[i].first.c_str(),
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}

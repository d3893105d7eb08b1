#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "nanomod/bench.hpp"
#include "nanomod/json_io.hpp"
#include "nanomod/pipeline.hpp"
#include "nanomod/svg.hpp"

namespace fs = std::filesystem;
using namespace nanomod;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nanomod_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Json diffpair_manifest(const std::string& out) {
  return Json{{"bench", Json{{"scenario", "diffpair"}}},
              {"seeds", Json{{"deposit", 1}, {"defect", 2}, {"vision", 3}, {"shorts", 4}}},
              {"out", out}};
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(NANOMOD_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RoutedLayout one_wire_layout() {
  RoutedLayout l;
  l.region = {10'000, 10'000};
  l.pitch = 50;
  Path p;
  p.net_id = "N";
  p.branches = {{{25, 25}, {75, 25}, {125, 25}, {125, 75}}};
  p.widths = {{150, 150, 150, 150}};
  l.paths.push_back(p);
  l.total_wire_length = 150;
  return l;
}

}  // namespace

TEST_CASE("layout JSON round trip") {
  const RoutedLayout l = one_wire_layout();
  const RoutedLayout back = layout_from_json(parse_json(dump_json(layout_to_json(l)), "layout"));
  CHECK(back == l);
}

TEST_CASE("render: one polyline per constant-width run") {
  const KindLibrary kinds = standard_kinds();
  const std::string svg = render_svg(one_wire_layout(), kinds);
  CHECK(count(svg, "<polyline") == 1);
  CHECK(svg == render_svg(one_wire_layout(), kinds));

  RoutedLayout empty;
  empty.region = {10'000, 10'000};
  empty.pitch = 50;
  const std::string frame = render_svg(empty, kinds);
  CHECK(count(frame, "<polyline") == 0);
  CHECK(count(frame, "<polygon") == 0);
  CHECK(count(frame, "<rect") == 1);
  CHECK_THROWS_AS(render_svg(empty, kinds, 0.0), ConfigError);
}

TEST_CASE("threshold checks") {
  const Thresholds max_print{{"max_print_time_s", 600.0}};
  const auto ok = check_thresholds({{"print_time_s", 500.0}}, max_print);
  REQUIRE(ok.size() == 1);
  CHECK(ok[0].pass);
  const auto low = check_thresholds({{"routed_fraction", 0.4}}, {{"min_routed_fraction", 0.5}});
  CHECK_FALSE(all_pass(low));
  CHECK(all_pass(check_thresholds({{"routed_fraction", 0.4}}, {})));
  CHECK_FALSE(all_pass(check_thresholds({{"max_frequency_hz", std::nullopt}}, {{"min_max_frequency_hz", 1.0}})));
  CHECK_FALSE(all_pass(check_thresholds({}, {{"min_routed_fraction", 0.0}})));
  CHECK_THROWS_AS(check_thresholds({}, {{"min_bogus", 1.0}}), ConfigError);
  CHECK_THROWS_AS(check_thresholds({}, {{"routed_fraction", 1.0}}), ConfigError);
  CHECK(format_checks(ok).find("max_print_time_s") != std::string::npos);
}

TEST_CASE("missing seed is refused before any stage runs") {
  const fs::path dir = scratch("noseed");
  Json j = diffpair_manifest("out");
  j["seeds"].erase("vision");
  const RunManifest m = manifest_from_json(j, dir);
  try {
    cmd_run(m);
    FAIL("expected refusal");
  } catch (const StageError& e) {
    CHECK(e.stage() == "manifest");
    CHECK(std::string(e.what()).find("vision") != std::string::npos);
  }
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("manifest parsing errors") {
  CHECK_THROWS_AS(manifest_from_json(Json::array(), "."), ParseError);
  CHECK_THROWS_AS(manifest_from_json(Json{{"bench", Json{{"scenario", "diffpair"}}}, {"colour", 1}}, "."), ParseError);
  CHECK_THROWS_AS(manifest_from_json(Json{{"seeds", Json::object()}}, "."), ConfigError);
}

TEST_CASE("stages run in isolation equal the full run") {
  const RunManifest m = manifest_from_json(diffpair_manifest("out"), scratch("iso"));
  const RunResult full = run_pipeline(m);
  const ResolvedInputs in = resolve_inputs(m);
  const std::string sub = stage_deposit(in.spec, in.netlist, m.policy, 1, 2);
  const std::string obs = stage_observe(in.spec, sub, 1.0, 3, false);
  const std::string asg = stage_assign(in.netlist, obs);
  const std::string lay = stage_route(in.spec, in.netlist, obs, asg);
  const std::string rep = stage_report(in.spec, in.netlist, obs, asg, lay, 4, m.shorts_trials);
  CHECK(full.files.at("substrate.json") == sub);
  CHECK(full.files.at("observed.json") == obs);
  CHECK(full.files.at("assignment.json") == asg);
  CHECK(full.files.at("layout.json") == lay);
  CHECK(full.files.at("report.json") == rep);
  CHECK(full.files.at("layout.svg") == stage_render(lay, 1.0));
}

TEST_CASE("stage errors name the stage") {
  const ResolvedInputs in = resolve_inputs(manifest_from_json(diffpair_manifest("out"), "."));
  CHECK_THROWS_AS(stage_observe(in.spec, "{not json", 1.0, 3, false), ParseError);
}

TEST_CASE("diffpair run writes six identical artifacts twice") {
  const fs::path dir = scratch("diffpair");
  const RunResult a = cmd_run(manifest_from_json(diffpair_manifest("a"), dir));
  const RunResult b = cmd_run(manifest_from_json(diffpair_manifest("b"), dir));
  CHECK(a.pass);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) files += e.is_regular_file();
  CHECK(files == 6);
  for (const auto& name : artifact_names()) CHECK(read_file(dir / "a" / name) == read_file(dir / "b" / name));
}

TEST_CASE("command line binary") {
  const fs::path dir = scratch("cli");
  write_file(dir / "manifest.json", dump_json(diffpair_manifest("out")));
  CHECK(run_cli("run " + (dir / "manifest.json").string()) == 0);
  for (const auto& name : artifact_names()) CHECK(fs::exists(dir / "out" / name));

  Json no_seed = diffpair_manifest("refused");
  no_seed["seeds"].erase("shorts");
  write_file(dir / "no_seed.json", dump_json(no_seed));
  CHECK(run_cli("run " + (dir / "no_seed.json").string()) == 2);
  CHECK_FALSE(fs::exists(dir / "refused"));

  const std::string report = (dir / "out" / "report.json").string();
  write_file(dir / "loose.json", R"({"max_print_time_s": 600})");
  write_file(dir / "strict.json", R"({"min_routed_fraction": 1.5})");
  CHECK(run_cli("check " + report) == 0);
  CHECK(run_cli("check " + report + " --thresholds " + (dir / "loose.json").string()) == 0);
  CHECK(run_cli("check " + report + " --thresholds " + (dir / "strict.json").string()) == 1);

  const std::string layout = (dir / "out" / "layout.json").string();
  CHECK(run_cli("render " + layout + " --out " + (dir / "r1.svg").string()) == 0);
  CHECK(run_cli("render " + layout + " --out " + (dir / "r2.svg").string()) == 0);
  CHECK(read_file(dir / "r1.svg") == read_file(dir / "r2.svg"));
  CHECK(read_file(dir / "r1.svg") == read_file(dir / "out" / "layout.svg"));

  CHECK(run_cli("check " + (dir / "missing.json").string()) == 2);
  CHECK(run_cli("nonsense") == 2);
}

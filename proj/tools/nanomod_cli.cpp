// Command-line driver. Exit status: 0 success / all thresholds pass,
// 1 a threshold failed, 2 bad input or a stage error.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nanomod/bench.hpp"
#include "nanomod/errors.hpp"
#include "nanomod/json_io.hpp"
#include "nanomod/pipeline.hpp"

namespace fs = std::filesystem;
using namespace nanomod;

namespace {

struct InputFlags {
  std::string spec;
  std::string netlist;
  std::string bench;
  std::vector<std::string> overrides;  // key=value

  void add_to(CLI::App* app) {
    app->add_option("--spec", spec, "process spec file (key = value lines)");
    app->add_option("--netlist", netlist, "netlist JSON");
    app->add_option("--bench", bench, "bench scenario name instead of a netlist");
    app->add_option("--set", overrides, "spec override key=value, applied last");
  }

  RunManifest manifest() const {
    RunManifest m;
    m.spec_path = spec;
    m.netlist_path = netlist;
    if (!bench.empty()) m.bench = Json{{"scenario", bench}};
    if (netlist.empty() == bench.empty()) throw ConfigError("give exactly one of --netlist and --bench");
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got " + o);
      m.spec_overrides.emplace_back(o.substr(0, eq), o.substr(eq + 1));
    }
    return m;
  }
};

Json read_json(const std::string& path) { return parse_json(read_file(path), path); }

int report_checks(const std::vector<CheckRow>& rows) {
  std::cout << format_checks(rows);
  const bool ok = all_pass(rows);
  std::cout << (ok ? "all thresholds pass" : "threshold check failed") << " (" << rows.size() << " checked)\n";
  return ok ? 0 : 1;
}

void emit(const std::string& out, const std::string& contents) {
  if (out.empty() || out == "-") {
    std::cout << contents;
  } else {
    write_file(out, contents);
  }
}

std::uint64_t need(const std::optional<std::uint64_t>& v, const char* flag) {
  if (!v) throw ConfigError(std::string("missing ") + flag);
  return *v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nanomodular fabrication pipeline: deposit, observe, assign, route, report"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "all stages from a manifest; writes six artifacts");
  std::string manifest_path;
  InputFlags run_in;
  Seeds run_seeds;
  std::string run_out, run_thresholds;
  bool run_truth = false;
  run->add_option("manifest", manifest_path, "run manifest JSON");
  run_in.add_to(run);
  run->add_option("--seed-deposit", run_seeds.deposit);
  run->add_option("--seed-defect", run_seeds.defect);
  run->add_option("--seed-vision", run_seeds.vision);
  run->add_option("--seed-shorts", run_seeds.shorts);
  run->add_option("--out", run_out, "output directory");
  run->add_flag("--keep-truth", run_truth, "keep ground-truth links in observed.json");
  run->add_option("--thresholds", run_thresholds, "thresholds JSON");

  // deposit
  auto* dep = app.add_subcommand("deposit", "print components onto a substrate");
  InputFlags dep_in;
  std::optional<std::uint64_t> dep_seed, dep_defect;
  std::string dep_policy = "lattice", dep_out;
  dep_in.add_to(dep);
  dep->add_option("--seed-deposit", dep_seed)->required();
  dep->add_option("--seed-defect", dep_defect)->required();
  dep->add_option("--policy", dep_policy)->check(CLI::IsMember({"lattice", "poisson"}));
  dep->add_option("--out", dep_out, "substrate JSON path ('-' for stdout)");

  // observe
  auto* obs = app.add_subcommand("observe", "simulated vision over a substrate");
  InputFlags obs_in;
  std::string obs_substrate, obs_out;
  std::optional<std::uint64_t> obs_seed;
  double obs_accuracy = 1.0;
  bool obs_truth = false;
  obs_in.add_to(obs);
  obs->add_option("--substrate", obs_substrate)->required();
  obs->add_option("--seed-vision", obs_seed)->required();
  obs->add_option("--accuracy", obs_accuracy, "defect classification accuracy");
  obs->add_flag("--keep-truth", obs_truth);
  obs->add_option("--out", obs_out);

  // assign
  auto* asg = app.add_subcommand("assign", "map logical instances onto observed components");
  InputFlags asg_in;
  std::string asg_observed, asg_out;
  asg_in.add_to(asg);
  asg->add_option("--observed", asg_observed)->required();
  asg->add_option("--out", asg_out);

  // route
  auto* rte = app.add_subcommand("route", "route every net of an assignment");
  InputFlags rte_in;
  std::string rte_observed, rte_assignment, rte_out;
  rte_in.add_to(rte);
  rte->add_option("--observed", rte_observed)->required();
  rte->add_option("--assignment", rte_assignment)->required();
  rte->add_option("--out", rte_out);

  // report
  auto* rep = app.add_subcommand("report", "fabrication metrics of a routed layout");
  InputFlags rep_in;
  std::string rep_observed, rep_assignment, rep_layout, rep_out, rep_thresholds;
  std::optional<std::uint64_t> rep_seed;
  std::uint64_t rep_trials = 1000;
  rep_in.add_to(rep);
  rep->add_option("--observed", rep_observed)->required();
  rep->add_option("--assignment", rep_assignment)->required();
  rep->add_option("--layout", rep_layout)->required();
  rep->add_option("--seed-shorts", rep_seed)->required();
  rep->add_option("--trials", rep_trials, "short Monte Carlo trials");
  rep->add_option("--thresholds", rep_thresholds);
  rep->add_option("--out", rep_out);

  // check
  auto* chk = app.add_subcommand("check", "compare a report against thresholds");
  std::string chk_report, chk_thresholds;
  chk->add_option("report", chk_report)->required();
  chk->add_option("--thresholds", chk_thresholds, "thresholds JSON (default: none)");

  // render
  auto* ren = app.add_subcommand("render", "draw a layout as SVG");
  std::string ren_layout, ren_out;
  double ren_scale = 1.0;
  ren->add_option("layout", ren_layout)->required();
  ren->add_option("--scale", ren_scale, "SVG units per micrometre");
  ren->add_option("--out", ren_out);

  // bench
  auto* ben = app.add_subcommand("bench", "run built-in scenarios and gate on their thresholds");
  std::vector<std::string> ben_names;
  std::string ben_out = "bench_out";
  bool ben_emit = false;
  ben->add_option("scenarios", ben_names, "scenario names (default: all but random_logic_10k)");
  ben->add_option("--out", ben_out, "output directory");
  ben->add_flag("--emit-only", ben_emit, "write netlist.json and manifest.json without running");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      RunManifest m;
      if (!manifest_path.empty()) {
        m = manifest_from_json(read_json(manifest_path), fs::path(manifest_path).parent_path());
        if (!run_in.spec.empty()) m.spec_path = fs::absolute(run_in.spec).string();
        for (const auto& o : run_in.overrides) {
          const auto eq = o.find('=');
          if (eq == std::string::npos) throw ConfigError("--set expects key=value, got " + o);
          m.spec_overrides.emplace_back(o.substr(0, eq), o.substr(eq + 1));
        }
        if (!run_in.netlist.empty() || !run_in.bench.empty()) {
          throw ConfigError("--netlist/--bench conflict with a manifest");
        }
      } else {
        m = run_in.manifest();
        if (run_out.empty()) run_out = "out";
      }
      if (run_seeds.deposit) m.seeds.deposit = run_seeds.deposit;
      if (run_seeds.defect) m.seeds.defect = run_seeds.defect;
      if (run_seeds.vision) m.seeds.vision = run_seeds.vision;
      if (run_seeds.shorts) m.seeds.shorts = run_seeds.shorts;
      if (!run_out.empty()) m.out = fs::absolute(run_out).string();
      if (run_truth) m.keep_truth = true;
      if (!run_thresholds.empty()) m.thresholds = thresholds_from_json(read_json(run_thresholds));
      const RunResult res = cmd_run(m);
      std::cout << "wrote " << artifact_names().size() << " artifacts to " << (m.base_dir / m.out).string() << "\n";
      return report_checks(res.checks);
    }
    if (*dep) {
      const ResolvedInputs in = resolve_inputs(dep_in.manifest());
      emit(dep_out, stage_deposit(in.spec, in.netlist, dep_policy == "poisson" ? LayoutPolicy::poisson
                                                                                : LayoutPolicy::lattice,
                                  need(dep_seed, "--seed-deposit"), need(dep_defect, "--seed-defect")));
      return 0;
    }
    if (*obs) {
      const ResolvedInputs in = resolve_inputs(obs_in.manifest());
      emit(obs_out, stage_observe(in.spec, read_file(obs_substrate), obs_accuracy, need(obs_seed, "--seed-vision"),
                                  obs_truth));
      return 0;
    }
    if (*asg) {
      const ResolvedInputs in = resolve_inputs(asg_in.manifest());
      emit(asg_out, stage_assign(in.netlist, read_file(asg_observed)));
      return 0;
    }
    if (*rte) {
      const ResolvedInputs in = resolve_inputs(rte_in.manifest());
      emit(rte_out, stage_route(in.spec, in.netlist, read_file(rte_observed), read_file(rte_assignment)));
      return 0;
    }
    if (*rep) {
      const ResolvedInputs in = resolve_inputs(rep_in.manifest());
      const std::string text = stage_report(in.spec, in.netlist, read_file(rep_observed), read_file(rep_assignment),
                                            read_file(rep_layout), need(rep_seed, "--seed-shorts"), rep_trials);
      emit(rep_out, text);
      if (rep_thresholds.empty()) return 0;
      return report_checks(check_thresholds(report_metrics_from_json(parse_json(text, "report")),
                                            thresholds_from_json(read_json(rep_thresholds))));
    }
    if (*chk) {
      const auto metrics = report_metrics_from_json(read_json(chk_report));
      const Thresholds t = chk_thresholds.empty() ? Thresholds{} : thresholds_from_json(read_json(chk_thresholds));
      return report_checks(check_thresholds(metrics, t));
    }
    if (*ren) {
      emit(ren_out, stage_render(read_file(ren_layout), ren_scale));
      return 0;
    }
    if (*ben) {
      if (ben_names.empty()) {
        for (const auto& n : bench_scenario_names()) {
          if (n != "random_logic_10k") ben_names.push_back(n);
        }
      }
      bool ok = true;
      for (const auto& name : ben_names) {
        const BenchScenario sc = bench_scenario(name);
        const fs::path dir = fs::absolute(fs::path(ben_out) / name);
        fs::create_directories(dir);
        Json thresholds = Json::object();
        for (const auto& [k, v] : sc.thresholds) thresholds[k] = v;
        const Json manifest{{"bench", Json{{"scenario", name}}},
                            {"seeds", Json{{"deposit", sc.seed}, {"defect", sc.seed + 1}, {"vision", sc.seed + 2},
                                           {"shorts", sc.seed + 3}}},
                            {"out", "."},
                            {"thresholds", thresholds}};
        write_file(dir / "netlist.json", dump_json(netlist_to_json(sc.netlist)));
        write_file(dir / "manifest.json", dump_json(manifest));
        if (ben_emit) continue;
        std::cout << "== " << name << "\n";
        const RunResult res = cmd_run(manifest_from_json(manifest, dir));
        ok = report_checks(res.checks) == 0 && ok;
      }
      return ok ? 0 : 1;
    }
  } catch (const StageError& e) {
    std::cerr << "error [" << e.stage() << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

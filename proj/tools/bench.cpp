// bench: run, tune and verify S-SVRG experiments from the command line.
//
//   bench run    --problem pca --method s-svrg-bb --retraction jd --out results/
//   bench tune   --method s-svrg --step fixed:1 --grid 0.4,0.8,1.2,1.6
//   bench verify [--only 1,3,7] [--large-scale]
//
// Every experiment flag can also come from a flat key=value config file
// (--config); flags given on the command line win.

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "ssvrg/bench.hpp"
#include "ssvrg/checks.hpp"

namespace {

struct ExperimentFlags {
  std::string config;
  std::map<std::string, std::string> values;  // key -> raw value
  std::map<std::string, CLI::Option*> options;
};

void add_experiment_flags(CLI::App* app, ExperimentFlags& f) {
  app->add_option("--config", f.config, "flat key=value file; flags override it")->check(CLI::ExistingFile);
  struct Flag {
    const char* key;
    const char* help;
  };
  const Flag flags[] = {
      {"problem", "pca | mc"},
      {"method", "s-svrg | s-svrg-bb | s-sgd | rgd"},
      {"retraction", "exp | exp1 | exp2 | qr | pd | wy | jd | gp | gr"},
      {"phi", "jd phi: linear | piecewise"},
      {"d", "ambient dimension"},
      {"n", "number of components"},
      {"r", "rank"},
      {"rho", "metric parameter (0: Grassmann)"},
      {"cond", "MC condition number"},
      {"step", "fixed:<tau> | bb[:<tau0>] | thm1:<mu>,<kappa>"},
      {"tau-min", "BB lower safeguard"},
      {"tau-max", "BB upper safeguard"},
      {"batch-frac", "|B| / n"},
      {"inner-k", "inner iterations per epoch, or auto (5 / batch-frac)"},
      {"max-epochs", "epoch limit"},
      {"grad-tol", "stop when ||grad f|| falls below this"},
      {"output", "last | psk | linear"},
      {"alpha", "weight for the linear output mode"},
      {"runs", "number of seeded runs"},
      {"seed", "base seed; run i uses seed + i"},
      {"data-seed", "seed of the synthetic instance (default: seed)"},
      {"warm-start", "true | false"},
      {"sgd-steps", "S-SGD horizon N (0: max-epochs * n)"},
      {"sgd-tilde-d", "S-SGD step constant"},
      {"jobs", "worker threads"},
      {"data", "PCA matrix (.csv or binary) or MC triples file"},
      {"out", "output directory for CSVs"},
  };
  for (const Flag& fl : flags) {
    f.options[fl.key] = app->add_option(std::string("--") + fl.key, f.values[fl.key], fl.help);
  }
}

ssvrg::ExperimentSpec build_spec(const ExperimentFlags& f) {
  ssvrg::ExperimentSpec spec;
  if (!f.config.empty()) ssvrg::apply_config_file(spec, f.config);
  for (const auto& [key, opt] : f.options) {
    if (opt->count() > 0) ssvrg::apply_setting(spec, key, f.values.at(key));
  }
  return spec;
}

int cmd_run(const ExperimentFlags& f) {
  const ssvrg::ExperimentSpec spec = build_spec(f);
  const ssvrg::ExperimentResult res = ssvrg::run_experiment(spec);
  fmt::print("{}", ssvrg::repro_header(spec));
  fmt::print("{}", ssvrg::emit_table({res.summary}));
  for (const ssvrg::RunOutcome& r : res.runs) {
    if (!r.error.empty()) fmt::print(stderr, "run {}: {}\n", r.run_id, r.error);
  }
  if (!spec.out_dir.empty()) fmt::print("wrote {}/summary.csv, runs.csv and {} traces\n", spec.out_dir, res.runs.size());
  return res.summary.failed == 0 ? 0 : 2;
}

int cmd_tune(const ExperimentFlags& f, const std::string& grid) {
  const ssvrg::ExperimentSpec spec = build_spec(f);
  const ssvrg::TuneResult res = ssvrg::grid_tune(spec, ssvrg::parse_grid(grid));
  fmt::print("{}", ssvrg::emit_table(res.grid));
  fmt::print("tau* = {:g}\n", res.tau_star);
  return 0;
}

int cmd_verify(const std::vector<int>& only, bool large_scale, int large_runs, int jobs) {
  ssvrg::CheckOptions opt;
  opt.large_scale = large_scale;
  opt.large_runs = large_runs;
  opt.jobs = jobs;
  opt.on_result = [](const ssvrg::CheckResult& r) {
    fmt::print("{}\n", ssvrg::format_result(r));
    std::fflush(stdout);
  };
  int failed = 0;
  for (const ssvrg::CheckResult& r : ssvrg::run_checks(opt, only)) {
    if (r.verdict == ssvrg::Verdict::Fail) ++failed;
  }
  fmt::print("{} check(s) failed\n", failed);
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vector-transport-free stochastic Riemannian optimization benchmarks"};
  app.require_subcommand(1);

  ExperimentFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "run one experiment over several seeds");
  add_experiment_flags(run, run_flags);

  ExperimentFlags tune_flags;
  std::string grid;
  CLI::App* tune = app.add_subcommand("tune", "grid-search the step size");
  add_experiment_flags(tune, tune_flags);
  tune->add_option("--grid", grid, "comma-separated tau values")->required();

  std::vector<int> only;
  bool large_scale = false;
  int large_runs = 5;
  int jobs = 1;
  CLI::App* verify = app.add_subcommand("verify", "run the acceptance checks");
  verify->add_option("--only", only, "check ids")->delimiter(',');
  verify->add_flag("--large-scale", large_scale, "include the large PCA spot check");
  verify->add_option("--large-runs", large_runs, "runs for the large spot check");
  verify->add_option("--jobs", jobs, "worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_flags);
    if (tune->parsed()) return cmd_tune(tune_flags, grid);
    if (verify->parsed()) return cmd_verify(only, large_scale, large_runs, jobs);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}

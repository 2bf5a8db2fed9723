// glfuse command line: fit, simulate, diagnose, evaluate.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "glfuse/errors.hpp"
#include "glfuse/io.hpp"
#include "glfuse/pipeline.hpp"

using namespace glfuse;

namespace {

// Flags given on the command line win over the config file.
struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  // fit
  std::string panel, source;
  std::vector<std::string> models;
  std::size_t chains = 0, iters = 0, burnin = 0, thin = 0;
  double level = 0.0;
  bool save_draws = false;
  // simulate
  int case_id = 0;
  std::string specs, preset, compare, v_pool, delta_scope;
  std::vector<int> rows;
  std::size_t replicates = 0, sources = 0;
  bool resume = false;
  // diagnose / evaluate
  std::string draws, estimates, truths;
};

RunConfig build(const std::string& command, const Flags& f, CLI::App* sub) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
  if (!c.command.empty() && c.command != command) {
    throw ConfigError(fmt::format("config is for '{}', not '{}'", c.command, command));
  }
  c.command = command;
  auto given = [&](const char* name) {
    const CLI::Option* o = sub->get_option_no_throw(name);
    return o != nullptr && o->count() > 0;
  };
  if (given("--seed")) {
    c.seed = f.seed;
    c.seed_set = true;
  }
  if (given("--out")) c.out_dir = f.out;
  if (given("--panel")) c.panel_path = f.panel;
  if (given("--source")) c.source = f.source;
  if (given("--model")) c.models = f.models;
  if (given("--models")) c.models = f.models;
  if (given("--chains")) c.settings.n_chains = f.chains;
  if (given("--iters")) c.settings.n_iter = f.iters;
  if (given("--burnin")) c.settings.n_burnin = f.burnin;
  if (given("--thin")) c.settings.thin = f.thin;
  if (given("--level")) c.level = f.level;
  if (given("--save-draws")) c.save_draws = f.save_draws;
  if (given("--case")) c.case_id = f.case_id;
  if (given("--specs")) c.specs = f.specs;
  if (given("--rows")) c.rows = f.rows;
  if (given("--replicates")) c.replicates = f.replicates;
  if (given("--preset")) c.preset = f.preset;
  if (given("--compare")) c.compare = f.compare;
  if (given("--sources")) c.n_sources = f.sources;
  if (given("--v-pool")) c.v_pool_path = f.v_pool;
  if (given("--delta-scope")) c.delta_scope = f.delta_scope;
  if (given("--resume")) c.resume = f.resume;
  if (given("--draws")) c.draws_dir = f.draws;
  if (given("--estimates")) c.estimates_path = f.estimates;
  if (given("--truths")) c.truths_path = f.truths;
  c.settings.seed = c.seed;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Global-local shrinkage models for fusing small-area estimates from several sources"};
  app.set_version_flag("--version", std::string(GLFUSE_VERSION));
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON config (a manifest.json works too)")->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "random seed (required for fit and simulate)");
    sub->add_option("--out", f.out, "output directory");
  };

  auto* fit = app.add_subcommand("fit", "fit models to a panel of source estimates");
  common(fit);
  fit->add_option("--panel", f.panel, "CSV with area,source,estimate,se");
  fit->add_option("--model", f.models, "m11a m11b m1a m1b m12 one-source (repeatable)")->delimiter(',');
  fit->add_option("--source", f.source, "source for one-source fits (name or 1-based index)");
  fit->add_option("--chains", f.chains, "number of chains");
  fit->add_option("--iters", f.iters, "iterations per chain, burn-in included");
  fit->add_option("--burnin", f.burnin, "burn-in iterations");
  fit->add_option("--thin", f.thin, "keep every k-th draw");
  fit->add_option("--level", f.level, "credible interval level");
  fit->add_flag("--save-draws", f.save_draws, "write mu and eta draws per chain");

  auto* sim = app.add_subcommand("simulate", "run the simulation study for one case");
  common(sim);
  sim->add_option("--case", f.case_id, "case 1..6");
  sim->add_option("--specs", f.specs, "'all' or a spec grid file");
  sim->add_option("--rows", f.rows, "spec rows to run (default all)")->delimiter(',');
  sim->add_option("--replicates", f.replicates, "replicates per spec (default from preset)");
  sim->add_option("--models", f.models, "models to compare")->delimiter(',');
  sim->add_option("--preset", f.preset, "desk or paper");
  sim->add_option("--compare", f.compare, "two-source or one-vs-two");
  sim->add_option("--sources", f.sources, "sources per area (other than the pool's count switches to bootstrap V)");
  sim->add_option("--v-pool", f.v_pool, "panel file whose variances form the V pool");
  sim->add_option("--delta-scope", f.delta_scope, "unit or panel");
  sim->add_flag("--resume", f.resume, "continue from the journal in --out");

  auto* diag = app.add_subcommand("diagnose", "split R-hat of saved draws");
  common(diag);
  diag->add_option("--draws", f.draws, "directory of chain_<k>.csv files");

  auto* eval = app.add_subcommand("evaluate", "deviation measures of estimates against truths");
  common(eval);
  eval->add_option("--estimates", f.estimates, "CSV with area and estimate (or mean) columns");
  eval->add_option("--truths", f.truths, "CSV with area and truth (or value) columns");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) {
      run_fit(build("fit", f, fit));
    } else if (sim->parsed()) {
      const auto res = run_simulation(build("simulate", f, sim));
      std::size_t failed = 0;
      for (const auto& spec : res.cells)
        for (const auto& rep : spec)
          for (const auto& r : rep) failed += r.score ? 0 : 1;
      if (failed) std::cerr << fmt::format("warning: {} fits failed, see scores.csv\n", failed);
    } else if (diag->parsed()) {
      const auto report = run_diagnose(build("diagnose", f, diag));
      std::cout << "parameter,rhat\n";
      for (std::size_t k = 0; k < report.values.size(); ++k) {
        std::cout << fmt::format("{},{:.4f}\n", report.parameters[k], report.values[k]);
      }
      std::cout << (report.pass() ? "all below " : "some at or above ") << report.threshold << '\n';
      return report.pass() ? 0 : 3;
    } else if (eval->parsed()) {
      const auto s = run_evaluate(build("evaluate", f, eval));
      std::cout << fmt::format("arb,asrb,aad,asd\n{},{},{},{}\n", s.arb, s.asrb, s.aad, s.asd);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

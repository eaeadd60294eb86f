// qvp: command-line front end.
//
//   qvp fit      --input data.csv --target y [--sampler qvp|ncqvp|asis|bqr] ...
//   qvp simulate --dgp 1 --nsim 50 ...
//   qvp forecast --input system.csv --h 6 ...
//   qvp qirf     --input system.csv --shock 2 --responder 1 ...
//   qvp stress   --input system.csv --scenario scenario.csv ...
//   qvp diagnose --input out/draws
//
// Every flag sets the RunConfig field of the same name. --config loads a
// config.json written by an earlier run; flags given alongside it override.

#include <cstring>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qvp/commands.hpp"

namespace {

void add_shared_options(CLI::App& app, qvp::RunConfig& c) {
  app.add_option("--input", c.input, "input CSV (diagnose: draws directory)");
  app.add_option("--output", c.output, "output directory (default: $QVP_OUTPUT_ROOT/<command>)");
  app.add_option("--seed", c.seed, "random seed");
  app.add_option("--threads", c.threads, "worker threads for chains (0 = hardware)");
}

void add_sampler_options(CLI::App& app, qvp::RunConfig& c) {
  app.add_option("--quantiles", c.quantiles, "number of grid levels q/(Q+1)");
  app.add_option("--taus", c.taus, "explicit quantile levels")->delimiter(',');
  app.add_option("--sampler", c.sampler, "qvp | ncqvp | asis | bqr");
  app.add_option("--chains", c.chains, "chains");
  app.add_option("--burnin", c.burnin, "burn-in iterations per chain");
  app.add_option("--draws", c.draws, "kept draws per chain");
  app.add_option("--thin", c.thin, "thinning interval");
  app.add_flag("--alpha-difference-prior", c.alpha_difference_prior, "fused prior on intercept differences (qvp)");
  app.add_option("--savs", c.savs, "off | draws | mean");
  app.add_flag("--interpolate", c.interpolate, "linear-in-tau coefficients for off-grid levels");
}

}  // namespace

int main(int argc, char** argv) {
  qvp::RunConfig cfg;
  // --config is applied first so that explicit flags take precedence.
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::strcmp(argv[i], "--config") == 0) {
      try {
        cfg = qvp::run_config_from_json(qvp::io::read_json(argv[i + 1]));
        cfg.output.clear();
      } catch (const std::exception& e) {
        std::cerr << "{\"status\":\"error\",\"kind\":\"" << qvp::error_kind(e) << "\",\"message\":"
                  << qvp::io::json(e.what()).dump() << "}\n";
        return qvp::exit_code(e);
      }
    }
  }

  CLI::App app{"Quantile-indexed joint Bayesian quantile regression"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "config.json of an earlier run")->check(CLI::ExistingFile);

  auto* fit = app.add_subcommand("fit", "fit a quantile regression to a CSV");
  add_shared_options(*fit, cfg);
  add_sampler_options(*fit, cfg);
  fit->add_option("--target", cfg.target, "response column (name or 1-based index)");

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo study on a simulation design");
  add_shared_options(*sim, cfg);
  add_sampler_options(*sim, cfg);
  sim->add_option("--dgp", cfg.dgp, "design 1..5");
  sim->add_option("--nsim", cfg.nsim, "replicates");
  sim->add_option("--observations,-T", cfg.observations, "training sample size");
  sim->add_option("--correlation", cfg.correlation, "constant design correlation in [0, 1)");
  sim->add_option("--test-size", cfg.test_size, "out-of-sample observations per replicate");
  sim->add_option("--models", cfg.models, "qvp,ncqvp,ncqvp_savs,asis,asis_savs,bqr")->delimiter(',');

  auto* fc = app.add_subcommand("forecast", "expanding-window QVAR backtest and forecast fan");
  fc->set_help_flag("--help", "print this help message and exit");
  add_shared_options(*fc, cfg);
  add_sampler_options(*fc, cfg);
  fc->add_option("--horizons", cfg.horizons, "forecast horizons")->delimiter(',');
  int h_max = 0;
  fc->add_option("--h", h_max, "shorthand for --horizons 1,2,...,h");
  fc->add_option("--initial", cfg.initial, "initial in-sample window");
  fc->add_option("--step", cfg.step, "origin step");
  fc->add_option("--paths", cfg.paths, "simulated paths per origin");
  fc->add_option("--interval", cfg.interval, "central interval for coverage and fans");
  fc->add_option("--models", cfg.models, "models to compare (bqr enables relative scores)")->delimiter(',');

  auto* irf = app.add_subcommand("qirf", "quantile impulse responses");
  add_shared_options(*irf, cfg);
  add_sampler_options(*irf, cfg);
  irf->add_option("--shock", cfg.shock, "shocked variable (1-based)");
  irf->add_option("--responder", cfg.responder, "responding variable (1-based)");
  irf->add_option("--shock-size", cfg.shock_size, "impulse size (default: one sample sd)");
  irf->add_option("--fixed-level", cfg.fixed_level, "level of the non-responding variables");
  irf->add_option("--irf-horizon", cfg.irf_horizon, "last horizon");
  irf->add_option("--band", cfg.band, "credible band");
  irf->add_option("--max-draws", cfg.max_draws, "cap on posterior draws (0 = all)");

  auto* st = app.add_subcommand("stress", "scenario paths against the median baseline");
  add_shared_options(*st, cfg);
  add_sampler_options(*st, cfg);
  st->add_option("--scenario", cfg.scenario, "scenario CSV (steps x variables, empty = free)");
  st->add_option("--paths", cfg.paths, "simulated paths");
  st->add_option("--band", cfg.band, "credible band");

  auto* dg = app.add_subcommand("diagnose", "convergence diagnostics of saved draws");
  add_shared_options(*dg, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  cfg.command = app.get_subcommands().front()->get_name();
  if (h_max > 0) {
    cfg.horizons.clear();
    for (int h = 1; h <= h_max; ++h) cfg.horizons.push_back(h);
  }

  try {
    const auto dir = qvp::run(cfg, std::cerr);
    std::cout << dir.string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "{\"status\":\"error\",\"kind\":\"" << qvp::error_kind(e) << "\",\"message\":"
              << qvp::io::json(e.what()).dump() << "}\n";
    return qvp::exit_code(e);
  }
}

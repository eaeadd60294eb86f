#pragma once

// Run configuration shared by every command. Each field maps to one CLI
// flag; the resolved configuration is written to the output directory as
// config.json and can be fed back with --config to reproduce a run.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "ald.hpp"
#include "error.hpp"
#include "qvar.hpp"
#include "simulation.hpp"

namespace qvp {

struct RunConfig {
  std::string command;
  std::string input;
  std::string output;
  std::string target = "1";  ///< response column (header name or 1-based index)

  // grid
  int quantiles = 19;
  std::vector<double> taus;  ///< explicit levels; overrides `quantiles` when non-empty

  // sampler
  std::string sampler = "qvp";
  int chains = 4;
  int burnin = 2000;
  int draws = 3000;
  int thin = 1;
  std::uint64_t seed = 1;
  int threads = 0;

  // model flags
  bool alpha_difference_prior = false;
  std::string savs = "off";  ///< off | draws | mean
  bool interpolate = false;

  // simulate
  int dgp = 1;
  int nsim = 50;
  int observations = 300;
  double correlation = 0.0;
  int test_size = 100;
  std::vector<std::string> models;  ///< simulate / forecast comparison set

  // forecast (expanding-window backtest)
  std::vector<int> horizons{1, 3, 6};
  int initial = 96;
  int step = 1;
  int paths = 1000;
  double interval = 0.9;

  // qirf
  int shock = 1;       ///< 1-based variable index
  int responder = 1;   ///< 1-based variable index
  double shock_size = std::numeric_limits<double>::quiet_NaN();  ///< NaN: one sample sd of the shock variable
  double fixed_level = 0.5;
  int irf_horizon = 12;
  double band = 0.9;
  int max_draws = 0;

  // stress
  std::string scenario;

  QuantileGrid grid() const { return taus.empty() ? make_uniform_grid(quantiles) : make_grid(taus); }

  SamplerConfig sampler_config() const {
    SamplerConfig c;
    c.chains = chains;
    c.burnin = burnin;
    c.draws = draws;
    c.thin = thin;
    c.seed = seed;
    c.threads = threads;
    c.alpha_difference_prior = alpha_difference_prior;
    return c;
  }

  void validate() const {
    static const std::vector<std::string> commands{"fit", "simulate", "forecast", "qirf", "stress", "diagnose"};
    if (std::find(commands.begin(), commands.end(), command) == commands.end())
      throw ParameterError("unknown command '" + command + "'");
    if (command != "simulate" && input.empty()) throw ParameterError(command + ": --input is required");
    if (command == "stress" && scenario.empty()) throw ParameterError("stress: --scenario is required");
    if (command == "diagnose") return;
    grid();
    sampler_kind_from_string(sampler);
    savs_mode_from_string(savs);
    sampler_config().validate();
    for (const auto& m : models) study_model_from_string(m);
    if (savs != "off" && sampler != "ncqvp" && sampler != "asis" && command != "simulate" && command != "forecast")
      throw ParameterError("--savs needs --sampler ncqvp or asis");
    if (command == "simulate") {
      if (dgp < 1 || dgp > 5) throw ParameterError("--dgp must be 1..5");
      if (nsim < 1 || observations < 2 || test_size < 1) throw ParameterError("simulate: invalid sizes");
      if (!(correlation >= 0.0 && correlation < 1.0)) throw ParameterError("--correlation must lie in [0, 1)");
    }
    if (command == "forecast") {
      if (horizons.empty()) throw ParameterError("forecast: no horizons");
      for (int h : horizons)
        if (h < 1) throw ParameterError("forecast: horizons must be positive");
      if (initial < 3 || step < 1) throw ParameterError("forecast: invalid window settings");
      if (!(interval > 0.0 && interval < 1.0)) throw ParameterError("--interval must lie in (0, 1)");
    }
    if (command == "forecast" || command == "stress")
      if (paths < 1) throw ParameterError("--paths must be positive");
    if (command == "qirf") {
      if (shock < 1 || responder < 1) throw ParameterError("qirf: variable indices are 1-based");
      if (irf_horizon < 0) throw ParameterError("--irf-horizon must be non-negative");
      if (!std::isnan(shock_size) && !std::isfinite(shock_size)) throw ParameterError("--shock-size must be finite");
    }
    if (!(band > 0.0 && band < 1.0)) throw ParameterError("--band must lie in (0, 1)");
  }
};

inline nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["command"] = c.command;
  j["input"] = c.input;
  j["output"] = c.output;
  j["target"] = c.target;
  j["quantiles"] = c.quantiles;
  j["taus"] = c.taus;
  j["sampler"] = c.sampler;
  j["chains"] = c.chains;
  j["burnin"] = c.burnin;
  j["draws"] = c.draws;
  j["thin"] = c.thin;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["alpha_difference_prior"] = c.alpha_difference_prior;
  j["savs"] = c.savs;
  j["interpolate"] = c.interpolate;
  j["dgp"] = c.dgp;
  j["nsim"] = c.nsim;
  j["observations"] = c.observations;
  j["correlation"] = c.correlation;
  j["test_size"] = c.test_size;
  j["models"] = c.models;
  j["horizons"] = c.horizons;
  j["initial"] = c.initial;
  j["step"] = c.step;
  j["paths"] = c.paths;
  j["interval"] = c.interval;
  j["shock"] = c.shock;
  j["responder"] = c.responder;
  j["shock_size"] = std::isnan(c.shock_size) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(c.shock_size);
  j["fixed_level"] = c.fixed_level;
  j["irf_horizon"] = c.irf_horizon;
  j["band"] = c.band;
  j["max_draws"] = c.max_draws;
  j["scenario"] = c.scenario;
  return j;
}

/// Fields missing from `j` keep their defaults; unknown keys are rejected.
inline RunConfig run_config_from_json(const nlohmann::ordered_json& j, RunConfig c = {}) {
  const nlohmann::ordered_json known = to_json(c);
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) throw ParameterError("config: unknown key '" + key + "'");
  const auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  try {
    get("command", c.command);
    get("input", c.input);
    get("output", c.output);
    get("target", c.target);
    get("quantiles", c.quantiles);
    get("taus", c.taus);
    get("sampler", c.sampler);
    get("chains", c.chains);
    get("burnin", c.burnin);
    get("draws", c.draws);
    get("thin", c.thin);
    get("seed", c.seed);
    get("threads", c.threads);
    get("alpha_difference_prior", c.alpha_difference_prior);
    get("savs", c.savs);
    get("interpolate", c.interpolate);
    get("dgp", c.dgp);
    get("nsim", c.nsim);
    get("observations", c.observations);
    get("correlation", c.correlation);
    get("test_size", c.test_size);
    get("models", c.models);
    get("horizons", c.horizons);
    get("initial", c.initial);
    get("step", c.step);
    get("paths", c.paths);
    get("interval", c.interval);
    get("shock", c.shock);
    get("responder", c.responder);
    if (j.contains("shock_size"))
      c.shock_size = j.at("shock_size").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                  : j.at("shock_size").get<double>();
    get("fixed_level", c.fixed_level);
    get("irf_horizon", c.irf_horizon);
    get("band", c.band);
    get("max_draws", c.max_draws);
    get("scenario", c.scenario);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  return c;
}

}  // namespace qvp

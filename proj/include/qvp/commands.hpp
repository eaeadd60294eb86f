#pragma once

// Command implementations behind the CLI. Each command reads its inputs,
// runs the computation and writes every artifact into one output directory
// together with the resolved configuration.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "convergence.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "qvar.hpp"
#include "run_config.hpp"
#include "sampler.hpp"
#include "savs.hpp"
#include "simulation.hpp"

namespace qvp {

using io::format_double;

namespace detail {

inline const char* const kSchemeNames[4] = {"uniform", "centre", "left", "right"};

inline std::vector<std::string> scheme_columns(const std::string& prefix) {
  std::vector<std::string> out;
  for (const char* s : kSchemeNames) out.push_back(prefix + s);
  return out;
}

inline std::filesystem::path output_dir(const RunConfig& cfg) {
  return cfg.output.empty() ? io::default_output_root() / cfg.command : std::filesystem::path(cfg.output);
}

/// Share of beta parameters below the two R-hat thresholds.
inline io::json convergence_json(const std::vector<io::ParameterSummary>& rows) {
  int n = 0, below_101 = 0, below_11 = 0, undefined = 0;
  double worst = 0.0, min_ess = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    if (r.label.rfind("beta[", 0) != 0) continue;
    ++n;
    if (std::isnan(r.conv.rhat)) {
      ++undefined;
      continue;
    }
    below_101 += r.conv.rhat < 1.01 ? 1 : 0;
    below_11 += r.conv.rhat < 1.1 ? 1 : 0;
    worst = std::max(worst, r.conv.rhat);
    min_ess = std::min(min_ess, r.conv.ess_bulk);
  }
  const double d = n > 0 ? static_cast<double>(n) : 1.0;
  return {{"beta_parameters", n},
          {"rhat_below_1.01", below_101},
          {"rhat_below_1.1", below_11},
          {"share_below_1.01", below_101 / d},
          {"share_below_1.1", below_11 / d},
          {"undefined", undefined},
          {"max_rhat", worst},
          {"min_ess_bulk", std::isfinite(min_ess) ? io::json(min_ess) : io::json(nullptr)}};
}

inline QvarOptions qvar_options(const RunConfig& cfg, const StudyModel& m) {
  QvarOptions o;
  o.kind = m.kind;
  o.sampler = cfg.sampler_config();
  o.interpolate = cfg.interpolate;
  if (m.savs) o.savs = cfg.savs == "off" ? SavsMode::posterior_mean : savs_mode_from_string(cfg.savs);
  return o;
}

inline StudyModel primary_model(const RunConfig& cfg) {
  StudyModel m{cfg.sampler, sampler_kind_from_string(cfg.sampler), cfg.savs != "off"};
  if (m.savs) m.label += "_savs";
  return m;
}

inline QvarModel fit_system(const RunConfig& cfg, const io::CsvTable& t, std::ostream& log) {
  const StudyModel m = primary_model(cfg);
  log << "fitting " << t.header.size() << "-variable QVAR (" << m.label << ") on " << t.values.rows() << " rows\n";
  return fit_qvar(t.values, cfg.grid(), qvar_options(cfg, m), t.header);
}

/// Per-equation posterior summaries of a fitted system.
inline void write_equation_summaries(const std::filesystem::path& dir, const QvarModel& model) {
  for (int i = 0; i < model.m; ++i) {
    std::vector<std::string> regressors(model.names.begin(), model.names.begin() + i);
    for (const auto& n : model.names) regressors.push_back(n + "_lag1");
    const auto rows = io::summarise(model.equations[i], regressors);
    io::write_text(dir / ("summary_" + model.names[i] + ".csv"), io::summary_csv(rows));
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline void command_fit(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  const io::CsvTable table = io::read_csv(cfg.input);
  io::Ingested ing = io::ingest_table(table, cfg.target);
  for (const auto& w : ing.warnings) log << "warning: " << w << "\n";
  const Dataset& d = ing.dataset;
  Eigen::MatrixXd raw(d.rows(), d.covariates());  // design in the file's units
  const int target = table.column(cfg.target);
  for (int j = 0, c = 0; j < table.values.cols(); ++j)
    if (j != target) raw.col(c++) = table.values.col(j);

  const QuantileGrid grid = cfg.grid();
  const SamplerKind kind = sampler_kind_from_string(cfg.sampler);
  log << "fitting " << to_string(kind) << ": T=" << d.rows() << " K=" << d.covariates() << " Q=" << grid.size()
      << " chains=" << cfg.chains << "\n";
  PosteriorDraws draws = fit(d, grid, kind, cfg.sampler_config());

  if (cfg.savs != "off") {
    const SparsifiedDraws sp = sparsify_posterior(draws, d.x);
    io::CsvWriter w({"covariate", "inclusion"});
    for (int j = 0; j < d.covariates(); ++j)
      w.row({d.covariate_names[j], format_double(sp.inclusion0[j])});
    io::write_text(dir / "savs_inclusion.csv", w.str());
    draws = with_sparsified_beta(draws, sp);
    if (cfg.savs == "mean") draws = detail::collapse_to_mean(draws);
  }
  to_original_scale(draws, d.rescaling);

  io::write_draws(dir / "draws", draws, d.covariate_names);
  const auto rows = io::summarise(draws, d.covariate_names);
  io::write_text(dir / "summary.csv", io::summary_csv(rows));
  io::write_text(dir / "beta_profile.csv", io::beta_profile_csv(draws, d.covariate_names));
  io::write_text(dir / "profile_long.csv", io::profile_long_csv(draws, d.covariate_names));
  io::write_json(dir / "convergence.json", detail::convergence_json(rows));

  // In-sample metrics on the original covariate scale.
  const Eigen::MatrixXd qhat = draws.fitted_quantiles(raw);
  io::CsvWriter qs({"tau", "qs"});
  Eigen::VectorXd by_tau(grid.size());
  for (int q = 0; q < grid.size(); ++q) {
    by_tau[q] = quantile_score(d.y, qhat.col(q), grid.tau(q));
    qs.row({format_double(grid.tau(q)), format_double(by_tau[q])});
  }
  io::write_text(dir / "qs_by_tau.csv", qs.str());
  io::json metrics = {{"observations", d.rows()},
                      {"covariates", d.covariates()},
                      {"crossing_incidence", grid.size() > 1 ? crossing_incidence(qhat) : 0.0}};
  for (int w = 0; w < 4; ++w) metrics[std::string("qwqs_") + detail::kSchemeNames[w]] = weighted_qs(by_tau, grid, w + 1);
  io::write_json(dir / "metrics.json", metrics);
}

inline void command_simulate(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  SimulationConfig sc;
  sc.dgp = cfg.dgp;
  sc.nsim = cfg.nsim;
  sc.observations = cfg.observations;
  sc.quantiles = cfg.quantiles;
  sc.correlation = cfg.correlation;
  sc.test_size = cfg.test_size;
  if (!cfg.models.empty()) sc.models = cfg.models;
  sc.sampler = cfg.sampler_config();
  sc.seed = cfg.seed;
  if (!cfg.taus.empty()) throw ParameterError("simulate uses a uniform grid; set --quantiles instead of --taus");
  log << "simulating DGP-" << sc.dgp << ": nsim=" << sc.nsim << " T=" << sc.observations << "\n";
  const SimulationReport rep = run_simulation(sc);
  const QuantileGrid grid = make_uniform_grid(sc.quantiles);
  const DgpSpec spec = dgp_spec(sc.dgp);

  const ModelSummary* baseline = nullptr;
  for (const auto& m : rep.models)
    if (m.model == "bqr") baseline = &m;

  io::CsvWriter t1({"model", "dgp", "observations", "correlation", "nsim", "crossing_incidence", "crossing_pct"});
  std::vector<std::string> mh{"model", "rmse"};
  for (const auto& c : detail::scheme_columns("qwqs_")) mh.push_back(c);
  for (const auto& c : detail::scheme_columns("relative_")) mh.push_back(c);
  io::CsvWriter metrics(mh);
  io::CsvWriter qs({"model", "tau", "qs"});
  io::CsvWriter by_sim({"model", "replicate", "crossing_incidence", "qwqs_uniform"});
  io::CsvWriter rmse({"model", "tau", "rmse_all", "rmse_true_zero", "rmse_true_nonzero"});
  io::CsvWriter incl({"model", "covariate", "inclusion"});

  std::vector<int> all, zero, nonzero;
  for (int j = 0; j < spec.k; ++j) {
    all.push_back(j);
    (rep.truth.slopes.col(j).cwiseAbs().maxCoeff() == 0.0 ? zero : nonzero).push_back(j);
  }
  for (const auto& m : rep.models) {
    t1.row({m.model, std::to_string(sc.dgp), std::to_string(sc.observations), format_double(sc.correlation),
            std::to_string(sc.nsim), format_double(m.crossing), format_double(100.0 * m.crossing)});
    std::vector<std::string> row{m.model, format_double(m.rmse)};
    for (double v : m.qwqs) row.push_back(format_double(v));
    for (int w = 0; w < 4; ++w)
      row.push_back(format_double(baseline ? m.qwqs[w] / baseline->qwqs[w] : std::numeric_limits<double>::quiet_NaN()));
    metrics.row(row);
    for (int q = 0; q < grid.size(); ++q) qs.row({m.model, format_double(grid.tau(q)), format_double(m.qs_by_tau[q])});
    for (int r = 0; r < sc.nsim; ++r)
      by_sim.row({m.model, std::to_string(r + 1), format_double(m.crossing_by_sim[r]), format_double(m.qwqs1_by_sim[r])});
    const Eigen::VectorXd ra = coefficient_rmse_by_quantile(rep.truth.slopes, m.estimates, all);
    const Eigen::VectorXd rz = zero.empty() ? Eigen::VectorXd::Constant(grid.size(), std::nan(""))
                                            : coefficient_rmse_by_quantile(rep.truth.slopes, m.estimates, zero);
    const Eigen::VectorXd rn = nonzero.empty() ? Eigen::VectorXd::Constant(grid.size(), std::nan(""))
                                               : coefficient_rmse_by_quantile(rep.truth.slopes, m.estimates, nonzero);
    for (int q = 0; q < grid.size(); ++q)
      rmse.row({m.model, format_double(grid.tau(q)), format_double(ra[q]), format_double(rz[q]), format_double(rn[q])});
    for (Eigen::Index j = 0; j < m.inclusion0.size(); ++j)
      incl.row({m.model, "x" + std::to_string(j + 1), format_double(m.inclusion0[j])});
  }
  io::write_text(dir / "table1_crossing.csv", t1.str());
  io::write_text(dir / "metrics.csv", metrics.str());
  io::write_text(dir / "qs_by_tau.csv", qs.str());
  io::write_text(dir / "replicates.csv", by_sim.str());
  io::write_text(dir / "rmse_by_quantile.csv", rmse.str());
  io::write_text(dir / "savs_inclusion.csv", incl.str());

  std::vector<std::string> th{"tau", "intercept"};
  for (int j = 0; j < spec.k; ++j) th.push_back("x" + std::to_string(j + 1));
  io::CsvWriter truth(th);
  for (int q = 0; q < grid.size(); ++q) {
    std::vector<std::string> row{format_double(grid.tau(q)), format_double(rep.truth.intercepts[q])};
    for (int j = 0; j < spec.k; ++j) row.push_back(format_double(rep.truth.slopes(q, j)));
    truth.row(row);
  }
  io::write_text(dir / "truth.csv", truth.str());

  // Training sample of the first replicate, for external comparators.
  RngStream data_rng(sc.seed, 0);
  const Dataset sample = generate(spec, sc.observations, sc.correlation, data_rng);
  std::vector<std::string> dh{"y"};
  for (int j = 0; j < spec.k; ++j) dh.push_back("x" + std::to_string(j + 1));
  io::CsvWriter data(dh);
  for (int t = 0; t < sample.rows(); ++t) {
    std::vector<std::string> row{format_double(sample.y[t])};
    for (int j = 0; j < spec.k; ++j) row.push_back(format_double(sample.x(t, j)));
    data.row(row);
  }
  io::write_text(dir / "sample_data.csv", data.str());
}

inline void command_forecast(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  const io::CsvTable t = io::ingest_multivariate(cfg.input);
  const QuantileGrid grid = cfg.grid();
  std::vector<StudyModel> models;
  if (cfg.models.empty())
    models.push_back(detail::primary_model(cfg));
  else
    for (const auto& m : cfg.models) models.push_back(study_model_from_string(m));

  BacktestConfig bc;
  bc.initial = cfg.initial;
  bc.step = cfg.step;
  bc.horizons = cfg.horizons;
  bc.n_paths = cfg.paths;
  bc.seed = cfg.seed;
  bc.interval = cfg.interval;

  std::vector<std::string> header{"model", "variable", "horizon", "origins"};
  for (const auto& c : detail::scheme_columns("qwqs_")) header.push_back(c);
  header.push_back("coverage");
  io::CsvWriter table(header);
  io::CsvWriter qs({"model", "variable", "horizon", "tau", "qs"});
  std::vector<BacktestReport> reports;
  for (const auto& m : models) {
    log << "backtest " << m.label << ": initial=" << bc.initial << " origins=" << (t.values.rows() - bc.initial + bc.step - 1) / bc.step
        << "\n";
    reports.push_back(backtest(t.values, grid, detail::qvar_options(cfg, m), bc, t.header));
    for (const auto& hs : reports.back().horizons)
      for (int i = 0; i < static_cast<int>(t.header.size()); ++i) {
        std::vector<std::string> row{m.label, t.header[i], std::to_string(hs.horizon), std::to_string(hs.origins)};
        for (int w = 0; w < 4; ++w) row.push_back(format_double(hs.qwqs(i, w)));
        row.push_back(format_double(hs.coverage[i]));
        table.row(row);
        for (int q = 0; q < grid.size(); ++q)
          qs.row({m.label, t.header[i], std::to_string(hs.horizon), format_double(grid.tau(q)),
                  format_double(hs.qs_by_tau(i, q))});
      }
  }
  io::write_text(dir / "table2.csv", table.str());
  io::write_text(dir / "qs_by_tau.csv", qs.str());

  // Scores relative to the independent baseline, when it is part of the run.
  for (std::size_t b = 0; b < models.size(); ++b) {
    if (models[b].label != "bqr") continue;
    std::vector<std::string> rh{"model", "variable", "horizon"};
    for (const auto& c : detail::scheme_columns("relative_")) rh.push_back(c);
    io::CsvWriter rel(rh);
    for (std::size_t k = 0; k < models.size(); ++k)
      for (std::size_t h = 0; h < reports[k].horizons.size(); ++h)
        for (int i = 0; i < static_cast<int>(t.header.size()); ++i) {
          std::vector<std::string> row{models[k].label, t.header[i], std::to_string(reports[k].horizons[h].horizon)};
          for (int w = 0; w < 4; ++w)
            row.push_back(format_double(reports[k].horizons[h].qwqs(i, w) / reports[b].horizons[h].qwqs(i, w)));
          rel.row(row);
        }
    io::write_text(dir / "table2_relative.csv", rel.str());
  }

  // Forecast fan from the full sample with the first model.
  const int max_h = *std::max_element(cfg.horizons.begin(), cfg.horizons.end());
  const QvarModel model = fit_qvar(t.values, grid, detail::qvar_options(cfg, models.front()), t.header);
  RngStream rng(cfg.seed, 0xFA17u);
  const ForecastPaths paths = forecast_paths(model, model.last, max_h, cfg.paths, rng);
  const Fan fan = summarise_paths(paths, cfg.interval);
  io::CsvWriter f({"step", "variable", "mean", "lower", "median", "upper"});
  for (int l = 0; l < max_h; ++l)
    for (int i = 0; i < model.m; ++i)
      f.row({std::to_string(l + 1), model.names[i], format_double(fan.mean(l, i)), format_double(fan.lower(l, i)),
             format_double(fan.median(l, i)), format_double(fan.upper(l, i))});
  io::write_text(dir / "fan.csv", f.str());
  io::write_json(dir / "fan.json", {{"model", models.front().label},
                                    {"paths", cfg.paths},
                                    {"band", cfg.interval},
                                    {"diverged_paths", paths.diverged_count}});
}

inline void command_qirf(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  const io::CsvTable t = io::ingest_multivariate(cfg.input);
  const int m = static_cast<int>(t.header.size());
  if (cfg.shock > m || cfg.responder > m) throw ParameterError("qirf: variable index beyond the data's columns");
  const QvarModel model = detail::fit_system(cfg, t, log);
  detail::write_equation_summaries(dir, model);

  QirfSpec spec;
  spec.shock = cfg.shock - 1;
  spec.responder = cfg.responder - 1;
  const Eigen::VectorXd col = t.values.col(spec.shock);
  spec.size = std::isnan(cfg.shock_size)
                  ? std::sqrt((col.array() - col.mean()).square().sum() / static_cast<double>(col.size() - 1))
                  : cfg.shock_size;
  spec.fixed_levels = Eigen::VectorXd::Constant(m, cfg.fixed_level);
  spec.horizon = cfg.irf_horizon;
  spec.band = cfg.band;
  spec.max_draws = cfg.max_draws;
  const QirfSurface s = qirf(model, spec);

  io::CsvWriter w({"horizon", "tau", "mean", "median", "lower", "upper"});
  for (int h = 0; h <= spec.horizon; ++h)
    for (std::size_t q = 0; q < s.levels.size(); ++q)
      w.row({std::to_string(h), format_double(s.levels[q]), format_double(s.mean(h, q)), format_double(s.median(h, q)),
             format_double(s.lower(h, q)), format_double(s.upper(h, q))});
  io::write_text(dir / "qirf.csv", w.str());
  io::write_json(dir / "qirf.json", {{"shock", t.header[spec.shock]},
                                     {"responder", t.header[spec.responder]},
                                     {"shock_size", spec.size},
                                     {"fixed_level", cfg.fixed_level},
                                     {"band", spec.band}});
}

inline void command_stress(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  const io::CsvTable t = io::ingest_multivariate(cfg.input);
  const io::ScenarioTable sc = io::read_scenario(cfg.scenario);
  if (sc.header != t.header) throw IngestionError("scenario columns must match the data columns in name and order");
  const QvarModel model = detail::fit_system(cfg, t, log);
  detail::write_equation_summaries(dir, model);
  RngStream rng(cfg.seed, 0x57E5u);
  const StressResult r = stress_test(model, model.last, sc.levels, cfg.paths, rng, cfg.band);

  io::CsvWriter w({"path", "step", "variable", "mean", "lower", "median", "upper"});
  for (const auto& [label, fan] : {std::pair<const char*, const Fan*>{"scenario", &r.scenario},
                                   std::pair<const char*, const Fan*>{"baseline", &r.baseline}})
    for (int l = 0; l < fan->median.rows(); ++l)
      for (int i = 0; i < model.m; ++i)
        w.row({label, std::to_string(l + 1), model.names[i], format_double(fan->mean(l, i)),
               format_double(fan->lower(l, i)), format_double(fan->median(l, i)), format_double(fan->upper(l, i))});
  io::write_text(dir / "stress.csv", w.str());
  io::write_json(dir / "stress.json", {{"paths", cfg.paths},
                                       {"band", cfg.band},
                                       {"diverged_scenario", r.scenario.diverged},
                                       {"diverged_baseline", r.baseline.diverged}});
}

inline void command_diagnose(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  std::filesystem::path src(cfg.input);
  if (src.filename() == "draws.json") src = src.parent_path();
  if (!std::filesystem::exists(src / "draws.json") && std::filesystem::exists(src / "draws" / "draws.json"))
    src /= "draws";
  const io::LoadedDraws loaded = io::read_draws(src);
  log << "diagnosing " << loaded.draws.chains.size() << " chains x " << loaded.draws.draws_per_chain() << " draws\n";
  const auto rows = io::summarise(loaded.draws, loaded.covariate_names);
  io::write_text(dir / "summary.csv", io::summary_csv(rows));
  io::write_json(dir / "convergence.json", detail::convergence_json(rows));
}

/// Validate, create the output directory, write config.json, then dispatch.
inline std::filesystem::path run(RunConfig cfg, std::ostream& log) {
  cfg.validate();
  const std::filesystem::path dir = detail::output_dir(cfg);
  cfg.output = dir.string();
  std::filesystem::create_directories(dir);
  io::write_json(dir / "config.json", to_json(cfg));
  if (cfg.command == "fit") command_fit(cfg, dir, log);
  else if (cfg.command == "simulate") command_simulate(cfg, dir, log);
  else if (cfg.command == "forecast") command_forecast(cfg, dir, log);
  else if (cfg.command == "qirf") command_qirf(cfg, dir, log);
  else if (cfg.command == "stress") command_stress(cfg, dir, log);
  else command_diagnose(cfg, dir, log);
  return dir;
}

/// Process exit code for an exception raised by `run`.
inline int exit_code(const std::exception& e) {
  if (dynamic_cast<const IngestionError*>(&e)) return 3;
  if (dynamic_cast<const ParameterError*>(&e) || dynamic_cast<const LevelMismatchError*>(&e) ||
      dynamic_cast<const UnsupportedInputError*>(&e))
    return 2;
  if (dynamic_cast<const Error*>(&e)) return 4;
  return 1;
}

inline std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const IngestionError*>(&e)) return "ingestion";
  if (dynamic_cast<const ParameterError*>(&e)) return "parameter";
  if (dynamic_cast<const LevelMismatchError*>(&e)) return "level_mismatch";
  if (dynamic_cast<const UnsupportedInputError*>(&e)) return "unsupported_input";
  if (dynamic_cast<const NotSpdError*>(&e)) return "not_spd";
  if (dynamic_cast<const SamplerError*>(&e)) return "sampler";
  if (dynamic_cast<const NumericDomainError*>(&e)) return "numeric_domain";
  if (dynamic_cast<const Error*>(&e)) return "error";
  return "internal";
}

}  // namespace qvp

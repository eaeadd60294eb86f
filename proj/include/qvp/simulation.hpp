#pragma once

// Monte-Carlo study over the simulation designs: per replicate, fit every
// requested model on a fresh sample, then score coefficient recovery,
// in-sample crossing and out-of-sample quantile scores.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dgp.hpp"
#include "draws.hpp"
#include "metrics.hpp"
#include "sampler.hpp"
#include "savs.hpp"

namespace qvp {

/// Model labels accepted by the study: the sampler names plus the SAVS
/// post-processed variants "ncqvp_savs" and "asis_savs".
struct StudyModel {
  std::string label;
  SamplerKind kind;
  bool savs = false;
};

inline StudyModel study_model_from_string(const std::string& s) {
  if (s == "ncqvp_savs") return {s, SamplerKind::noncentred, true};
  if (s == "asis_savs") return {s, SamplerKind::asis, true};
  return {s, sampler_kind_from_string(s), false};
}

struct SimulationConfig {
  int dgp = 1;
  int nsim = 50;
  int observations = 300;
  int quantiles = 19;
  double correlation = 0.0;
  int test_size = 100;
  std::vector<std::string> models{"qvp", "ncqvp", "ncqvp_savs", "bqr"};
  SamplerConfig sampler;
  std::uint64_t seed = 1;

  void validate() const {
    if (nsim < 1) throw ParameterError("nsim must be at least 1");
    if (observations < 2) throw ParameterError("T must be at least 2");
    if (quantiles < 2) throw ParameterError("the study needs at least two quantiles");
    if (test_size < 1) throw ParameterError("test size must be at least 1");
    if (models.empty()) throw ParameterError("no models requested");
    for (const auto& m : models) study_model_from_string(m);
    sampler.validate();
  }
};

struct ModelSummary {
  std::string model;
  double rmse = 0.0;
  Eigen::VectorXd qs_by_tau;              ///< mean over replicates
  std::array<double, 4> qwqs{};           ///< schemes 1..4, mean over replicates
  double crossing = 0.0;                  ///< mean in-sample crossing incidence
  std::vector<double> crossing_by_sim;
  std::vector<double> qwqs1_by_sim;
  std::vector<Eigen::MatrixXd> estimates; ///< posterior-mean Q x K per replicate
  Eigen::VectorXd inclusion0;             ///< SAVS models: mean inclusion frequency of beta0
};

struct SimulationReport {
  SimulationConfig config;
  TrueProfile truth;
  std::vector<ModelSummary> models;

  const ModelSummary& find(const std::string& label) const {
    for (const auto& m : models)
      if (m.model == label) return m;
    throw ParameterError("model '" + label + "' is not part of this study");
  }
};

/// Sampler seed of replicate `rep`; chains within it use stream ids 0..chains-1.
inline std::uint64_t replicate_seed(std::uint64_t seed, int rep) {
  return seed * 1000003ULL + static_cast<std::uint64_t>(rep) + 1ULL;
}

inline SimulationReport run_simulation(const SimulationConfig& cfg) {
  cfg.validate();
  const DgpSpec spec = dgp_spec(cfg.dgp);
  const QuantileGrid grid = make_uniform_grid(cfg.quantiles);
  SimulationReport report;
  report.config = cfg;
  report.truth = true_quantile_coefficients(spec, grid);

  std::vector<StudyModel> models;
  for (const auto& m : cfg.models) models.push_back(study_model_from_string(m));
  report.models.resize(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    auto& s = report.models[i];
    s.model = models[i].label;
    s.qs_by_tau = Eigen::VectorXd::Zero(grid.size());
    if (models[i].savs) s.inclusion0 = Eigen::VectorXd::Zero(spec.k);
  }

  for (int rep = 0; rep < cfg.nsim; ++rep) {
    RngStream data_rng(cfg.seed, static_cast<std::uint32_t>(rep));
    Dataset train = generate(spec, cfg.observations, cfg.correlation, data_rng);
    const Eigen::MatrixXd x_test = generate_design(cfg.test_size, spec.k, cfg.correlation, data_rng);
    const Eigen::VectorXd y_test = generate_response(spec, x_test, data_rng);
    const Eigen::MatrixXd x_raw = train.x;
    train.rescale();

    SamplerConfig sc = cfg.sampler;
    sc.seed = replicate_seed(cfg.seed, rep);
    std::map<SamplerKind, PosteriorDraws> fits;  // one fit per sampler, shared by SAVS variants

    for (std::size_t i = 0; i < models.size(); ++i) {
      const StudyModel& m = models[i];
      auto it = fits.find(m.kind);
      if (it == fits.end()) it = fits.emplace(m.kind, fit(train, grid, m.kind, sc)).first;
      PosteriorDraws draws = it->second;
      ModelSummary& s = report.models[i];
      if (m.savs) {
        const SparsifiedDraws sp = sparsify_posterior(draws, train.x);
        s.inclusion0 += sp.inclusion0;
        draws = with_sparsified_beta(draws, sp);
      }
      to_original_scale(draws, train.rescaling);

      const Eigen::MatrixXd est = draws.beta_mean();
      s.estimates.push_back(est);
      const double cross = crossing_incidence(draws.fitted_quantiles(x_raw));
      s.crossing_by_sim.push_back(cross);
      s.crossing += cross;

      const Eigen::MatrixXd q_test = draws.fitted_quantiles(x_test);
      Eigen::VectorXd qs(grid.size());
      for (int q = 0; q < grid.size(); ++q) qs[q] = quantile_score(y_test, q_test.col(q), grid.tau(q));
      s.qs_by_tau += qs;
      for (int w = 0; w < 4; ++w) s.qwqs[w] += weighted_qs(qs, grid, w + 1);
      s.qwqs1_by_sim.push_back(weighted_qs(qs, grid, 1));
    }
  }

  const double n = static_cast<double>(cfg.nsim);
  for (auto& s : report.models) {
    s.crossing /= n;
    s.qs_by_tau /= n;
    for (double& w : s.qwqs) w /= n;
    if (s.inclusion0.size() > 0) s.inclusion0 /= n;
    s.rmse = coefficient_rmse(report.truth.slopes, s.estimates);
  }
  return report;
}

}  // namespace qvp

#pragma once

// Pieces shared by the centred, non-centred and independent samplers.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ald.hpp"
#include "banded.hpp"
#include "data.hpp"
#include "draws.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace qvp {

/// Design and per-quantile responses. In ordinary use every column of y is
/// the same observed response; distinct columns are only used by simulation
/// based correctness checks, where each quantile gets its own replicate.
struct SamplerData {
  Eigen::MatrixXd x;  ///< T x K
  Eigen::MatrixXd y;  ///< T x Q

  int rows() const noexcept { return static_cast<int>(x.rows()); }
  int covariates() const noexcept { return static_cast<int>(x.cols()); }
  int quantiles() const noexcept { return static_cast<int>(y.cols()); }

  static SamplerData broadcast(const Dataset& d, int quantiles) {
    d.validate();
    if (d.rows() < 1) throw IngestionError("dataset has no rows");
    if (d.covariates() < 1) throw UnsupportedInputError("design needs at least one covariate");
    SamplerData s;
    s.x = d.x;
    s.y = d.y.replicate(1, quantiles);
    return s;
  }

  void validate(const QuantileGrid& grid) const {
    if (y.rows() != x.rows() || y.cols() != grid.size())
      throw ParameterError("sampler data: dimensions do not match the grid");
    if (!x.allFinite() || !y.allFinite()) throw IngestionError("sampler data: non-finite values");
  }
};

/// Per-quantile Gram blocks X' diag(w_q) X.
inline std::vector<Eigen::MatrixXd> weighted_grams(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w) {
  std::vector<Eigen::MatrixXd> g(w.cols());
  for (int q = 0; q < w.cols(); ++q) {
    Eigen::MatrixXd xw = x.transpose() * w.col(q).asDiagonal();
    g[q].noalias() = xw * x;
  }
  return g;
}

/// Empirical tau-quantile (type-7 interpolation) used to initialise intercepts.
inline double empirical_quantile(Eigen::VectorXd v, double tau) {
  if (v.size() == 0) throw ParameterError("empirical_quantile: empty input");
  std::sort(v.data(), v.data() + v.size());
  const double h = (v.size() - 1) * tau;
  const auto lo = static_cast<Eigen::Index>(std::floor(h));
  const auto hi = std::min<Eigen::Index>(lo + 1, v.size() - 1);
  return v[lo] + (h - lo) * (v[hi] - v[lo]);
}

/// Intercept update under the configured prior. `diff_prior_var` holds the
/// variances of alpha_q - alpha_{q-1} (q >= 1) when the difference prior is on.
inline Eigen::VectorXd draw_intercepts(const Eigen::MatrixXd& ystar, const Eigen::MatrixXd& w,
                                       const SamplerConfig& cfg, const Eigen::VectorXd* diff_prior_var,
                                       RngStream& rng) {
  const int nq = static_cast<int>(ystar.cols());
  const bool proper = std::isfinite(cfg.alpha_prior_variance);
  if (!proper && diff_prior_var == nullptr) return update_alpha(ystar, w, rng);
  BandedSpd prior(nq, 1);
  for (int q = 0; q < nq; ++q) {
    if (proper) prior.lower(q, q) += 1.0 / cfg.alpha_prior_variance;
    if (diff_prior_var != nullptr && q > 0) {
      const double p = 1.0 / (*diff_prior_var)[q];
      prior.lower(q, q) += p;
      prior.lower(q - 1, q - 1) += p;
      prior.lower(q, q - 1) -= p;
    }
  }
  return update_alpha(ystar, w, prior, rng);
}

/// Omega, mu and sigma_y updates given the residual y - alpha - x'beta (T x Q).
inline void update_augmentation(AugmentationState& aug, const Eigen::MatrixXd& residual,
                                const QuantileGrid& grid, const SamplerConfig& cfg, RngStream& rng) {
  aug.omega = update_omega(residual, grid, aug.sigma_y, rng);
  aug.refresh_mu(grid);
  for (int q = 0; q < grid.size(); ++q) {
    const Eigen::VectorXd r = residual.col(q) - aug.mu.col(q);
    aug.sigma_y[q] = update_sigma_y(r, aug.omega.col(q), grid.zeta2(q), cfg.sigma_y_prior, rng);
  }
}

/// Initial augmentation state: intercepts at the empirical quantiles of each
/// response column plus a small chain-specific jitter.
inline AugmentationState initial_augmentation(const SamplerData& data, const QuantileGrid& grid,
                                              RngStream& rng) {
  AugmentationState aug(data.rows(), grid.size());
  for (int q = 0; q < grid.size(); ++q) {
    const Eigen::VectorXd col = data.y.col(q);
    const double centre = empirical_quantile(col, grid.tau(q));
    const double spread = std::sqrt((col.array() - col.mean()).square().mean()) + 1e-8;
    aug.alpha[q] = centre + 0.1 * spread * rng.normal();
    aug.sigma_y[q] = spread / 4.0 + 1e-8;
  }
  aug.refresh_mu(grid);
  return aug;
}

/// Number of iterations of a chain and whether iteration `it` is stored.
struct ChainSchedule {
  int burnin;
  int thin;
  int kept;

  explicit ChainSchedule(const SamplerConfig& c) : burnin(c.burnin), thin(c.thin), kept(c.draws) {}
  long total() const { return static_cast<long>(burnin) + static_cast<long>(thin) * kept; }
  /// Index of the stored draw for iteration it, or -1.
  int slot(long it) const {
    if (it < burnin) return -1;
    const long k = it - burnin;
    return (k + 1) % thin == 0 ? static_cast<int>(k / thin) : -1;
  }
};

/// Run `body(iteration)` for every iteration, attaching the index to errors.
template <class Body>
void run_iterations(long total, Body&& body) {
  for (long it = 0; it < total; ++it) {
    try {
      body(it);
    } catch (const SamplerError&) {
      throw;
    } catch (const std::exception& e) {
      throw SamplerError(it, e.what());
    }
  }
}

}  // namespace qvp

#pragma once

// Centred QVP Gibbs sampler.
//
// Model (per quantile q, observation t):
//   y_t = alpha_q + x_t' beta_q + theta_q omega_{q,t} + sqrt(zeta2_q sigma_q omega_{q,t}) z,
//   beta_q = beta_{q-1} + eps_q,  eps_q ~ N(0, Sigma_q),  beta_{q=0} := beta0,
//   Sigma_q = nu_q^2 diag(lambda_{q,.}^2),  nu_q ~ C+(0, 1/sqrt(T)),  lambda ~ C+(0, 1),
//   beta0 ~ N(0, Sigma_0), Sigma_0 = nu_0^2 diag(lambda_{0,.}^2), nu_0 ~ C+(0, 1/sqrt(TQ)).

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ald.hpp"
#include "banded.hpp"
#include "draws.hpp"
#include "horseshoe.hpp"
#include "rng.hpp"
#include "sampler_common.hpp"

namespace qvp {

struct CentredState {
  Eigen::MatrixXd beta;   ///< Q x K, row q is beta_q
  Eigen::VectorXd beta0;  ///< K
  AugmentationState aug;
  HorseshoeState hs;   ///< Q x K difference scales
  HorseshoeState hs0;  ///< 1 x K scales of beta0

  int quantiles() const noexcept { return static_cast<int>(beta.rows()); }
  int covariates() const noexcept { return static_cast<int>(beta.cols()); }

  /// Stacked quantile-major vector (beta_1', ..., beta_Q')'.
  Eigen::VectorXd stacked_beta() const {
    Eigen::VectorXd v(beta.size());
    for (int q = 0; q < quantiles(); ++q) v.segment(q * covariates(), covariates()) = beta.row(q).transpose();
    return v;
  }

  /// delta_q = beta_q - beta_{q-1} with beta_0 := beta0.
  Eigen::MatrixXd differences() const {
    Eigen::MatrixXd d(beta.rows(), beta.cols());
    for (int q = 0; q < quantiles(); ++q)
      d.row(q) = beta.row(q) - (q == 0 ? Eigen::RowVectorXd(beta0.transpose()) : Eigen::RowVectorXd(beta.row(q - 1)));
    return d;
  }
};

/// Horseshoe global scales: 1/sqrt(T) for the differences, 1/sqrt(TQ) for beta0.
inline double difference_global_scale(int t) { return 1.0 / std::sqrt(static_cast<double>(t)); }
inline double level_global_scale(int t, int q) { return 1.0 / std::sqrt(static_cast<double>(t) * q); }

inline CentredState initial_centred_state(const SamplerData& data, const QuantileGrid& grid, RngStream& rng) {
  const int nq = grid.size(), k = data.covariates(), t = data.rows();
  CentredState s;
  s.aug = initial_augmentation(data, grid, rng);
  s.beta0 = Eigen::VectorXd::Zero(k);
  for (int j = 0; j < k; ++j) s.beta0[j] = 0.1 * rng.normal();
  s.beta = s.beta0.transpose().replicate(nq, 1);
  s.hs = HorseshoeState(nq, k, difference_global_scale(t));
  s.hs0 = HorseshoeState(1, k, level_global_scale(t, nq));
  return s;
}

/// Precision and linear term of the joint beta conditional:
///   K_beta = H' Sigma^{-1} H + X' Omega^{-1} X,
///   b = H' Sigma^{-1} H (1_Q (x) beta0) + X' Omega^{-1} y*,  y* = y - alpha - mu.
struct GaussianConditional {
  BandedSpd precision;
  Eigen::VectorXd linear;
};

inline GaussianConditional beta_joint_conditional(const CentredState& s, const SamplerData& data,
                                                  const QuantileGrid& grid) {
  const int nq = grid.size(), k = data.covariates();
  const DifferenceMatrix h(nq, k);
  const Eigen::VectorXd state_prec = s.hs.variances().cwiseInverse();
  const Eigen::MatrixXd w = s.aug.obs_precision(grid);
  const auto grams = weighted_grams(data.x, w);

  GaussianConditional c{form_posterior_precision(h, state_prec, std::span<const Eigen::MatrixXd>(grams)),
                        Eigen::VectorXd(nq * k)};
  for (int q = 0; q < nq; ++q) {
    const Eigen::VectorXd ystar = data.y.col(q) - s.aug.mu.col(q) - Eigen::VectorXd::Constant(data.rows(), s.aug.alpha[q]);
    c.linear.segment(q * k, k) = data.x.transpose() * (w.col(q).cwiseProduct(ystar));
  }
  // H' S H (1 (x) beta0) is S_1 beta0 in the first block and zero elsewhere.
  c.linear.head(k) += state_prec.head(k).cwiseProduct(s.beta0);
  return c;
}

/// Joint draw of all quantile coefficients (Q x K) via banded Cholesky.
inline Eigen::MatrixXd draw_beta_joint(const CentredState& s, const SamplerData& data, const QuantileGrid& grid,
                                       RngStream& rng) {
  const GaussianConditional c = beta_joint_conditional(s, data, grid);
  const Eigen::VectorXd v = sample_mvn_from_precision(c.precision, c.linear, rng);
  const int k = data.covariates();
  Eigen::MatrixXd out(grid.size(), k);
  for (int q = 0; q < grid.size(); ++q) out.row(q) = v.segment(q * k, k).transpose();
  return out;
}

/// beta0 | beta_1 ~ N(K^{-1} Sigma_1^{-1} beta_1, K^{-1}), K = Sigma_1^{-1} + Sigma_0^{-1} (diagonal).
inline Eigen::VectorXd draw_beta0_centred(const Eigen::VectorXd& beta1, const Eigen::VectorXd& sigma1,
                                          const Eigen::VectorXd& sigma0, RngStream& rng) {
  if (beta1.size() != sigma1.size() || beta1.size() != sigma0.size())
    throw ParameterError("draw_beta0_centred: dimension mismatch");
  Eigen::VectorXd out(beta1.size());
  for (int j = 0; j < beta1.size(); ++j) {
    if (!(sigma1[j] > 0.0) || !(sigma0[j] > 0.0))
      throw NumericDomainError("draw_beta0_centred: variances must be positive");
    const double prec = 1.0 / sigma1[j] + 1.0 / sigma0[j];
    out[j] = (beta1[j] / sigma1[j]) / prec + rng.normal() / std::sqrt(prec);
  }
  return out;
}

/// Residual y - alpha - x'beta_q (excluding mu), T x Q.
inline Eigen::MatrixXd centred_residual(const CentredState& s, const SamplerData& data) {
  Eigen::MatrixXd r = data.y - data.x * s.beta.transpose();
  r.rowwise() -= s.aug.alpha.transpose();
  return r;
}

/// Hyperparameter terms of the optional alpha difference prior
/// alpha_q - alpha_{q-1} ~ N(0, nu_q^2), q >= 2.
inline SharedGlobalTerms alpha_difference_terms(const Eigen::VectorXd& alpha) {
  SharedGlobalTerms e{Eigen::VectorXd::Zero(alpha.size()), Eigen::VectorXd::Zero(alpha.size())};
  for (int q = 1; q < alpha.size(); ++q) {
    e.count[q] = 1.0;
    e.sum_sq[q] = (alpha[q] - alpha[q - 1]) * (alpha[q] - alpha[q - 1]);
  }
  return e;
}

/// One full sweep: beta -> Sigma (and Sigma_0) -> beta0 -> alpha -> mu, Omega, sigma_y.
inline void centred_gibbs_step(CentredState& s, const SamplerData& data, const QuantileGrid& grid,
                               const SamplerConfig& cfg, RngStream& rng) {
  const int k = data.covariates();

  s.beta = draw_beta_joint(s, data, grid, rng);

  if (cfg.alpha_difference_prior) {
    const SharedGlobalTerms extra = alpha_difference_terms(s.aug.alpha);
    update_horseshoe(s.differences(), s.hs, rng, &extra);
  } else {
    update_horseshoe(s.differences(), s.hs, rng);
  }
  update_horseshoe(Eigen::MatrixXd(s.beta0.transpose()), s.hs0, rng);

  Eigen::VectorXd sigma1(k), sigma0(k);
  for (int j = 0; j < k; ++j) {
    sigma1[j] = s.hs.variance(0, j);
    sigma0[j] = s.hs0.variance(0, j);
  }
  s.beta0 = draw_beta0_centred(s.beta.row(0).transpose(), sigma1, sigma0, rng);

  const Eigen::MatrixXd w = s.aug.obs_precision(grid);
  const Eigen::MatrixXd ystar = data.y - s.aug.mu - data.x * s.beta.transpose();
  if (cfg.alpha_difference_prior) {
    const Eigen::VectorXd& v = s.hs.nu2;
    s.aug.alpha = draw_intercepts(ystar, w, cfg, &v, rng);
  } else {
    s.aug.alpha = draw_intercepts(ystar, w, cfg, nullptr, rng);
  }

  update_augmentation(s.aug, centred_residual(s, data), grid, cfg, rng);
}

inline void record_centred(const CentredState& s, ChainDraws& d, int slot) {
  const int nq = s.quantiles(), k = s.covariates();
  for (int q = 0; q < nq; ++q)
    for (int j = 0; j < k; ++j) {
      d.beta(slot, q * k + j) = s.beta(q, j);
      d.lambda2(slot, q * k + j) = s.hs.lambda2(q, j);
    }
  d.beta0.row(slot) = s.beta0.transpose();
  d.alpha.row(slot) = s.aug.alpha.transpose();
  d.sigma_y.row(slot) = s.aug.sigma_y.transpose();
  d.nu2.row(slot) = s.hs.nu2.transpose();
  d.nu0_2(slot, 0) = s.hs0.nu2[0];
  d.lambda0_2.row(slot) = s.hs0.lambda2.row(0);
}

/// One chain of the centred sampler; stream id = chain index.
inline ChainDraws run_centred_chain(const SamplerData& data, const QuantileGrid& grid, const SamplerConfig& cfg,
                                    int chain) {
  cfg.validate();
  data.validate(grid);
  RngStream rng(cfg.seed, static_cast<std::uint32_t>(chain));
  CentredState s = initial_centred_state(data, grid, rng);
  ChainDraws d;
  d.allocate(cfg.draws, grid.size(), data.covariates(), false);
  const ChainSchedule sched(cfg);
  run_iterations(sched.total(), [&](long it) {
    centred_gibbs_step(s, data, grid, cfg, rng);
    if (const int slot = sched.slot(it); slot >= 0) record_centred(s, d, slot);
  });
  return d;
}

}  // namespace qvp

#pragma once

// Non-centred QVP sampler and its interweaving variant.
//
// beta_{q,j} = beta0_j + sigma_{q,j} * bt_{q,j},  bt_q = bt_{q-1} + N(0, I),  bt_0 = 0,
// sigma_{q,j} ~ N(0, nu_q^2 lambda_{q,j}^2) on the whole real line,
// nu_q ~ C+(0, 1/sqrt(T)), lambda ~ C+(0, 1); beta0 as in the centred model.

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ald.hpp"
#include "banded.hpp"
#include "centred.hpp"
#include "distributions.hpp"
#include "draws.hpp"
#include "horseshoe.hpp"
#include "rng.hpp"
#include "sampler_common.hpp"

namespace qvp {

struct NonCentredState {
  Eigen::VectorXd beta0;       ///< K
  Eigen::MatrixXd beta_tilde;  ///< Q x K standardized random-walk states
  Eigen::MatrixXd sigma;       ///< Q x K signed state scales
  AugmentationState aug;
  HorseshoeState hs;   ///< Q x K scales of sigma
  HorseshoeState hs0;  ///< 1 x K scales of beta0

  int quantiles() const noexcept { return static_cast<int>(sigma.rows()); }
  int covariates() const noexcept { return static_cast<int>(sigma.cols()); }

  /// Centred reconstruction beta_q = beta0 + sigma_q .* bt_q (Q x K).
  Eigen::MatrixXd beta() const {
    Eigen::MatrixXd b = sigma.cwiseProduct(beta_tilde);
    b.rowwise() += beta0.transpose();
    return b;
  }
};

inline NonCentredState initial_noncentred_state(const SamplerData& data, const QuantileGrid& grid,
                                                RngStream& rng) {
  const int nq = grid.size(), k = data.covariates(), t = data.rows();
  NonCentredState s;
  s.aug = initial_augmentation(data, grid, rng);
  s.beta0 = Eigen::VectorXd::Zero(k);
  for (int j = 0; j < k; ++j) s.beta0[j] = 0.1 * rng.normal();
  s.beta_tilde = Eigen::MatrixXd::Zero(nq, k);
  s.sigma = Eigen::MatrixXd::Constant(nq, k, 0.01);
  s.hs = HorseshoeState(nq, k, difference_global_scale(t));
  s.hs0 = HorseshoeState(1, k, level_global_scale(t, nq));
  return s;
}

/// y_q - alpha_q - mu_q as a T x Q matrix.
inline Eigen::MatrixXd adjusted_response(const AugmentationState& aug, const SamplerData& data) {
  Eigen::MatrixXd r = data.y - aug.mu;
  r.rowwise() -= aug.alpha.transpose();
  return r;
}

/// Moments of beta0 | rest: precision K and mean. With `recursive` the
/// per-quantile accumulation
///   K_q = X' W_q X + K_{q-1},  m_q = K_q^{-1} (X' W_q yt_q + K_{q-1} m_{q-1})
/// is used (K_0 = Sigma_0^{-1}, m_0 = 0); otherwise the one-shot sum.
struct DenseGaussian {
  Eigen::MatrixXd precision;
  Eigen::VectorXd mean;
};

inline DenseGaussian beta0_noncentred_moments(const NonCentredState& s, const SamplerData& data,
                                              const QuantileGrid& grid, bool recursive = true) {
  const int nq = grid.size(), k = data.covariates();
  const Eigen::MatrixXd w = s.aug.obs_precision(grid);
  const Eigen::MatrixXd adj = adjusted_response(s.aug, data);
  Eigen::MatrixXd prec = Eigen::MatrixXd::Zero(k, k);
  for (int j = 0; j < k; ++j) prec(j, j) = 1.0 / s.hs0.variance(0, j);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd lin_total = Eigen::VectorXd::Zero(k);

  for (int q = 0; q < nq; ++q) {
    const Eigen::VectorXd scaled = s.sigma.row(q).cwiseProduct(s.beta_tilde.row(q)).transpose();
    const Eigen::VectorXd yt = adj.col(q) - data.x * scaled;
    const Eigen::MatrixXd xw = data.x.transpose() * w.col(q).asDiagonal();
    const Eigen::MatrixXd gram = xw * data.x;
    const Eigen::VectorXd lin = xw * yt;
    if (recursive) {
      const Eigen::VectorXd carried = prec * mean;
      prec += gram;
      mean = prec.llt().solve(lin + carried);
    } else {
      prec += gram;
      lin_total += lin;
    }
  }
  if (!recursive) mean = prec.llt().solve(lin_total);
  return {prec, mean};
}

/// Draw N(mean, precision^{-1}) for a small dense precision.
inline Eigen::VectorXd draw_dense_gaussian(const Eigen::MatrixXd& precision, const Eigen::VectorXd& mean,
                                           RngStream& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw NotSpdError("dense Gaussian draw: precision is not positive definite");
  Eigen::VectorXd z(mean.size());
  for (int i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mean + llt.matrixU().solve(z);
}

inline Eigen::VectorXd draw_beta0_noncentred(const NonCentredState& s, const SamplerData& data,
                                             const QuantileGrid& grid, RngStream& rng) {
  const DenseGaussian g = beta0_noncentred_moments(s, data, grid, true);
  return draw_dense_gaussian(g.precision, g.mean, rng);
}

/// Conditional of the stacked bt: precision Xc' Omega^{-1} Xc + H'H with
/// Xc = X diag(sigma_q) per quantile, linear term Xc' Omega^{-1}(y - alpha - mu - X beta0).
inline GaussianConditional beta_tilde_conditional(const NonCentredState& s, const SamplerData& data,
                                                  const QuantileGrid& grid) {
  const int nq = grid.size(), k = data.covariates();
  const DifferenceMatrix h(nq, k);
  const Eigen::MatrixXd w = s.aug.obs_precision(grid);
  const Eigen::MatrixXd adj = adjusted_response(s.aug, data);
  const Eigen::VectorXd xb0 = data.x * s.beta0;
  std::vector<Eigen::MatrixXd> grams(nq);
  Eigen::VectorXd lin(nq * k);
  for (int q = 0; q < nq; ++q) {
    const Eigen::VectorXd sq = s.sigma.row(q).transpose();
    const Eigen::MatrixXd xw = data.x.transpose() * w.col(q).asDiagonal();
    grams[q] = sq.asDiagonal() * (xw * data.x) * sq.asDiagonal();
    lin.segment(q * k, k) = sq.cwiseProduct(xw * (adj.col(q) - xb0));
  }
  return {form_posterior_precision(h, Eigen::VectorXd::Ones(nq * k), std::span<const Eigen::MatrixXd>(grams)), lin};
}

inline Eigen::MatrixXd draw_beta_tilde(const NonCentredState& s, const SamplerData& data, const QuantileGrid& grid,
                                       RngStream& rng) {
  const GaussianConditional c = beta_tilde_conditional(s, data, grid);
  const Eigen::VectorXd v = sample_mvn_from_precision(c.precision, c.linear, rng);
  const int k = data.covariates();
  Eigen::MatrixXd out(grid.size(), k);
  for (int q = 0; q < grid.size(); ++q) out.row(q) = v.segment(q * k, k).transpose();
  return out;
}

/// Conditional of sigma_q (independent across q): precision
/// Xt_q' W_q Xt_q + Sigma_tilde_q^{-1}, Xt_q = X diag(bt_q).
inline DenseGaussian sigma_conditional(const NonCentredState& s, const SamplerData& data, const QuantileGrid& grid,
                                       int q) {
  const int k = data.covariates();
  const Eigen::MatrixXd w = s.aug.obs_precision(grid);
  const Eigen::VectorXd bt = s.beta_tilde.row(q).transpose();
  const Eigen::MatrixXd xw = data.x.transpose() * w.col(q).asDiagonal();
  Eigen::MatrixXd prec = bt.asDiagonal() * (xw * data.x) * bt.asDiagonal();
  for (int j = 0; j < k; ++j) prec(j, j) += 1.0 / s.hs.variance(q, j);
  const Eigen::VectorXd yt = data.y.col(q) - s.aug.mu.col(q) -
                             Eigen::VectorXd::Constant(data.rows(), s.aug.alpha[q]) - data.x * s.beta0;
  const Eigen::VectorXd lin = bt.cwiseProduct(xw * yt);
  return {prec, prec.llt().solve(lin)};
}

inline Eigen::MatrixXd draw_sigma(const NonCentredState& s, const SamplerData& data, const QuantileGrid& grid,
                                  RngStream& rng) {
  Eigen::MatrixXd out(grid.size(), data.covariates());
  for (int q = 0; q < grid.size(); ++q) {
    const DenseGaussian g = sigma_conditional(s, data, grid, q);
    out.row(q) = draw_dense_gaussian(g.precision, g.mean, rng).transpose();
  }
  return out;
}

/// Random sign flip per covariate column: with probability 1/2 negate
/// sigma_{.,j} and bt_{.,j} together. Leaves beta and the prior unchanged.
inline void permute_signs(NonCentredState& s, RngStream& rng) {
  for (int j = 0; j < s.covariates(); ++j) {
    if (rng.coin()) {
      s.sigma.col(j) = -s.sigma.col(j);
      s.beta_tilde.col(j) = -s.beta_tilde.col(j);
    }
  }
}

struct InterweaveStats {
  long proposed = 0;
  long accepted = 0;
};

namespace detail {

// -1/2 sum_q (bt_q - bt_{q-1})^2 restricted to the terms touching index q.
inline double rw_local(const Eigen::VectorXd& bt, int q) {
  const auto term = [&](int r) {
    const double prev = r == 0 ? 0.0 : bt[r - 1];
    return (bt[r] - prev) * (bt[r] - prev);
  };
  double s = term(q);
  if (q + 1 < bt.size()) s += term(q + 1);
  return -0.5 * s;
}

inline double rw_full(const Eigen::VectorXd& bt) {
  double s = 0.0, prev = 0.0;
  for (int r = 0; r < bt.size(); ++r) {
    s += (bt[r] - prev) * (bt[r] - prev);
    prev = bt[r];
  }
  return -0.5 * s;
}

}  // namespace detail

/// Interweaving step. With the centred coefficients beta held fixed, the
/// squared scales and beta0 are refreshed column by column, using the
/// centred-model conditionals as Metropolis-Hastings proposals:
///   sigma^2_{q,j} ~ GIG(0, 1/(nu_q^2 lambda_{q,j}^2), (beta_{q,j} - beta_{q-1,j})^2),
///   beta0_j ~ N(K0^{-1} beta_{1,j} / sigma^2_{1,j}, K0^{-1}),
/// accepted against the exact non-centred conditional (signs held fixed).
/// Afterwards bt = (beta - beta0) / sigma, so beta is unchanged.
inline InterweaveStats asis_interweave(NonCentredState& s, RngStream& rng) {
  constexpr double kTiny = 1e-300;
  const int nq = s.quantiles(), k = s.covariates();
  const Eigen::MatrixXd beta = s.beta();
  InterweaveStats stats;

  for (int j = 0; j < k; ++j) {
    double b = s.beta0[j];
    Eigen::VectorXd sig = s.sigma.col(j);
    Eigen::VectorXd bt = s.beta_tilde.col(j);

    for (int q = 0; q < nq; ++q) {
      const double prev = q == 0 ? b : beta(q - 1, j);
      const double d2 = std::max((beta(q, j) - prev) * (beta(q, j) - prev), kTiny);
      const double v = s.hs.variance(q, j);
      const double s_new = sample_gig(GigParams(0.0, 1.0 / v, d2), rng);
      const double sign = sig[q] < 0.0 ? -1.0 : 1.0;
      const double sig_new = sign * std::sqrt(s_new);
      ++stats.proposed;
      if (!(std::abs(sig_new) > kTiny) || !std::isfinite(sig_new)) continue;
      const double s_old = sig[q] * sig[q];
      const double bt_old = bt[q];
      const double log_old = detail::rw_local(bt, q);
      bt[q] = (beta(q, j) - b) / sig_new;
      const double log_new = detail::rw_local(bt, q);
      const double log_ratio = log_new - log_old + 0.5 * d2 / s_new - 0.5 * d2 / s_old;
      if (std::log(rng.uniform()) < log_ratio) {
        sig[q] = sig_new;
        ++stats.accepted;
      } else {
        bt[q] = bt_old;
      }
    }

    const double s1 = sig[0] * sig[0];
    const double v0 = s.hs0.variance(0, j);
    const double prec = 1.0 / s1 + 1.0 / v0;
    const double b_new = beta(0, j) / (s1 * prec) + rng.normal() / std::sqrt(prec);
    Eigen::VectorXd bt_new(nq);
    for (int q = 0; q < nq; ++q) bt_new[q] = (beta(q, j) - b_new) / sig[q];
    const double log_ratio = detail::rw_full(bt_new) - detail::rw_full(bt) +
                             0.5 * (beta(0, j) - b_new) * (beta(0, j) - b_new) / s1 -
                             0.5 * (beta(0, j) - b) * (beta(0, j) - b) / s1;
    ++stats.proposed;
    if (std::log(rng.uniform()) < log_ratio) {
      b = b_new;
      bt = bt_new;
      ++stats.accepted;
    }

    s.beta0[j] = b;
    s.sigma.col(j) = sig;
    s.beta_tilde.col(j) = bt;
  }
  return stats;
}

inline Eigen::MatrixXd noncentred_residual(const NonCentredState& s, const SamplerData& data) {
  Eigen::MatrixXd r = data.y - data.x * s.beta().transpose();
  r.rowwise() -= s.aug.alpha.transpose();
  return r;
}

/// One sweep: beta0 -> Sigma_0 -> bt -> sigma -> [interweave] -> signs ->
/// Sigma_tilde -> alpha -> mu, Omega, sigma_y.
inline InterweaveStats noncentred_gibbs_step(NonCentredState& s, const SamplerData& data, const QuantileGrid& grid,
                                             const SamplerConfig& cfg, bool interweave, RngStream& rng) {
  if (cfg.alpha_difference_prior)
    throw ParameterError("the alpha difference prior is only available for the centred sampler");
  InterweaveStats stats;
  s.beta0 = draw_beta0_noncentred(s, data, grid, rng);
  update_horseshoe(Eigen::MatrixXd(s.beta0.transpose()), s.hs0, rng);
  s.beta_tilde = draw_beta_tilde(s, data, grid, rng);
  s.sigma = draw_sigma(s, data, grid, rng);
  if (interweave) stats = asis_interweave(s, rng);
  permute_signs(s, rng);
  update_horseshoe(s.sigma, s.hs, rng);

  const Eigen::MatrixXd w = s.aug.obs_precision(grid);
  const Eigen::MatrixXd ystar = data.y - s.aug.mu - data.x * s.beta().transpose();
  s.aug.alpha = draw_intercepts(ystar, w, cfg, nullptr, rng);

  update_augmentation(s.aug, noncentred_residual(s, data), grid, cfg, rng);
  return stats;
}

inline void record_noncentred(const NonCentredState& s, ChainDraws& d, int slot) {
  const int nq = s.quantiles(), k = s.covariates();
  const Eigen::MatrixXd beta = s.beta();
  for (int q = 0; q < nq; ++q)
    for (int j = 0; j < k; ++j) {
      const int c = q * k + j;
      d.beta(slot, c) = beta(q, j);
      d.lambda2(slot, c) = s.hs.lambda2(q, j);
      d.sigma(slot, c) = s.sigma(q, j);
      d.beta_tilde(slot, c) = s.beta_tilde(q, j);
    }
  d.beta0.row(slot) = s.beta0.transpose();
  d.alpha.row(slot) = s.aug.alpha.transpose();
  d.sigma_y.row(slot) = s.aug.sigma_y.transpose();
  d.nu2.row(slot) = s.hs.nu2.transpose();
  d.nu0_2(slot, 0) = s.hs0.nu2[0];
  d.lambda0_2.row(slot) = s.hs0.lambda2.row(0);
}

/// One chain of the non-centred sampler (`interweave` selects the ASIS variant).
inline ChainDraws run_noncentred_chain(const SamplerData& data, const QuantileGrid& grid, const SamplerConfig& cfg,
                                       bool interweave, int chain, InterweaveStats* stats_out = nullptr) {
  cfg.validate();
  data.validate(grid);
  RngStream rng(cfg.seed, static_cast<std::uint32_t>(chain));
  NonCentredState s = initial_noncentred_state(data, grid, rng);
  ChainDraws d;
  d.allocate(cfg.draws, grid.size(), data.covariates(), true);
  const ChainSchedule sched(cfg);
  InterweaveStats total;
  run_iterations(sched.total(), [&](long it) {
    const InterweaveStats st = noncentred_gibbs_step(s, data, grid, cfg, interweave, rng);
    total.proposed += st.proposed;
    total.accepted += st.accepted;
    if (const int slot = sched.slot(it); slot >= 0) record_noncentred(s, d, slot);
  });
  if (stats_out != nullptr) *stats_out = total;
  return d;
}

}  // namespace qvp

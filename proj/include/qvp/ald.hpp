#pragma once

// Asymmetric-Laplace working likelihood and the data-augmentation updates
// shared by every sampler.
//
// Each observation is written as a normal location-scale mixture
//   y = location + theta_q * omega + sqrt(zeta2_q * sigma_q * omega) * z,
//   omega ~ Exp(mean sigma_q),
// so conditional on omega the observation variance is zeta2_q * sigma_q * omega.

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "banded.hpp"
#include "distributions.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace qvp {

inline void check_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ParameterError("quantile level must lie in (0, 1)");
}

/// rho_tau(u) = u (tau - 1[u < 0]).
inline double tick_loss(double u, double tau) {
  check_tau(tau);
  return u * (tau - (u < 0.0 ? 1.0 : 0.0));
}

/// Ordered quantile levels with their mixture constants.
class QuantileGrid {
 public:
  QuantileGrid() = default;

  explicit QuantileGrid(std::vector<double> taus) : taus_(std::move(taus)) {
    if (taus_.empty()) throw ParameterError("quantile grid must be non-empty");
    for (std::size_t i = 0; i < taus_.size(); ++i) {
      check_tau(taus_[i]);
      if (i > 0 && !(taus_[i] > taus_[i - 1]))
        throw ParameterError("quantile levels must be strictly increasing");
    }
    theta_.resize(size());
    zeta2_.resize(size());
    for (int q = 0; q < size(); ++q) {
      const double t = taus_[q];
      theta_[q] = (1.0 - 2.0 * t) / (t * (1.0 - t));
      zeta2_[q] = 2.0 / (t * (1.0 - t));
    }
  }

  int size() const noexcept { return static_cast<int>(taus_.size()); }
  double tau(int q) const { return taus_[q]; }
  double theta(int q) const { return theta_[q]; }
  double zeta2(int q) const { return zeta2_[q]; }
  const std::vector<double>& taus() const noexcept { return taus_; }
  const Eigen::VectorXd& theta() const noexcept { return theta_; }
  const Eigen::VectorXd& zeta2() const noexcept { return zeta2_; }

  /// Index of a level on the grid, or -1. Levels match to 1e-9.
  int find(double tau) const {
    for (int q = 0; q < size(); ++q)
      if (std::abs(taus_[q] - tau) < 1e-9) return q;
    return -1;
  }

 private:
  std::vector<double> taus_;
  Eigen::VectorXd theta_;
  Eigen::VectorXd zeta2_;
};

inline QuantileGrid make_grid(std::vector<double> taus) { return QuantileGrid(std::move(taus)); }

/// Equally spaced levels q / (Q + 1); Q = 19 gives 0.05, 0.10, ..., 0.95.
inline QuantileGrid make_uniform_grid(int quantiles) {
  if (quantiles < 1) throw ParameterError("grid needs at least one level");
  std::vector<double> t(quantiles);
  for (int q = 0; q < quantiles; ++q) t[q] = static_cast<double>(q + 1) / (quantiles + 1);
  return QuantileGrid(std::move(t));
}

/// log ALD(y | location, scale, tau) = log(tau (1 - tau) / scale) - rho_tau((y - location) / scale).
inline double ald_log_density(double y, double location, double scale, double tau) {
  check_tau(tau);
  if (!(scale > 0.0)) throw ParameterError("ALD scale must be positive");
  return std::log(tau * (1.0 - tau) / scale) - tick_loss((y - location) / scale, tau);
}

/// Latent variables of the normal-exponential mixture for one chain.
struct AugmentationState {
  Eigen::MatrixXd omega;    ///< T x Q latent scales
  Eigen::VectorXd sigma_y;  ///< Q ALD scales
  Eigen::MatrixXd mu;       ///< T x Q, always theta_q * omega
  Eigen::VectorXd alpha;    ///< Q intercepts

  AugmentationState() = default;
  AugmentationState(int t, int q)
      : omega(Eigen::MatrixXd::Ones(t, q)), sigma_y(Eigen::VectorXd::Ones(q)),
        mu(Eigen::MatrixXd::Zero(t, q)), alpha(Eigen::VectorXd::Zero(q)) {}

  void refresh_mu(const QuantileGrid& grid) { mu = omega * grid.theta().asDiagonal(); }

  /// Observation precisions 1 / (zeta2_q sigma_q omega_{t,q}).
  Eigen::MatrixXd obs_precision(const QuantileGrid& grid) const {
    Eigen::MatrixXd w(omega.rows(), omega.cols());
    for (int q = 0; q < omega.cols(); ++q)
      w.col(q) = (grid.zeta2(q) * sigma_y[q] * omega.col(q).array()).inverse().matrix();
    return w;
  }
};

/// Draw omega_{t,q} ~ GIG(1/2, theta^2/(zeta2 sigma) + 2/sigma, r^2/(zeta2 sigma)),
/// where r is the residual excluding the mu term.
inline Eigen::MatrixXd update_omega(const Eigen::MatrixXd& residual, const QuantileGrid& grid,
                                    const Eigen::VectorXd& sigma_y, RngStream& rng) {
  const int nq = grid.size();
  if (residual.cols() != nq || sigma_y.size() != nq)
    throw ParameterError("update_omega: dimension mismatch");
  Eigen::MatrixXd out(residual.rows(), nq);
  for (int q = 0; q < nq; ++q) {
    const double s = sigma_y[q];
    if (!(s > 0.0) || !std::isfinite(s)) throw NumericDomainError("update_omega: sigma_y must be positive");
    const double z2 = grid.zeta2(q);
    const double a = grid.theta(q) * grid.theta(q) / (z2 * s) + 2.0 / s;
    for (int t = 0; t < residual.rows(); ++t) {
      const double r = residual(t, q);
      out(t, q) = sample_gig(GigParams(0.5, a, r * r / (z2 * s)), rng);
    }
  }
  return out;
}

struct InverseGammaPrior {
  double shape = 0.1;
  double scale = 0.1;
};

/// sigma_q ~ IG(a + 3T/2, b + sum omega + sum r^2 / (2 zeta2 omega)) where
/// r = y - alpha - mu - x'beta is the full residual of quantile q.
inline double update_sigma_y(const Eigen::VectorXd& residual, const Eigen::VectorXd& omega_q,
                             double zeta2, const InverseGammaPrior& prior, RngStream& rng) {
  if (residual.size() != omega_q.size()) throw ParameterError("update_sigma_y: dimension mismatch");
  if ((omega_q.array() <= 0.0).any()) throw NumericDomainError("update_sigma_y: omega must be positive");
  const double n = static_cast<double>(residual.size());
  const double scale = prior.scale + omega_q.sum() +
                       (residual.array().square() / (2.0 * zeta2 * omega_q.array())).sum();
  return sample_inverse_gamma(prior.shape + 1.5 * n, scale, rng);
}

/// Per-quantile intercepts under a flat prior: alpha_q is normal with precision
/// sum_t w and mean sum_t w y* / sum_t w.
inline Eigen::VectorXd update_alpha(const Eigen::MatrixXd& ystar, const Eigen::MatrixXd& obs_prec,
                                    RngStream& rng) {
  if (ystar.rows() != obs_prec.rows() || ystar.cols() != obs_prec.cols())
    throw ParameterError("update_alpha: dimension mismatch");
  Eigen::VectorXd out(ystar.cols());
  for (int q = 0; q < ystar.cols(); ++q) {
    const double prec = obs_prec.col(q).sum();
    if (!(prec > 0.0) || !std::isfinite(prec))
      throw NumericDomainError("update_alpha: total precision must be positive");
    const double mean = obs_prec.col(q).dot(ystar.col(q)) / prec;
    out[q] = mean + rng.normal() / std::sqrt(prec);
  }
  return out;
}

/// Intercepts under a zero-mean Gaussian prior with tridiagonal precision
/// (bandwidth 1), used for the proper-prior and the adjacent-difference variants.
inline Eigen::VectorXd update_alpha(const Eigen::MatrixXd& ystar, const Eigen::MatrixXd& obs_prec,
                                    const BandedSpd& prior_prec, RngStream& rng) {
  const int nq = static_cast<int>(ystar.cols());
  if (prior_prec.dim() != nq) throw ParameterError("update_alpha: prior dimension mismatch");
  BandedSpd prec(nq, 1);
  Eigen::VectorXd lin(nq);
  for (int q = 0; q < nq; ++q) {
    prec.lower(q, q) = prior_prec(q, q) + obs_prec.col(q).sum();
    if (q + 1 < nq) prec.lower(q + 1, q) = prior_prec(q + 1, q);
    lin[q] = obs_prec.col(q).dot(ystar.col(q));
  }
  return sample_mvn_from_precision(prec, lin, rng);
}

}  // namespace qvp

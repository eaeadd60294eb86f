#pragma once

// Location-scale heteroscedastic data-generating processes for the
// simulation study:
//   y_t = alpha0 + x_t' beta + (eta0 + sum_k rho_{t,k} eta1_k x_{t,k}) eps_t,
// eps_t ~ N(0, 1), x_t in [0, 1]^K.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include "ald.hpp"
#include "data.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace qvp {

enum class RhoRule { constant_ones, tail_indicator };

struct DgpSpec {
  int id = 1;
  int k = 4;
  Eigen::VectorXd beta;
  Eigen::VectorXd eta1;
  RhoRule rho_rule = RhoRule::constant_ones;
  std::vector<int> tail_indices;  ///< covariates switched on only in the error tails
  double tail_lo = 0.1;
  double tail_hi = 0.9;
  double alpha0 = 0.0;
  double eta0 = 1.0;
};

namespace detail {
inline Eigen::VectorXd ones_then_zeros(int ones, int zeros, double value = 1.0) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(ones + zeros);
  v.head(ones).setConstant(value);
  return v;
}
inline double std_normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}
inline double std_normal_cdf(double z) { return boost::math::cdf(boost::math::normal_distribution<double>(), z); }
}  // namespace detail

/// The five simulation designs.
inline DgpSpec dgp_spec(int id) {
  DgpSpec s;
  s.id = id;
  switch (id) {
    case 1:
      s.k = 4;
      s.beta = Eigen::VectorXd::Ones(4);
      s.eta1 = Eigen::VectorXd::Constant(4, 0.1);
      break;
    case 2:
      s.k = 10;
      s.beta = detail::ones_then_zeros(4, 6);
      s.eta1 = detail::ones_then_zeros(4, 6, 0.1);
      break;
    case 3:
      s.k = 7;
      s.beta = Eigen::VectorXd::Ones(7);
      s.eta1 = detail::ones_then_zeros(3, 4, 0.1);
      break;
    case 4:
      s.k = 10;
      s.beta = detail::ones_then_zeros(4, 6);
      s.eta1 = detail::ones_then_zeros(8, 2, 0.1);
      s.rho_rule = RhoRule::tail_indicator;
      s.tail_indices = {4, 5, 6, 7};
      break;
    case 5:
      s.k = 4;
      s.beta = Eigen::VectorXd::Ones(4);
      s.eta1 = Eigen::VectorXd(4);
      s.eta1 << 0.1, 0.1, 1.0, 1.0;
      break;
    default:
      throw ParameterError("unknown DGP id " + std::to_string(id) + " (expected 1..5)");
  }
  return s;
}

/// Covariates on [0, 1]^K: independent uniforms, or a Gaussian copula with
/// constant correlation whose columns are then min-max transformed.
inline Eigen::MatrixXd generate_design(int t, int k, double correlation, RngStream& rng) {
  if (t < 1 || k < 1) throw ParameterError("generate_design: need T >= 1 and K >= 1");
  if (!(correlation >= 0.0 && correlation < 1.0)) throw ParameterError("correlation must lie in [0, 1)");
  Eigen::MatrixXd x(t, k);
  if (correlation == 0.0) {
    for (int i = 0; i < t; ++i)
      for (int j = 0; j < k; ++j) x(i, j) = rng.uniform();
    return x;
  }
  const double a = std::sqrt(correlation), b = std::sqrt(1.0 - correlation);
  for (int i = 0; i < t; ++i) {
    const double common = rng.normal();
    for (int j = 0; j < k; ++j) x(i, j) = detail::std_normal_cdf(a * common + b * rng.normal());
  }
  for (int j = 0; j < k; ++j) {
    const double lo = x.col(j).minCoeff(), hi = x.col(j).maxCoeff();
    if (hi > lo)
      x.col(j) = ((x.col(j).array() - lo) / (hi - lo)).matrix();
    else
      x.col(j).setZero();
  }
  return x;
}

/// Response for a given design under `spec`.
inline Eigen::VectorXd generate_response(const DgpSpec& spec, const Eigen::MatrixXd& x, RngStream& rng) {
  if (x.cols() != spec.k) throw ParameterError("generate_response: design width differs from the DGP");
  const double lo = detail::std_normal_quantile(spec.tail_lo), hi = detail::std_normal_quantile(spec.tail_hi);
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    const double eps = rng.normal();
    const bool in_tail = eps > hi || eps <= lo;
    double scale = spec.eta0;
    for (int j = 0; j < spec.k; ++j) {
      double rho = 1.0;
      if (spec.rho_rule == RhoRule::tail_indicator)
        for (int idx : spec.tail_indices)
          if (idx == j) rho = in_tail ? 1.0 : 0.0;
      scale += rho * spec.eta1[j] * x(t, j);
    }
    y[t] = spec.alpha0 + x.row(t).dot(spec.beta) + scale * eps;
  }
  return y;
}

inline Dataset generate(const DgpSpec& spec, int t, double correlation, RngStream& rng) {
  if (t < 1) throw ParameterError("generate: T must be at least 1");
  Eigen::MatrixXd x = generate_design(t, spec.k, correlation, rng);
  Eigen::VectorXd y = generate_response(spec, x, rng);
  return make_dataset(std::move(y), std::move(x));
}

struct TrueProfile {
  Eigen::MatrixXd slopes;      ///< Q x K
  Eigen::VectorXd intercepts;  ///< Q
};

/// Conditional quantile coefficients implied by the DGP at each grid level.
/// Tail-indicator covariates vary only for tau <= tail_lo or tau >= tail_hi.
inline TrueProfile true_quantile_coefficients(const DgpSpec& spec, const QuantileGrid& grid) {
  if (spec.rho_rule != RhoRule::constant_ones && spec.rho_rule != RhoRule::tail_indicator)
    throw UnsupportedInputError("true_quantile_coefficients: unsupported rho rule");
  TrueProfile p;
  p.slopes.resize(grid.size(), spec.k);
  p.intercepts.resize(grid.size());
  for (int q = 0; q < grid.size(); ++q) {
    const double tau = grid.tau(q);
    const double z = detail::std_normal_quantile(tau);
    const bool tail = tau >= spec.tail_hi || tau <= spec.tail_lo;
    p.intercepts[q] = spec.alpha0 + spec.eta0 * z;
    for (int j = 0; j < spec.k; ++j) {
      double on = 1.0;
      if (spec.rho_rule == RhoRule::tail_indicator)
        for (int idx : spec.tail_indices)
          if (idx == j) on = tail ? 1.0 : 0.0;
      p.slopes(q, j) = spec.beta[j] + spec.eta1[j] * z * on;
    }
  }
  return p;
}

}  // namespace qvp

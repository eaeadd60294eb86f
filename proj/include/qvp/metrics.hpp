#pragma once

// Forecast and estimation metrics: quantile scores, quantile-weighted scores,
// rearrangement, crossing incidence and coefficient RMSE.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "ald.hpp"
#include "error.hpp"

namespace qvp {

/// Mean tick loss of y_t - qhat_t.
inline double quantile_score(const Eigen::VectorXd& y, const Eigen::VectorXd& qhat, double tau) {
  if (y.size() != qhat.size()) throw ParameterError("quantile_score: length mismatch");
  if (y.size() == 0) throw ParameterError("quantile_score: empty input");
  double s = 0.0;
  for (int t = 0; t < y.size(); ++t) s += tick_loss(y[t] - qhat[t], tau);
  return s / static_cast<double>(y.size());
}

/// Weight of level tau under scheme 1 (uniform 1/Q), 2 (centre tau(1-tau)),
/// 3 (left tail (1-tau)^2) or 4 (right tail tau^2).
inline double quantile_weight(double tau, int scheme, int quantiles) {
  switch (scheme) {
    case 1: return 1.0 / quantiles;
    case 2: return tau * (1.0 - tau);
    case 3: return (1.0 - tau) * (1.0 - tau);
    case 4: return tau * tau;
    default: throw ParameterError("weighting scheme must be 1, 2, 3 or 4");
  }
}

/// sum_q w(tau_q) QS_q.
inline double weighted_qs(const Eigen::VectorXd& qs_by_tau, const QuantileGrid& grid, int scheme) {
  if (qs_by_tau.size() != grid.size()) throw ParameterError("weighted_qs: length mismatch");
  double s = 0.0;
  for (int q = 0; q < grid.size(); ++q) s += quantile_weight(grid.tau(q), scheme, grid.size()) * qs_by_tau[q];
  return s;
}

/// Row-wise ascending sort of fitted quantiles.
inline Eigen::MatrixXd rearrange(const Eigen::MatrixXd& qhat) {
  Eigen::MatrixXd out = qhat;
  std::vector<double> row(qhat.cols());
  for (int t = 0; t < qhat.rows(); ++t) {
    for (int q = 0; q < qhat.cols(); ++q) row[q] = qhat(t, q);
    std::stable_sort(row.begin(), row.end());
    for (int q = 0; q < qhat.cols(); ++q) out(t, q) = row[q];
  }
  return out;
}

/// Fraction of (t, q) entries that differ from the rearranged matrix.
inline double crossing_incidence(const Eigen::MatrixXd& qhat) {
  if (qhat.cols() < 2) throw ParameterError("crossing_incidence needs at least two quantiles");
  if (qhat.rows() == 0) return 0.0;
  const Eigen::MatrixXd sorted = rearrange(qhat);
  const auto differ = (qhat.array() != sorted.array()).count();
  return static_cast<double>(differ) / static_cast<double>(qhat.size());
}

/// sqrt( 1/(N Q) sum_sim sum_k sum_q (beta_hat - beta)^2 ); note: no 1/K factor.
inline double coefficient_rmse(const Eigen::MatrixXd& truth, const std::vector<Eigen::MatrixXd>& estimates) {
  if (estimates.empty()) throw ParameterError("coefficient_rmse: no estimates");
  double s = 0.0;
  for (const auto& e : estimates) {
    if (e.rows() != truth.rows() || e.cols() != truth.cols())
      throw ParameterError("coefficient_rmse: dimension mismatch");
    s += (e - truth).squaredNorm();
  }
  return std::sqrt(s / (static_cast<double>(estimates.size()) * truth.rows()));
}

/// Per-quantile RMSE over the selected covariates:
/// sqrt( 1/N sum_sim sum_{k in cols} (beta_hat_{q,k} - beta_{q,k})^2 ).
inline Eigen::VectorXd coefficient_rmse_by_quantile(const Eigen::MatrixXd& truth,
                                                    const std::vector<Eigen::MatrixXd>& estimates,
                                                    const std::vector<int>& cols) {
  if (estimates.empty()) throw ParameterError("coefficient_rmse_by_quantile: no estimates");
  Eigen::VectorXd s = Eigen::VectorXd::Zero(truth.rows());
  for (const auto& e : estimates)
    for (int q = 0; q < truth.rows(); ++q)
      for (int k : cols) s[q] += (e(q, k) - truth(q, k)) * (e(q, k) - truth(q, k));
  return (s / static_cast<double>(estimates.size())).cwiseSqrt();
}

}  // namespace qvp

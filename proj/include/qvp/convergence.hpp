#pragma once

// Rank-normalised split R-hat and bulk effective sample size
// (Vehtari, Gelman, Simpson, Carpenter & Buerkner, 2021).

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <unsupported/Eigen/FFT>

#include "error.hpp"

namespace qvp {

struct ConvergenceReport {
  double rhat = std::numeric_limits<double>::quiet_NaN();
  double rhat_bulk = std::numeric_limits<double>::quiet_NaN();
  double rhat_folded = std::numeric_limits<double>::quiet_NaN();
  double ess_bulk = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;  ///< zero variance: statistics undefined
};

namespace detail {

/// Split each chain (row) into two halves, dropping the middle draw of odd lengths.
inline Eigen::MatrixXd split_chains(const Eigen::MatrixXd& c) {
  const auto m = c.rows(), half = c.cols() / 2;
  Eigen::MatrixXd out(2 * m, half);
  for (Eigen::Index i = 0; i < m; ++i) {
    out.row(2 * i) = c.row(i).head(half);
    out.row(2 * i + 1) = c.row(i).tail(half);
  }
  return out;
}

/// Normal scores of pooled fractional ranks (average rank for ties).
inline Eigen::MatrixXd rank_normalise(const Eigen::MatrixXd& c) {
  const auto n = c.size();
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  const double* v = c.data();
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return v[a] < v[b]; });
  Eigen::MatrixXd out(c.rows(), c.cols());
  double* o = out.data();
  const boost::math::normal_distribution<double> z;
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    const double score = boost::math::quantile(z, (rank - 0.375) / (static_cast<double>(n) + 0.25));
    for (Eigen::Index k = i; k <= j; ++k) o[idx[k]] = score;
    i = j + 1;
  }
  return out;
}

/// Classic R-hat of (already split) chains in rows.
inline double rhat_basic(const Eigen::MatrixXd& c) {
  const double m = static_cast<double>(c.rows()), n = static_cast<double>(c.cols());
  const Eigen::VectorXd means = c.rowwise().mean();
  Eigen::VectorXd vars(c.rows());
  for (Eigen::Index i = 0; i < c.rows(); ++i) vars[i] = (c.row(i).array() - means[i]).square().sum() / (n - 1.0);
  const double w = vars.mean();
  const double b = n * (means.array() - means.mean()).square().sum() / (m - 1.0);
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

/// Biased autocovariance of one chain via FFT (lags 0..n-1).
inline Eigen::VectorXd autocovariance(const Eigen::VectorXd& x) {
  const auto n = x.size();
  Eigen::Index size = 1;
  while (size < 2 * n) size <<= 1;
  std::vector<double> buf(size, 0.0);
  const double mean = x.mean();
  for (Eigen::Index i = 0; i < n; ++i) buf[i] = x[i] - mean;
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> freq;
  fft.fwd(freq, buf);
  for (auto& f : freq) f = std::complex<double>(std::norm(f), 0.0);
  std::vector<double> back;
  fft.inv(back, freq);
  Eigen::VectorXd ac(n);
  for (Eigen::Index i = 0; i < n; ++i) ac[i] = back[i] / static_cast<double>(n);
  return ac;
}

/// Geyer initial-monotone-sequence ESS of (already split) chains in rows.
inline double ess_basic(const Eigen::MatrixXd& c) {
  const auto m = c.rows(), n = c.cols();
  std::vector<Eigen::VectorXd> acov(m);
  Eigen::VectorXd chain_mean(m), chain_var(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    acov[i] = autocovariance(c.row(i).transpose());
    chain_mean[i] = c.row(i).mean();
    chain_var[i] = acov[i][0] * n / (n - 1.0);
  }
  const double mean_var = chain_var.mean();
  double var_plus = mean_var * (n - 1.0) / n;
  if (m > 1) var_plus += (chain_mean.array() - chain_mean.mean()).square().sum() / (m - 1.0);

  const auto mean_acov = [&](Eigen::Index t) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) s += acov[i][t];
    return s / m;
  };
  Eigen::VectorXd rho = Eigen::VectorXd::Zero(n);
  rho[0] = 1.0;
  double rho_even = 1.0;
  double rho_odd = 1.0 - (mean_var - mean_acov(1)) / var_plus;
  rho[1] = rho_odd;
  Eigen::Index t = 1;
  while (t < n - 5 && (rho_even + rho_odd) > 0.0) {
    rho_even = 1.0 - (mean_var - mean_acov(t + 1)) / var_plus;
    rho_odd = 1.0 - (mean_var - mean_acov(t + 2)) / var_plus;
    if (rho_even + rho_odd >= 0.0) {
      rho[t + 1] = rho_even;
      rho[t + 2] = rho_odd;
    }
    t += 2;
  }
  const Eigen::Index max_t = t;
  if (rho_even > 0.0 && max_t + 1 < n) rho[max_t + 1] = rho_even;
  // Initial monotone sequence.
  for (Eigen::Index s = 1; s <= max_t - 3; s += 2) {
    if (rho[s + 1] + rho[s + 2] > rho[s - 1] + rho[s]) {
      rho[s + 1] = (rho[s - 1] + rho[s]) / 2.0;
      rho[s + 2] = rho[s + 1];
    }
  }
  const double total = static_cast<double>(m) * static_cast<double>(n);
  double tau = -1.0 + 2.0 * rho.head(std::min(max_t + 1, n)).sum() + (max_t + 1 < n ? rho[max_t + 1] : 0.0);
  tau = std::max(tau, 1.0 / std::log10(total));
  return total / tau;
}

}  // namespace detail

/// chains: M x S matrix (one chain per row), M >= 2, S >= 4.
inline ConvergenceReport rank_normalized_rhat_ess(const Eigen::MatrixXd& chains) {
  if (chains.rows() < 2 || chains.cols() < 4)
    throw ParameterError("rank_normalized_rhat_ess: need at least 2 chains of length 4");
  ConvergenceReport r;
  if (!chains.allFinite()) {
    r.degenerate = true;
    return r;
  }
  const Eigen::MatrixXd split = detail::split_chains(chains);
  const double lo = split.minCoeff(), hi = split.maxCoeff();
  if (!(hi > lo)) {
    r.degenerate = true;
    return r;
  }
  // A chain with zero within-chain variance leaves W = 0.
  bool flat_chain = false;
  for (Eigen::Index i = 0; i < split.rows(); ++i) flat_chain |= !(split.row(i).maxCoeff() > split.row(i).minCoeff());

  const Eigen::MatrixXd z = detail::rank_normalise(split);
  r.rhat_bulk = detail::rhat_basic(z);

  std::vector<double> pooled(split.data(), split.data() + split.size());
  std::nth_element(pooled.begin(), pooled.begin() + pooled.size() / 2, pooled.end());
  const double median = pooled[pooled.size() / 2];
  const Eigen::MatrixXd folded = (split.array() - median).abs().matrix();
  r.rhat_folded = detail::rhat_basic(detail::rank_normalise(folded));
  r.rhat = std::max(r.rhat_bulk, r.rhat_folded);
  r.ess_bulk = detail::ess_basic(z);
  if (flat_chain) r.degenerate = true;
  return r;
}

}  // namespace qvp

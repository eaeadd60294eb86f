#pragma once

// Banded SPD algebra for the stacked quantile-coefficient vector.
//
// The stacked vector is ordered quantile-major: entry q*K + j is coefficient
// j of quantile q. In that ordering the prior precision H' S H is block
// tridiagonal with diagonal K x K blocks, and the likelihood adds one dense
// K x K block per quantile, so every posterior precision has bandwidth K.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "rng.hpp"

namespace qvp {

/// The QK x QK first-difference matrix H with identity diagonal blocks and
/// negative identity sub-diagonal blocks. Never stored densely.
class DifferenceMatrix {
 public:
  DifferenceMatrix(int quantiles, int covariates) : q_(quantiles), k_(covariates) {
    if (quantiles < 1 || covariates < 1)
      throw ParameterError("difference matrix: dimensions must be >= 1");
  }

  int quantiles() const noexcept { return q_; }
  int covariates() const noexcept { return k_; }
  int dim() const noexcept { return q_ * k_; }

  /// |H| = 1 (unit lower triangular).
  static constexpr double determinant() noexcept { return 1.0; }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    check(v);
    Eigen::VectorXd out = v;
    for (int q = 1; q < q_; ++q) out.segment(q * k_, k_) -= v.segment((q - 1) * k_, k_);
    return out;
  }

  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& v) const {
    check(v);
    Eigen::VectorXd out = v;
    for (int q = 0; q + 1 < q_; ++q) out.segment(q * k_, k_) -= v.segment((q + 1) * k_, k_);
    return out;
  }

  /// H^{-1} v: blockwise cumulative sum.
  Eigen::VectorXd solve(const Eigen::VectorXd& v) const {
    check(v);
    Eigen::VectorXd out = v;
    for (int q = 1; q < q_; ++q) out.segment(q * k_, k_) += out.segment((q - 1) * k_, k_);
    return out;
  }

  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(dim(), dim());
    for (int i = k_; i < dim(); ++i) h(i, i - k_) = -1.0;
    return h;
  }

 private:
  void check(const Eigen::VectorXd& v) const {
    if (v.size() != dim()) throw ParameterError("difference matrix: dimension mismatch");
  }

  int q_;
  int k_;
};

inline DifferenceMatrix build_difference_matrix(int quantiles, int covariates) {
  return DifferenceMatrix(quantiles, covariates);
}

/// Symmetric banded matrix in lower-packed column-major storage: element
/// (i, j) with 0 <= i - j <= bandwidth lives at data[j * (bandwidth + 1) + i - j].
class BandedSpd {
 public:
  BandedSpd() = default;
  BandedSpd(int dimension, int bandwidth)
      : n_(dimension), bw_(std::min(bandwidth, std::max(dimension - 1, 0))),
        data_(static_cast<std::size_t>(n_) * (bw_ + 1), 0.0) {}

  int dim() const noexcept { return n_; }
  int bandwidth() const noexcept { return bw_; }

  bool in_band(int i, int j) const noexcept { return std::abs(i - j) <= bw_; }

  /// Symmetric read; zero outside the band.
  double operator()(int i, int j) const noexcept {
    if (i < j) std::swap(i, j);
    return (i - j <= bw_) ? data_[idx(i, j)] : 0.0;
  }

  /// Reference to the stored lower-triangle element; requires i >= j within the band.
  double& lower(int i, int j) noexcept { return data_[idx(i, j)]; }
  double lower(int i, int j) const noexcept { return data_[idx(i, j)]; }

  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, n_);
    for (int j = 0; j < n_; ++j)
      for (int i = j; i <= std::min(n_ - 1, j + bw_); ++i) m(i, j) = m(j, i) = lower(i, j);
    return m;
  }

  static BandedSpd from_dense(const Eigen::MatrixXd& m, int bandwidth) {
    BandedSpd b(static_cast<int>(m.rows()), bandwidth);
    for (int j = 0; j < b.n_; ++j)
      for (int i = j; i <= std::min(b.n_ - 1, j + b.bw_); ++i) b.lower(i, j) = m(i, j);
    return b;
  }

 private:
  std::size_t idx(int i, int j) const noexcept {
    return static_cast<std::size_t>(j) * (bw_ + 1) + (i - j);
  }

  int n_ = 0;
  int bw_ = 0;
  std::vector<double> data_;
};

/// Banded Cholesky factor L (A = L L') sharing the BandedSpd layout.
class BandedCholesky {
 public:
  explicit BandedCholesky(const BandedSpd& a) : l_(a) {
    const int n = l_.dim();
    const int bw = l_.bandwidth();
    for (int j = 0; j < n; ++j) {
      const int k0 = std::max(0, j - bw);
      double d = l_.lower(j, j);
      for (int k = k0; k < j; ++k) d -= l_.lower(j, k) * l_.lower(j, k);
      if (!(d > 0.0) || !std::isfinite(d))
        throw NotSpdError("banded Cholesky: matrix is not positive definite (pivot " +
                          std::to_string(j) + ")");
      const double ljj = std::sqrt(d);
      l_.lower(j, j) = ljj;
      const int imax = std::min(n - 1, j + bw);
      for (int i = j + 1; i <= imax; ++i) {
        double s = l_.lower(i, j);
        for (int k = std::max(0, i - bw); k < j; ++k) s -= l_.lower(i, k) * l_.lower(j, k);
        l_.lower(i, j) = s / ljj;
      }
    }
  }

  const BandedSpd& factor() const noexcept { return l_; }

  /// Dense lower-triangular L.
  Eigen::MatrixXd matrix_l() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(l_.dim(), l_.dim());
    for (int j = 0; j < l_.dim(); ++j)
      for (int i = j; i <= std::min(l_.dim() - 1, j + l_.bandwidth()); ++i) m(i, j) = l_.lower(i, j);
    return m;
  }

  /// Solve L z = b in place.
  void solve_lower_in_place(Eigen::VectorXd& b) const {
    const int n = l_.dim();
    const int bw = l_.bandwidth();
    for (int i = 0; i < n; ++i) {
      double s = b[i];
      for (int k = std::max(0, i - bw); k < i; ++k) s -= l_.lower(i, k) * b[k];
      b[i] = s / l_.lower(i, i);
    }
  }

  /// Solve L' x = z in place.
  void solve_upper_in_place(Eigen::VectorXd& z) const {
    const int n = l_.dim();
    const int bw = l_.bandwidth();
    for (int i = n - 1; i >= 0; --i) {
      double s = z[i];
      const int kmax = std::min(n - 1, i + bw);
      for (int k = i + 1; k <= kmax; ++k) s -= l_.lower(k, i) * z[k];
      z[i] = s / l_.lower(i, i);
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x = b;
    solve_lower_in_place(x);
    solve_upper_in_place(x);
    return x;
  }

  double log_determinant() const {
    double s = 0.0;
    for (int i = 0; i < l_.dim(); ++i) s += std::log(l_.lower(i, i));
    return 2.0 * s;
  }

 private:
  BandedSpd l_;
};

/// Draw from N(P^{-1} b, P^{-1}) given the precision P and linear term b:
/// factor P = L L', solve for the mean, then add L'^{-1} z with z ~ N(0, I).
inline Eigen::VectorXd sample_mvn_from_precision(const BandedSpd& prec,
                                                 const Eigen::VectorXd& linear_term,
                                                 RngStream& rng) {
  if (linear_term.size() != prec.dim())
    throw ParameterError("sample_mvn_from_precision: dimension mismatch");
  const BandedCholesky chol(prec);
  Eigen::VectorXd mean = linear_term;
  chol.solve_lower_in_place(mean);
  // mean now holds L^{-1} b; adding z before the back-substitution yields
  // L'^{-1}(L^{-1} b + z) = P^{-1} b + L'^{-1} z in a single pass.
  for (int i = 0; i < mean.size(); ++i) mean[i] += rng.normal();
  chol.solve_upper_in_place(mean);
  return mean;
}

/// Posterior mean P^{-1} b only.
inline Eigen::VectorXd precision_mean(const BandedSpd& prec, const Eigen::VectorXd& linear_term) {
  return BandedCholesky(prec).solve(linear_term);
}

/// Dense reference path for small problems (dimension <= 64).
inline Eigen::VectorXd dense_sample_mvn_from_precision(const Eigen::MatrixXd& prec,
                                                       const Eigen::VectorXd& linear_term,
                                                       RngStream& rng) {
  if (prec.rows() > 64) throw ParameterError("dense MVN path is limited to dimension <= 64");
  Eigen::LLT<Eigen::MatrixXd> llt(prec);
  if (llt.info() != Eigen::Success) throw NotSpdError("dense Cholesky failed");
  Eigen::VectorXd z(prec.rows());
  for (int i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return llt.solve(linear_term) + llt.matrixU().solve(z);
}

/// Posterior precision H' S H + sum_q blockdiag(gram_q), with S = diag(state_prec)
/// and gram_q = X_q' W_q X_q already formed by the caller.
inline BandedSpd form_posterior_precision(const DifferenceMatrix& h,
                                          const Eigen::VectorXd& state_prec,
                                          std::span<const Eigen::MatrixXd> grams) {
  const int nq = h.quantiles();
  const int k = h.covariates();
  if (state_prec.size() != h.dim() || static_cast<int>(grams.size()) != nq)
    throw ParameterError("form_posterior_precision: dimension mismatch");
  for (int i = 0; i < state_prec.size(); ++i)
    if (!(state_prec[i] > 0.0) || !std::isfinite(state_prec[i]))
      throw NumericDomainError("form_posterior_precision: state precision must be positive");

  BandedSpd p(h.dim(), k);
  for (int q = 0; q < nq; ++q) {
    const Eigen::MatrixXd& g = grams[q];
    if (g.rows() != k || g.cols() != k)
      throw ParameterError("form_posterior_precision: Gram block has wrong shape");
    const int base = q * k;
    for (int j = 0; j < k; ++j) {
      for (int i = j; i < k; ++i) p.lower(base + i, base + j) += g(i, j);
      double d = state_prec[base + j];
      if (q + 1 < nq) {
        d += state_prec[base + k + j];
        p.lower(base + k + j, base + j) -= state_prec[base + k + j];
      }
      p.lower(base + j, base + j) += d;
    }
  }
  return p;
}

/// Convenience overload building the Gram blocks from per-quantile designs
/// (T x K each) and observation precisions (T x Q).
inline BandedSpd form_posterior_precision(const DifferenceMatrix& h,
                                          const Eigen::VectorXd& state_prec,
                                          std::span<const Eigen::MatrixXd> x_blocks,
                                          const Eigen::MatrixXd& obs_prec) {
  const int nq = h.quantiles();
  if (static_cast<int>(x_blocks.size()) != nq || obs_prec.cols() != nq)
    throw ParameterError("form_posterior_precision: dimension mismatch");
  if ((obs_prec.array() <= 0.0).any() || !obs_prec.allFinite())
    throw NumericDomainError("form_posterior_precision: observation precision must be positive");
  std::vector<Eigen::MatrixXd> grams;
  grams.reserve(nq);
  for (int q = 0; q < nq; ++q) {
    const auto& x = x_blocks[q];
    if (x.rows() != obs_prec.rows() || x.cols() != h.covariates())
      throw ParameterError("form_posterior_precision: design block has wrong shape");
    grams.push_back(x.transpose() * obs_prec.col(q).asDiagonal() * x);
  }
  return form_posterior_precision(h, state_prec, std::span<const Eigen::MatrixXd>(grams));
}

}  // namespace qvp

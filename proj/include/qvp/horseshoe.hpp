#pragma once

// Horseshoe scale hierarchy through the inverse-gamma mixture of the
// half-Cauchy (Makalic & Schmidt):
//   delta_{r,j} ~ N(0, nu_r^2 lambda_{r,j}^2),
//   nu_r^2 | xi_r ~ IG(1/2, 1/xi_r),           xi_r ~ IG(1/2, 1/g^2),
//   lambda_{r,j}^2 | xi_{r,j} ~ IG(1/2, 1/xi_{r,j}), xi_{r,j} ~ IG(1/2, 1),
// where g is the global scale of the block.

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "distributions.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace qvp {

/// Scales are kept inside [floor, ceiling] so that precisions stay finite
/// after long excursions of the half-Cauchy tails.
inline constexpr double kScaleFloor = 1e-24;
inline constexpr double kScaleCeiling = 1e24;

inline double clamp_scale(double v) { return std::clamp(v, kScaleFloor, kScaleCeiling); }

/// Smallest prior variance handed to the Gaussian coefficient conditionals.
/// Precisions above 1e12 next to data precisions of order 1e2 lose the data
/// to cancellation in the banded factorisation.
inline constexpr double kVarianceFloor = 1e-12;

/// One horseshoe block with `rows` global scales and rows x cols local scales.
struct HorseshoeState {
  Eigen::VectorXd nu2;        ///< global scales nu_r^2
  Eigen::MatrixXd lambda2;    ///< local scales lambda_{r,j}^2
  Eigen::VectorXd xi_nu;      ///< auxiliaries of nu
  Eigen::MatrixXd xi_lambda;  ///< auxiliaries of lambda
  double global_scale = 1.0;  ///< g in nu_r ~ C+(0, g)

  HorseshoeState() = default;
  HorseshoeState(int rows, int cols, double global)
      : nu2(Eigen::VectorXd::Ones(rows)), lambda2(Eigen::MatrixXd::Ones(rows, cols)),
        xi_nu(Eigen::VectorXd::Ones(rows)), xi_lambda(Eigen::MatrixXd::Ones(rows, cols)),
        global_scale(global) {
    if (!(global > 0.0) || !std::isfinite(global)) throw ParameterError("horseshoe: global scale must be positive");
  }

  int rows() const noexcept { return static_cast<int>(nu2.size()); }
  int cols() const noexcept { return static_cast<int>(lambda2.cols()); }

  /// Prior variance nu_r^2 lambda_{r,j}^2, floored at kVarianceFloor.
  double variance(int r, int j) const { return std::max(nu2[r] * lambda2(r, j), kVarianceFloor); }

  /// All variances, flattened row-major (index r * cols + j).
  Eigen::VectorXd variances() const {
    Eigen::VectorXd v(rows() * cols());
    for (int r = 0; r < rows(); ++r)
      for (int j = 0; j < cols(); ++j) v[r * cols() + j] = variance(r, j);
    return v;
  }

  /// Draw the whole hierarchy from its prior.
  void draw_prior(RngStream& rng) {
    for (int r = 0; r < rows(); ++r) {
      const auto g = sample_half_cauchy_ig_mixture(global_scale, rng);
      nu2[r] = clamp_scale(g.x2);
      xi_nu[r] = g.aux;
      for (int j = 0; j < cols(); ++j) {
        const auto l = sample_half_cauchy_ig_mixture(1.0, rng);
        lambda2(r, j) = clamp_scale(l.x2);
        xi_lambda(r, j) = l.aux;
      }
    }
  }
};

/// Extra Gaussian terms sharing a block's global scale: for row r, `count[r]`
/// additional N(0, nu_r^2) variables with sum of squares `sum_sq[r]`.
struct SharedGlobalTerms {
  Eigen::VectorXd count;
  Eigen::VectorXd sum_sq;
};

/// One Gibbs sweep over the hierarchy given the Gaussian variables delta
/// (rows x cols):
///   nu_r^2 ~ IG((K+1)/2, 1/xi_r + sum_j delta^2 / (2 lambda^2)),
///   xi_r ~ IG(1, 1/g^2 + 1/nu_r^2),
///   lambda^2 ~ IG(1, 1/xi_lambda + delta^2 / (2 nu_r^2)),
///   xi_lambda ~ IG(1, 1 + 1/lambda^2).
inline void update_horseshoe(const Eigen::MatrixXd& delta, HorseshoeState& hs, RngStream& rng,
                             const SharedGlobalTerms* extra = nullptr) {
  if (delta.rows() != hs.rows() || delta.cols() != hs.cols())
    throw ParameterError("update_horseshoe: dimension mismatch");
  const int k = hs.cols();
  const double inv_g2 = 1.0 / (hs.global_scale * hs.global_scale);
  for (int r = 0; r < hs.rows(); ++r) {
    double shape = 0.5 * (k + 1);
    double scale = 1.0 / hs.xi_nu[r];
    for (int j = 0; j < k; ++j) scale += delta(r, j) * delta(r, j) / (2.0 * hs.lambda2(r, j));
    if (extra != nullptr) {
      shape += 0.5 * extra->count[r];
      scale += 0.5 * extra->sum_sq[r];
    }
    hs.nu2[r] = clamp_scale(sample_inverse_gamma(shape, scale, rng));
    hs.xi_nu[r] = sample_inverse_gamma(1.0, inv_g2 + 1.0 / hs.nu2[r], rng);
    for (int j = 0; j < k; ++j) {
      const double l2 = sample_inverse_gamma(
          1.0, 1.0 / hs.xi_lambda(r, j) + delta(r, j) * delta(r, j) / (2.0 * hs.nu2[r]), rng);
      hs.lambda2(r, j) = clamp_scale(l2);
      hs.xi_lambda(r, j) = sample_inverse_gamma(1.0, 1.0 + 1.0 / hs.lambda2(r, j), rng);
    }
  }
}

}  // namespace qvp

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

namespace qvp {

/// Column-wise affine map of the design onto [-1, 1]^K.
/// x_scaled = 2 (x - lo) / (hi - lo) - 1; constant columns map to 0.
struct Rescaling {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  std::vector<int> degenerate;  ///< indices of constant columns

  bool is_identity() const noexcept { return lo.size() == 0; }

  /// Coefficients on the scaled design mapped back to the original units.
  /// Returns the original-scale slopes and adds the induced shift to intercept.
  Eigen::VectorXd slopes_to_original(const Eigen::VectorXd& scaled, double& intercept) const {
    if (is_identity()) return scaled;
    Eigen::VectorXd out(scaled.size());
    for (int j = 0; j < scaled.size(); ++j) {
      const double range = hi[j] - lo[j];
      if (range > 0.0) {
        out[j] = 2.0 * scaled[j] / range;
        intercept -= scaled[j] * (2.0 * lo[j] / range + 1.0);
      } else {
        out[j] = 0.0;  // the scaled column is identically 0
      }
    }
    return out;
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    if (is_identity()) return x;
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (int j = 0; j < x.cols(); ++j) {
      const double range = hi[j] - lo[j];
      if (range > 0.0)
        out.col(j) = (2.0 * (x.col(j).array() - lo[j]) / range - 1.0).matrix();
      else
        out.col(j).setZero();
    }
    return out;
  }
};

/// Response vector and design matrix. The design never contains an intercept
/// column: intercepts are the per-quantile alpha parameters.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;  ///< T x K, possibly rescaled
  std::string response_name = "y";
  std::vector<std::string> covariate_names;
  Rescaling rescaling;  ///< identity unless rescale() was applied

  int rows() const noexcept { return static_cast<int>(y.size()); }
  int covariates() const noexcept { return static_cast<int>(x.cols()); }

  void validate() const {
    if (x.rows() != y.size()) throw IngestionError("dataset: design and response row counts differ");
    if (!y.allFinite() || !x.allFinite()) throw IngestionError("dataset: non-finite values");
  }

  /// Rescale the design to [-1, 1]^K, remembering the map for back-transformation.
  /// Returns the indices of constant columns (mapped to 0).
  std::vector<int> rescale() {
    Rescaling r;
    r.lo = x.colwise().minCoeff().transpose();
    r.hi = x.colwise().maxCoeff().transpose();
    for (int j = 0; j < x.cols(); ++j)
      if (!(r.hi[j] > r.lo[j])) r.degenerate.push_back(j);
    x = r.apply(x);
    rescaling = std::move(r);
    return rescaling.degenerate;
  }
};

inline Dataset make_dataset(Eigen::VectorXd y, Eigen::MatrixXd x) {
  Dataset d;
  d.y = std::move(y);
  d.x = std::move(x);
  for (int j = 0; j < d.x.cols(); ++j) d.covariate_names.push_back("x" + std::to_string(j + 1));
  d.validate();
  return d;
}

}  // namespace qvp

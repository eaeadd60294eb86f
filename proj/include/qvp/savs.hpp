#pragma once

// Signal-adaptive variable selection: each posterior draw is projected onto a
// possibly sparse vector by the one-pass soft-threshold rule
//   xi_j = sign(c_j) max(0, |c_j| n_j - c_j^{-2}) / n_j,   n_j = ||column_j||^2,
// whose penalty c_j^{-2} is inversely proportional to the draw itself.

#include <cmath>

#include <Eigen/Dense>

#include "draws.hpp"
#include "error.hpp"

namespace qvp {

inline Eigen::VectorXd savs_project(const Eigen::VectorXd& coef, const Eigen::VectorXd& column_sqnorm) {
  if (coef.size() != column_sqnorm.size()) throw ParameterError("savs_project: dimension mismatch");
  Eigen::VectorXd out(coef.size());
  for (int j = 0; j < coef.size(); ++j) {
    const double c = coef[j];
    const double n = column_sqnorm[j];
    if (c == 0.0 || !(n > 0.0)) {
      out[j] = 0.0;
      continue;
    }
    const double shrunk = std::abs(c) * n - 1.0 / (c * c);
    out[j] = shrunk > 0.0 ? std::copysign(shrunk / n, c) : 0.0;
  }
  return out;
}

struct SparsifiedDraws {
  Eigen::MatrixXd xi0;               ///< draws x K sparse beta0
  Eigen::MatrixXd xi_sigma;          ///< draws x QK sparse state scales
  Eigen::VectorXd inclusion0;        ///< K inclusion frequencies
  Eigen::VectorXd inclusion_sigma;   ///< QK inclusion frequencies
  Eigen::MatrixXd beta;              ///< draws x QK sparse coefficients xi0 + xi_sigma .* bt
};

/// Project every pooled draw of a non-centred run. `x` is the design the
/// draws refer to.
inline SparsifiedDraws sparsify_posterior(const PosteriorDraws& draws, const Eigen::MatrixXd& x) {
  if (!draws.has_noncentred())
    throw UnsupportedInputError("SAVS needs non-centred draws (beta0 and sigma per draw)");
  const int k = draws.covariates, nq = draws.quantiles;
  if (x.cols() != k) throw ParameterError("sparsify_posterior: design has the wrong number of columns");
  const Eigen::VectorXd xnorm = x.colwise().squaredNorm().transpose();
  const Eigen::MatrixXd b0 = draws.pooled(&ChainDraws::beta0);
  const Eigen::MatrixXd sg = draws.pooled(&ChainDraws::sigma);
  const Eigen::MatrixXd bt = draws.pooled(&ChainDraws::beta_tilde);
  const auto n = b0.rows();

  SparsifiedDraws out;
  out.xi0.resize(n, k);
  out.xi_sigma.resize(n, nq * k);
  out.beta.resize(n, nq * k);
  for (Eigen::Index s = 0; s < n; ++s) {
    const Eigen::VectorXd xi0 = savs_project(b0.row(s).transpose(), xnorm);
    out.xi0.row(s) = xi0.transpose();
    for (int q = 0; q < nq; ++q) {
      // Design of sigma_q is X diag(bt_q): column norms change every draw.
      const Eigen::VectorXd bq = bt.row(s).segment(q * k, k).transpose();
      const Eigen::VectorXd norms = xnorm.cwiseProduct(bq.cwiseProduct(bq));
      const Eigen::VectorXd xs = savs_project(sg.row(s).segment(q * k, k).transpose(), norms);
      out.xi_sigma.row(s).segment(q * k, k) = xs.transpose();
      out.beta.row(s).segment(q * k, k) = (xi0 + xs.cwiseProduct(bq)).transpose();
    }
  }
  const double denom = n > 0 ? static_cast<double>(n) : 1.0;
  out.inclusion0 = (out.xi0.array() != 0.0).cast<double>().colwise().sum().transpose() / denom;
  out.inclusion_sigma = (out.xi_sigma.array() != 0.0).cast<double>().colwise().sum().transpose() / denom;
  return out;
}

/// Copy of `draws` whose beta blocks hold the sparsified coefficients.
inline PosteriorDraws with_sparsified_beta(const PosteriorDraws& draws, const SparsifiedDraws& sp) {
  PosteriorDraws out = draws;
  Eigen::Index row = 0;
  for (auto& c : out.chains) {
    c.beta = sp.beta.middleRows(row, c.beta.rows());
    c.beta0 = sp.xi0.middleRows(row, c.beta0.rows());
    c.sigma = sp.xi_sigma.middleRows(row, c.sigma.rows());
    row += c.beta.rows();
  }
  return out;
}

}  // namespace qvp

#pragma once

// QVAR models assembled by hand from known coefficients, for checking the
// forecasting and impulse-response machinery against closed forms.

#include <string>

#include <Eigen/Dense>

#include "qvp/qvar.hpp"

namespace qvp::oracle {

/// Hand-built model with S draws whose coefficients do not depend on the draw.
/// coef(i, q) returns the intercept followed by the i + m regressors.
template <class F>
inline qvp::QvarModel hand_model(int m, const qvp::QuantileGrid& grid, int draws, F coef) {
  qvp::QvarModel model;
  model.m = m;
  model.grid = grid;
  for (int i = 0; i < m; ++i) {
    model.names.push_back("y" + std::to_string(i + 1));
    const int k = model.regressors(i);
    Eigen::MatrixXd beta(draws, grid.size() * k), alpha(draws, grid.size());
    for (int q = 0; q < grid.size(); ++q) {
      const Eigen::VectorXd c = coef(i, q);
      for (int s = 0; s < draws; ++s) {
        alpha(s, q) = c[0];
        beta.row(s).segment(q * k, k) = c.tail(k).transpose();
      }
    }
    model.beta.push_back(beta);
    model.alpha.push_back(alpha);
  }
  model.last = Eigen::VectorXd::Zero(m);
  return model;
}

}  // namespace qvp::oracle

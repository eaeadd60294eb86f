#pragma once

// Independent Bayesian quantile regression: one ALD regression per level with
// a flat prior on (alpha_q, beta_q). Used as the comparison baseline.

#include <cmath>

#include <Eigen/Dense>

#include "ald.hpp"
#include "draws.hpp"
#include "rng.hpp"
#include "sampler_common.hpp"

namespace qvp {

struct IndependentState {
  Eigen::MatrixXd beta;  ///< Q x K
  AugmentationState aug;
};

/// (alpha_q, beta_q) | rest for every q, with design [1, X] and flat prior.
inline void draw_independent_coefficients(IndependentState& s, const SamplerData& data, const QuantileGrid& grid,
                                          RngStream& rng) {
  const int t = data.rows(), k = data.covariates();
  Eigen::MatrixXd z(t, k + 1);
  z.col(0).setOnes();
  z.rightCols(k) = data.x;
  const Eigen::MatrixXd w = s.aug.obs_precision(grid);
  for (int q = 0; q < grid.size(); ++q) {
    const Eigen::MatrixXd zw = z.transpose() * w.col(q).asDiagonal();
    const Eigen::MatrixXd prec = zw * z;
    const Eigen::VectorXd lin = zw * (data.y.col(q) - s.aug.mu.col(q));
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success) throw NotSpdError("independent baseline: design is rank deficient");
    Eigen::VectorXd zz(k + 1);
    for (int i = 0; i <= k; ++i) zz[i] = rng.normal();
    const Eigen::VectorXd draw = llt.solve(lin) + llt.matrixU().solve(zz);
    s.aug.alpha[q] = draw[0];
    s.beta.row(q) = draw.tail(k).transpose();
  }
}

inline ChainDraws run_independent_chain(const SamplerData& data, const QuantileGrid& grid, const SamplerConfig& cfg,
                                        int chain) {
  cfg.validate();
  data.validate(grid);
  RngStream rng(cfg.seed, static_cast<std::uint32_t>(chain));
  IndependentState s;
  s.aug = initial_augmentation(data, grid, rng);
  s.beta = Eigen::MatrixXd::Zero(grid.size(), data.covariates());
  const int nq = grid.size(), k = data.covariates();
  ChainDraws d;
  d.allocate(cfg.draws, nq, k, false);
  // No shrinkage hierarchy and no quantile-invariant vector in this model.
  d.nu2.resize(0, 0);
  d.lambda2.resize(0, 0);
  d.nu0_2.resize(0, 0);
  d.lambda0_2.resize(0, 0);
  d.beta0.resize(0, 0);
  const ChainSchedule sched(cfg);
  run_iterations(sched.total(), [&](long it) {
    draw_independent_coefficients(s, data, grid, rng);
    Eigen::MatrixXd r = data.y - data.x * s.beta.transpose();
    r.rowwise() -= s.aug.alpha.transpose();
    update_augmentation(s.aug, r, grid, cfg, rng);
    if (const int slot = sched.slot(it); slot >= 0) {
      for (int q = 0; q < nq; ++q)
        for (int j = 0; j < k; ++j) d.beta(slot, q * k + j) = s.beta(q, j);
      d.alpha.row(slot) = s.aug.alpha.transpose();
      d.sigma_y.row(slot) = s.aug.sigma_y.transpose();
    }
  });
  return d;
}

}  // namespace qvp

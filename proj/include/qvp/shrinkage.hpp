#pragma once

// Shrinkage-profile checks: the implied density of the shrinkage coefficient
// and a Monte-Carlo estimate of the prior probability of non-crossing.

#include <cmath>
#include <limits>
#include <numbers>

#include "distributions.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace qvp {

/// Density of kappa = 1 / (1 + a^2 lambda^2), lambda ~ C+(0, 1):
///   p(kappa) = (1/pi) a / ((a^2 - 1) kappa + 1) / sqrt(kappa (1 - kappa)).
/// At a = 1 this is Beta(1/2, 1/2).
inline double kappa_density(double kappa, double a) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw ParameterError("kappa_density: kappa must lie in (0, 1)");
  if (!(a > 0.0) || !std::isfinite(a)) throw ParameterError("kappa_density: a must be positive");
  return a / (std::numbers::pi * ((a * a - 1.0) * kappa + 1.0) * std::sqrt(kappa * (1.0 - kappa)));
}

/// Draw of kappa under the same construction.
inline double sample_kappa(double a, RngStream& rng) {
  const double l2 = sample_half_cauchy_ig_mixture(1.0, rng).x2;
  return 1.0 / (1.0 + a * a * l2);
}

struct NoncrossingPriorConfig {
  int quantiles = 19;
  int covariates = 4;
  double alpha_gap = 0.1;  ///< gamma_{0,q} = alpha_q - alpha_{q-1}, held fixed
  /// Fixed variance of every coefficient difference; NaN draws the fused
  /// horseshoe hierarchy nu_q ~ C+(0, 1/sqrt(T)), lambda ~ C+(0, 1) instead.
  double state_variance = std::numeric_limits<double>::quiet_NaN();
  int observations = 300;  ///< T in the global scale
};

/// Monte-Carlo estimate of P(gamma_{0,q} - sum_j gamma_{j,q} >= 0 for all q >= 2)
/// under the prior, for covariates rescaled to [-1, 1].
inline double prior_noncrossing_probability(const NoncrossingPriorConfig& cfg, int n_draws, RngStream& rng) {
  if (cfg.quantiles < 2 || cfg.covariates < 1 || n_draws < 1)
    throw ParameterError("prior_noncrossing_probability: invalid dimensions");
  const bool fixed = !std::isnan(cfg.state_variance);
  if (fixed && cfg.state_variance < 0.0) throw ParameterError("state variance must be non-negative");
  const double global = 1.0 / std::sqrt(static_cast<double>(cfg.observations));
  long ok = 0;
  for (int s = 0; s < n_draws; ++s) {
    bool holds = true;
    for (int q = 1; q < cfg.quantiles; ++q) {
      const double nu2 = fixed ? 1.0 : sample_half_cauchy_ig_mixture(global, rng).x2;
      double sum = 0.0;
      for (int j = 0; j < cfg.covariates; ++j) {
        const double v = fixed ? cfg.state_variance : nu2 * sample_half_cauchy_ig_mixture(1.0, rng).x2;
        sum += std::sqrt(v) * rng.normal();
      }
      holds = holds && (cfg.alpha_gap - sum >= 0.0);
    }
    ok += holds ? 1 : 0;
  }
  return static_cast<double>(ok) / n_draws;
}

}  // namespace qvp

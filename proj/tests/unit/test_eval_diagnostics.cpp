#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "qvp/convergence.hpp"
#include "qvp/metrics.hpp"
#include "qvp/rng.hpp"
#include "qvp/shrinkage.hpp"
#include "support/oracles.hpp"

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using qvp::RngStream;

TEST(QuantileScore, WorkedExample) {
  VectorXd y(3), q(3);
  y << 1.0, 2.0, 3.0;
  q << 2.0, 2.0, 2.0;
  EXPECT_DOUBLE_EQ(qvp::quantile_score(y, q, 0.25), (0.75 + 0.0 + 0.25) / 3.0);
  EXPECT_DOUBLE_EQ(qvp::quantile_score(y, q, 0.5), (0.5 + 0.0 + 0.5) / 3.0);
  EXPECT_THROW(qvp::quantile_score(y, VectorXd::Zero(2), 0.5), qvp::ParameterError);
  EXPECT_THROW(qvp::quantile_score(VectorXd(), VectorXd(), 0.5), qvp::ParameterError);
}

TEST(QuantileScore, MinimisedByTheTrueQuantile) {
  // Expected tick loss of N(0, 1) at c is minimised at c = Phi^{-1}(tau).
  RngStream rng(51);
  VectorXd y(200000);
  for (int i = 0; i < y.size(); ++i) y[i] = rng.normal();
  const double tau = 0.9, z = 1.2815515655446004;
  const double at_truth = qvp::quantile_score(y, VectorXd::Constant(y.size(), z), tau);
  for (double off : {-0.3, -0.1, 0.1, 0.3})
    EXPECT_LT(at_truth, qvp::quantile_score(y, VectorXd::Constant(y.size(), z + off), tau));
}

TEST(QuantileWeights, SchemesAndWeightedScore) {
  EXPECT_DOUBLE_EQ(qvp::quantile_weight(0.2, 1, 4), 0.25);
  EXPECT_DOUBLE_EQ(qvp::quantile_weight(0.2, 2, 4), 0.16);
  EXPECT_DOUBLE_EQ(qvp::quantile_weight(0.2, 3, 4), 0.64);
  EXPECT_DOUBLE_EQ(qvp::quantile_weight(0.2, 4, 4), 0.04);
  EXPECT_THROW(qvp::quantile_weight(0.2, 5, 4), qvp::ParameterError);
  const auto grid = qvp::make_uniform_grid(3);  // 0.25, 0.5, 0.75
  VectorXd qs(3);
  qs << 1.0, 2.0, 3.0;
  EXPECT_DOUBLE_EQ(qvp::weighted_qs(qs, grid, 1), 2.0);
  EXPECT_DOUBLE_EQ(qvp::weighted_qs(qs, grid, 2), 0.1875 + 0.5 + 0.5625);
  EXPECT_DOUBLE_EQ(qvp::weighted_qs(qs, grid, 3), 0.5625 + 0.5 + 0.1875);
  EXPECT_DOUBLE_EQ(qvp::weighted_qs(qs, grid, 4), 0.0625 + 0.5 + 1.6875);
  EXPECT_THROW(qvp::weighted_qs(VectorXd::Ones(2), grid, 1), qvp::ParameterError);
}

TEST(Rearrange, SortsRowsAndCountsCrossings) {
  MatrixXd q(3, 4);
  q << 1, 2, 3, 4,
       1, 3, 2, 4,
       4, 3, 2, 1;
  const MatrixXd r = qvp::rearrange(q);
  for (int t = 0; t < 3; ++t)
    for (int j = 0; j + 1 < 4; ++j) EXPECT_LE(r(t, j), r(t, j + 1));
  EXPECT_EQ(r.row(2), q.row(0));
  // Row 2 differs at two cells, row 3 at all four.
  EXPECT_DOUBLE_EQ(qvp::crossing_incidence(q), 6.0 / 12.0);
  EXPECT_DOUBLE_EQ(qvp::crossing_incidence(r), 0.0);
  EXPECT_THROW(qvp::crossing_incidence(MatrixXd::Zero(3, 1)), qvp::ParameterError);
}

TEST(CoefficientRmse, MatchesHandComputation) {
  const MatrixXd truth = MatrixXd::Zero(2, 3);
  MatrixXd e1 = MatrixXd::Zero(2, 3), e2 = MatrixXd::Zero(2, 3);
  e1(0, 0) = 1.0;
  e2(1, 2) = 2.0;
  // sqrt((1 + 4) / (2 sims * 2 quantiles))
  EXPECT_DOUBLE_EQ(qvp::coefficient_rmse(truth, {e1, e2}), std::sqrt(5.0 / 4.0));
  const VectorXd byq = qvp::coefficient_rmse_by_quantile(truth, {e1, e2}, {0, 2});
  EXPECT_DOUBLE_EQ(byq[0], std::sqrt(0.5));
  EXPECT_DOUBLE_EQ(byq[1], std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(qvp::coefficient_rmse_by_quantile(truth, {e1, e2}, {1})[0], 0.0);
  EXPECT_THROW(qvp::coefficient_rmse(truth, {MatrixXd::Zero(3, 3)}), qvp::ParameterError);
}

MatrixXd iid_chains(int m, int n, RngStream& rng) {
  MatrixXd c(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) c(i, j) = rng.normal();
  return c;
}

TEST(Convergence, IndependentChainsLookConverged) {
  RngStream rng(52);
  const auto r = qvp::rank_normalized_rhat_ess(iid_chains(4, 1000, rng));
  EXPECT_FALSE(r.degenerate);
  EXPECT_LT(r.rhat, 1.01);
  EXPECT_GT(r.rhat, 0.99);
  EXPECT_NEAR(r.ess_bulk, 4000.0, 400.0);
}

TEST(Convergence, ShiftedChainFlagged) {
  RngStream rng(53);
  MatrixXd c = iid_chains(4, 1000, rng);
  c.row(3).array() += 2.0;
  EXPECT_GT(qvp::rank_normalized_rhat_ess(c).rhat, 1.1);
  // Different scales only show in the folded statistic.
  MatrixXd s = iid_chains(4, 1000, rng);
  s.row(0) *= 4.0;
  const auto r = qvp::rank_normalized_rhat_ess(s);
  EXPECT_LT(r.rhat_bulk, 1.05);
  EXPECT_GT(r.rhat_folded, 1.05);
}

TEST(Convergence, AutocorrelationReducesEss) {
  RngStream rng(54);
  const double phi = 0.9;
  MatrixXd c(4, 5000);
  for (int i = 0; i < 4; ++i) {
    double x = rng.normal() / std::sqrt(1.0 - phi * phi);
    for (int j = 0; j < 5000; ++j) {
      x = phi * x + rng.normal();
      c(i, j) = x;
    }
  }
  const double expected = 20000.0 * (1.0 - phi) / (1.0 + phi);
  EXPECT_NEAR(qvp::rank_normalized_rhat_ess(c).ess_bulk, expected, 0.25 * expected);
}

TEST(Convergence, DegenerateAndInvalidInputs) {
  EXPECT_TRUE(qvp::rank_normalized_rhat_ess(MatrixXd::Constant(4, 100, 1.5)).degenerate);
  MatrixXd nan = MatrixXd::Zero(2, 10);
  nan(0, 0) = std::nan("");
  EXPECT_TRUE(qvp::rank_normalized_rhat_ess(nan).degenerate);
  EXPECT_THROW(qvp::rank_normalized_rhat_ess(MatrixXd::Zero(1, 100)), qvp::ParameterError);
  EXPECT_THROW(qvp::rank_normalized_rhat_ess(MatrixXd::Zero(2, 3)), qvp::ParameterError);
}

/// Closed-form CDF of kappa = 1 / (1 + a^2 lambda^2), lambda ~ C+(0, 1).
double kappa_cdf(double k, double a) {
  return 1.0 - 2.0 / std::numbers::pi * std::atan(std::sqrt((1.0 - k) / k) / a);
}

TEST(KappaDensity, ArcsineCaseAndNormalisation) {
  EXPECT_NEAR(qvp::kappa_density(0.5, 1.0), 2.0 / std::numbers::pi, 1e-15);
  // Substituting kappa = sin^2(theta) removes both endpoint singularities.
  const auto mass = [](double a, double upper) {
    return qvp::oracle::integrate_interval(
        [a](double th) {
          const double s = std::sin(th), c = std::cos(th), k = s * s;
          // Where sin^2 rounds to 0 or 1, use the smooth limit of the integrand.
          if (!(k > 0.0 && k < 1.0)) return 2.0 * a / (std::numbers::pi * ((a * a - 1.0) * k + 1.0));
          return qvp::kappa_density(k, a) * 2.0 * s * c;
        },
        0.0, std::asin(std::sqrt(upper)), 1e-13);
  };
  for (double a : {0.1, 0.5, 1.0, 3.0, 20.0}) {
    EXPECT_NEAR(mass(a, 1.0), 1.0, 1e-8) << a;
    EXPECT_NEAR(mass(a, 0.3), kappa_cdf(0.3, a), 1e-8) << a;
  }
  EXPECT_THROW(qvp::kappa_density(0.0, 1.0), qvp::ParameterError);
  EXPECT_THROW(qvp::kappa_density(0.5, 0.0), qvp::ParameterError);
}

TEST(KappaDensity, ReflectionSymmetry) {
  for (double a : {0.2, 2.0, 7.0})
    for (double k : {0.01, 0.3, 0.77})
      EXPECT_NEAR(qvp::kappa_density(k, a), qvp::kappa_density(1.0 - k, 1.0 / a), 1e-12);
}

TEST(SampleKappa, DrawsPassKolmogorovSmirnov) {
  for (double a : {1.0, 4.0}) {
    RngStream rng(55);
    std::vector<double> x(100000);
    for (double& v : x) v = qvp::sample_kappa(a, rng);
    const double d = qvp::oracle::ks_statistic(x, [a](double k) { return kappa_cdf(k, a); });
    EXPECT_GT(qvp::oracle::ks_pvalue(d, x.size()), 0.01) << a;
  }
}

TEST(PriorNoncrossing, LimitingCases) {
  RngStream rng(56);
  qvp::NoncrossingPriorConfig cfg;
  cfg.quantiles = 4;
  cfg.state_variance = 0.0;
  EXPECT_DOUBLE_EQ(qvp::prior_noncrossing_probability(cfg, 1000, rng), 1.0);
  // Huge variances: each of the Q - 1 constraints holds with probability 1/2.
  cfg.state_variance = 1e12;
  const int n = 100000;
  const double p = qvp::prior_noncrossing_probability(cfg, n, rng);
  EXPECT_NEAR(p, 0.125, 4.0 * std::sqrt(0.125 * 0.875 / n));
  cfg.state_variance = -1.0;
  EXPECT_THROW(qvp::prior_noncrossing_probability(cfg, 10, rng), qvp::ParameterError);
}

TEST(PriorNoncrossing, MatchesGaussianOracleForFixedVariance) {
  // Independent constraints: P = Phi(gap / sqrt(K v))^(Q - 1).
  RngStream rng(57);
  qvp::NoncrossingPriorConfig cfg;
  cfg.quantiles = 5;
  cfg.covariates = 4;
  cfg.alpha_gap = 0.1;
  cfg.state_variance = 0.0025;
  const double phi = 0.5 * std::erfc(-0.1 / std::sqrt(4 * 0.0025) / std::numbers::sqrt2);
  const double expected = std::pow(phi, 4);
  const int n = 100000;
  EXPECT_NEAR(qvp::prior_noncrossing_probability(cfg, n, rng), expected,
              4.0 * std::sqrt(expected * (1 - expected) / n));
}

TEST(PriorNoncrossing, HorseshoeHierarchyFavoursOrdering) {
  RngStream rng(58);
  qvp::NoncrossingPriorConfig cfg;
  const double hs = qvp::prior_noncrossing_probability(cfg, 20000, rng);
  cfg.state_variance = 1.0;
  const double flat = qvp::prior_noncrossing_probability(cfg, 20000, rng);
  EXPECT_GT(hs, flat);
}

}  // namespace

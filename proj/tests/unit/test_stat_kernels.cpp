#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "qvp/distributions.hpp"
#include "qvp/rng.hpp"
#include "support/oracles.hpp"

namespace {

using qvp::GigParams;
using qvp::RngStream;

double gig_unnormalised(double x, double p, double a, double b) {
  return std::pow(x, p - 1.0) * std::exp(-0.5 * (a * x + b / x));
}

std::vector<double> gig_draws(const GigParams& g, int n, RngStream& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = qvp::sample_gig(g, rng);
  return v;
}

TEST(SampleGig, MeanMatchesQuadratureForInverseGaussianCase) {
  const double p = -0.5, a = 1.0, b = 1.0;
  const double z = qvp::oracle::integrate_half_line([&](double x) { return gig_unnormalised(x, p, a, b); });
  const double m1 = qvp::oracle::integrate_half_line([&](double x) { return x * gig_unnormalised(x, p, a, b); }) / z;
  RngStream rng(11);
  const auto est = qvp::oracle::mean_se(gig_draws(GigParams(p, a, b), 1000000, rng));
  EXPECT_NEAR(est.mean, m1, 3.0 * est.se);
}

TEST(SampleGig, SmallBApproachesGammaLimit) {
  // GIG(1/2, 2, b -> 0) tends to Gamma(1/2, rate 1); with b = 1e-10 the
  // quadrature mean of the exact density is the reference.
  const double p = 0.5, a = 2.0, b = 1e-10;
  const double z = qvp::oracle::integrate_half_line([&](double x) { return gig_unnormalised(x, p, a, b); });
  const double m1 = qvp::oracle::integrate_half_line([&](double x) { return x * gig_unnormalised(x, p, a, b); }) / z;
  EXPECT_NEAR(m1, 0.5, 1e-4);
  RngStream rng(12);
  const auto est = qvp::oracle::mean_se(gig_draws(GigParams(p, a, b), 1000000, rng));
  EXPECT_NEAR(est.mean, m1, 3.0 * est.se);
  // Exactly zero b uses the Gamma branch.
  const auto est0 = qvp::oracle::mean_se(gig_draws(GigParams(1.5, 2.0, 0.0), 1000000, rng));
  EXPECT_NEAR(est0.mean, 1.5, 3.0 * est0.se);
}

TEST(SampleGig, RejectsInvalidParameters) {
  EXPECT_THROW(GigParams(0.5, 0.0, 1.0), qvp::ParameterError);
  EXPECT_THROW(GigParams(0.5, -1.0, 1.0), qvp::ParameterError);
  EXPECT_THROW(GigParams(-0.5, 1.0, 0.0), qvp::ParameterError);
  EXPECT_THROW(GigParams(std::nan(""), 1.0, 1.0), qvp::ParameterError);
  EXPECT_THROW(GigParams(0.5, 1.0, std::numeric_limits<double>::infinity()), qvp::ParameterError);
}

class GigKs : public ::testing::TestWithParam<std::tuple<double, double, double>> {};

TEST_P(GigKs, DrawsPassKolmogorovSmirnov) {
  const auto [p, a, b] = GetParam();
  RngStream rng(1000 + static_cast<std::uint64_t>(p * 10 + 7) * 100 + static_cast<std::uint64_t>(a * 10) +
                static_cast<std::uint64_t>(b * 1000));
  const auto x = gig_draws(GigParams(p, a, b), 100000, rng);
  const double d = qvp::oracle::ks_statistic_from_density(x, [&](double v) { return gig_unnormalised(v, p, a, b); });
  EXPECT_GT(qvp::oracle::ks_pvalue(d, x.size()), 0.01) << "p=" << p << " a=" << a << " b=" << b << " D=" << d;
}

INSTANTIATE_TEST_SUITE_P(Grid, GigKs,
                         ::testing::Combine(::testing::Values(-0.5, 0.5, 1.0, 0.0, -2.5, 3.0),
                                            ::testing::Values(0.1, 1.0, 10.0), ::testing::Values(0.1, 1.0, 10.0)));

TEST(GigLogDensity, IntegratesToOne) {
  for (double p : {-1.5, -0.5, 0.0, 0.5, 2.0}) {
    const GigParams g(p, 2.0, 0.7);
    const double z = qvp::oracle::integrate_half_line([&](double x) { return std::exp(qvp::gig_log_density(x, g)); });
    EXPECT_NEAR(z, 1.0, 1e-9) << p;
  }
  // Large omega uses the asymptotic Bessel branch.
  const GigParams big(0.0, 1000.0, 1000.0);
  const double z = qvp::oracle::integrate_half_line([&](double x) { return std::exp(qvp::gig_log_density(x, big)); });
  EXPECT_NEAR(z, 1.0, 1e-8);
}

TEST(SampleInverseGamma, MeanAndPositivity) {
  RngStream rng(21);
  std::vector<double> v(1000000);
  for (auto& x : v) x = qvp::sample_inverse_gamma(3.0, 2.0, rng);
  const auto est = qvp::oracle::mean_se(v);
  EXPECT_NEAR(est.mean, 1.0, 3.0 * est.se);
  for (int i = 0; i < 100000; ++i) EXPECT_GT(qvp::sample_inverse_gamma(0.1, 0.1, rng), 0.0);
  EXPECT_THROW(qvp::sample_inverse_gamma(0.0, 1.0, rng), qvp::ParameterError);
  EXPECT_THROW(qvp::sample_inverse_gamma(1.0, -1.0, rng), qvp::ParameterError);
}

TEST(SampleExponential, MeanScale) {
  RngStream rng(31);
  for (double scale : {1.0, 2.0}) {
    std::vector<double> v(1000000);
    for (auto& x : v) x = qvp::sample_exponential(scale, rng);
    const auto est = qvp::oracle::mean_se(v);
    EXPECT_NEAR(est.mean, scale, 3.0 * est.se);
  }
  EXPECT_THROW(qvp::sample_exponential(-1.0, rng), qvp::ParameterError);
  EXPECT_THROW(qvp::sample_exponential(0.0, rng), qvp::ParameterError);
}

// The sample median has standard error 1 / (2 f(m) sqrt(n)); the half-Cauchy
// density at its median m = s is f(s) = 1 / (pi s).
double sample_median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

TEST(HalfCauchyMixture, MedianEqualsScale) {
  RngStream rng(41);
  for (double scale : {1.0, 1.0 / std::sqrt(300.0)}) {
    const int n = 1000000;
    std::vector<double> v(n);
    for (auto& x : v) x = std::sqrt(qvp::sample_half_cauchy_ig_mixture(scale, rng).x2);
    const double se = 1.0 / (2.0 * (1.0 / (std::numbers::pi * scale)) * std::sqrt(static_cast<double>(n)));
    EXPECT_NEAR(sample_median(v), scale, 3.0 * se) << scale;
  }
  EXPECT_THROW(qvp::sample_half_cauchy_ig_mixture(0.0, rng), qvp::ParameterError);
}

TEST(HalfCauchyMixture, MarginalPassesKs) {
  RngStream rng(42);
  std::vector<double> v(100000);
  for (auto& x : v) x = std::sqrt(qvp::sample_half_cauchy_ig_mixture(2.0, rng).x2);
  const double d = qvp::oracle::ks_statistic(v, [](double x) { return 2.0 / std::numbers::pi * std::atan(x / 2.0); });
  EXPECT_GT(qvp::oracle::ks_pvalue(d, v.size()), 0.01);
}

TEST(RngStream, Reproducible) {
  RngStream a(99, 3), b(99, 3), c(99, 4);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a(), y = b(), z = c();
    EXPECT_EQ(x, y);
    differs |= (x != z);
  }
  EXPECT_TRUE(differs);
  RngStream d(7), e(7);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(d.normal(), e.normal());
    EXPECT_EQ(qvp::sample_gig(GigParams(0.3, 1.0, 2.0), d), qvp::sample_gig(GigParams(0.3, 1.0, 2.0), e));
  }
}

TEST(RngStream, DistinctStreamsUncorrelated) {
  RngStream a(5, 0), b(5, 1);
  const int n = 200000;
  double sab = 0.0;
  for (int i = 0; i < n; ++i) sab += a.normal() * b.normal();
  EXPECT_NEAR(sab / n, 0.0, 3.0 / std::sqrt(static_cast<double>(n)));
}

}  // namespace

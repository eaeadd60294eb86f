#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace qvp::oracle {

/// Asymptotic Kolmogorov tail probability with the Stephens small-sample
/// correction: P(D_n > d).
inline double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

/// One-sample KS statistic against a CDF evaluated at the sorted samples.
inline double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

/// KS statistic against a density known up to a constant: the CDF at the
/// sorted samples is accumulated between consecutive points (adaptive
/// Gauss-Kronrod for the first gap, fixed 20-point Gauss for the short gaps
/// after it) and normalised by the integral over (lo, inf).
inline double ks_statistic_from_density(std::vector<double> x, const std::function<double(double)>& density,
                                        double lo = 0.0) {
  using boost::math::quadrature::gauss_kronrod;
  std::sort(x.begin(), x.end());
  std::vector<double> cum(x.size());
  double acc = 0.0, prev = lo;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > prev)
      acc += i == 0 ? gauss_kronrod<double, 31>::integrate(density, prev, x[i], 15, 1e-12)
                    : boost::math::quadrature::gauss<double, 20>::integrate(density, prev, x[i]);
    cum[i] = acc;
    prev = x[i];
  }
  boost::math::quadrature::exp_sinh<double> tail;
  const double rest = tail.integrate([&](double t) { return density(prev + t); }, 0.0,
                                     std::numeric_limits<double>::infinity());
  const double total = acc + rest;
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cum[i] / total;
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

/// Integral over (0, inf) of f.
inline double integrate_half_line(const std::function<double(double)>& f) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

/// Integral over a finite interval with tanh-sinh (handles endpoint singularities).
inline double integrate_interval(const std::function<double(double)>& f, double a, double b,
                                 double tolerance = std::sqrt(std::numeric_limits<double>::epsilon())) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, a, b, tolerance);
}

struct MeanSe {
  double mean;
  double se;
};

/// Mean and i.i.d. standard error.
inline MeanSe mean_se(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= v.size();
  double s2 = 0.0;
  for (double x : v) s2 += (x - m) * (x - m);
  s2 /= (v.size() - 1);
  return {m, std::sqrt(s2 / v.size())};
}

/// Mean and batch-means standard error for an autocorrelated sequence.
inline MeanSe batch_mean_se(const std::vector<double>& v, int batches = 50) {
  const std::size_t len = v.size() / batches;
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    double m = 0.0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) m += v[i];
    means.push_back(m / len);
  }
  const MeanSe bm = mean_se(means);
  return {bm.mean, bm.se};
}

}  // namespace qvp::oracle

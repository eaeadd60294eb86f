#pragma once

// Random-variate generators used by the samplers. All functions are stateless;
// randomness comes exclusively from the RngStream passed in.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/bessel.hpp>

#include "error.hpp"
#include "rng.hpp"

namespace qvp {

/// Generalised inverse Gaussian with density proportional to
/// x^(p-1) exp(-(a x + b / x) / 2) on x > 0.
///
/// a > 0 always. b = 0 is accepted for p > 0, where the law is the
/// Gamma(p, rate a/2) limit; otherwise b > 0.
struct GigParams {
  double p;
  double a;
  double b;

  GigParams(double p_, double a_, double b_) : p(p_), a(a_), b(b_) {
    if (!std::isfinite(p) || !std::isfinite(a) || !std::isfinite(b))
      throw ParameterError("GIG: non-finite parameter");
    if (!(a > 0.0)) throw ParameterError("GIG: a must be positive");
    if (b < 0.0 || (b == 0.0 && !(p > 0.0)))
      throw ParameterError("GIG: b must be positive (b = 0 requires p > 0)");
  }
};

namespace detail {

inline double gig_mode(double lambda, double omega) {
  if (lambda >= 1.0)
    return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) + (lambda - 1.0)) / omega;
  return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
}

// The three generators below sample the standardised GIG(lambda, omega) with
// density proportional to y^(lambda-1) exp(-omega (y + 1/y) / 2), lambda >= 0.
// Hoermann & Leydold (2014), "Generating generalized inverse Gaussian random
// variates".

// Ratio-of-uniforms without mode shift.
inline double gig_rou_noshift(double lambda, double omega, RngStream& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
  const double ym = ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) / omega;
  const double um = std::exp(0.5 * (lambda + 1.0) * std::log(ym) - s * (ym + 1.0 / ym) - nc);
  for (;;) {
    const double u = um * rng.uniform();
    const double v = rng.uniform();
    const double x = u / v;
    if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
  }
}

// Ratio-of-uniforms with mode shift, for lambda > 1 or omega large.
inline double gig_rou_shift(double lambda, double omega, RngStream& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);

  // Minimal bounding rectangle via the roots of a depressed cubic.
  const double a = -(2.0 * (lambda + 1.0) / omega + xm);
  const double b = (2.0 * (lambda - 1.0) * xm / omega - 1.0);
  const double c = xm;
  const double p = b - a * a / 3.0;
  const double q = (2.0 * a * a * a) / 27.0 - (a * b) / 3.0 + c;
  const double fi = std::acos(-q / (2.0 * std::sqrt(-(p * p * p) / 27.0)));
  const double fak = 2.0 * std::sqrt(-p / 3.0);
  const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
  const double y2 = fak * std::cos(fi / 3.0 + 4.0 / 3.0 * std::numbers::pi) - a / 3.0;
  const double uplus = (y1 - xm) * std::exp(t * std::log(y1) - s * (y1 + 1.0 / y1) - nc);
  const double uminus = (y2 - xm) * std::exp(t * std::log(y2) - s * (y2 + 1.0 / y2) - nc);

  for (;;) {
    const double u = uminus + rng.uniform() * (uplus - uminus);
    const double v = rng.uniform();
    const double x = u / v + xm;
    if (x > 0.0 && std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
  }
}

// Rejection from a piecewise hat, for 0 <= lambda < 1 and small omega.
inline double gig_concave(double lambda, double omega, RngStream& rng) {
  const double xm = gig_mode(lambda, omega);
  const double x0 = omega / (1.0 - lambda);
  const double k0 = std::exp((lambda - 1.0) * std::log(xm) - 0.5 * omega * (xm + 1.0 / xm));
  const double a0 = k0 * x0;
  double k1, a1, k2, a2;
  if (x0 >= 2.0 / omega) {
    k1 = 0.0;
    a1 = 0.0;
    k2 = std::pow(x0, lambda - 1.0);
    a2 = k2 * 2.0 * std::exp(-omega * x0 / 2.0) / omega;
  } else {
    k1 = std::exp(-omega);
    a1 = (lambda == 0.0) ? k1 * std::log(2.0 / (omega * omega))
                         : k1 / lambda * (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda));
    k2 = std::pow(2.0 / omega, lambda - 1.0);
    a2 = k2 * 2.0 * std::exp(-1.0) / omega;
  }
  const double total = a0 + a1 + a2;

  for (;;) {
    double v = total * rng.uniform();
    double x, hx;
    if (v <= a0) {
      x = x0 * v / a0;
      hx = k0;
    } else if ((v -= a0) <= a1) {
      if (lambda == 0.0) {
        x = omega * std::exp(std::exp(omega) * v);
        hx = k1 / x;
      } else {
        x = std::pow(std::pow(x0, lambda) + (lambda / k1 * v), 1.0 / lambda);
        hx = k1 * std::pow(x, lambda - 1.0);
      }
    } else {
      v -= a1;
      const double lo = (x0 > 2.0 / omega) ? x0 : 2.0 / omega;
      x = -2.0 / omega * std::log(std::exp(-omega / 2.0 * lo) - omega / (2.0 * k2) * v);
      hx = k2 * std::exp(-omega / 2.0 * x);
    }
    const double u = rng.uniform() * hx;
    if (std::log(u) <= (lambda - 1.0) * std::log(x) - omega / 2.0 * (x + 1.0 / x)) return x;
  }
}

/// Inverse Gaussian with mean mu and shape lambda (Michael, Schucany & Haas).
inline double inverse_gaussian(double mu, double lambda, RngStream& rng) {
  const double nu = rng.normal();
  const double r = mu * nu * nu / (2.0 * lambda);
  // mu + mu^2 y / (2 lambda) - ... written without cancellation.
  const double x = mu / (1.0 + r + std::sqrt(r * (r + 2.0)));
  return (rng.uniform() <= mu / (mu + x)) ? x : mu * (mu / x);
}

/// log K_nu(z) for z > 0, switching to the large-argument expansion where the
/// Bessel function underflows.
inline double log_bessel_k(double nu, double z) {
  if (z < 500.0) return std::log(boost::math::cyl_bessel_k(nu, z));
  const double mu = 4.0 * nu * nu;
  const double e1 = (mu - 1.0) / (8.0 * z);
  const double e2 = e1 * (mu - 9.0) / (2.0 * 8.0 * z);
  const double e3 = e2 * (mu - 25.0) / (3.0 * 8.0 * z);
  return 0.5 * std::log(std::numbers::pi / (2.0 * z)) - z + std::log1p(e1 + e2 + e3);
}

}  // namespace detail

/// Draw from GIG(p, a, b).
inline double sample_gig(const GigParams& g, RngStream& rng) {
  const double omega = std::sqrt(g.a * g.b);

  if (omega < 1e-15) {
    // Degenerate limits: Gamma(p, rate a/2) or InvGamma(-p, scale b/2).
    if (g.p > 0.0) return rng.gamma(g.p) * 2.0 / g.a;
    if (g.p < 0.0) return (g.b / 2.0) / rng.gamma(-g.p);
  }

  // |p| = 1/2 is an inverse Gaussian (or its reciprocal), the workhorse case
  // of the latent-scale update.
  if (g.p == -0.5) return detail::inverse_gaussian(std::sqrt(g.b / g.a), g.b, rng);
  if (g.p == 0.5) return 1.0 / detail::inverse_gaussian(std::sqrt(g.a / g.b), g.a, rng);

  const double lambda = std::abs(g.p);
  const double alpha = std::sqrt(g.b / g.a);
  double y;
  if (lambda > 2.0 || omega > 3.0)
    y = detail::gig_rou_shift(lambda, omega, rng);
  else if (lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2)
    y = detail::gig_rou_noshift(lambda, omega, rng);
  else
    y = detail::gig_concave(lambda, omega, rng);
  // GIG(-l, omega) is the reciprocal of GIG(l, omega) in standard form.
  return g.p < 0.0 ? alpha / y : alpha * y;
}

/// Normalised GIG log density; requires b > 0.
inline double gig_log_density(double x, const GigParams& g) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  const double omega = std::sqrt(g.a * g.b);
  return 0.5 * g.p * std::log(g.a / g.b) - std::log(2.0) - detail::log_bessel_k(g.p, omega) +
         (g.p - 1.0) * std::log(x) - 0.5 * (g.a * x + g.b / x);
}

/// Inverse gamma with density proportional to x^(-shape-1) exp(-scale / x).
inline double sample_inverse_gamma(double shape, double scale, RngStream& rng) {
  if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) || !std::isfinite(scale))
    throw ParameterError("inverse gamma: shape and scale must be positive and finite");
  return scale / rng.gamma(shape);
}

/// Exponential parameterised by its mean.
inline double sample_exponential(double scale, RngStream& rng) {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw ParameterError("exponential: scale must be positive");
  return -scale * std::log(rng.uniform());
}

struct HalfCauchyDraw {
  double x2;   ///< squared half-Cauchy variate
  double aux;  ///< mixing variable xi
};

/// Half-Cauchy(0, scale) through the inverse-gamma mixture
/// x^2 | xi ~ IG(1/2, 1/xi), xi ~ IG(1/2, 1/scale^2).
inline HalfCauchyDraw sample_half_cauchy_ig_mixture(double scale, RngStream& rng) {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw ParameterError("half-Cauchy: scale must be positive");
  const double aux = sample_inverse_gamma(0.5, 1.0 / (scale * scale), rng);
  const double x2 = sample_inverse_gamma(0.5, 1.0 / aux, rng);
  return {x2, aux};
}

}  // namespace qvp

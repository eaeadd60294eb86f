#pragma once

// Quantile VAR(1) estimated one equation at a time under a lower-triangular
// identification. Equation i regresses y_{i,t} on the contemporaneous
// y_{1..i-1,t} and all lags Y_{t-1}. At quantile levels U the system reads
//   Y_t = B(U) + A0(U) Y_t + A1(U) Y_{t-1}
//       = v(U) + C(U) Y_{t-1},   v = (I - A0)^{-1} B,  C = (I - A0)^{-1} A1.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ald.hpp"
#include "data.hpp"
#include "draws.hpp"
#include "error.hpp"
#include "metrics.hpp"
#include "rng.hpp"
#include "sampler.hpp"
#include "sampler_common.hpp"
#include "savs.hpp"

namespace qvp {

/// How SAVS enters the QVAR: not at all, as sparsified draws, or as the
/// posterior mean of the sparsified draws (a single point estimate).
enum class SavsMode { off, draws, posterior_mean };

inline SavsMode savs_mode_from_string(const std::string& s) {
  if (s == "off") return SavsMode::off;
  if (s == "draws") return SavsMode::draws;
  if (s == "mean") return SavsMode::posterior_mean;
  throw ParameterError("unknown SAVS mode '" + s + "' (expected off, draws or mean)");
}

struct QvarOptions {
  SamplerKind kind = SamplerKind::centred;
  SamplerConfig sampler;
  SavsMode savs = SavsMode::off;
  bool interpolate = false;  ///< linear-in-tau coefficients between grid levels
};

struct QvarModel {
  int m = 0;
  QuantileGrid grid;
  QvarOptions options;
  std::vector<std::string> names;
  std::vector<PosteriorDraws> equations;  ///< original-scale draws per equation
  std::vector<Eigen::MatrixXd> beta;      ///< pooled S x (Q K_i) per equation
  std::vector<Eigen::MatrixXd> alpha;     ///< pooled S x Q per equation
  Eigen::VectorXd last;                   ///< last observation, the forecast origin

  int draws() const { return beta.empty() ? 0 : static_cast<int>(beta[0].rows()); }
  /// Regressors of equation i: i contemporaneous values then m lags.
  int regressors(int i) const { return i + m; }
};

namespace detail {

/// One draw of the posterior mean (1 chain x 1 draw).
inline PosteriorDraws collapse_to_mean(const PosteriorDraws& d) {
  PosteriorDraws out;
  out.kind = d.kind;
  out.quantiles = d.quantiles;
  out.covariates = d.covariates;
  out.taus = d.taus;
  ChainDraws c;
  c.beta = d.pooled(&ChainDraws::beta).colwise().mean();
  c.alpha = d.pooled(&ChainDraws::alpha).colwise().mean();
  out.chains.push_back(std::move(c));
  return out;
}

/// Design of equation i over rows 1..T-1 of data.
inline Eigen::MatrixXd qvar_design(const Eigen::MatrixXd& data, int i) {
  const auto t = data.rows(), m = data.cols();
  Eigen::MatrixXd x(t - 1, i + m);
  if (i > 0) x.leftCols(i) = data.block(1, 0, t - 1, i);
  x.rightCols(m) = data.topRows(t - 1);
  return x;
}

}  // namespace detail

/// Fit the system equation by equation. Design columns are rescaled to
/// [-1, 1] for sampling and the draws mapped back to the data's units.
inline QvarModel fit_qvar(const Eigen::MatrixXd& data, const QuantileGrid& grid, const QvarOptions& opt,
                          std::vector<std::string> names = {}) {
  if (data.rows() < 3) throw ParameterError("fit_qvar: need at least three observations");
  if (data.cols() < 1) throw ParameterError("fit_qvar: need at least one variable");
  if (!data.allFinite()) throw IngestionError("fit_qvar: data contain non-finite values");
  if (opt.savs != SavsMode::off && opt.kind != SamplerKind::noncentred && opt.kind != SamplerKind::asis)
    throw UnsupportedInputError("SAVS needs a non-centred sampler (ncqvp or asis)");
  QvarModel model;
  model.m = static_cast<int>(data.cols());
  model.grid = grid;
  model.options = opt;
  model.names = names;
  if (model.names.empty())
    for (int i = 0; i < model.m; ++i) model.names.push_back("y" + std::to_string(i + 1));
  if (static_cast<int>(model.names.size()) != model.m) throw ParameterError("fit_qvar: one name per variable");
  model.last = data.row(data.rows() - 1).transpose();

  for (int i = 0; i < model.m; ++i) {
    Dataset d = make_dataset(data.col(i).tail(data.rows() - 1), detail::qvar_design(data, i));
    d.rescale();
    SamplerConfig cfg = opt.sampler;
    cfg.seed = opt.sampler.seed + static_cast<std::uint64_t>(i) * 7919ULL;
    PosteriorDraws draws = fit(d, grid, opt.kind, cfg);
    if (opt.savs != SavsMode::off) draws = with_sparsified_beta(draws, sparsify_posterior(draws, d.x));
    to_original_scale(draws, d.rescaling);
    if (opt.savs == SavsMode::posterior_mean) draws = detail::collapse_to_mean(draws);
    model.beta.push_back(draws.pooled(&ChainDraws::beta));
    model.alpha.push_back(draws.pooled(&ChainDraws::alpha));
    model.equations.push_back(std::move(draws));
  }
  return model;
}

/// Intercept and slopes of equation i, draw s, at level tau.
inline Eigen::VectorXd equation_coefficients(const QvarModel& model, int i, int s, double tau, double& intercept) {
  const int k = model.regressors(i);
  const auto at = [&](int q, double& a) {
    a = model.alpha[i](s, q);
    return Eigen::VectorXd(model.beta[i].row(s).segment(q * k, k).transpose());
  };
  const int q = model.grid.find(tau);
  if (q >= 0) return at(q, intercept);
  const auto& taus = model.grid.taus();
  if (!model.options.interpolate || tau < taus.front() || tau > taus.back())
    throw LevelMismatchError("quantile level " + std::to_string(tau) + " is not on the fitted grid");
  const int hi = static_cast<int>(std::upper_bound(taus.begin(), taus.end(), tau) - taus.begin());
  const int lo = hi - 1;
  const double w = (tau - taus[lo]) / (taus[hi] - taus[lo]);
  double a_lo = 0.0, a_hi = 0.0;
  const Eigen::VectorXd b_lo = at(lo, a_lo), b_hi = at(hi, a_hi);
  intercept = (1.0 - w) * a_lo + w * a_hi;
  return (1.0 - w) * b_lo + w * b_hi;
}

struct StructuralDraw {
  Eigen::VectorXd b;   ///< B
  Eigen::MatrixXd a0;  ///< strictly lower triangular
  Eigen::MatrixXd a1;
  Eigen::VectorXd v;   ///< (I - A0)^{-1} B
  Eigen::MatrixXd c;   ///< (I - A0)^{-1} A1
  Eigen::MatrixXd d;   ///< (I - A0)^{-1}
};

/// Derived VAR-form quantities from (B, A0, A1) by unit-lower-triangular solves.
inline void complete_structural(StructuralDraw& sd) {
  const auto m = sd.b.size();
  const Eigen::MatrixXd ia = Eigen::MatrixXd::Identity(m, m) - sd.a0;
  const auto tri = ia.triangularView<Eigen::UnitLower>();
  sd.v = tri.solve(sd.b);
  sd.c = tri.solve(sd.a1);
  sd.d = tri.solve(Eigen::MatrixXd::Identity(m, m));
}

/// Structural matrices of pooled draw `s` with equation i evaluated at level u[i].
inline StructuralDraw assemble_structural(const QvarModel& model, int s, const Eigen::VectorXd& u) {
  const int m = model.m;
  if (u.size() != m) throw ParameterError("assemble_structural: one level per variable");
  if (s < 0 || s >= model.draws()) throw ParameterError("assemble_structural: draw index out of range");
  StructuralDraw sd{Eigen::VectorXd(m), Eigen::MatrixXd::Zero(m, m), Eigen::MatrixXd(m, m), {}, {}, {}};
  for (int i = 0; i < m; ++i) {
    double a = 0.0;
    const Eigen::VectorXd coef = equation_coefficients(model, i, s, u[i], a);
    sd.b[i] = a;
    for (int j = 0; j < i; ++j) sd.a0(i, j) = coef[j];
    sd.a1.row(i) = coef.tail(m).transpose();
  }
  complete_structural(sd);
  return sd;
}

/// Levels fixed per step and variable (h x m); NaN entries are drawn freely.
using Scenario = Eigen::MatrixXd;

inline Scenario free_scenario(int horizon, int m) {
  return Scenario::Constant(horizon, m, std::numeric_limits<double>::quiet_NaN());
}

struct ForecastPaths {
  std::vector<Eigen::MatrixXd> steps;  ///< h entries, each N x m
  std::vector<char> diverged;          ///< per path
  int diverged_count = 0;
};

inline constexpr double kDivergenceBound = 1e12;

/// Simulated multi-step paths: at every step each variable's level is drawn
/// uniformly from the grid (unless fixed by the scenario) together with a
/// random posterior draw, and Y <- v(U) + C(U) Y. Path n uses its own stream.
inline ForecastPaths forecast_paths(const QvarModel& model, const Eigen::VectorXd& origin, int horizon, int n_paths,
                                    RngStream& rng, const Scenario& scenario) {
  const int m = model.m, nq = model.grid.size();
  if (horizon < 1 || n_paths < 1) throw ParameterError("forecast_paths: horizon and path count must be positive");
  if (origin.size() != m) throw ParameterError("forecast_paths: origin has the wrong length");
  if (scenario.rows() != horizon || scenario.cols() != m)
    throw ParameterError("forecast_paths: scenario must be horizon x variables");
  for (Eigen::Index i = 0; i < scenario.size(); ++i) {
    const double lvl = scenario.data()[i];
    if (!std::isnan(lvl) && model.grid.find(lvl) < 0 && !model.options.interpolate)
      throw LevelMismatchError("scenario level " + std::to_string(lvl) + " is not on the fitted grid");
  }
  ForecastPaths out;
  out.steps.assign(horizon, Eigen::MatrixXd::Zero(n_paths, m));
  out.diverged.assign(n_paths, 0);
  const std::uint64_t base = rng();
  for (int n = 0; n < n_paths; ++n) {
    RngStream path_rng(base, static_cast<std::uint32_t>(n));
    Eigen::VectorXd y = origin;
    for (int l = 0; l < horizon; ++l) {
      Eigen::VectorXd u(m);
      for (int i = 0; i < m; ++i)
        u[i] = std::isnan(scenario(l, i)) ? model.grid.tau(static_cast<int>(path_rng.index(nq))) : scenario(l, i);
      const int s = static_cast<int>(path_rng.index(model.draws()));
      const StructuralDraw sd = assemble_structural(model, s, u);
      y = sd.v + sd.c * y;
      if (!y.allFinite() || y.cwiseAbs().maxCoeff() > kDivergenceBound) out.diverged[n] = 1;
      out.steps[l].row(n) = y.transpose();
    }
    out.diverged_count += out.diverged[n];
  }
  return out;
}

inline ForecastPaths forecast_paths(const QvarModel& model, const Eigen::VectorXd& origin, int horizon, int n_paths,
                                    RngStream& rng) {
  return forecast_paths(model, origin, horizon, n_paths, rng, free_scenario(horizon, model.m));
}

/// Empirical (type-7) percentiles of non-diverged paths at step l:
/// returns m x levels.size().
inline Eigen::MatrixXd path_quantiles(const ForecastPaths& paths, int l, const std::vector<double>& levels) {
  const Eigen::MatrixXd& step = paths.steps.at(l);
  const int m = static_cast<int>(step.cols());
  std::vector<int> keep;
  for (int n = 0; n < static_cast<int>(step.rows()); ++n)
    if (!paths.diverged[n]) keep.push_back(n);
  if (keep.empty()) throw NumericDomainError("every forecast path diverged");
  Eigen::MatrixXd out(m, levels.size());
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd v(keep.size());
    for (std::size_t n = 0; n < keep.size(); ++n) v[n] = step(keep[n], i);
    for (std::size_t q = 0; q < levels.size(); ++q) out(i, q) = empirical_quantile(v, levels[q]);
  }
  return out;
}

struct QirfSpec {
  int shock = 0;          ///< structural shock variable
  double size = 1.0;      ///< iota_shock
  int responder = 0;      ///< variable whose level sweeps the grid
  Eigen::VectorXd fixed_levels;  ///< levels of the other variables (default: 0.5)
  int horizon = 12;       ///< responses for h = 0..horizon
  std::vector<double> response_levels;  ///< default: the whole grid
  double band = 0.95;
  int max_draws = 0;      ///< 0 uses every pooled draw
};

struct QirfSurface {
  std::vector<double> levels;
  Eigen::MatrixXd mean;    ///< (horizon + 1) x levels, response of `responder`
  Eigen::MatrixXd median;
  Eigen::MatrixXd lower;
  Eigen::MatrixXd upper;
};

/// delta_h = C(U)^h D(U) iota with U held constant across horizons: the
/// responder at each response level, the other variables at their fixed levels.
inline QirfSurface qirf(const QvarModel& model, const QirfSpec& spec) {
  const int m = model.m;
  if (spec.shock < 0 || spec.shock >= m || spec.responder < 0 || spec.responder >= m)
    throw ParameterError("qirf: variable index out of range");
  if (spec.horizon < 0) throw ParameterError("qirf: horizon must be non-negative");
  if (!(spec.band > 0.0 && spec.band < 1.0)) throw ParameterError("qirf: band must lie in (0, 1)");
  Eigen::VectorXd fixed = spec.fixed_levels.size() == 0 ? Eigen::VectorXd::Constant(m, 0.5) : spec.fixed_levels;
  if (fixed.size() != m) throw ParameterError("qirf: one fixed level per variable");
  QirfSurface out;
  out.levels = spec.response_levels.empty() ? model.grid.taus() : spec.response_levels;
  const int nl = static_cast<int>(out.levels.size());
  const int n_draws = spec.max_draws > 0 ? std::min(spec.max_draws, model.draws()) : model.draws();
  out.mean.resize(spec.horizon + 1, nl);
  out.median.resize(spec.horizon + 1, nl);
  out.lower.resize(spec.horizon + 1, nl);
  out.upper.resize(spec.horizon + 1, nl);
  Eigen::VectorXd iota = Eigen::VectorXd::Zero(m);
  iota[spec.shock] = spec.size;
  const double lo = 0.5 * (1.0 - spec.band), hi = 1.0 - lo;
  for (int l = 0; l < nl; ++l) {
    Eigen::VectorXd u = fixed;
    u[spec.responder] = out.levels[l];
    Eigen::MatrixXd resp(spec.horizon + 1, n_draws);
    for (int s = 0; s < n_draws; ++s) {
      const StructuralDraw sd = assemble_structural(model, s, u);
      Eigen::VectorXd delta = sd.d * iota;
      resp(0, s) = delta[spec.responder];
      for (int h = 1; h <= spec.horizon; ++h) {
        delta = sd.c * delta;
        resp(h, s) = delta[spec.responder];
      }
    }
    for (int h = 0; h <= spec.horizon; ++h) {
      const Eigen::VectorXd row = resp.row(h).transpose();
      out.mean(h, l) = row.mean();
      out.median(h, l) = empirical_quantile(row, 0.5);
      out.lower(h, l) = empirical_quantile(row, lo);
      out.upper(h, l) = empirical_quantile(row, hi);
    }
  }
  return out;
}

struct Fan {
  Eigen::MatrixXd lower;   ///< horizon x m
  Eigen::MatrixXd median;
  Eigen::MatrixXd upper;
  Eigen::MatrixXd mean;
  int diverged = 0;
};

inline Fan summarise_paths(const ForecastPaths& paths, double band) {
  const int h = static_cast<int>(paths.steps.size()), m = static_cast<int>(paths.steps[0].cols());
  const double lo = 0.5 * (1.0 - band), hi = 1.0 - lo;
  Fan f{Eigen::MatrixXd(h, m), Eigen::MatrixXd(h, m), Eigen::MatrixXd(h, m), Eigen::MatrixXd(h, m),
        paths.diverged_count};
  for (int l = 0; l < h; ++l) {
    const Eigen::MatrixXd q = path_quantiles(paths, l, {lo, 0.5, hi});
    f.lower.row(l) = q.col(0).transpose();
    f.median.row(l) = q.col(1).transpose();
    f.upper.row(l) = q.col(2).transpose();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(m);
    int n = 0;
    for (int p = 0; p < static_cast<int>(paths.steps[l].rows()); ++p)
      if (!paths.diverged[p]) {
        sum += paths.steps[l].row(p).transpose();
        ++n;
      }
    f.mean.row(l) = (sum / n).transpose();
  }
  return f;
}

struct StressResult {
  Fan scenario;
  Fan baseline;  ///< every level fixed at the median
};

/// Paths under the scenario's fixed levels against the all-median baseline.
/// Both use the same path streams, so an all-median scenario reproduces the
/// baseline exactly; bands come from the random posterior draws.
inline StressResult stress_test(const QvarModel& model, const Eigen::VectorXd& origin, const Scenario& scenario,
                                int n_paths, RngStream& rng, double band = 0.9) {
  if (model.grid.find(0.5) < 0 && !model.options.interpolate)
    throw LevelMismatchError("the stress baseline needs the median on the grid");
  const int h = static_cast<int>(scenario.rows());
  const std::uint64_t seed = rng();
  RngStream a(seed, 0), b(seed, 0);
  StressResult r;
  r.scenario = summarise_paths(forecast_paths(model, origin, h, n_paths, a, scenario), band);
  r.baseline = summarise_paths(forecast_paths(model, origin, h, n_paths, b, Scenario::Constant(h, model.m, 0.5)), band);
  return r;
}

struct BacktestConfig {
  int initial = 96;
  int step = 1;
  std::vector<int> horizons{1, 3, 6};
  int n_paths = 1000;
  std::uint64_t seed = 1;
  double interval = 0.9;  ///< central interval whose coverage is recorded
};

struct HorizonScore {
  int horizon = 0;
  int origins = 0;
  Eigen::MatrixXd qs_by_tau;           ///< m x Q mean quantile scores
  Eigen::MatrixXd qwqs;                ///< m x 4 (schemes 1..4)
  Eigen::VectorXd coverage;            ///< m, share of outcomes inside the central interval
};

struct BacktestReport {
  std::vector<std::string> names;
  std::vector<double> taus;
  std::vector<HorizonScore> horizons;
};

/// Expanding-window evaluation: refit on rows 0..T_r-1 for every origin
/// T_r = initial, initial + step, ..., simulate paths from y_{T_r - 1} and score
/// the grid-level percentiles against the realised values.
inline BacktestReport backtest(const Eigen::MatrixXd& data, const QuantileGrid& grid, const QvarOptions& opt,
                               const BacktestConfig& bc, std::vector<std::string> names = {}) {
  const int t = static_cast<int>(data.rows()), m = static_cast<int>(data.cols()), nq = grid.size();
  if (bc.initial < 3 || bc.step < 1 || bc.horizons.empty()) throw ParameterError("backtest: invalid window settings");
  const int max_h = *std::max_element(bc.horizons.begin(), bc.horizons.end());
  if (*std::min_element(bc.horizons.begin(), bc.horizons.end()) < 1) throw ParameterError("horizons must be positive");
  if (bc.initial + 1 > t) throw ParameterError("backtest: the initial window leaves nothing to evaluate");
  BacktestReport rep;
  rep.taus = grid.taus();
  rep.names = names;
  if (rep.names.empty())
    for (int i = 0; i < m; ++i) rep.names.push_back("y" + std::to_string(i + 1));
  for (int h : bc.horizons)
    rep.horizons.push_back({h, 0, Eigen::MatrixXd::Zero(m, nq), Eigen::MatrixXd::Zero(m, 4), Eigen::VectorXd::Zero(m)});
  const double lo = 0.5 * (1.0 - bc.interval), hi = 1.0 - lo;
  std::vector<double> levels = grid.taus();
  levels.push_back(lo);
  levels.push_back(hi);

  for (int tr = bc.initial; tr < t; tr += bc.step) {
    QvarOptions o = opt;
    o.sampler.seed = opt.sampler.seed + static_cast<std::uint64_t>(tr) * 104729ULL;
    const QvarModel model = fit_qvar(data.topRows(tr), grid, o, rep.names);
    RngStream rng(bc.seed, static_cast<std::uint32_t>(tr));
    const ForecastPaths paths = forecast_paths(model, data.row(tr - 1).transpose(), max_h, bc.n_paths, rng);
    for (auto& hs : rep.horizons) {
      const int target = tr - 1 + hs.horizon;
      if (target >= t) continue;
      const Eigen::MatrixXd q = path_quantiles(paths, hs.horizon - 1, levels);
      for (int i = 0; i < m; ++i) {
        const double y = data(target, i);
        for (int k = 0; k < nq; ++k) hs.qs_by_tau(i, k) += tick_loss(y - q(i, k), grid.tau(k));
        hs.coverage[i] += (y >= q(i, nq) && y <= q(i, nq + 1)) ? 1.0 : 0.0;
      }
      ++hs.origins;
    }
  }
  for (auto& hs : rep.horizons) {
    if (hs.origins == 0) continue;
    hs.qs_by_tau /= hs.origins;
    hs.coverage /= hs.origins;
    for (int i = 0; i < m; ++i)
      for (int w = 0; w < 4; ++w) hs.qwqs(i, w) = weighted_qs(hs.qs_by_tau.row(i).transpose(), grid, w + 1);
  }
  return rep;
}

/// Gaussian VAR(1) y_t = c + A y_{t-1} + L e_t started at its mean.
inline Eigen::MatrixXd simulate_var1(const Eigen::VectorXd& c, const Eigen::MatrixXd& a, const Eigen::MatrixXd& l,
                                     int t, RngStream& rng) {
  const auto m = c.size();
  if (a.rows() != m || a.cols() != m || l.rows() != m || l.cols() != m) throw ParameterError("simulate_var1: dimensions");
  Eigen::VectorXd y = (Eigen::MatrixXd::Identity(m, m) - a).fullPivLu().solve(c);
  Eigen::MatrixXd out(t, m);
  for (int i = 0; i < t; ++i) {
    Eigen::VectorXd e(m);
    for (Eigen::Index j = 0; j < m; ++j) e[j] = rng.normal();
    y = c + a * y + l * e;
    out.row(i) = y.transpose();
  }
  return out;
}

}  // namespace qvp

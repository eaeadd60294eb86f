#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "ald.hpp"
#include "data.hpp"
#include "error.hpp"

namespace qvp {

enum class SamplerKind { centred, noncentred, asis, independent };

inline std::string to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::centred: return "qvp";
    case SamplerKind::noncentred: return "ncqvp";
    case SamplerKind::asis: return "asis";
    case SamplerKind::independent: return "bqr";
  }
  return "?";
}

inline SamplerKind sampler_kind_from_string(const std::string& s) {
  if (s == "qvp" || s == "centred") return SamplerKind::centred;
  if (s == "ncqvp" || s == "noncentred") return SamplerKind::noncentred;
  if (s == "asis") return SamplerKind::asis;
  if (s == "bqr" || s == "independent") return SamplerKind::independent;
  throw ParameterError("unknown sampler '" + s + "'");
}

struct SamplerConfig {
  int chains = 4;
  int burnin = 10000;
  int draws = 15000;  ///< kept draws per chain (after thinning)
  int thin = 1;
  std::uint64_t seed = 1;
  int threads = 0;  ///< 0: one thread per chain up to hardware concurrency

  InverseGammaPrior sigma_y_prior{};
  /// Variance of an independent N(0, v) prior on each alpha_q; infinity = flat.
  double alpha_prior_variance = std::numeric_limits<double>::infinity();
  /// Add alpha_q - alpha_{q-1} ~ N(0, nu_q^2) (centred sampler only).
  bool alpha_difference_prior = false;

  void validate() const {
    if (chains < 1 || burnin < 0 || draws < 1 || thin < 1)
      throw ParameterError("sampler config: chains/draws/thin must be >= 1 and burnin >= 0");
    if (!(alpha_prior_variance > 0.0)) throw ParameterError("sampler config: alpha prior variance must be positive");
    if (!(sigma_y_prior.shape > 0.0) || !(sigma_y_prior.scale > 0.0))
      throw ParameterError("sampler config: sigma_y prior must be positive");
  }
};

/// Kept draws of one chain. Each block has one row per draw; multi-index
/// blocks are flattened quantile-major (column q * K + j).
struct ChainDraws {
  Eigen::MatrixXd beta;       ///< quantile coefficients (centred scale)
  Eigen::MatrixXd beta0;      ///< quantile-invariant vector
  Eigen::MatrixXd alpha;      ///< intercepts
  Eigen::MatrixXd sigma_y;    ///< ALD scales
  Eigen::MatrixXd nu2;        ///< global difference scales (or sigma scales, non-centred)
  Eigen::MatrixXd lambda2;    ///< local difference scales
  Eigen::MatrixXd nu0_2;      ///< global scale of beta0
  Eigen::MatrixXd lambda0_2;  ///< local scales of beta0
  Eigen::MatrixXd sigma;      ///< signed state scales (non-centred only)
  Eigen::MatrixXd beta_tilde; ///< standardized states (non-centred only)

  void allocate(int s, int q, int k, bool noncentred) {
    beta.resize(s, q * k);
    beta0.resize(s, k);
    alpha.resize(s, q);
    sigma_y.resize(s, q);
    nu2.resize(s, q);
    lambda2.resize(s, q * k);
    nu0_2.resize(s, 1);
    lambda0_2.resize(s, k);
    if (noncentred) {
      sigma.resize(s, q * k);
      beta_tilde.resize(s, q * k);
    }
  }

  struct Block {
    const char* name;
    const Eigen::MatrixXd* values;
  };

  /// Non-empty blocks in a fixed order (used by serialization and diagnostics).
  std::vector<Block> blocks() const {
    std::vector<Block> out;
    for (const Block& b : {Block{"beta", &beta}, Block{"beta0", &beta0}, Block{"alpha", &alpha},
                           Block{"sigma_y", &sigma_y}, Block{"nu2", &nu2}, Block{"lambda2", &lambda2},
                           Block{"nu0_2", &nu0_2}, Block{"lambda0_2", &lambda0_2},
                           Block{"sigma", &sigma}, Block{"beta_tilde", &beta_tilde}})
      if (b.values->size() > 0) out.push_back(b);
    return out;
  }
};

/// Thinned post-burn-in draws across chains.
struct PosteriorDraws {
  SamplerKind kind = SamplerKind::centred;
  int quantiles = 0;
  int covariates = 0;
  std::vector<double> taus;
  std::vector<ChainDraws> chains;

  int draws_per_chain() const { return chains.empty() ? 0 : static_cast<int>(chains[0].beta.rows()); }
  int total_draws() const { return draws_per_chain() * static_cast<int>(chains.size()); }
  bool has_noncentred() const { return !chains.empty() && chains[0].sigma.size() > 0; }

  double beta(int chain, int s, int q, int j) const { return chains[chain].beta(s, q * covariates + j); }

  /// Stack one block over chains (rows = all draws).
  Eigen::MatrixXd pooled(const Eigen::MatrixXd ChainDraws::*block) const {
    if (chains.empty()) return {};
    const Eigen::MatrixXd& first = chains[0].*block;
    Eigen::MatrixXd out(total_draws(), first.cols());
    int row = 0;
    for (const auto& c : chains) {
      const Eigen::MatrixXd& m = c.*block;
      out.middleRows(row, m.rows()) = m;
      row += static_cast<int>(m.rows());
    }
    return out;
  }

  /// Posterior mean of beta as a Q x K matrix.
  Eigen::MatrixXd beta_mean() const {
    const Eigen::VectorXd m = pooled(&ChainDraws::beta).colwise().mean().transpose();
    Eigen::MatrixXd out(quantiles, covariates);
    for (int q = 0; q < quantiles; ++q) out.row(q) = m.segment(q * covariates, covariates).transpose();
    return out;
  }

  Eigen::VectorXd alpha_mean() const { return pooled(&ChainDraws::alpha).colwise().mean().transpose(); }
  Eigen::VectorXd beta0_mean() const { return pooled(&ChainDraws::beta0).colwise().mean().transpose(); }

  /// Fitted conditional quantiles X beta_q + alpha_q from posterior means (T x Q).
  Eigen::MatrixXd fitted_quantiles(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd fit = x * beta_mean().transpose();
    fit.rowwise() += alpha_mean().transpose();
    return fit;
  }
};

/// Map draws obtained on a rescaled design back to the original covariate units.
/// beta, beta0 and sigma scale by 2 / range; alpha absorbs the shift.
inline void to_original_scale(PosteriorDraws& draws, const Rescaling& r) {
  if (r.is_identity()) return;
  const int nq = draws.quantiles, k = draws.covariates;
  Eigen::VectorXd factor(k), shift(k);
  for (int j = 0; j < k; ++j) {
    const double range = r.hi[j] - r.lo[j];
    factor[j] = range > 0.0 ? 2.0 / range : 0.0;
    shift[j] = range > 0.0 ? (2.0 * r.lo[j] / range + 1.0) : 0.0;
  }
  for (auto& c : draws.chains) {
    for (int s = 0; s < c.beta.rows(); ++s) {
      for (int q = 0; q < nq; ++q) {
        for (int j = 0; j < k; ++j) {
          const double b = c.beta(s, q * k + j);
          c.alpha(s, q) -= b * shift[j];
          c.beta(s, q * k + j) = b * factor[j];
          if (c.sigma.size() > 0) c.sigma(s, q * k + j) *= factor[j];
        }
      }
      if (c.beta0.size() > 0)
        for (int j = 0; j < k; ++j) c.beta0(s, j) *= factor[j];
    }
  }
}

/// Run `chains` independent chain functions, in parallel when allowed.
/// Chain c always uses stream id c, so results do not depend on scheduling.
inline void run_chains_parallel(int chains, int threads, const std::function<void(int)>& body) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  const int n_threads = std::max(1, std::min(chains, threads > 0 ? threads : hw));
  if (n_threads == 1) {
    for (int c = 0; c < chains; ++c) body(c);
    return;
  }
  std::vector<std::exception_ptr> errors(chains);
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (int c = next++; c < chains; c = next++) {
        try {
          body(c);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace qvp

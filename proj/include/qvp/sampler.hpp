#pragma once

// Multi-chain front end over the individual samplers.

#include <vector>

#include "baseline.hpp"
#include "centred.hpp"
#include "data.hpp"
#include "draws.hpp"
#include "noncentred.hpp"
#include "sampler_common.hpp"

namespace qvp {

/// Run cfg.chains chains of the chosen sampler. Chains are independent and
/// use stream ids 0..chains-1, so the result does not depend on threading.
inline PosteriorDraws fit_draws(const SamplerData& data, const QuantileGrid& grid, SamplerKind kind,
                                const SamplerConfig& cfg) {
  cfg.validate();
  data.validate(grid);
  if (cfg.alpha_difference_prior && kind != SamplerKind::centred)
    throw ParameterError("the alpha difference prior is only available for the centred sampler");
  PosteriorDraws out;
  out.kind = kind;
  out.quantiles = grid.size();
  out.covariates = data.covariates();
  out.taus = grid.taus();
  out.chains.resize(cfg.chains);
  run_chains_parallel(cfg.chains, cfg.threads, [&](int c) {
    switch (kind) {
      case SamplerKind::centred: out.chains[c] = run_centred_chain(data, grid, cfg, c); break;
      case SamplerKind::noncentred: out.chains[c] = run_noncentred_chain(data, grid, cfg, false, c); break;
      case SamplerKind::asis: out.chains[c] = run_noncentred_chain(data, grid, cfg, true, c); break;
      case SamplerKind::independent: out.chains[c] = run_independent_chain(data, grid, cfg, c); break;
    }
  });
  return out;
}

/// Fit a dataset. Draws refer to the dataset's design; if the dataset was
/// rescaled, `to_original_scale` maps them back.
inline PosteriorDraws fit(const Dataset& d, const QuantileGrid& grid, SamplerKind kind, const SamplerConfig& cfg) {
  return fit_draws(SamplerData::broadcast(d, grid.size()), grid, kind, cfg);
}

}  // namespace qvp

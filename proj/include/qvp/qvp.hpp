#pragma once

// Umbrella header for the QVP library.

#include "ald.hpp"
#include "banded.hpp"
#include "baseline.hpp"
#include "centred.hpp"
#include "commands.hpp"
#include "convergence.hpp"
#include "data.hpp"
#include "dgp.hpp"
#include "distributions.hpp"
#include "draws.hpp"
#include "error.hpp"
#include "horseshoe.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "noncentred.hpp"
#include "qvar.hpp"
#include "rng.hpp"
#include "run_config.hpp"
#include "sampler.hpp"
#include "sampler_common.hpp"
#include "savs.hpp"
#include "shrinkage.hpp"
#include "simulation.hpp"

#pragma once

// Umbrella header: counterfactual causal attribution of observed changes via
// probabilities of necessary and sufficient causation over optimized linear
// fingerprint indexes.

#include "causalfp/causal.hpp"
#include "causalfp/dataset_io.hpp"
#include "causalfp/errors.hpp"
#include "causalfp/lowrank.hpp"
#include "causalfp/model.hpp"
#include "causalfp/preprocess.hpp"
#include "causalfp/report.hpp"
#include "causalfp/rng.hpp"
#include "causalfp/sensitivity.hpp"
#include "causalfp/shrinkage.hpp"
#include "causalfp/synth.hpp"
#include "causalfp/types.hpp"

#pragma once

#include <cstdint>

#include "mbl/env_markov.hpp"
#include "mbl/linbandit_oracles.hpp"
#include "mbl/trace.hpp"

namespace mbl {

struct BaselineParams {
  double lambda = 1e-2;
  double alpha = 2.0;
};

/// Contextual LinUCB state: a UCB oracle with a fixed exploration multiplier.
UcbOracle make_baseline_state(int dim, const BaselineParams& params);

struct BaselineStep {
  int action = 0;
  double reward = 0.0;
};

/// Picks argmax_k <a_k, theta_hat> + alpha ||a_k||_{V^-1} in the realized
/// context and learns from the reward immediately. `z` is the round's
/// standard normal noise draw.
BaselineStep baseline_step(UcbOracle& state, const FiniteMarkovEnv& env, const Matrix& context, double z);
BaselineStep baseline_step(UcbOracle& state, const FiniteMarkovEnv& env, const Matrix& context, Rng& noise);

RegretTrace run_baseline(const FiniteMarkovEnv& env, const Episode& episode, const BaselineParams& params);

}  // namespace mbl

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mbl/env_markov.hpp"

namespace mbl {

/// Exogenous randomness of one run: the context trajectory and the standard
/// normal draw behind each round's reward noise. Every algorithm of a run
/// consumes the same episode, which is what makes paired comparisons valid.
struct Episode {
  std::uint64_t seed = 0;
  std::vector<int> states;
  std::vector<double> noise;  // z_t ~ N(0, 1); the reward adds sigma * z_t
  std::uint64_t traj_hash = 0;

  long horizon() const { return static_cast<long>(states.size()); }
};

/// Simulates `horizon` rounds. A negative `initial_state` draws the first
/// state from the stationary distribution.
Episode simulate_episode(const FiniteMarkovEnv& env, long horizon, std::uint64_t seed, int initial_state = -1);

std::uint64_t trajectory_hash(const std::vector<int>& states);

/// Per-round pseudo-regret of one run.
struct RegretTrace {
  int run_id = 0;
  std::string algo;
  std::uint64_t seed = 0;
  std::uint64_t traj_hash = 0;
  std::vector<double> inst_regret;

  long horizon() const { return static_cast<long>(inst_regret.size()); }
  std::vector<double> cumulative() const;
  double final_regret() const;
};

}  // namespace mbl

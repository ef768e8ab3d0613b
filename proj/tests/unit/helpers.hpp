#pragma once

#include "mbl/env_markov.hpp"
#include "mbl/surrogate_map.hpp"

namespace mbl::test {

// One state, `k` random unit actions; the chain never moves.
inline FiniteMarkovEnv single_state_env(int k, int dim, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  FiniteMarkovEnv env;
  env.n_states = 1;
  env.n_actions = k;
  env.dim = dim;
  Matrix a(k, dim);
  for (int i = 0; i < k; ++i) a.row(i) = rng.unit_vector(dim).transpose();
  env.actions = {a};
  env.kernel = Matrix::Ones(1, 1);
  env.stationary = Vector::Ones(1);
  env.doeblin_beta = 0.5;
  env.c_mix = 1.0;
  env.noise_sigma = sigma;
  env.theta_star = rng.unit_vector(dim);
  env.validate();
  return env;
}

// Small ring environment with a single action per state.
inline FiniteMarkovEnv one_action_env(std::uint64_t seed) {
  EnvParams p;
  p.n_states = 6;
  p.n_actions = 1;
  p.dim = 3;
  p.n_neighbors = 1;
  p.sigma = 0.0;
  return make_env(p, seed);
}

inline ParameterBank bank_for(const FiniteMarkovEnv& env, int m, bool with_theta_star, std::uint64_t seed) {
  Rng rng(seed, Stream::kBank);
  return make_bank(m, env.dim, with_theta_star, env.theta_star, rng);
}

}  // namespace mbl::test

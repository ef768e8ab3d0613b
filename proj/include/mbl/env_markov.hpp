#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbl/common.hpp"

namespace mbl {

/// Finite-state Markovian context process. State s exposes the action set
/// `actions[s]` (K rows of length d); contexts evolve under `kernel`.
///
/// Immutable after construction; safe to share across concurrent runs.
struct FiniteMarkovEnv {
  int n_states = 0;
  int n_actions = 0;
  int dim = 0;
  std::vector<Matrix> actions;  // n_states matrices, each n_actions x dim
  Matrix kernel;                // row-stochastic, n_states x n_states
  Vector stationary;
  double doeblin_beta = 0.0;
  double c_mix = 1.0;
  double noise_sigma = 0.0;
  Vector theta_star;

  // Throws std::invalid_argument naming the violated invariant.
  void validate() const;

  double mean_reward(const Vector& action) const { return action.dot(theta_star); }
  // max_k <a_{s,k}, theta*>
  double optimal_value(int state) const;
};

/// Parameters for the ring-plus-Doeblin-mixture construction.
struct EnvParams {
  int n_states = 40;
  int n_actions = 20;
  int dim = 20;
  double p_loop = 0.20;
  int n_neighbors = 2;
  double beta = 0.75;
  // "uniform" or "random" (mixing vector drawn from a flat Dirichlet).
  std::string pi_mode = "uniform";
  double sigma = 0.5;
  double c_mix = 1.0;
  // Empty means draw theta* uniformly on the unit sphere.
  std::vector<double> theta_star;
};

/// Ring kernel: self-loop `p_loop`, the remaining mass split evenly over the
/// `n_neighbors` states on each side.
Matrix build_ring_kernel(int n_states, double p_loop, int n_neighbors);

/// P = beta Q + (1 - beta) 1 pi^T.
Matrix build_doeblin_kernel(const Matrix& q, double beta, const Vector& pi);

/// Solves pi P = pi, sum(pi) = 1 for an irreducible kernel.
Vector stationary_distribution(const Matrix& kernel);

/// Builds the environment: ring kernel, Doeblin mixture, unit-norm actions
/// drawn once per (state, slot), theta* on the unit sphere unless supplied.
FiniteMarkovEnv make_env(const EnvParams& params, std::uint64_t seed);

double tv_distance(const Vector& p, const Vector& q);

/// Row `state` of P^t, by repeated vector-matrix products.
Vector kernel_power_row(const FiniteMarkovEnv& env, int state, int t);

/// mu P^t for an arbitrary initial distribution.
Vector push_forward(const FiniteMarkovEnv& env, const Vector& mu, int t);

/// Single-owner mutable position of the chain plus its random stream.
class ChainState {
 public:
  ChainState(int initial_state, std::uint64_t seed) : current_(initial_state), rng_(seed, Stream::kChain) {}

  int current() const { return current_; }
  // Draws the next state from the current kernel row and advances.
  int step(const FiniteMarkovEnv& env);
  Rng& rng() { return rng_; }

 private:
  int current_;
  Rng rng_;
};

/// Samples a state from a probability vector by inverse CDF.
int sample_index(const Vector& probabilities, Rng& rng);

/// <action, theta*> + sigma z with z ~ N(0, 1) from `noise`.
double reward(const FiniteMarkovEnv& env, const Vector& action, Rng& noise);

nlohmann::json env_to_json(const FiniteMarkovEnv& env);
FiniteMarkovEnv env_from_json(const nlohmann::json& j);

}  // namespace mbl

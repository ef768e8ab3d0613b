#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "mbl/env_markov.hpp"
#include "mbl/linbandit_oracles.hpp"
#include "mbl/surrogate_map.hpp"
#include "mbl/trace.hpp"

namespace mbl {

/// ceil(c_tau ln T / (1 - beta)), at least 1.
int compute_tau(long horizon, double beta, double c_tau);

struct DelayedPair {
  long round = 0;
  int bank_index = 0;
  double reward = 0.0;
};

/// FIFO that releases a pair exactly `delay` rounds after it was pushed.
/// Pushing round t's pair returns round (t - delay)'s pair, if any.
class DelayBuffer {
 public:
  explicit DelayBuffer(int delay);

  std::optional<DelayedPair> push(const DelayedPair& pair);
  void clear() { queue_.clear(); }
  int delay() const { return delay_; }
  std::size_t size() const { return queue_.size(); }

 private:
  int delay_;
  std::deque<DelayedPair> queue_;
};

struct KnownConfig {
  UcbParams ucb;  // horizon is filled in by run_known
  // Sets ucb.bias_level = 2 c_mix T^{-c_tau} from the run's horizon.
  bool auto_bias_level = true;
  double c_tau = 1.0;
  bool theory_mode = false;  // requires c_tau > 1
  int tau_override = -1;     // >= 0 replaces compute_tau
};

struct KnownRunResult {
  RegretTrace trace;
  int tau = 0;
  std::vector<int> chosen;              // bank index theta_t per round
  std::vector<double> surrogate_regret; // max_i <g_pi(theta_i), theta*> - <g_pi(theta_t), theta*>
  long oracle_observations = 0;
};

/// Delayed-feedback reduction with the exact stationary surrogate arm set.
/// Rounds 1..tau sample theta_t uniformly from the bank; afterwards the UCB
/// oracle picks theta_t from its delayed history. Either way the greedy
/// action for theta_t in the realized context is played.
KnownRunResult run_known(const FiniteMarkovEnv& env, const ParameterBank& bank, const GreedyTable& table,
                         const SurrogateSet& surrogates, const Episode& episode, const KnownConfig& config,
                         std::uint64_t algo_seed);

/// Conditional bias <g_rho(theta) - g_pi(theta), theta*> with rho = P^tau(s0, .).
double bias_oracle(const FiniteMarkovEnv& env, int tau, const Vector& theta, int s0);

}  // namespace mbl

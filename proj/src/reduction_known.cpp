#include "mbl/reduction_known.hpp"

#include <cmath>
#include <stdexcept>

namespace mbl {

int compute_tau(long horizon, double beta, double c_tau) {
  if (horizon < 2) throw std::invalid_argument("compute_tau: horizon must be >= 2");
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("compute_tau: beta must lie in [0, 1)");
  if (!(c_tau > 0.0)) throw std::invalid_argument("compute_tau: c_tau must be > 0");
  const double tau = std::ceil(c_tau * std::log(static_cast<double>(horizon)) / (1.0 - beta));
  return std::max(1, static_cast<int>(tau));
}

DelayBuffer::DelayBuffer(int delay) : delay_(delay) {
  if (delay < 0) throw std::invalid_argument("DelayBuffer: delay must be >= 0");
}

std::optional<DelayedPair> DelayBuffer::push(const DelayedPair& pair) {
  queue_.push_back(pair);
  if (static_cast<int>(queue_.size()) <= delay_) return std::nullopt;
  DelayedPair out = queue_.front();
  queue_.pop_front();
  return out;
}

KnownRunResult run_known(const FiniteMarkovEnv& env, const ParameterBank& bank, const GreedyTable& table,
                         const SurrogateSet& surrogates, const Episode& episode, const KnownConfig& config,
                         std::uint64_t algo_seed) {
  if (surrogates.kind != SurrogateKind::kExactStationary) {
    throw std::invalid_argument("run_known: surrogates must be exact-stationary");
  }
  if (config.theory_mode && !(config.c_tau > 1.0)) {
    throw std::invalid_argument("run_known: theory mode requires c_tau > 1");
  }
  const long horizon = episode.horizon();
  const int tau = config.tau_override >= 0 ? config.tau_override : compute_tau(horizon, env.doeblin_beta, config.c_tau);
  if (horizon <= tau) throw std::invalid_argument("run_known: horizon must exceed the delay tau");

  const int m = bank.size();
  // Value of every bank entry's greedy action in every state.
  Matrix values(env.n_states, m);
  Vector optimal(env.n_states);
  for (int s = 0; s < env.n_states; ++s) {
    const Vector state_values = env.actions[s] * env.theta_star;
    optimal[s] = state_values.maxCoeff();
    for (int i = 0; i < m; ++i) values(s, i) = state_values[table.index(s, i)];
  }
  const Vector surrogate_values = surrogates.arms * env.theta_star;
  const double best_surrogate = surrogate_values.maxCoeff();

  UcbParams ucb = config.ucb;
  ucb.horizon = horizon;
  if (config.auto_bias_level) ucb.bias_level = bias_level(horizon, config.c_tau, env.c_mix);
  UcbOracle oracle(env.dim, ucb);
  oracle.bind_arms(surrogates.arms);
  DelayBuffer buffer(tau);
  Rng rng(algo_seed, Stream::kAlgorithm);

  KnownRunResult out;
  out.tau = tau;
  out.trace.algo = "known";
  out.trace.seed = episode.seed;
  out.trace.traj_hash = episode.traj_hash;
  out.trace.inst_regret.resize(horizon);
  out.chosen.resize(horizon);
  out.surrogate_regret.resize(horizon);

  for (long t = 0; t < horizon; ++t) {
    const int s = episode.states[t];
    const int i = t < tau ? static_cast<int>(rng.index(m)) : oracle.select_bound();
    const double r = values(s, i) + env.noise_sigma * episode.noise[t];
    out.chosen[t] = i;
    out.trace.inst_regret[t] = optimal[s] - values(s, i);
    out.surrogate_regret[t] = best_surrogate - surrogate_values[i];
    if (auto released = buffer.push({t, i, r})) {
      oracle.update(surrogates.arms.row(released->bank_index).transpose(), released->reward);
    }
  }
  out.oracle_observations = oracle.t_obs();
  return out;
}

double bias_oracle(const FiniteMarkovEnv& env, int tau, const Vector& theta, int s0) {
  const Vector rho = kernel_power_row(env, s0, tau);
  return (surrogate_under(env, rho, theta) - surrogate_under(env, env.stationary, theta)).dot(env.theta_star);
}

}  // namespace mbl

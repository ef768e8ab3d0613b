#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "mbl/env_markov.hpp"
#include "mbl/linbandit_oracles.hpp"
#include "mbl/surrogate_map.hpp"
#include "mbl/trace.hpp"

namespace mbl {

/// Epoch m (1-based) starts at t^(m) = (m-1) tau + 2^{m-1} - 1 and lasts
/// T_m = tau + 2^{m-1} rounds, the last 2^{m-1} of which are driven by the
/// oracle. The final epoch is truncated at the horizon.
struct EpochSchedule {
  long horizon = 0;
  int tau = 0;
  int n_epochs = 0;
  std::vector<long> starts;   // t^(1..M+1), untruncated
  std::vector<long> lengths;  // T_1..T_M
  std::vector<long> budgets;  // H_1..H_M

  long start(int m) const { return starts[m - 1]; }
  long end(int m) const { return std::min(starts[m], horizon); }
};

EpochSchedule build_schedule(long horizon, int tau);

/// Constants entering the misspecification schedule.
struct MisspecConstants {
  double c_mix = 1.0;
  double beta = 0.75;
  double delta = 0.05;
  int n_epochs = 1;
  int bank_size = 1;
  long horizon = 2;
};

/// sqrt(36 log(4 C) / ((1 - beta) t) * log(2 M |bank| / delta)) + 2 C / ((1 - beta) t) + 2 / T.
double epsilon_m(long t_m, const MisspecConstants& c);
/// The stochastic (square-root) term alone.
double epsilon_m_fluctuation(long t_m, const MisspecConstants& c);
/// Clips to [2/T, 2]: gaps between bounded rewards never exceed 2.
double clip_epsilon(double eps, long horizon);

/// eps_1 = 1; eps_m = clip(epsilon_m(t^(m))) for m >= 2.
std::vector<double> misspec_schedule(const EpochSchedule& schedule, const MisspecConstants& c);

struct UnknownConfig {
  double c_tau = 1.0;
  int tau_override = -1;
  double delta = 0.05;     // confidence of the misspecification schedule
  double delta_pe = 0.05;  // confidence of each PE instance
  // Values <= 0 mean "use the environment's". Larger values act as the
  // conservative upper bounds available when the chain's constants are unknown.
  double c_mix_bound = 0.0;
  double beta_bound = 0.0;
};

struct EpochDiagnostics {
  int epoch = 0;
  long start = 0;
  long end = 0;
  double epsilon = 0.0;
  // max over bank pairs (i, j) of |<g_pi(theta_i) - g^(m)(theta_i), theta_j>|
  double max_misspec = 0.0;
  long pairs_fed = 0;
  int active_arms_end = 0;
  int phases_completed = 0;
};

struct UnknownRunResult {
  RegretTrace trace;
  EpochSchedule schedule;
  std::vector<EpochDiagnostics> epochs;
  // Round at which each fed pair was generated, per epoch (for leakage checks).
  std::vector<std::vector<long>> fed_rounds;
};

/// Epoch-doubling reduction: each epoch runs tau uniformly sampled warm-up
/// rounds, then a fresh PE instance over the empirical surrogate arm set
/// with delayed feedback. The surrogate map is re-estimated from all rounds
/// so far at every epoch boundary.
UnknownRunResult run_unknown(const FiniteMarkovEnv& env, const ParameterBank& bank, const GreedyTable& table,
                             const Episode& episode, const UnknownConfig& config, std::uint64_t algo_seed,
                             bool record_fed_rounds = false);

/// max_{i,j} |<exact_i - estimate_i, bank_j>|
double max_bank_misspecification(const Matrix& exact, const Matrix& estimate, const ParameterBank& bank);

}  // namespace mbl

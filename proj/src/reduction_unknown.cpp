#include "mbl/reduction_unknown.hpp"

#include <cmath>
#include <stdexcept>

#include "mbl/reduction_known.hpp"

namespace mbl {

EpochSchedule build_schedule(long horizon, int tau) {
  if (tau < 0) throw std::invalid_argument("build_schedule: tau must be >= 0");
  if (horizon <= tau + 1) throw std::invalid_argument("build_schedule: horizon must exceed tau + 1");
  EpochSchedule s;
  s.horizon = horizon;
  s.tau = tau;
  auto start_of = [tau](int m) { return static_cast<long>(m - 1) * tau + ((1L << (m - 1)) - 1); };
  s.starts.push_back(start_of(1));
  for (int m = 1;; ++m) {
    s.lengths.push_back(tau + (1L << (m - 1)));
    s.budgets.push_back(1L << (m - 1));
    s.starts.push_back(start_of(m + 1));
    if (s.starts.back() >= horizon) {
      s.n_epochs = m;
      break;
    }
  }
  return s;
}

double epsilon_m_fluctuation(long t_m, const MisspecConstants& c) {
  if (t_m < 1) throw std::invalid_argument("epsilon_m: t_m must be >= 1");
  const double t = static_cast<double>(t_m);
  const double log_union = std::log(2.0 * c.n_epochs * c.bank_size / c.delta);
  return std::sqrt(36.0 * std::log(4.0 * c.c_mix) / ((1.0 - c.beta) * t) * log_union);
}

double epsilon_m(long t_m, const MisspecConstants& c) {
  const double t = static_cast<double>(t_m);
  return epsilon_m_fluctuation(t_m, c) + 2.0 * c.c_mix / ((1.0 - c.beta) * t) + 2.0 / static_cast<double>(c.horizon);
}

double clip_epsilon(double eps, long horizon) { return std::clamp(eps, 2.0 / static_cast<double>(horizon), 2.0); }

std::vector<double> misspec_schedule(const EpochSchedule& schedule, const MisspecConstants& c) {
  std::vector<double> eps(schedule.n_epochs);
  for (int m = 1; m <= schedule.n_epochs; ++m) {
    eps[m - 1] = m == 1 ? 1.0 : clip_epsilon(epsilon_m(schedule.start(m), c), schedule.horizon);
  }
  return eps;
}

double max_bank_misspecification(const Matrix& exact, const Matrix& estimate, const ParameterBank& bank) {
  return ((exact - estimate) * bank.vectors.transpose()).cwiseAbs().maxCoeff();
}

UnknownRunResult run_unknown(const FiniteMarkovEnv& env, const ParameterBank& bank, const GreedyTable& table,
                             const Episode& episode, const UnknownConfig& config, std::uint64_t algo_seed,
                             bool record_fed_rounds) {
  const long horizon = episode.horizon();
  const double beta = config.beta_bound > 0.0 ? config.beta_bound : env.doeblin_beta;
  const double c_mix = config.c_mix_bound > 0.0 ? config.c_mix_bound : env.c_mix;
  const int tau = config.tau_override >= 0 ? config.tau_override : compute_tau(horizon, beta, config.c_tau);
  if (horizon <= tau + 1) throw std::invalid_argument("run_unknown: horizon too small for one full epoch");

  UnknownRunResult out;
  out.schedule = build_schedule(horizon, tau);
  const EpochSchedule& schedule = out.schedule;
  const int m_bank = bank.size();
  const MisspecConstants constants{c_mix, beta, config.delta, schedule.n_epochs, m_bank, horizon};
  const std::vector<double> eps = misspec_schedule(schedule, constants);

  Matrix values(env.n_states, m_bank);
  Vector optimal(env.n_states);
  for (int s = 0; s < env.n_states; ++s) {
    const Vector state_values = env.actions[s] * env.theta_star;
    optimal[s] = state_values.maxCoeff();
    for (int i = 0; i < m_bank; ++i) values(s, i) = state_values[table.index(s, i)];
  }
  const Matrix exact = exact_surrogate(env, table).arms;

  Rng rng(algo_seed, Stream::kAlgorithm);
  EmpiricalSurrogateAccumulator accumulator(env, table);

  // g^(1): greedy actions of a uniformly drawn state.
  Matrix arms(m_bank, env.dim);
  {
    const int s0 = static_cast<int>(rng.index(env.n_states));
    for (int i = 0; i < m_bank; ++i) arms.row(i) = env.actions[s0].row(table.index(s0, i));
  }

  out.trace.algo = "unknown";
  out.trace.seed = episode.seed;
  out.trace.traj_hash = episode.traj_hash;
  out.trace.inst_regret.resize(horizon);
  if (record_fed_rounds) out.fed_rounds.resize(schedule.n_epochs);

  for (int m = 1; m <= schedule.n_epochs; ++m) {
    const long start = schedule.start(m);
    const long end = schedule.end(m);
    EpochDiagnostics diag;
    diag.epoch = m;
    diag.start = start;
    diag.end = end;
    diag.epsilon = eps[m - 1];
    diag.max_misspec = max_bank_misspecification(exact, arms, bank);

    PeOracle oracle(arms, {eps[m - 1], config.delta_pe, std::max(0L, end - start - tau)});
    DelayBuffer buffer(tau);
    for (long t = start; t < end; ++t) {
      const int s = episode.states[t];
      const int i = t - start < tau ? static_cast<int>(rng.index(m_bank)) : oracle.next();
      const double r = values(s, i) + env.noise_sigma * episode.noise[t];
      out.trace.inst_regret[t] = optimal[s] - values(s, i);
      accumulator.add(s);
      if (auto released = buffer.push({t, i, r})) {
        oracle.observe(released->bank_index, released->reward);
        ++diag.pairs_fed;
        if (record_fed_rounds) out.fed_rounds[m - 1].push_back(released->round);
      }
    }
    // Pairs still in flight belong to this epoch's oracle and are dropped.
    diag.active_arms_end = static_cast<int>(oracle.active().size());
    diag.phases_completed = oracle.phase() - 1;
    out.epochs.push_back(diag);
    if (m < schedule.n_epochs) arms = accumulator.snapshot(m + 1).arms;
  }
  return out;
}

}  // namespace mbl

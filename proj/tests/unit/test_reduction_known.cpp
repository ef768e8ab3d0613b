#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "mbl/reduction_known.hpp"
#include "mbl/verify_concentration.hpp"

using namespace mbl;

TEST(ComputeTau, Examples) {
  EXPECT_EQ(compute_tau(200000, 0.75, 1.0), 49);
  EXPECT_EQ(compute_tau(100, 0.0, 1.0), 5);
  EXPECT_EQ(compute_tau(2, 0.0, 0.01), 1);
}

TEST(ComputeTau, MonotoneInBetaAndHorizon) {
  int prev = 0;
  for (double beta = 0.0; beta < 0.95; beta += 0.05) {
    const int tau = compute_tau(10000, beta, 1.0);
    EXPECT_GE(tau, prev);
    prev = tau;
  }
  prev = 0;
  for (long t = 2; t < 1000000; t *= 3) {
    const int tau = compute_tau(t, 0.75, 1.0);
    EXPECT_GE(tau, prev);
    prev = tau;
  }
}

TEST(DelayBuffer, ReleasesExactlyDelayLater) {
  DelayBuffer zero(0);
  auto r = zero.push({5, 1, 0.5});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->round, 5);

  DelayBuffer buf(3);
  for (long t = 0; t < 20; ++t) {
    const auto out = buf.push({t, static_cast<int>(t % 4), 0.1 * t});
    if (t < 3) {
      EXPECT_FALSE(out);
    } else {
      ASSERT_TRUE(out);
      EXPECT_EQ(out->round, t - 3);
      EXPECT_EQ(out->bank_index, (t - 3) % 4);
    }
  }
  EXPECT_EQ(buf.size(), 3u);
  EXPECT_THROW(DelayBuffer(-1), std::invalid_argument);
}

namespace {

struct Fixture {
  FiniteMarkovEnv env = make_env(small_env_params(), 31);
  ParameterBank bank = test::bank_for(env, 32, true, 31);
  GreedyTable table{env, bank};
  SurrogateSet surrogates = exact_surrogate(env, table);
};

}  // namespace

TEST(RunKnown, ObservationCountAndFeedback) {
  Fixture f;
  const Episode ep = simulate_episode(f.env, 3000, 4);
  const KnownRunResult r = run_known(f.env, f.bank, f.table, f.surrogates, ep, verify_known_config(), 4);
  EXPECT_EQ(r.tau, compute_tau(3000, 0.75, 1.0));
  EXPECT_EQ(r.oracle_observations, 3000 - r.tau);
  EXPECT_EQ(r.trace.algo, "known");
  EXPECT_EQ(r.trace.traj_hash, ep.traj_hash);
  for (long t = 0; t < 3000; ++t) {
    ASSERT_GE(r.trace.inst_regret[t], -1e-15);
    ASSERT_LE(r.trace.inst_regret[t], 2.0);
    ASSERT_GE(r.surrogate_regret[t], -1e-15);
  }
}

TEST(RunKnown, Deterministic) {
  Fixture f;
  const Episode ep = simulate_episode(f.env, 2000, 8);
  const auto a = run_known(f.env, f.bank, f.table, f.surrogates, ep, verify_known_config(), 8);
  const auto b = run_known(f.env, f.bank, f.table, f.surrogates, ep, verify_known_config(), 8);
  EXPECT_EQ(a.trace.inst_regret, b.trace.inst_regret);
  EXPECT_EQ(a.chosen, b.chosen);
}

TEST(RunKnown, SingleStateIsPlainUcbOnGreedyImages) {
  const FiniteMarkovEnv env = test::single_state_env(5, 3, 0.3, 2);
  const ParameterBank bank = test::bank_for(env, 16, false, 2);
  const GreedyTable table(env, bank);
  const SurrogateSet sur = exact_surrogate(env, table);
  const Episode ep = simulate_episode(env, 500, 6);
  KnownConfig cfg = verify_known_config();
  cfg.tau_override = 4;
  const KnownRunResult r = run_known(env, bank, table, sur, ep, cfg, 6);

  // Direct: UCB on the greedy images with a hand-rolled delay queue.
  UcbParams p = cfg.ucb;
  p.horizon = 500;
  p.bias_level = bias_level(500, cfg.c_tau, env.c_mix);
  UcbOracle oracle(env.dim, p);
  Rng rng(6, Stream::kAlgorithm);
  std::vector<int> picks;
  std::vector<double> rewards;
  double regret = 0.0;
  const Vector values = env.actions[0] * env.theta_star;
  for (long t = 0; t < 500; ++t) {
    const int i = t < 4 ? static_cast<int>(rng.index(16)) : oracle.select(sur.arms);
    picks.push_back(i);
    const Vector x = sur.arms.row(i).transpose();
    rewards.push_back(x.dot(env.theta_star) + env.noise_sigma * ep.noise[t]);
    regret += values.maxCoeff() - x.dot(env.theta_star);
    if (t >= 4) oracle.update(sur.arms.row(picks[t - 4]).transpose(), rewards[t - 4]);
  }
  EXPECT_EQ(r.chosen, picks);
  EXPECT_NEAR(r.trace.final_regret(), regret, 1e-9);
}

TEST(RunKnown, OneActionPerStateHasZeroRegret) {
  const FiniteMarkovEnv env = test::one_action_env(3);
  const ParameterBank bank = test::bank_for(env, 8, false, 3);
  const GreedyTable table(env, bank);
  const Episode ep = simulate_episode(env, 400, 1);
  const auto r = run_known(env, bank, table, exact_surrogate(env, table), ep, verify_known_config(), 1);
  EXPECT_EQ(r.trace.final_regret(), 0.0);
}

TEST(RunKnown, RejectsBadInputs) {
  Fixture f;
  const Episode ep = simulate_episode(f.env, 1000, 1);
  SurrogateSet empirical = f.surrogates;
  empirical.kind = SurrogateKind::kEmpiricalEpoch;
  EXPECT_THROW(run_known(f.env, f.bank, f.table, empirical, ep, verify_known_config(), 1), std::invalid_argument);
  KnownConfig theory = verify_known_config();
  theory.theory_mode = true;
  EXPECT_THROW(run_known(f.env, f.bank, f.table, f.surrogates, ep, theory, 1), std::invalid_argument);
  const Episode tiny = simulate_episode(f.env, 10, 1);
  EXPECT_THROW(run_known(f.env, f.bank, f.table, f.surrogates, tiny, verify_known_config(), 1),
               std::invalid_argument);
}

TEST(BiasOracle, ZeroDelayIsGreedyMinusSurrogate) {
  Fixture f;
  for (int s0 = 0; s0 < f.env.n_states; ++s0) {
    for (int i = 0; i < f.bank.size(); ++i) {
      const Vector greedy = f.env.actions[s0].row(f.table.index(s0, i)).transpose();
      const double expected = (greedy - f.surrogates.arms.row(i).transpose()).dot(f.env.theta_star);
      EXPECT_NEAR(bias_oracle(f.env, 0, f.bank.at(i), s0), expected, 1e-14);
    }
  }
}

TEST(BiasOracle, ExactEnvelope) {
  Fixture f;
  for (int tau = 1; tau <= 30; ++tau) {
    for (int s0 = 0; s0 < f.env.n_states; ++s0) {
      const double tv = tv_distance(kernel_power_row(f.env, s0, tau), f.env.stationary);
      for (int i = 0; i < f.bank.size(); ++i) {
        const double delta = std::abs(bias_oracle(f.env, tau, f.bank.at(i), s0));
        ASSERT_LE(delta, 2.0 * tv + 1e-14);
        ASSERT_LE(2.0 * tv, 2.0 * f.env.c_mix * std::pow(f.env.doeblin_beta, tau) + 1e-14);
      }
    }
  }
}

#include <gtest/gtest.h>

#include <cmath>

#include "mbl/env_markov.hpp"

using namespace mbl;

namespace {

Matrix matrix_power(const Matrix& p, int t) {
  Matrix out = Matrix::Identity(p.rows(), p.cols());
  for (int i = 0; i < t; ++i) out = out * p;
  return out;
}

bool is_ring_neighbor(int s, int j, int n_states, int n_neighbors) {
  const int d = std::abs(s - j);
  const int ring = std::min(d, n_states - d);
  return ring >= 1 && ring <= n_neighbors;
}

}  // namespace

TEST(RingKernel, Table3Entries) {
  const Matrix q = build_ring_kernel(40, 0.2, 2);
  for (int s = 0; s < 40; ++s) {
    EXPECT_DOUBLE_EQ(q(s, s), 0.2);
    for (int j = 0; j < 40; ++j) {
      if (j == s) continue;
      EXPECT_DOUBLE_EQ(q(s, j), is_ring_neighbor(s, j, 40, 2) ? 0.2 : 0.0) << s << "," << j;
    }
  }
}

TEST(RingKernel, ThreeStates) {
  const Matrix q = build_ring_kernel(3, 0.5, 1);
  for (int s = 0; s < 3; ++s) {
    EXPECT_DOUBLE_EQ(q(s, s), 0.5);
    EXPECT_DOUBLE_EQ(q(s, (s + 1) % 3), 0.25);
    EXPECT_DOUBLE_EQ(q(s, (s + 2) % 3), 0.25);
  }
}

TEST(RingKernel, RejectsBadParameters) {
  EXPECT_THROW(build_ring_kernel(40, 0.0, 2), std::invalid_argument);
  EXPECT_THROW(build_ring_kernel(40, 1.0, 2), std::invalid_argument);
  EXPECT_THROW(build_ring_kernel(4, 0.2, 2), std::invalid_argument);
  EXPECT_THROW(build_ring_kernel(40, 0.2, 0), std::invalid_argument);
}

TEST(DoeblinKernel, Table3Entries) {
  const Matrix q = build_ring_kernel(40, 0.2, 2);
  const Vector pi = Vector::Constant(40, 1.0 / 40.0);
  const Matrix p = build_doeblin_kernel(q, 0.75, pi);
  for (int s = 0; s < 40; ++s) {
    EXPECT_NEAR(p(s, s), 0.15625, 1e-15);
    EXPECT_NEAR(p.row(s).sum(), 1.0, 1e-12);
    for (int j = 0; j < 40; ++j) {
      if (j != s && !is_ring_neighbor(s, j, 40, 2)) EXPECT_NEAR(p(s, j), 0.00625, 1e-15);
      if (is_ring_neighbor(s, j, 40, 2)) EXPECT_NEAR(p(s, j), 0.75 * 0.2 + 0.00625, 1e-15);
    }
  }
}

TEST(DoeblinKernel, BetaZeroRowsArePi) {
  Rng rng(3);
  Vector pi(5);
  for (int i = 0; i < 5; ++i) pi[i] = 0.1 + rng.uniform();
  pi /= pi.sum();
  const Matrix p = build_doeblin_kernel(build_ring_kernel(5, 0.3, 1), 0.0, pi);
  for (int s = 0; s < 5; ++s) EXPECT_LT((p.row(s).transpose() - pi).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(TvDistance, Examples) {
  Vector p(2), q(2);
  p << 0.5, 0.5;
  q << 0.75, 0.25;
  EXPECT_DOUBLE_EQ(tv_distance(p, q), 0.25);
  EXPECT_DOUBLE_EQ(tv_distance(p, p), 0.0);
  Vector a(2), b(2);
  a << 1, 0;
  b << 0, 1;
  EXPECT_DOUBLE_EQ(tv_distance(a, b), 1.0);
}

TEST(MakeEnv, Table3InvariantsHold) {
  const FiniteMarkovEnv env = make_env(EnvParams{}, 11);
  EXPECT_NO_THROW(env.validate());
  EXPECT_EQ(env.n_states, 40);
  EXPECT_EQ(env.n_actions, 20);
  EXPECT_EQ(env.dim, 20);
  EXPECT_NEAR(env.theta_star.norm(), 1.0, 1e-12);
  for (const auto& a : env.actions) {
    ASSERT_EQ(a.rows(), 20);
    for (int k = 0; k < a.rows(); ++k) EXPECT_NEAR(a.row(k).norm(), 1.0, 1e-12);
  }
  EXPECT_LT((env.stationary - Vector::Constant(40, 1.0 / 40)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT(((env.stationary.transpose() * env.kernel).transpose() - env.stationary).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MakeEnv, RandomPiIsStationary) {
  EnvParams p;
  p.pi_mode = "random";
  const FiniteMarkovEnv env = make_env(p, 5);
  EXPECT_NEAR(env.stationary.sum(), 1.0, 1e-12);
  EXPECT_LT(((env.stationary.transpose() * env.kernel).transpose() - env.stationary).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MakeEnv, SuppliedThetaStarIsUsed) {
  EnvParams p;
  p.n_states = 5;
  p.n_actions = 3;
  p.dim = 2;
  p.n_neighbors = 1;
  p.theta_star = {0.6, 0.8};
  const FiniteMarkovEnv env = make_env(p, 1);
  EXPECT_DOUBLE_EQ(env.theta_star[0], 0.6);
  EXPECT_DOUBLE_EQ(env.theta_star[1], 0.8);
}

TEST(MakeEnv, SameSeedSameEnv) {
  const auto a = make_env(EnvParams{}, 9);
  const auto b = make_env(EnvParams{}, 9);
  EXPECT_EQ(a.theta_star, b.theta_star);
  for (int s = 0; s < a.n_states; ++s) EXPECT_EQ(a.actions[s], b.actions[s]);
}

TEST(Validate, RejectsBrokenKernel) {
  FiniteMarkovEnv env = make_env(EnvParams{}, 2);
  env.kernel(0, 0) += 1e-6;
  EXPECT_THROW(env.validate(), std::invalid_argument);
}

TEST(KernelPowerRow, MatchesExplicitPowers) {
  const FiniteMarkovEnv env = make_env(EnvParams{}, 4);
  for (int s : {0, 7, 39}) {
    Vector one_hot = Vector::Zero(40);
    one_hot[s] = 1.0;
    EXPECT_EQ(kernel_power_row(env, s, 0), one_hot);
    EXPECT_LT((kernel_power_row(env, s, 1) - env.kernel.row(s).transpose()).cwiseAbs().maxCoeff(), 1e-15);
    for (int t : {2, 5, 17}) {
      const Vector expected = matrix_power(env.kernel, t).row(s).transpose();
      EXPECT_LT((kernel_power_row(env, s, t) - expected).cwiseAbs().maxCoeff(), 1e-13);
    }
  }
}

TEST(KernelPowerRow, DoeblinContractionOnTable3) {
  const FiniteMarkovEnv env = make_env(EnvParams{}, 4);
  Matrix pt = Matrix::Identity(40, 40);
  for (int t = 0; t <= 100; ++t) {
    for (int s = 0; s < 40; ++s) {
      EXPECT_LE(tv_distance(pt.row(s).transpose(), env.stationary), std::pow(0.75, t) + 1e-12);
    }
    pt = pt * env.kernel;
  }
}

TEST(PushForward, StationaryIsFixed) {
  const FiniteMarkovEnv env = make_env(EnvParams{}, 4);
  EXPECT_NEAR(tv_distance(push_forward(env, env.stationary, 1), env.stationary), 0.0, 1e-14);
}

TEST(ChainState, DeterministicRowAlwaysReturnsTarget) {
  FiniteMarkovEnv env = make_env(EnvParams{}, 1);
  env.kernel.row(3).setZero();
  env.kernel(3, 17) = 1.0;
  for (int k = 0; k < 20; ++k) {
    ChainState chain(3, static_cast<std::uint64_t>(k));
    EXPECT_EQ(chain.step(env), 17);
  }
}

TEST(ChainState, SameSeedSameTrajectory) {
  const FiniteMarkovEnv env = make_env(EnvParams{}, 1);
  ChainState a(0, 42), b(0, 42);
  for (int t = 0; t < 1000; ++t) ASSERT_EQ(a.step(env), b.step(env));
}

TEST(ChainState, VisitFrequenciesMatchPi) {
  const FiniteMarkovEnv env = make_env(EnvParams{}, 1);
  const int n = 1000000;
  std::vector<int> counts(env.n_states, 0);
  ChainState chain(0, 5);
  for (int t = 0; t < n; ++t) ++counts[chain.step(env)];
  const double beta = env.doeblin_beta;
  for (int s = 0; s < env.n_states; ++s) {
    const double pi = env.stationary[s];
    const double tol = 3.0 * std::sqrt(pi * (1.0 - pi) / n * (1.0 + beta) / (1.0 - beta));
    EXPECT_NEAR(counts[s] / static_cast<double>(n), pi, tol) << "state " << s;
  }
}

TEST(Reward, NoiselessAndCltCheck) {
  FiniteMarkovEnv env = make_env(EnvParams{}, 3);
  const Vector a = env.actions[0].row(0).transpose();
  env.noise_sigma = 0.0;
  Rng rng(1);
  EXPECT_DOUBLE_EQ(reward(env, a, rng), a.dot(env.theta_star));
  EXPECT_DOUBLE_EQ(reward(env, Vector::Zero(env.dim), rng), 0.0);

  env.noise_sigma = 0.5;
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += reward(env, a, rng);
  EXPECT_NEAR(sum / n, a.dot(env.theta_star), 4.0 * 0.5 / std::sqrt(n));
}

TEST(EnvJson, RoundTripIsExact) {
  EnvParams p;
  p.pi_mode = "random";
  const FiniteMarkovEnv env = make_env(p, 8);
  const FiniteMarkovEnv back = env_from_json(nlohmann::json::parse(env_to_json(env).dump()));
  EXPECT_EQ(back.n_states, env.n_states);
  EXPECT_EQ(back.kernel, env.kernel);
  EXPECT_EQ(back.stationary, env.stationary);
  EXPECT_EQ(back.theta_star, env.theta_star);
  EXPECT_EQ(back.doeblin_beta, env.doeblin_beta);
  EXPECT_EQ(back.noise_sigma, env.noise_sigma);
  for (int s = 0; s < env.n_states; ++s) EXPECT_EQ(back.actions[s], env.actions[s]);
}

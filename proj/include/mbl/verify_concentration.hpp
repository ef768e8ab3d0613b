#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbl/env_markov.hpp"
#include "mbl/reduction_known.hpp"
#include "mbl/surrogate_map.hpp"

namespace mbl {

struct VerificationReport {
  std::string name;
  long trials = 0;
  long violations = 0;
  double bound = 0.0;      // the bound value checked against (check-specific)
  double statistic = 0.0;  // worst observed value, or violation rate for Monte-Carlo checks
  bool pass = false;
  double runtime_seconds = 0.0;
  std::string detail;

  nlohmann::json to_json() const;
};

/// The small exact-verification instance: S = 6, K = 4, d = 3, beta = 0.75.
EnvParams small_env_params();
inline constexpr int kSmallBankSize = 32;

/// The chain of the regret experiment: S = 40, K = 20, d = 20, beta = 0.75.
EnvParams table3_env_params();

/// sqrt(18 T log(4 C) / (1 - beta) * log(2 / delta)).
double paulin_bound(long horizon, double beta, double c_mix, double delta);

VerificationReport check_kernel(const FiniteMarkovEnv& env);

/// TV(mu P^t, pi) <= c_mix beta^t + 1e-10 for random mu and t <= t_max.
VerificationReport check_doeblin(const FiniteMarkovEnv& env, int n_distributions, int t_max, std::uint64_t seed);

/// ||g_rho(theta) - g_rho'(theta)|| <= 2 TV(rho, rho') over random triples.
VerificationReport check_lemma1(const FiniteMarkovEnv& env, int n_triples, std::uint64_t seed);

/// |Delta| <= 2 c_mix beta^tau for every (s0, theta_i) and tau in [1, tau_max].
VerificationReport check_bias(const FiniteMarkovEnv& env, const ParameterBank& bank, int tau_max);

/// <g_rho(theta_i), theta_i> >= <g_rho(theta_j), theta_i> over the bank cross-product.
VerificationReport check_argmax_property(const FiniteMarkovEnv& env, const ParameterBank& bank, int n_distributions,
                                         std::uint64_t seed);

/// Monte-Carlo check of the additive-functional concentration bound, with
/// exact per-step means from kernel powers. Chains start in `initial_state`.
VerificationReport check_paulin(const FiniteMarkovEnv& env, const Vector& h, long horizon, double delta, int trials,
                                std::uint64_t seed, int initial_state = 0);

/// Smoke check of the sub-Gaussian proxy 17 of the reduction's effective
/// noise: empirical E[exp(l eta')] <= 1.1 exp(17 l^2 / 2), l in {+-0.25, +-0.5}.
VerificationReport check_mgf_smoke(const FiniteMarkovEnv& env, const ParameterBank& bank, int tau, int samples,
                                   std::uint64_t seed);

/// Canonical known-distribution reduction settings used by the empirical
/// checks below (lambda = 100, alpha = 2, bonus cap 2.5, c_tau = 1).
KnownConfig verify_known_config();

/// Sum over oracle rounds of b_t(theta_t) - E[b_t | G_t], with exact
/// conditional means from P^tau(s_{t - tau}, .), accumulated in tau-spaced
/// blocks; the cross-run mean must lie within 3 standard errors of 0.
VerificationReport check_martingale_blocks(const FiniteMarkovEnv& env, const ParameterBank& bank, long horizon,
                                           int runs, std::uint64_t seed);

/// |mean contextual regret - mean surrogate regret of the replayed theta_t|
/// <= 2 tau + 4 T c_mix beta^tau + 3 SE. The bank must contain theta*.
VerificationReport check_coupling(const FiniteMarkovEnv& env, const ParameterBank& bank, long horizon, int runs,
                                  std::uint64_t seed);

/// Per run, over oracle rounds: |contextual regret - surrogate regret|
/// <= c (sqrt(T tau log(tau T)) + tau).
VerificationReport check_regret_envelope(const FiniteMarkovEnv& env, const ParameterBank& bank, long horizon, int runs,
                                         std::uint64_t seed, double c = 3.0);

/// Random probability vector: flat Dirichlet, occasionally sparse.
Vector random_distribution(int n, Rng& rng);

/// Named suites run by `mbl verify`.
std::vector<std::string> verify_suite_names();
std::vector<VerificationReport> run_verify_suite(const std::string& name, int trials, std::uint64_t seed);

}  // namespace mbl

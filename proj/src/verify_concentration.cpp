#include "mbl/verify_concentration.hpp"

#include <array>
#include <chrono>
#include <limits>
#include <cmath>
#include <sstream>

#include "mbl/reduction_known.hpp"

namespace mbl {

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

VerificationReport finish(VerificationReport r, const Stopwatch& clock) {
  r.runtime_seconds = clock.seconds();
  return r;
}

}  // namespace

nlohmann::json VerificationReport::to_json() const {
  return {{"name", name},     {"trials", trials}, {"violations", violations},         {"bound", bound},
          {"statistic", statistic}, {"pass", pass}, {"runtime_seconds", runtime_seconds}, {"detail", detail}};
}

EnvParams small_env_params() {
  EnvParams p;
  p.n_states = 6;
  p.n_actions = 4;
  p.dim = 3;
  p.p_loop = 0.20;
  p.n_neighbors = 1;
  p.beta = 0.75;
  p.sigma = 0.5;
  return p;
}

EnvParams table3_env_params() { return EnvParams{}; }

double paulin_bound(long horizon, double beta, double c_mix, double delta) {
  return std::sqrt(18.0 * static_cast<double>(horizon) * std::log(4.0 * c_mix) / (1.0 - beta) * std::log(2.0 / delta));
}

Vector random_distribution(int n, Rng& rng) {
  Vector p(n);
  const double u = rng.uniform();
  if (u < 0.2) {
    // point mass
    p.setZero();
    p[static_cast<Eigen::Index>(rng.index(n))] = 1.0;
    return p;
  }
  for (int i = 0; i < n; ++i) p[i] = -std::log(1.0 - rng.uniform());
  if (u < 0.5) {
    // sparse support
    for (int i = 0; i < n; ++i) {
      if (rng.uniform() < 0.5) p[i] = 0.0;
    }
    if (p.sum() == 0.0) p[static_cast<Eigen::Index>(rng.index(n))] = 1.0;
  }
  return p / p.sum();
}

VerificationReport check_kernel(const FiniteMarkovEnv& env) {
  Stopwatch clock;
  VerificationReport r;
  r.name = "kernel";
  r.trials = env.n_states;
  double worst_row = 0.0;
  for (int s = 0; s < env.n_states; ++s) {
    const double err = std::abs(env.kernel.row(s).sum() - 1.0);
    worst_row = std::max(worst_row, err);
    if (err > 1e-12 || (env.kernel.row(s).array() < 0.0).any()) ++r.violations;
  }
  const double drift = ((env.stationary.transpose() * env.kernel).transpose() - env.stationary).cwiseAbs().maxCoeff();
  if (drift > 1e-10) ++r.violations;
  r.bound = 1e-12;
  r.statistic = std::max(worst_row, drift);
  r.pass = r.violations == 0;
  std::ostringstream d;
  d << "max |row sum - 1| = " << worst_row << ", max |pi P - pi| = " << drift;
  r.detail = d.str();
  return finish(r, clock);
}

VerificationReport check_doeblin(const FiniteMarkovEnv& env, int n_distributions, int t_max, std::uint64_t seed) {
  Stopwatch clock;
  Rng rng(seed, Stream::kVerify);
  VerificationReport r;
  r.name = "doeblin";
  double worst = -std::numeric_limits<double>::infinity();
  for (int n = 0; n < n_distributions; ++n) {
    Eigen::RowVectorXd mu = random_distribution(env.n_states, rng).transpose();
    for (int t = 0; t <= t_max; ++t) {
      const double tv = tv_distance(mu.transpose(), env.stationary);
      const double bound = env.c_mix * std::pow(env.doeblin_beta, t);
      worst = std::max(worst, tv - bound);
      ++r.trials;
      if (tv > bound + 1e-10) ++r.violations;
      mu = mu * env.kernel;
    }
  }
  r.bound = 1e-10;
  r.statistic = worst;
  r.pass = r.violations == 0;
  r.detail = "max TV(mu P^t, pi) - c_mix beta^t";
  return finish(r, clock);
}

VerificationReport check_lemma1(const FiniteMarkovEnv& env, int n_triples, std::uint64_t seed) {
  Stopwatch clock;
  Rng rng(seed, Stream::kVerify);
  VerificationReport r;
  r.name = "lemma1";
  double worst_ratio = 0.0;
  for (int n = 0; n < n_triples; ++n) {
    const Vector rho = random_distribution(env.n_states, rng);
    const Vector rho2 = n == 0 ? rho : random_distribution(env.n_states, rng);
    const Vector theta = rng.unit_vector(env.dim);
    const double lhs = (surrogate_under(env, rho, theta) - surrogate_under(env, rho2, theta)).norm();
    const double rhs = 2.0 * tv_distance(rho, rho2);
    ++r.trials;
    if (lhs > rhs + 1e-12) ++r.violations;
    if (rhs > 0.0) worst_ratio = std::max(worst_ratio, lhs / rhs);
  }
  r.bound = 1.0;
  r.statistic = worst_ratio;
  r.pass = r.violations == 0;
  r.detail = "max ||g_rho - g_rho'|| / (2 TV)";
  return finish(r, clock);
}

VerificationReport check_bias(const FiniteMarkovEnv& env, const ParameterBank& bank, int tau_max) {
  Stopwatch clock;
  VerificationReport r;
  r.name = "bias";
  const GreedyTable table(env, bank);
  const Vector stationary_values = surrogate_under(env, table, env.stationary) * env.theta_star;
  double worst_ratio = 0.0;
  for (int s0 = 0; s0 < env.n_states; ++s0) {
    Eigen::RowVectorXd rho = Eigen::RowVectorXd::Zero(env.n_states);
    rho[s0] = 1.0;
    for (int tau = 1; tau <= tau_max; ++tau) {
      rho = rho * env.kernel;
      const Vector delta = surrogate_under(env, table, rho.transpose()) * env.theta_star - stationary_values;
      const double bound = 2.0 * env.c_mix * std::pow(env.doeblin_beta, tau);
      for (int i = 0; i < bank.size(); ++i) {
        ++r.trials;
        const double a = std::abs(delta[i]);
        if (a > bound + 1e-12) ++r.violations;
        worst_ratio = std::max(worst_ratio, a / bound);
      }
    }
  }
  r.bound = 1.0;
  r.statistic = worst_ratio;
  r.pass = r.violations == 0;
  r.detail = "max |Delta| / (2 c_mix beta^tau)";
  return finish(r, clock);
}

VerificationReport check_argmax_property(const FiniteMarkovEnv& env, const ParameterBank& bank, int n_distributions,
                                         std::uint64_t seed) {
  Stopwatch clock;
  Rng rng(seed, Stream::kVerify);
  VerificationReport r;
  r.name = "argmax";
  const GreedyTable table(env, bank);
  double worst = -std::numeric_limits<double>::infinity();
  for (int n = 0; n < n_distributions; ++n) {
    const Vector rho = random_distribution(env.n_states, rng);
    const Matrix g = surrogate_under(env, table, rho);
    // scores(j, i) = <g_rho(theta_j), theta_i>
    const Matrix scores = g * bank.vectors.transpose();
    for (int i = 0; i < bank.size(); ++i) {
      for (int j = 0; j < bank.size(); ++j) {
        ++r.trials;
        const double excess = scores(j, i) - scores(i, i);
        worst = std::max(worst, excess);
        if (excess > 1e-12) ++r.violations;
      }
    }
  }
  r.bound = 0.0;
  r.statistic = worst;
  r.pass = r.violations == 0;
  r.detail = "max_j <g(theta_j), theta_i> - <g(theta_i), theta_i>";
  return finish(r, clock);
}

VerificationReport check_paulin(const FiniteMarkovEnv& env, const Vector& h, long horizon, double delta, int trials,
                                std::uint64_t seed, int initial_state) {
  Stopwatch clock;
  if (h.size() != env.n_states || h.cwiseAbs().maxCoeff() > 1.0) {
    throw std::invalid_argument("check_paulin: h must have one entry per state, each in [-1, 1]");
  }
  VerificationReport r;
  r.name = "paulin";
  r.bound = paulin_bound(horizon, env.doeblin_beta, env.c_mix, delta);
  // E h(A_t) from the exact marginals.
  std::vector<double> mean(horizon);
  Eigen::RowVectorXd law = Eigen::RowVectorXd::Zero(env.n_states);
  law[initial_state] = 1.0;
  for (long t = 0; t < horizon; ++t) {
    mean[t] = law.dot(h.transpose());
    law = law * env.kernel;
  }
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    ChainState chain(initial_state, splitmix64(seed) + static_cast<std::uint64_t>(k));
    double sum = 0.0;
    for (long t = 0; t < horizon; ++t) {
      sum += h[chain.current()] - mean[t];
      if (t + 1 < horizon) chain.step(env);
    }
    worst = std::max(worst, std::abs(sum));
    ++r.trials;
    if (std::abs(sum) > r.bound) ++r.violations;
  }
  r.statistic = static_cast<double>(r.violations) / std::max(1L, r.trials);
  r.pass = r.statistic <= delta;
  std::ostringstream d;
  d << "violation rate " << r.statistic << " (delta " << delta << "), max |S_T| = " << worst;
  r.detail = d.str();
  return finish(r, clock);
}

VerificationReport check_mgf_smoke(const FiniteMarkovEnv& env, const ParameterBank& bank, int tau, int samples,
                                   std::uint64_t seed) {
  Stopwatch clock;
  Rng rng(seed, Stream::kVerify);
  VerificationReport r;
  r.name = "mgf";
  const GreedyTable table(env, bank);
  const Vector stationary_values = surrogate_under(env, table, env.stationary) * env.theta_star;
  // Conditional law of A_t given A_{t - tau} = s.
  std::vector<Vector> rows(env.n_states);
  std::vector<Vector> conditional_values(env.n_states);
  for (int s = 0; s < env.n_states; ++s) {
    rows[s] = kernel_power_row(env, s, tau);
    conditional_values[s] = surrogate_under(env, table, rows[s]) * env.theta_star;
  }
  const std::array<double, 4> lambdas{-0.5, -0.25, 0.25, 0.5};
  std::array<double, 4> mgf{};
  for (int n = 0; n < samples; ++n) {
    const int s_past = sample_index(env.stationary, rng);
    const int i = static_cast<int>(rng.index(bank.size()));
    const int s_now = sample_index(rows[s_past], rng);
    const double played = env.actions[s_now].row(table.index(s_now, i)).dot(env.theta_star);
    const double b = played - stationary_values[i];
    const double bias = conditional_values[s_past][i] - stationary_values[i];
    // unit-variance reward noise, as in the proxy-17 derivation
    const double eta = rng.normal() + b - bias;
    for (std::size_t k = 0; k < lambdas.size(); ++k) mgf[k] += std::exp(lambdas[k] * eta);
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    const double empirical = mgf[k] / samples;
    const double bound = std::exp(17.0 * lambdas[k] * lambdas[k] / 2.0);
    ++r.trials;
    if (empirical > 1.1 * bound) ++r.violations;
    worst = std::max(worst, empirical / bound);
  }
  r.bound = 1.1;
  r.statistic = worst;
  r.pass = r.violations == 0;
  r.detail = "smoke check: max empirical MGF / exp(17 l^2 / 2)";
  return finish(r, clock);
}

}  // namespace mbl

#include <chrono>
#include <cmath>
#include <sstream>

#include "mbl/verify_concentration.hpp"

namespace mbl {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe out;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) out.mean += x;
  out.mean /= n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return out;
}

// Runs the known-distribution reduction `runs` times on fresh episodes.
template <typename Visit>
int for_each_known_run(const FiniteMarkovEnv& env, const ParameterBank& bank, long horizon, int runs,
                       std::uint64_t seed, Visit&& visit) {
  const GreedyTable table(env, bank);
  const SurrogateSet surrogates = exact_surrogate(env, table);
  const KnownConfig config = verify_known_config();
  int tau = 0;
  for (int k = 0; k < runs; ++k) {
    const std::uint64_t run_seed = seed + static_cast<std::uint64_t>(k);
    const Episode episode = simulate_episode(env, horizon, run_seed);
    const KnownRunResult result = run_known(env, bank, table, surrogates, episode, config, run_seed);
    tau = result.tau;
    visit(episode, result, table, surrogates);
  }
  return tau;
}

}  // namespace

KnownConfig verify_known_config() {
  KnownConfig c;
  c.ucb.lambda = 100.0;
  c.ucb.mode = RadiusMode::kFixed;
  c.ucb.alpha = 2.0;
  c.ucb.bonus_cap = 2.5;
  c.c_tau = 1.0;
  return c;
}

VerificationReport check_martingale_blocks(const FiniteMarkovEnv& env, const ParameterBank& bank, long horizon,
                                           int runs, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  VerificationReport r;
  r.name = "martingale";
  const int tau = compute_tau(horizon, env.doeblin_beta, verify_known_config().c_tau);
  const GreedyTable table(env, bank);
  // conditional[s](i) = <g_{P^tau(s, .)}(theta_i), theta*>
  std::vector<Vector> conditional(env.n_states);
  for (int s = 0; s < env.n_states; ++s) {
    conditional[s] = surrogate_under(env, table, kernel_power_row(env, s, tau)) * env.theta_star;
  }
  std::vector<double> totals;
  std::vector<std::vector<double>> block_sums(tau);
  for_each_known_run(env, bank, horizon, runs, seed,
                     [&](const Episode& ep, const KnownRunResult& res, const GreedyTable& tbl, const SurrogateSet&) {
                       std::vector<double> blocks(tau, 0.0);
                       for (long t = tau; t < ep.horizon(); ++t) {
                         const int i = res.chosen[t];
                         const int s = ep.states[t];
                         const double played = env.actions[s].row(tbl.index(s, i)).dot(env.theta_star);
                         blocks[t % tau] += conditional[ep.states[t - tau]][i] - played;
                       }
                       double total = 0.0;
                       for (int b = 0; b < tau; ++b) {
                         block_sums[b].push_back(blocks[b]);
                         total += blocks[b];
                       }
                       totals.push_back(total);
                     });
  const MeanSe m = mean_se(totals);
  r.trials = runs;
  r.violations = std::abs(m.mean) > 3.0 * m.se ? 1 : 0;
  r.bound = 3.0 * m.se;
  r.statistic = m.mean;
  double worst_z = 0.0;
  for (const auto& b : block_sums) {
    const MeanSe mb = mean_se(b);
    if (mb.se > 0.0) worst_z = std::max(worst_z, std::abs(mb.mean) / mb.se);
  }
  r.pass = r.violations == 0;
  std::ostringstream d;
  d << "mean block-sum total " << m.mean << " (SE " << m.se << "), tau " << tau << ", max per-residue |z| "
    << worst_z;
  r.detail = d.str();
  r.runtime_seconds = seconds_since(start);
  return r;
}

VerificationReport check_coupling(const FiniteMarkovEnv& env, const ParameterBank& bank, long horizon, int runs,
                                  std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  if (!bank.contains_theta_star) throw std::invalid_argument("check_coupling: bank must contain theta*");
  VerificationReport r;
  r.name = "coupling";
  std::vector<double> diffs;
  const int tau = for_each_known_run(env, bank, horizon, runs, seed,
                                     [&](const Episode&, const KnownRunResult& res, const GreedyTable&,
                                         const SurrogateSet&) {
                                       double surrogate = 0.0;
                                       for (double x : res.surrogate_regret) surrogate += x;
                                       diffs.push_back(res.trace.final_regret() - surrogate);
                                     });
  const MeanSe m = mean_se(diffs);
  const double envelope = 2.0 * tau + 4.0 * static_cast<double>(horizon) * env.c_mix * std::pow(env.doeblin_beta, tau);
  r.trials = runs;
  r.bound = envelope + 3.0 * m.se;
  r.statistic = std::abs(m.mean);
  r.violations = r.statistic > r.bound ? 1 : 0;
  r.pass = r.violations == 0;
  std::ostringstream d;
  d << "|mean regret difference| " << r.statistic << " vs 2 tau + 4 T C beta^tau = " << envelope << " + 3 SE ("
    << m.se << ")";
  r.detail = d.str();
  r.runtime_seconds = seconds_since(start);
  return r;
}

VerificationReport check_regret_envelope(const FiniteMarkovEnv& env, const ParameterBank& bank, long horizon, int runs,
                                         std::uint64_t seed, double c) {
  const auto start = std::chrono::steady_clock::now();
  VerificationReport r;
  r.name = "envelope";
  double worst_ratio = 0.0;
  double envelope = 0.0;
  for_each_known_run(env, bank, horizon, runs, seed,
                     [&](const Episode& ep, const KnownRunResult& res, const GreedyTable&, const SurrogateSet&) {
                       const double t = static_cast<double>(ep.horizon());
                       const double tau = res.tau;
                       envelope = c * (std::sqrt(t * tau * std::log(tau * t)) + tau);
                       double diff = 0.0;
                       for (long k = res.tau; k < ep.horizon(); ++k) diff += res.trace.inst_regret[k] - res.surrogate_regret[k];
                       ++r.trials;
                       if (std::abs(diff) > envelope) ++r.violations;
                       worst_ratio = std::max(worst_ratio, std::abs(diff) / envelope);
                     });
  r.bound = envelope;
  r.statistic = worst_ratio;
  r.pass = r.violations == 0;
  r.detail = "max |R_ctx - R_surrogate| / envelope over oracle rounds";
  r.runtime_seconds = seconds_since(start);
  return r;
}

std::vector<std::string> verify_suite_names() {
  return {"kernel", "doeblin", "lemma1", "bias", "argmax", "paulin", "mgf", "martingale", "coupling", "envelope"};
}

std::vector<VerificationReport> run_verify_suite(const std::string& name, int trials, std::uint64_t seed) {
  if (name == "all") {
    std::vector<VerificationReport> out;
    for (const auto& n : verify_suite_names()) {
      auto part = run_verify_suite(n, trials, seed);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  auto count = [trials](int fallback) { return trials > 0 ? trials : fallback; };
  auto small = [seed] { return make_env(small_env_params(), seed); };
  auto small_bank = [seed](const FiniteMarkovEnv& env, bool with_theta_star) {
    Rng rng(seed, Stream::kBank);
    return make_bank(kSmallBankSize, env.dim, with_theta_star, env.theta_star, rng);
  };
  auto table3 = [seed] { return make_env(table3_env_params(), seed); };

  if (name == "kernel") return {check_kernel(table3())};
  if (name == "doeblin") return {check_doeblin(table3(), 10, 100, seed)};
  if (name == "lemma1") return {check_lemma1(small(), count(1000), seed)};
  if (name == "bias") {
    const auto env = small();
    return {check_bias(env, small_bank(env, false), 30)};
  }
  if (name == "argmax") {
    const auto env = small();
    return {check_argmax_property(env, small_bank(env, false), 20, seed)};
  }
  if (name == "paulin") {
    const auto env = table3();
    Rng rng(seed, Stream::kVerify);
    Vector h(env.n_states);
    for (int s = 0; s < env.n_states; ++s) h[s] = rng.uniform() < 0.5 ? -1.0 : 1.0;
    return {check_paulin(env, h, 1000, 0.05, count(500), seed)};
  }
  if (name == "mgf") {
    const auto env = small();
    return {check_mgf_smoke(env, small_bank(env, false), compute_tau(1000, env.doeblin_beta, 1.0), 200000, seed)};
  }
  if (name == "martingale") {
    const auto env = small();
    return {check_martingale_blocks(env, small_bank(env, true), 2000, count(200), seed)};
  }
  if (name == "coupling") {
    const auto env = small();
    return {check_coupling(env, small_bank(env, true), 2000, count(200), seed)};
  }
  if (name == "envelope") {
    const auto env = small();
    return {check_regret_envelope(env, small_bank(env, true), 5000, count(200), seed)};
  }
  throw ConfigError("--suite", "unknown verification suite '" + name + "'");
}

}  // namespace mbl

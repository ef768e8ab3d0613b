#include "mbl/trace.hpp"

#include <numeric>

namespace mbl {

std::uint64_t trajectory_hash(const std::vector<int>& states) {
  Fnv1a h;
  for (int s : states) h.add(static_cast<std::int32_t>(s));
  return h.value();
}

Episode simulate_episode(const FiniteMarkovEnv& env, long horizon, std::uint64_t seed, int initial_state) {
  if (horizon < 1) throw std::invalid_argument("simulate_episode: horizon must be >= 1");
  Episode ep;
  ep.seed = seed;
  ep.states.resize(horizon);
  ep.noise.resize(horizon);
  Rng init(seed, Stream::kChain);
  const int first = initial_state >= 0 ? initial_state : sample_index(env.stationary, init);
  if (first >= env.n_states) throw std::invalid_argument("simulate_episode: initial state out of range");
  ChainState chain(first, splitmix64(seed));
  Rng noise(seed, Stream::kNoise);
  ep.states[0] = first;
  for (long t = 1; t < horizon; ++t) ep.states[t] = chain.step(env);
  for (long t = 0; t < horizon; ++t) ep.noise[t] = noise.normal();
  ep.traj_hash = trajectory_hash(ep.states);
  return ep;
}

std::vector<double> RegretTrace::cumulative() const {
  std::vector<double> out(inst_regret.size());
  std::partial_sum(inst_regret.begin(), inst_regret.end(), out.begin());
  return out;
}

double RegretTrace::final_regret() const { return std::accumulate(inst_regret.begin(), inst_regret.end(), 0.0); }

}  // namespace mbl

#include "mbl/baselines.hpp"

namespace mbl {

UcbOracle make_baseline_state(int dim, const BaselineParams& params) {
  UcbParams p;
  p.lambda = params.lambda;
  p.mode = RadiusMode::kFixed;
  p.alpha = params.alpha;
  return UcbOracle(dim, p);
}

BaselineStep baseline_step(UcbOracle& state, const FiniteMarkovEnv& env, const Matrix& context, double z) {
  BaselineStep step;
  step.action = state.select(context);
  const Vector a = context.row(step.action).transpose();
  step.reward = env.mean_reward(a) + env.noise_sigma * z;
  state.update(a, step.reward);
  return step;
}

BaselineStep baseline_step(UcbOracle& state, const FiniteMarkovEnv& env, const Matrix& context, Rng& noise) {
  return baseline_step(state, env, context, noise.normal());
}

RegretTrace run_baseline(const FiniteMarkovEnv& env, const Episode& episode, const BaselineParams& params) {
  UcbOracle state = make_baseline_state(env.dim, params);
  Vector optimal(env.n_states);
  for (int s = 0; s < env.n_states; ++s) optimal[s] = env.optimal_value(s);

  RegretTrace trace;
  trace.algo = "baseline-linucb";
  trace.seed = episode.seed;
  trace.traj_hash = episode.traj_hash;
  trace.inst_regret.resize(episode.horizon());
  for (long t = 0; t < episode.horizon(); ++t) {
    const int s = episode.states[t];
    const BaselineStep step = baseline_step(state, env, env.actions[s], episode.noise[t]);
    trace.inst_regret[t] = optimal[s] - env.actions[s].row(step.action).dot(env.theta_star);
  }
  return trace;
}

}  // namespace mbl

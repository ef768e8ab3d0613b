#include "mbl/env_markov.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace mbl {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void FiniteMarkovEnv::validate() const {
  require(n_states > 0 && n_actions > 0 && dim > 0, "env: n_states, n_actions and dim must be positive");
  require(static_cast<int>(actions.size()) == n_states, "env: one action matrix per state required");
  for (int s = 0; s < n_states; ++s) {
    require(actions[s].rows() == n_actions && actions[s].cols() == dim, "env: action matrix shape mismatch");
    for (int k = 0; k < n_actions; ++k) {
      require(actions[s].row(k).norm() <= 1.0 + 1e-12, "env: action norm exceeds 1");
    }
  }
  require(kernel.rows() == n_states && kernel.cols() == n_states, "env: kernel shape mismatch");
  for (int s = 0; s < n_states; ++s) {
    require((kernel.row(s).array() >= 0.0).all(), "env: negative kernel entry");
    require(std::abs(kernel.row(s).sum() - 1.0) <= 1e-12, "env: kernel row does not sum to 1");
  }
  require(stationary.size() == n_states, "env: stationary length mismatch");
  require((stationary.array() >= 0.0).all() && std::abs(stationary.sum() - 1.0) <= 1e-10,
          "env: stationary is not a probability vector");
  const Vector drift = (stationary.transpose() * kernel).transpose() - stationary;
  require(drift.cwiseAbs().maxCoeff() <= 1e-10, "env: stationary distribution is not invariant");
  require(doeblin_beta >= 0.0 && doeblin_beta < 1.0, "env: doeblin_beta must lie in [0, 1)");
  require(c_mix >= 1.0, "env: c_mix must be >= 1");
  require(noise_sigma >= 0.0, "env: noise_sigma must be >= 0");
  require(theta_star.size() == dim && theta_star.norm() <= 1.0 + 1e-12, "env: theta_star must have norm <= 1");
}

double FiniteMarkovEnv::optimal_value(int state) const { return (actions[state] * theta_star).maxCoeff(); }

Matrix build_ring_kernel(int n_states, double p_loop, int n_neighbors) {
  if (!(p_loop > 0.0 && p_loop < 1.0)) throw std::invalid_argument("build_ring_kernel: p_loop must lie in (0, 1)");
  if (n_neighbors < 1) throw std::invalid_argument("build_ring_kernel: n_neighbors must be >= 1");
  if (2 * n_neighbors >= n_states) {
    throw std::invalid_argument("build_ring_kernel: neighborhood covers the whole ring (need 2*n_neighbors < n_states)");
  }
  const double share = (1.0 - p_loop) / (2.0 * n_neighbors);
  Matrix q = Matrix::Zero(n_states, n_states);
  for (int s = 0; s < n_states; ++s) {
    q(s, s) = p_loop;
    for (int k = 1; k <= n_neighbors; ++k) {
      q(s, (s + k) % n_states) += share;
      q(s, (s - k + n_states) % n_states) += share;
    }
  }
  return q;
}

Matrix build_doeblin_kernel(const Matrix& q, double beta, const Vector& pi) {
  if (q.rows() != q.cols() || q.rows() != pi.size()) {
    throw std::invalid_argument("build_doeblin_kernel: shape mismatch");
  }
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("build_doeblin_kernel: beta must lie in [0, 1)");
  Matrix p = beta * q;
  p.rowwise() += ((1.0 - beta) * pi).transpose();
  return p;
}

Vector stationary_distribution(const Matrix& kernel) {
  const Eigen::Index n = kernel.rows();
  // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
  Matrix a = kernel.transpose() - Matrix::Identity(n, n);
  a.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs[n - 1] = 1.0;
  Vector pi = a.fullPivLu().solve(rhs);
  pi = pi.cwiseMax(0.0);
  return pi / pi.sum();
}

FiniteMarkovEnv make_env(const EnvParams& params, std::uint64_t seed) {
  Rng rng(seed, Stream::kEnvironment);
  FiniteMarkovEnv env;
  env.n_states = params.n_states;
  env.n_actions = params.n_actions;
  env.dim = params.dim;
  env.doeblin_beta = params.beta;
  env.c_mix = params.c_mix;
  env.noise_sigma = params.sigma;

  Vector mixing;
  if (params.pi_mode == "uniform") {
    mixing = Vector::Constant(params.n_states, 1.0 / params.n_states);
  } else if (params.pi_mode == "random") {
    mixing.resize(params.n_states);
    for (int s = 0; s < params.n_states; ++s) mixing[s] = -std::log(1.0 - rng.uniform());
    mixing /= mixing.sum();
  } else {
    throw std::invalid_argument("make_env: unknown pi_mode '" + params.pi_mode + "'");
  }
  const Matrix q = build_ring_kernel(params.n_states, params.p_loop, params.n_neighbors);
  env.kernel = build_doeblin_kernel(q, params.beta, mixing);
  // The ring kernel is doubly stochastic, so a uniform mixing vector is
  // already stationary; otherwise solve for it.
  env.stationary = params.pi_mode == "uniform" ? mixing : stationary_distribution(env.kernel);

  env.actions.reserve(params.n_states);
  for (int s = 0; s < params.n_states; ++s) {
    Matrix a(params.n_actions, params.dim);
    for (int k = 0; k < params.n_actions; ++k) a.row(k) = rng.unit_vector(params.dim).transpose();
    env.actions.push_back(std::move(a));
  }
  if (params.theta_star.empty()) {
    env.theta_star = rng.unit_vector(params.dim);
  } else {
    if (static_cast<int>(params.theta_star.size()) != params.dim) {
      throw std::invalid_argument("make_env: theta_star length must equal dim");
    }
    env.theta_star = Eigen::Map<const Vector>(params.theta_star.data(), params.dim);
  }
  env.validate();
  return env;
}

double tv_distance(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) throw std::invalid_argument("tv_distance: length mismatch");
  return 0.5 * (p - q).cwiseAbs().sum();
}

Vector push_forward(const FiniteMarkovEnv& env, const Vector& mu, int t) {
  if (t < 0) throw std::invalid_argument("push_forward: t must be >= 0");
  Eigen::RowVectorXd row = mu.transpose();
  for (int i = 0; i < t; ++i) row = row * env.kernel;
  return row.transpose();
}

Vector kernel_power_row(const FiniteMarkovEnv& env, int state, int t) {
  Vector e = Vector::Zero(env.n_states);
  e[state] = 1.0;
  return push_forward(env, e, t);
}

int sample_index(const Vector& probabilities, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  const int n = static_cast<int>(probabilities.size());
  for (int j = 0; j < n; ++j) {
    acc += probabilities[j];
    if (u < acc) return j;
  }
  // u landed in the rounding slack above the accumulated mass.
  for (int j = n - 1; j >= 0; --j) {
    if (probabilities[j] > 0.0) return j;
  }
  return n - 1;
}

int ChainState::step(const FiniteMarkovEnv& env) {
  current_ = sample_index(env.kernel.row(current_).transpose(), rng_);
  return current_;
}

double reward(const FiniteMarkovEnv& env, const Vector& action, Rng& noise) {
  return env.mean_reward(action) + env.noise_sigma * noise.normal();
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json r = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j.at(0).size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j.at(i).size()) != cols) throw std::invalid_argument("env json: ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
  }
  return m;
}

Vector vector_from_json(const nlohmann::json& j) {
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json env_to_json(const FiniteMarkovEnv& env) {
  nlohmann::json j;
  j["n_states"] = env.n_states;
  j["n_actions"] = env.n_actions;
  j["dim"] = env.dim;
  nlohmann::json actions = nlohmann::json::array();
  for (const auto& a : env.actions) actions.push_back(matrix_to_json(a));
  j["actions"] = std::move(actions);
  j["kernel"] = matrix_to_json(env.kernel);
  j["stationary"] = std::vector<double>(env.stationary.data(), env.stationary.data() + env.stationary.size());
  j["doeblin_beta"] = env.doeblin_beta;
  j["c_mix"] = env.c_mix;
  j["noise_sigma"] = env.noise_sigma;
  j["theta_star"] = std::vector<double>(env.theta_star.data(), env.theta_star.data() + env.theta_star.size());
  return j;
}

FiniteMarkovEnv env_from_json(const nlohmann::json& j) {
  FiniteMarkovEnv env;
  env.n_states = j.at("n_states").get<int>();
  env.n_actions = j.at("n_actions").get<int>();
  env.dim = j.at("dim").get<int>();
  for (const auto& a : j.at("actions")) env.actions.push_back(matrix_from_json(a));
  env.kernel = matrix_from_json(j.at("kernel"));
  env.stationary = vector_from_json(j.at("stationary"));
  env.doeblin_beta = j.at("doeblin_beta").get<double>();
  env.c_mix = j.at("c_mix").get<double>();
  env.noise_sigma = j.at("noise_sigma").get<double>();
  env.theta_star = vector_from_json(j.at("theta_star"));
  env.validate();
  return env;
}

}  // namespace mbl

#include "mbl/surrogate_map.hpp"

#include <stdexcept>

namespace mbl {

int greedy_index(const Matrix& actions, const Vector& theta) {
  if (actions.rows() == 0) throw std::invalid_argument("greedy_action: empty action matrix");
  int best = 0;
  double best_value = actions.row(0).dot(theta);
  for (Eigen::Index k = 1; k < actions.rows(); ++k) {
    const double v = actions.row(k).dot(theta);
    if (v > best_value) {
      best_value = v;
      best = static_cast<int>(k);
    }
  }
  return best;
}

GreedyChoice greedy_action(const Matrix& actions, const Vector& theta) {
  const int k = greedy_index(actions, theta);
  return {k, actions.row(k).transpose()};
}

ParameterBank make_bank(int m_bank, int dim, bool include_theta_star, const Vector& theta_star, Rng& rng) {
  if (m_bank < 2) throw std::invalid_argument("make_bank: M_bank must be >= 2");
  const int rows = m_bank + (include_theta_star ? 1 : 0);
  ParameterBank bank;
  bank.vectors.resize(rows, dim);
  for (int i = 0; i < m_bank; ++i) bank.vectors.row(i) = rng.unit_vector(dim).transpose();
  if (include_theta_star) {
    if (theta_star.size() != dim) throw std::invalid_argument("make_bank: theta_star dimension mismatch");
    bank.vectors.row(m_bank) = theta_star.transpose();
  }
  bank.contains_theta_star = include_theta_star;
  return bank;
}

GreedyTable::GreedyTable(const FiniteMarkovEnv& env, const ParameterBank& bank)
    : n_states_(env.n_states), n_bank_(bank.size()), table_(static_cast<std::size_t>(env.n_states) * bank.size()) {
  for (int i = 0; i < n_bank_; ++i) {
    const Vector theta = bank.at(i);
    for (int s = 0; s < n_states_; ++s) {
      table_[static_cast<std::size_t>(s) * n_bank_ + i] = greedy_index(env.actions[s], theta);
    }
  }
}

Matrix surrogate_under(const FiniteMarkovEnv& env, const GreedyTable& table, const Vector& distribution) {
  if (distribution.size() != env.n_states) throw std::invalid_argument("surrogate_under: distribution length mismatch");
  Matrix arms = Matrix::Zero(table.n_bank(), env.dim);
  for (int s = 0; s < env.n_states; ++s) {
    const double w = distribution[s];
    if (w == 0.0) continue;
    for (int i = 0; i < table.n_bank(); ++i) arms.row(i) += w * env.actions[s].row(table.index(s, i));
  }
  return arms;
}

Vector surrogate_under(const FiniteMarkovEnv& env, const Vector& distribution, const Vector& theta) {
  if (distribution.size() != env.n_states) throw std::invalid_argument("surrogate_under: distribution length mismatch");
  Vector g = Vector::Zero(env.dim);
  for (int s = 0; s < env.n_states; ++s) {
    if (distribution[s] == 0.0) continue;
    g += distribution[s] * env.actions[s].row(greedy_index(env.actions[s], theta)).transpose();
  }
  return g;
}

SurrogateSet exact_surrogate(const FiniteMarkovEnv& env, const GreedyTable& table) {
  SurrogateSet set;
  set.arms = surrogate_under(env, table, env.stationary);
  set.kind = SurrogateKind::kExactStationary;
  return set;
}

SurrogateSet exact_surrogate(const FiniteMarkovEnv& env, const ParameterBank& bank) {
  return exact_surrogate(env, GreedyTable(env, bank));
}

SurrogateSet empirical_surrogate(std::span<const int> history, const FiniteMarkovEnv& env, const ParameterBank& bank) {
  if (history.empty()) throw std::invalid_argument("empirical_surrogate: empty history");
  const GreedyTable table(env, bank);
  EmpiricalSurrogateAccumulator acc(env, table);
  for (int s : history) acc.add(s);
  return acc.snapshot(0);
}

EmpiricalSurrogateAccumulator::EmpiricalSurrogateAccumulator(const FiniteMarkovEnv& env, const GreedyTable& table)
    : env_(&env), table_(&table), visits_(static_cast<std::size_t>(env.n_states), 0) {}

void EmpiricalSurrogateAccumulator::add(int state) {
  ++visits_.at(static_cast<std::size_t>(state));
  ++count_;
}

SurrogateSet EmpiricalSurrogateAccumulator::snapshot(int epoch) const {
  if (count_ == 0) throw std::logic_error("empirical surrogate requested before any context was observed");
  SurrogateSet set;
  set.arms = Matrix::Zero(table_->n_bank(), env_->dim);
  for (int s = 0; s < env_->n_states; ++s) {
    const std::int64_t n = visits_[static_cast<std::size_t>(s)];
    if (n == 0) continue;
    const Matrix& a = env_->actions[s];
    for (int i = 0; i < table_->n_bank(); ++i) set.arms.row(i) += static_cast<double>(n) * a.row(table_->index(s, i));
  }
  set.arms /= static_cast<double>(count_);
  set.kind = SurrogateKind::kEmpiricalEpoch;
  set.epoch = epoch;
  set.sample_count = count_;
  return set;
}

nlohmann::json bank_to_json(const ParameterBank& bank) {
  nlohmann::json vectors = nlohmann::json::array();
  for (int i = 0; i < bank.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < bank.vectors.cols(); ++c) row.push_back(bank.vectors(i, c));
    vectors.push_back(std::move(row));
  }
  return {{"vectors", std::move(vectors)}, {"contains_theta_star", bank.contains_theta_star}};
}

ParameterBank bank_from_json(const nlohmann::json& j) {
  const auto& rows = j.at("vectors");
  ParameterBank bank;
  const auto m = static_cast<Eigen::Index>(rows.size());
  const auto d = m == 0 ? 0 : static_cast<Eigen::Index>(rows.at(0).size());
  bank.vectors.resize(m, d);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index c = 0; c < d; ++c) bank.vectors(i, c) = rows.at(i).at(c).get<double>();
  }
  bank.contains_theta_star = j.value("contains_theta_star", false);
  return bank;
}

}  // namespace mbl

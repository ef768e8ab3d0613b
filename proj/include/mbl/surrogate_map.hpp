#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbl/common.hpp"
#include "mbl/env_markov.hpp"

namespace mbl {

struct GreedyChoice {
  int index = 0;
  Vector action;
};

/// argmax_k <a_k, theta>, ties broken by the lowest index.
int greedy_index(const Matrix& actions, const Vector& theta);
GreedyChoice greedy_action(const Matrix& actions, const Vector& theta);

/// Finite stand-in for the parameter set: one candidate vector per row.
struct ParameterBank {
  Matrix vectors;  // M x d
  bool contains_theta_star = false;

  int size() const { return static_cast<int>(vectors.rows()); }
  Vector at(int i) const { return vectors.row(i).transpose(); }
};

/// `m_bank` uniform unit-sphere draws; theta* is appended when requested.
ParameterBank make_bank(int m_bank, int dim, bool include_theta_star, const Vector& theta_star, Rng& rng);

enum class SurrogateKind { kExactStationary, kEmpiricalEpoch };

/// Surrogate arm set {g(theta_i)}, indexed like the bank.
struct SurrogateSet {
  Matrix arms;  // M x d
  SurrogateKind kind = SurrogateKind::kExactStationary;
  int epoch = 0;
  std::int64_t sample_count = 0;
};

/// Greedy action index of every bank entry in every state. Built once per
/// (env, bank) pair; all surrogate computations go through it so that the
/// tie rule is applied identically everywhere.
class GreedyTable {
 public:
  GreedyTable() = default;
  GreedyTable(const FiniteMarkovEnv& env, const ParameterBank& bank);

  int index(int state, int bank_index) const { return table_[static_cast<std::size_t>(state) * n_bank_ + bank_index]; }
  int n_states() const { return n_states_; }
  int n_bank() const { return n_bank_; }

 private:
  int n_states_ = 0;
  int n_bank_ = 0;
  std::vector<int> table_;
};

/// g_pi(theta_i) = sum_s pi(s) greedy(s, theta_i).
SurrogateSet exact_surrogate(const FiniteMarkovEnv& env, const ParameterBank& bank);
SurrogateSet exact_surrogate(const FiniteMarkovEnv& env, const GreedyTable& table);

/// g_rho(theta) for an arbitrary context distribution rho.
Vector surrogate_under(const FiniteMarkovEnv& env, const Vector& distribution, const Vector& theta);
/// g_rho(theta_i) for every bank entry, one row each.
Matrix surrogate_under(const FiniteMarkovEnv& env, const GreedyTable& table, const Vector& distribution);

/// Average greedy action over the visited states of `history`.
SurrogateSet empirical_surrogate(std::span<const int> history, const FiniteMarkovEnv& env, const ParameterBank& bank);

/// Running per-bank-entry sums of greedy actions; `snapshot` equals
/// `empirical_surrogate` over the same history without re-scanning it.
class EmpiricalSurrogateAccumulator {
 public:
  EmpiricalSurrogateAccumulator(const FiniteMarkovEnv& env, const GreedyTable& table);

  void add(int state);
  std::int64_t count() const { return count_; }
  SurrogateSet snapshot(int epoch) const;

 private:
  const FiniteMarkovEnv* env_;
  const GreedyTable* table_;
  std::vector<std::int64_t> visits_;
  std::int64_t count_ = 0;
};

nlohmann::json bank_to_json(const ParameterBank& bank);
ParameterBank bank_from_json(const nlohmann::json& j);

}  // namespace mbl

#pragma once

#include <limits>
#include <span>
#include <vector>

#include "mbl/common.hpp"

namespace mbl {

/// eps_T = 2 c_mix T^{-c_tau}: the per-round bias bound of the delayed reduction.
double bias_level(long horizon, double c_tau, double c_mix);

enum class RadiusMode {
  kSelfNormalized,  // sqrt(lambda) + proxy * sqrt(2 log(1/delta) + log det(V / lambda I))
  kFixed,           // a fixed multiplier alpha
};

struct UcbParams {
  double lambda = 1.0;
  RadiusMode mode = RadiusMode::kSelfNormalized;
  double alpha = 2.0;
  // Sub-Gaussian proxy of the observation noise; sqrt(17) when fed by the reduction.
  double noise_proxy = 1.0;
  double delta = 0.05;
  double bias_level = 0.0;
  double bonus_cap = std::numeric_limits<double>::infinity();
  long horizon = 1;  // only enters the bias inflation sqrt(2 d log(1 + T))
};

/// OFUL-style ridge-regression UCB. The bias level inflates the confidence
/// radius additively; the exploration bonus is capped at `bonus_cap`.
///
/// V^{-1} is maintained by Sherman-Morrison and refactored from the Gram
/// matrix every `kRefreshEvery` updates.
class UcbOracle {
 public:
  UcbOracle(int dim, const UcbParams& params);

  /// argmax_i <x_i, theta_hat> + min(cap, radius * ||x_i||_{V^-1}), lowest index on ties.
  int select(const Matrix& arms) const;
  void update(const Vector& arm, double reward);

  /// Fixed arm sets: caches ||x_i||_{V^-1}^2 and updates it per observation in O(M d).
  void bind_arms(const Matrix& arms);
  int select_bound() const;

  double radius() const;
  double confidence_width() const;  // beta_t(delta) without the bias term
  double bias_inflation() const;
  const Vector& theta_hat() const { return theta_hat_; }
  const Matrix& gram() const { return gram_; }
  const Vector& moment() const { return moment_; }
  double log_det_ratio() const { return log_det_ratio_; }
  long t_obs() const { return t_obs_; }
  const UcbParams& params() const { return params_; }

  static constexpr long kRefreshEvery = 2048;

 private:
  void refresh();
  int argmax_scores(const Vector& means, const Vector& sq_norms) const;

  int dim_;
  UcbParams params_;
  Matrix gram_;
  Matrix gram_inv_;
  Vector moment_;
  Vector theta_hat_;
  double log_det_ratio_ = 0.0;
  long t_obs_ = 0;

  Matrix bound_arms_;
  Vector bound_sq_norms_;
  Vector bound_means_;
};

/// Result of an approximate G-optimal design over the active arms.
struct DesignResult {
  Vector weights;  // indexed like the full arm set, zero off the active set
  double max_leverage = 0.0;
  int iterations = 0;
};

/// Leverages x_i^T V(w)^+ x_i for the listed arms (pseudo-inverse when V(w) is singular).
Vector design_leverages(const Matrix& arms, std::span<const int> indices, const Vector& weights);

/// Frank-Wolfe (Fedorov-Wynn) from the uniform design; stops once the maximum
/// leverage is at most `tolerance * d` or after `max_iterations`.
DesignResult g_optimal_design(const Matrix& arms, std::span<const int> active, double tolerance = 1.1,
                              int max_iterations = 500);

struct PeParams {
  double epsilon = 0.0;  // misspecification level
  double delta = 0.05;
  long horizon = 0;      // total observations this instance will receive
};

/// Phased elimination over a finite arm set, robust to misspecification
/// `epsilon`: arm i is dropped at the end of phase l when
///   max_j <x_j - x_i, theta_hat> > 2 * 2^{-l} + 2 * epsilon * sqrt(d).
///
/// Feedback may arrive late; a phase ends once it has received its budget
/// of observations, whichever arms they came from.
class PeOracle {
 public:
  PeOracle(const Matrix& arms, const PeParams& params);

  int next();
  void observe(int arm, double reward);

  /// Closes the current phase; returns the arms eliminated by it.
  std::vector<int> end_phase();

  const std::vector<int>& active() const { return active_; }
  int phase() const { return phase_; }
  const Vector& design_weights() const { return design_.weights; }
  double design_max_leverage() const { return design_.max_leverage; }
  long phase_budget() const { return phase_budget_; }
  long phase_observed() const { return phase_observed_; }
  long total_observed() const { return total_observed_; }
  double elimination_threshold() const;
  const Vector& last_estimates() const { return estimates_; }

  /// n_l = ceil(2 d 4^l log(2 M l (l + 1) / delta)).
  static long phase_length(int dim, int n_arms, int phase, double delta);

 private:
  void start_phase();

  Matrix arms_;
  PeParams params_;
  std::vector<int> active_;
  int phase_ = 1;
  DesignResult design_;
  std::vector<long> allocation_;
  std::vector<long> issued_;
  long phase_budget_ = 0;
  long phase_observed_ = 0;
  long total_observed_ = 0;
  Matrix phase_gram_;
  Vector phase_moment_;
  Vector estimates_;
};

}  // namespace mbl

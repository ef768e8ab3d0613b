#include "mbl/linbandit_oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mbl {

double bias_level(long horizon, double c_tau, double c_mix) {
  if (horizon < 2) throw std::invalid_argument("bias_level: horizon must be >= 2");
  return 2.0 * c_mix * std::pow(static_cast<double>(horizon), -c_tau);
}

// ---------------------------------------------------------------------------
// UCB

UcbOracle::UcbOracle(int dim, const UcbParams& params)
    : dim_(dim),
      params_(params),
      gram_(params.lambda * Matrix::Identity(dim, dim)),
      gram_inv_(Matrix::Identity(dim, dim) / params.lambda),
      moment_(Vector::Zero(dim)),
      theta_hat_(Vector::Zero(dim)) {
  if (!(params.lambda > 0.0)) throw std::invalid_argument("UcbOracle: lambda must be > 0");
  if (!(params.bonus_cap > 0.0)) throw std::invalid_argument("UcbOracle: bonus_cap must be > 0");
}

double UcbOracle::confidence_width() const {
  if (params_.mode == RadiusMode::kFixed) return params_.alpha;
  return std::sqrt(params_.lambda) +
         params_.noise_proxy * std::sqrt(2.0 * std::log(1.0 / params_.delta) + log_det_ratio_);
}

double UcbOracle::bias_inflation() const {
  return params_.bias_level * std::sqrt(2.0 * dim_ * std::log(1.0 + static_cast<double>(params_.horizon)));
}

double UcbOracle::radius() const { return confidence_width() + bias_inflation(); }

int UcbOracle::argmax_scores(const Vector& means, const Vector& sq_norms) const {
  const double r = radius();
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < means.size(); ++i) {
    const double bonus = std::min(params_.bonus_cap, r * std::sqrt(std::max(sq_norms[i], 0.0)));
    const double score = means[i] + bonus;
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(i);
    }
  }
  return best;
}

int UcbOracle::select(const Matrix& arms) const {
  if (arms.rows() == 0) throw std::invalid_argument("UcbOracle::select: no arms");
  const Vector means = arms * theta_hat_;
  const Vector sq_norms = (arms * gram_inv_).cwiseProduct(arms).rowwise().sum();
  return argmax_scores(means, sq_norms);
}

void UcbOracle::bind_arms(const Matrix& arms) {
  bound_arms_ = arms;
  bound_sq_norms_ = (arms * gram_inv_).cwiseProduct(arms).rowwise().sum();
  bound_means_ = arms * theta_hat_;
}

int UcbOracle::select_bound() const {
  if (bound_arms_.rows() == 0) throw std::logic_error("UcbOracle::select_bound: no arms bound");
  return argmax_scores(bound_means_, bound_sq_norms_);
}

void UcbOracle::update(const Vector& arm, double reward) {
  const Vector u = gram_inv_ * arm;
  const double s = 1.0 + arm.dot(u);
  gram_.noalias() += arm * arm.transpose();
  gram_inv_.noalias() -= (u * u.transpose()) / s;
  moment_ += reward * arm;
  log_det_ratio_ += std::log(s);
  ++t_obs_;
  if (t_obs_ % kRefreshEvery == 0) {
    refresh();
    return;
  }
  theta_hat_.noalias() = gram_inv_ * moment_;
  if (bound_arms_.rows() > 0) {
    const Vector proj = bound_arms_ * u;
    bound_sq_norms_ -= proj.cwiseAbs2() / s;
    bound_means_.noalias() = bound_arms_ * theta_hat_;
  }
}

void UcbOracle::refresh() {
  const Eigen::LLT<Matrix> llt(gram_);
  if (llt.info() != Eigen::Success) throw std::runtime_error("UcbOracle: Gram matrix is not positive definite");
  gram_inv_ = llt.solve(Matrix::Identity(dim_, dim_));
  gram_inv_ = 0.5 * (gram_inv_ + gram_inv_.transpose()).eval();
  const auto& l = llt.matrixL();
  double log_det = 0.0;
  for (int i = 0; i < dim_; ++i) log_det += 2.0 * std::log(l(i, i));
  log_det_ratio_ = log_det - dim_ * std::log(params_.lambda);
  theta_hat_ = gram_inv_ * moment_;
  if (bound_arms_.rows() > 0) bind_arms(bound_arms_);
}

// ---------------------------------------------------------------------------
// G-optimal design

namespace {

// Pseudo-inverse of a symmetric PSD matrix and its numerical rank.
std::pair<Matrix, int> psd_pinv(const Matrix& v) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(v);
  const Vector& ev = eig.eigenvalues();
  const double cutoff = std::max(ev.maxCoeff(), 0.0) * 1e-10;
  Vector inv = Vector::Zero(ev.size());
  int rank = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > cutoff && ev[i] > 0.0) {
      inv[i] = 1.0 / ev[i];
      ++rank;
    }
  }
  return {eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose(), rank};
}

Matrix weighted_gram(const Matrix& arms, std::span<const int> indices, const Vector& weights) {
  Matrix v = Matrix::Zero(arms.cols(), arms.cols());
  for (int i : indices) {
    if (weights[i] > 0.0) v.noalias() += weights[i] * arms.row(i).transpose() * arms.row(i);
  }
  return v;
}

Vector leverages_with(const Matrix& arms, std::span<const int> indices, const Matrix& pinv) {
  Vector g(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const auto x = arms.row(indices[j]);
    g[static_cast<Eigen::Index>(j)] = x * pinv * x.transpose();
  }
  return g;
}

}  // namespace

Vector design_leverages(const Matrix& arms, std::span<const int> indices, const Vector& weights) {
  return leverages_with(arms, indices, psd_pinv(weighted_gram(arms, indices, weights)).first);
}

DesignResult g_optimal_design(const Matrix& arms, std::span<const int> active, double tolerance, int max_iterations) {
  if (active.empty()) throw std::invalid_argument("g_optimal_design: empty active set");
  DesignResult result;
  result.weights = Vector::Zero(arms.rows());
  for (int i : active) result.weights[i] = 1.0 / static_cast<double>(active.size());
  const double target = tolerance * static_cast<double>(arms.cols());

  for (int iter = 0;; ++iter) {
    const auto [pinv, rank] = psd_pinv(weighted_gram(arms, active, result.weights));
    const Vector g = leverages_with(arms, active, pinv);
    Eigen::Index k = 0;
    result.max_leverage = g.maxCoeff(&k);
    result.iterations = iter;
    if (result.max_leverage <= target || iter >= max_iterations || rank == 0) break;
    // Exact line search for log det along the vertex direction of the
    // most-leveraged arm, in the span of the active arms.
    const double gk = result.max_leverage;
    const double step = (gk / rank - 1.0) / (gk - 1.0);
    if (!(step > 0.0)) break;
    result.weights *= (1.0 - step);
    result.weights[active[k]] += step;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Phased elimination

long PeOracle::phase_length(int dim, int n_arms, int phase, double delta) {
  const double l = phase;
  const double n = 2.0 * dim * std::pow(4.0, l) * std::log(2.0 * n_arms * l * (l + 1.0) / delta);
  return static_cast<long>(std::ceil(n));
}

PeOracle::PeOracle(const Matrix& arms, const PeParams& params)
    : arms_(arms),
      params_(params),
      phase_gram_(Matrix::Zero(arms.cols(), arms.cols())),
      phase_moment_(Vector::Zero(arms.cols())),
      estimates_(Vector::Zero(arms.rows())) {
  if (arms.rows() == 0) throw std::invalid_argument("PeOracle: no arms");
  if (params.epsilon < 0.0) throw std::invalid_argument("PeOracle: epsilon must be >= 0");
  active_.resize(arms.rows());
  for (Eigen::Index i = 0; i < arms.rows(); ++i) active_[i] = static_cast<int>(i);
  start_phase();
}

double PeOracle::elimination_threshold() const {
  return 2.0 * std::pow(2.0, -phase_) + 2.0 * params_.epsilon * std::sqrt(static_cast<double>(arms_.cols()));
}

void PeOracle::start_phase() {
  design_ = g_optimal_design(arms_, active_);
  const long n = phase_length(static_cast<int>(arms_.cols()), static_cast<int>(arms_.rows()), phase_, params_.delta);
  allocation_.assign(arms_.rows(), 0);
  issued_.assign(arms_.rows(), 0);
  long total = 0;
  for (int i : active_) {
    const double w = design_.weights[i];
    if (w <= 0.0) continue;
    allocation_[i] = static_cast<long>(std::ceil(w * static_cast<double>(n)));
    total += allocation_[i];
  }
  phase_budget_ = std::min(total, std::max(params_.horizon - total_observed_, 0L));
  phase_observed_ = 0;
  phase_gram_.setZero();
  phase_moment_.setZero();
}

int PeOracle::next() {
  // Serve the arm furthest behind its allocation; this interleaves pulls
  // and keeps cycling through the design if feedback is still in flight.
  int best = -1;
  double best_ratio = std::numeric_limits<double>::infinity();
  for (int i : active_) {
    if (allocation_[i] == 0) continue;
    const double ratio = static_cast<double>(issued_[i]) / static_cast<double>(allocation_[i]);
    if (ratio < best_ratio) {
      best_ratio = ratio;
      best = i;
    }
  }
  if (best < 0) best = active_.front();
  ++issued_[best];
  return best;
}

void PeOracle::observe(int arm, double reward) {
  const auto x = arms_.row(arm);
  phase_gram_.noalias() += x.transpose() * x;
  phase_moment_ += reward * x.transpose();
  ++phase_observed_;
  ++total_observed_;
  if (phase_budget_ > 0 && phase_observed_ >= phase_budget_) end_phase();
}

std::vector<int> PeOracle::end_phase() {
  const Vector theta_hat = psd_pinv(phase_gram_).first * phase_moment_;
  estimates_ = arms_ * theta_hat;
  double best = -std::numeric_limits<double>::infinity();
  int best_arm = active_.front();
  for (int i : active_) {
    if (estimates_[i] > best) {
      best = estimates_[i];
      best_arm = i;
    }
  }
  const double threshold = elimination_threshold();
  std::vector<int> survivors;
  std::vector<int> eliminated;
  for (int i : active_) {
    if (best - estimates_[i] > threshold) {
      eliminated.push_back(i);
    } else {
      survivors.push_back(i);
    }
  }
  // The empirical best always survives (its gap is zero); guard anyway.
  if (survivors.empty()) survivors.push_back(best_arm);
  active_ = std::move(survivors);
  ++phase_;
  start_phase();
  return eliminated;
}

}  // namespace mbl

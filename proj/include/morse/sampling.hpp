#pragma once

#include <Eigen/Core>
#include <vector>

#include "morse/box.hpp"
#include "morse/net.hpp"

namespace morse {

/// Random-network-distillation novelty: a frozen random target net and a
/// trainable predictor, both mapping weight vectors to an 8-d embedding.
/// Novelty of w is the L2 prediction error; fitting the predictor onto the
/// visited-weight history drives that error to ~0 at visited points while
/// leaving unvisited regions high.
class NoveltyScorer {
 public:
  NoveltyScorer(int input_dim, std::uint64_t seed);

  double novelty(const Eigen::VectorXd& w) const;

  /// Full-batch gradient descent (lr 1e-2) on the mean squared prediction
  /// error over the history; stops early below overfit_tol^2 or at
  /// fit_iters_max. Empty history is a no-op.
  void fit();

  void add_history(const Eigen::VectorXd& w);

  int input_dim() const { return target_.input_dim(); }
  const std::vector<Eigen::VectorXd>& history() const { return history_; }
  const DenseNet& target() const { return target_; }
  DenseNet& predictor() { return predictor_; }

  /// Mean loss after each fit iteration of the most recent fit() call.
  const std::vector<double>& last_fit_trace() const { return fit_trace_; }

  static constexpr int fit_iters_min = 1;
  static constexpr int fit_iters_max = 1000;
  static constexpr double overfit_tol = 1e-3;
  static constexpr double fit_lr = 1e-2;

 private:
  DenseNet target_;
  DenseNet predictor_;
  std::vector<Eigen::VectorXd> history_;
  std::vector<double> fit_trace_;
};

/// Softmax probabilities over exp(score * tau), max-subtracted for stability.
Eigen::VectorXd softmax_probs(const Eigen::VectorXd& scores, double tau);

/// Index drawn with probability proportional to exp(score * tau).
int softmax_select(const Eigen::VectorXd& scores, double tau, Rng& rng);

/// Uniform sample inside the box.
Eigen::VectorXd propose_random(const Box& space, Rng& rng);

/// Cross-entropy method state with the fixed 5-candidate / 2-elite rule.
struct CemState {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
  static constexpr int batch = 5;
  static constexpr int elites = 2;
  static constexpr double std_floor = 1e-3;
};

using ScoredBatch = std::vector<std::pair<Eigen::VectorXd, double>>;

/// Elite average and elementwise (population) std, floored; ties between
/// equal values resolve to the lower candidate index.
CemState cem_step(const CemState& state, const ScoredBatch& scored);

/// Draw one candidate from N(mean, diag(std^2)), clipped to the box.
Eigen::VectorXd cem_propose(const CemState& state, const Box& space, Rng& rng);

/// (mu=2, lambda=5) CMA-ES state: mean, global step size, covariance, and
/// the two evolution paths.
struct CmaState {
  Eigen::VectorXd mean;
  double step_size = 0.5;
  Eigen::MatrixXd cov;
  Eigen::VectorXd path_sigma;
  Eigen::VectorXd path_cov;
  int generation = 0;

  static CmaState init(const Eigen::VectorXd& mean, double step_size);
};

/// Standard CMA-ES update (rank-one + rank-mu, cumulative step-size
/// adaptation) with default weights at mu=2, lambda=5; covariance
/// eigenvalues floored at 1e-8. A batch with all values tied carries no
/// ranking signal and leaves the state unchanged.
CmaState cma_step(const CmaState& state, const ScoredBatch& scored);

Eigen::VectorXd cma_propose(const CmaState& state, const Box& space, Rng& rng);

}  // namespace morse

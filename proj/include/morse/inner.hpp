#pragma once

#include <Eigen/Core>
#include <vector>

#include "morse/box.hpp"
#include "morse/cartpole.hpp"
#include "morse/net.hpp"

namespace morse {

/// Stochastic policy over {left, right}: a [4,32,2] logit net with softmax
/// on top, plus the scalar running-average return baseline that stands in
/// for a critic.
struct Policy {
  DenseNet net;
  double baseline = 0.0;

  Eigen::Vector2d action_probs(const Eigen::Vector4d& obs) const;
  double log_prob(const Eigen::Vector4d& obs, CartAction a) const;
};

Policy make_policy(std::uint64_t seed);

/// Sample an action and report its log probability under the policy.
CartAction sample_action(const Policy& policy, const Eigen::Vector4d& obs,
                         Rng& rng, double* log_prob);

/// Reward-weight function w_phi: either a box-constrained constant vector
/// or a state-conditioned net squashed into the box by an affine sigmoid.
class WeightFunction {
 public:
  enum class Mode { constant, state_conditioned };

  /// Weight function emitting one uniform draw from the box. The network
  /// variant starts with a zeroed output layer and a bias placing w(s) at
  /// the drawn point for every state; training grows the state dependence.
  static WeightFunction random(Mode mode, const Box& box, Rng& rng);

  Eigen::VectorXd weights(const Eigen::VectorXd& state) const;

  /// d(upstream . w(state)) / d(parameters).
  Eigen::VectorXd param_grad(const Eigen::VectorXd& state,
                             const Eigen::VectorXd& upstream) const;

  /// Column-batched param_grad, summed over columns.
  Eigen::VectorXd param_grad_batch(const Eigen::MatrixXd& states,
                                   const Eigen::MatrixXd& upstream) const;

  /// Re-target the function to emit `w` (clipped into the box) at every
  /// state, refreshing hidden layers from the rng. Used by exploration
  /// resets and blind reinitialization.
  void adopt_constant(const Eigen::VectorXd& w, Rng& rng);

  const Eigen::VectorXd& params() const { return params_; }
  void set_params(const Eigen::VectorXd& p);
  int param_dim() const { return static_cast<int>(params_.size()); }
  Mode mode() const { return mode_; }
  const Box& box() const { return box_; }

 private:
  WeightFunction() = default;

  Mode mode_ = Mode::constant;
  Box box_;
  Eigen::VectorXd params_;      // constant vector, or flat net parameters
  std::vector<int> net_sizes_;  // state_conditioned only
};

struct TrajStep {
  Eigen::Vector4d obs;  // pre-transition observation
  CartAction action = CartAction::left;
  RewardVector reward;
  double log_prob = 0.0;
};

struct Trajectory {
  std::vector<TrajStep> steps;
  bool success = false;
};

struct RolloutResult {
  std::vector<Trajectory> trajectories;
  double performance = 0.0;  // successes / episodes
};

constexpr int kRolloutBufferCap = 10000;

/// Sample n_episodes episodes under the stochastic policy. Steps beyond the
/// buffer cap are not stored; performance still counts every episode.
RolloutResult rollout(const Policy& policy, int n_episodes, Rng& rng);

/// Discounted composite return-to-go per stored step, using the current
/// weight function: G_t = sum_{k>=t} gamma^(k-t) w(s_k) . R_k.
std::vector<std::vector<double>> composite_returns(
    const std::vector<Trajectory>& trajs, const WeightFunction& weight_fn,
    double gamma);

/// Same, but over the task component only.
std::vector<std::vector<double>> task_returns(const std::vector<Trajectory>& trajs,
                                              double gamma);

/// REINFORCE estimator gradient at arbitrary policy parameters, on a frozen
/// batch with frozen per-step returns: (1/M) sum_t (G_t - baseline)
/// grad log pi(a_t | s_t). Shared by the inner update and the outer-loop
/// Hessian-vector products.
Eigen::VectorXd reinforce_estimator_grad(
    const std::vector<int>& net_sizes, const Eigen::VectorXd& params,
    const std::vector<Trajectory>& trajs,
    const std::vector<std::vector<double>>& returns, double baseline);

/// One ascent step on the REINFORCE estimator with L2 decay; the scalar
/// baseline is updated as a running average of observed returns. A
/// non-finite gradient skips the update and sets *skipped.
Policy reinforce_update(const Policy& policy,
                        const std::vector<Trajectory>& trajs,
                        const WeightFunction& weight_fn, double gamma = 0.99,
                        double lr = 0.001, double l2 = 0.25,
                        bool* skipped = nullptr);

/// Fresh actor from the rng, baseline cleared. The weight function is
/// never touched by a policy reset.
Policy reset_policy(const Policy& policy, Rng& rng);

}  // namespace morse

#pragma once

#include <Eigen/Core>

#include "morse/rng.hpp"

namespace morse {

enum class CartAction { left = 0, right = 1 };

struct CartState {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;
  int t = 0;

  Eigen::Vector4d observation() const { return {x, x_dot, theta, theta_dot}; }
};

/// Per-step reward components in fixed order (task, survival, position,
/// interference).
struct RewardVector {
  double task = 0.0;          // 100 on completing step 100 alive, else 0
  double survival = 0.0;      // 1 per alive step
  double position = 0.0;      // 1 when the post-transition cart position > 0.5
  double interference = 0.0;  // -1 when the action matches the PD controller

  Eigen::Vector4d as_vector() const { return {task, survival, position, interference}; }
};

struct StepResult {
  CartState state;
  RewardVector reward;
  bool done = false;
  bool success = false;
};

/// Multi-objective CartPole: classic dynamics, 100-step horizon, and the
/// four-component reward above. Alive while |theta| <= 12 deg, |x| <= 2.4,
/// t <= 100.
class CartPoleEnv {
 public:
  static constexpr int horizon = 100;

  static CartState reset(Rng& rng);

  /// Euler-integrated dynamics for one action. Stepping a finished episode
  /// throws std::logic_error.
  static StepResult step(const CartState& s, CartAction action);

  static bool alive(const CartState& s);
};

/// Stabilizing PD controller: push right iff Kp*theta + Kd*theta_dot > 0
/// (Kp = 10, Kd = 2); an exact zero resolves to left.
CartAction pd_action(const CartState& s);

/// Dot product of a weight 4-vector with the reward components, in
/// (task, survival, position, interference) order.
double composite_reward(const Eigen::Vector4d& w, const RewardVector& r);

}  // namespace morse

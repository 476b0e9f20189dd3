#pragma once

#include <string>

#include "morse/inner.hpp"
#include "morse/outer.hpp"
#include "morse/scheduler.hpp"

namespace morse {

/// Weight-update strategies for the multi-objective CartPole experiment.
enum class CartStrategy { constant, gradient, gradient_reset, morse };

CartStrategy cart_strategy_from_string(const std::string& name);
std::string cart_strategy_name(CartStrategy s);

struct CartTrainConfig {
  int budget_epochs = 240;
  int epochs_per_cycle = 15;   // inner epochs per outer gradient (t_grad)
  int cycles_per_explore = 5;  // gradient updates between resets / gate checks
  int episodes_per_epoch = 20;
  double gamma = 0.99;
  double lr = 0.001;
  double l2 = 0.25;
  double lr_net = 0.0005;
  double lr_coeff = 0.0025;
  NeumannConfig neumann;
  int gate_candidates = 20;
  double alpha = 0.01;
  double tau = 10.0;
  WeightFunction::Mode weight_mode = WeightFunction::Mode::state_conditioned;
  bool gate_always_closed = false;  // test hook: Morse degenerates to Gradient
};

struct CartTrainResult {
  EventLog log;
  double final_success = 0.0;
  double best_success = 0.0;
  Policy policy;              // final policy
  Eigen::VectorXd weight_params;
  Eigen::VectorXd weight_snapshot;  // w at the origin probe state
};

/// One full training run. Constant never touches the weight function;
/// Gradient adds implicit-function outer steps; GradientWithReset
/// reinitializes the weight function (uniform in the box) and the policy
/// after every fifth gradient update; Morse replaces the blind
/// reinitialization with the performance-gated novelty proposal.
CartTrainResult train_cartpole(CartStrategy strategy, const CartTrainConfig& cfg,
                               std::uint64_t seed);

/// The [0,1]^4 CartPole reward-weight box.
Box cartpole_weight_box();

}  // namespace morse

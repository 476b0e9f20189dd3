#include "morse/train.hpp"

#include <algorithm>
#include <deque>

#include "morse/errors.hpp"

namespace morse {

CartStrategy cart_strategy_from_string(const std::string& name) {
  if (name == "constant") return CartStrategy::constant;
  if (name == "gradient") return CartStrategy::gradient;
  if (name == "gradient_reset") return CartStrategy::gradient_reset;
  if (name == "morse") return CartStrategy::morse;
  throw config_error("unknown cartpole strategy '" + name + "'");
}

std::string cart_strategy_name(CartStrategy s) {
  switch (s) {
    case CartStrategy::constant: return "constant";
    case CartStrategy::gradient: return "gradient";
    case CartStrategy::gradient_reset: return "gradient_reset";
    case CartStrategy::morse: return "morse";
  }
  return "?";
}

Box cartpole_weight_box() { return Box::uniform(4, 0.0, 1.0); }

CartTrainResult train_cartpole(CartStrategy strategy, const CartTrainConfig& cfg,
                               std::uint64_t seed) {
  const Box box = cartpole_weight_box();
  Rng master(seed);
  Rng weight_rng = master.split(1);
  Rng policy_rng = master.split(2);
  Rng rollout_base = master.split(3);
  Rng gate_base = master.split(4);
  Rng reset_base = master.split(5);
  Rng adopt_base = master.split(6);

  Policy policy = make_policy(policy_rng.next_u64());
  WeightFunction weight_fn = WeightFunction::random(cfg.weight_mode, box, weight_rng);
  NoveltyScorer scorer(4, master.split(7).next_u64());

  // Frozen-batch buffer for the outer gradient, most-recent first out,
  // capped at the rollout buffer size; cleared whenever the policy resets.
  std::deque<Trajectory> buffer;
  int buffer_steps = 0;
  const auto push_buffer = [&](const std::vector<Trajectory>& trajs) {
    for (const Trajectory& t : trajs) {
      buffer.push_back(t);
      buffer_steps += static_cast<int>(t.steps.size());
    }
    while (buffer_steps > kRolloutBufferCap && !buffer.empty()) {
      buffer_steps -= static_cast<int>(buffer.front().steps.size());
      buffer.pop_front();
    }
  };

  const Eigen::VectorXd probe_state = Eigen::VectorXd::Zero(4);
  ExplorationConfig gate_cfg;
  gate_cfg.candidate_count = cfg.gate_candidates;
  gate_cfg.alpha = cfg.alpha;
  gate_cfg.tau = cfg.tau;
  gate_cfg.weight_box = box;

  int update_count = 0;

  MorseComponents parts;
  parts.rollout_and_update = [&](int epoch) {
    Rng r = rollout_base.split(static_cast<std::uint64_t>(epoch));
    RolloutResult rr = rollout(policy, cfg.episodes_per_epoch, r);
    push_buffer(rr.trajectories);
    policy = reinforce_update(policy, rr.trajectories, weight_fn, cfg.gamma,
                              cfg.lr, cfg.l2);
    return rr.performance;
  };
  parts.weight_snapshot = [&] { return weight_fn.weights(probe_state); };
  parts.reset = [&](int epoch) {
    Rng r = reset_base.split(static_cast<std::uint64_t>(epoch));
    policy = reset_policy(policy, r);
    buffer.clear();
    buffer_steps = 0;
  };

  if (strategy != CartStrategy::constant) {
    parts.outer_step = [&](int) {
      std::vector<Trajectory> batch(buffer.begin(), buffer.end());
      const OuterGrad og =
          bilevel_outer_grad(policy, weight_fn, batch, cfg.neumann, cfg.gamma, cfg.l2);
      if (!og.skipped) {
        outer_grad_step(weight_fn, og.phi_grad, cfg.lr_net, cfg.lr_coeff);
      }
      ++update_count;
    };
  }
  if (strategy == CartStrategy::gradient_reset) {
    parts.explore = [&](int epoch, double, double) {
      Rng r = adopt_base.split(static_cast<std::uint64_t>(epoch));
      weight_fn.adopt_constant(box.sample(r), r);
      return true;
    };
  } else if (strategy == CartStrategy::morse) {
    parts.explore = [&](int epoch, double p, double delta_r) {
      if (cfg.gate_always_closed) return false;
      Rng r = gate_base.split(static_cast<std::uint64_t>(epoch));
      scorer.add_history(weight_fn.weights(probe_state));
      const auto jump = explore_gate(gate_cfg, delta_r, p, scorer, r);
      if (!jump) return false;
      Rng adopt = adopt_base.split(static_cast<std::uint64_t>(epoch));
      weight_fn.adopt_constant(*jump, adopt);
      return true;
    };
  }

  Schedule schedule;
  schedule.n_epoch = cfg.budget_epochs;
  schedule.t_grad = cfg.epochs_per_cycle;
  schedule.t_explore = cfg.epochs_per_cycle * cfg.cycles_per_explore;
  schedule.rng_seed = seed;
  schedule.ordering = strategy == CartStrategy::gradient_reset
                          ? Schedule::Ordering::grad_before_gate
                          : Schedule::Ordering::gate_before_grad;

  CartTrainResult result;
  result.log = run_morse(schedule, parts);
  result.final_success = result.log.final_performance;
  for (const EventRow& row : result.log.rows) {
    result.best_success = std::max(result.best_success, row.performance);
  }
  result.policy = policy;
  result.weight_params = weight_fn.params();
  result.weight_snapshot = weight_fn.weights(probe_state);
  return result;
}

}  // namespace morse

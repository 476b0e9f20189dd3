#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

namespace morse {

/// Epoch timeline of one training run. The exploration interval nests
/// inside the gradient interval, so t_explore must be a positive multiple
/// of t_grad.
struct Schedule {
  int n_epoch = 0;
  int t_grad = 1;
  int t_explore = 1;
  std::uint64_t rng_seed = 0;

  /// Whether an exploration check precedes or follows the gradient step
  /// when both land on the same epoch. The gate goes first for Morse (a
  /// fired reset makes a stale-policy gradient moot); blind periodic resets
  /// follow their counted gradient update instead.
  enum class Ordering { gate_before_grad, grad_before_gate };
  Ordering ordering = Ordering::gate_before_grad;
};

enum class EventType { inner, outer_grad, explore, reset };

std::string event_name(EventType e);

struct EventRow {
  int epoch = 0;
  EventType event = EventType::inner;
  double performance = 0.0;
  Eigen::VectorXd weights;
};

struct EventLog {
  std::vector<EventRow> rows;
  double final_performance = 0.0;
};

/// Callbacks wiring one experiment into the epoch loop. `explore` returns
/// true when the gate fired and a new weight was adopted; the scheduler
/// then invokes `reset` and logs both events.
struct MorseComponents {
  std::function<double(int epoch)> rollout_and_update;
  std::function<void(int epoch)> outer_step;
  std::function<bool(int epoch, double performance, double delta_r)> explore;
  std::function<void(int epoch)> reset;
  std::function<Eigen::VectorXd()> weight_snapshot;
};

/// Runs the full loop: every epoch rolls out and updates the policy; every
/// t_grad epochs the outer gradient steps; every t_explore epochs the gate
/// is consulted and a fired gate adopts the proposed weight and resets the
/// policy. Emits one primary row per epoch plus a reset row after each
/// fired gate. Component errors are rethrown with the epoch attached.
EventLog run_morse(const Schedule& schedule, const MorseComponents& components);

}  // namespace morse

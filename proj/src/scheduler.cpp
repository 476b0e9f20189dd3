#include "morse/scheduler.hpp"

#include <stdexcept>

#include "morse/errors.hpp"

namespace morse {

std::string event_name(EventType e) {
  switch (e) {
    case EventType::inner: return "inner";
    case EventType::outer_grad: return "outer_grad";
    case EventType::explore: return "explore";
    case EventType::reset: return "reset";
  }
  return "?";
}

EventLog run_morse(const Schedule& schedule, const MorseComponents& components) {
  if (schedule.t_grad < 1 || schedule.t_explore < 1 ||
      schedule.t_explore % schedule.t_grad != 0) {
    throw config_error("schedule: t_explore must be a positive multiple of t_grad");
  }
  EventLog log;
  double last_check_p = 0.0;
  for (int epoch = 1; epoch <= schedule.n_epoch; ++epoch) {
    try {
      const double p = components.rollout_and_update(epoch);
      EventRow row;
      row.epoch = epoch;
      row.performance = p;
      row.event = EventType::inner;

      const bool grad_epoch = epoch % schedule.t_grad == 0;
      const bool explore_epoch = grad_epoch && epoch % schedule.t_explore == 0;
      bool fired = false;

      const auto consult_gate = [&] {
        fired = components.explore && components.explore(epoch, p, p - last_check_p);
        last_check_p = p;
      };
      const auto grad_step = [&] {
        if (components.outer_step) {
          components.outer_step(epoch);
          row.event = EventType::outer_grad;
        }
      };

      if (explore_epoch && schedule.ordering == Schedule::Ordering::gate_before_grad) {
        consult_gate();
        if (!fired) grad_step();
      } else if (grad_epoch) {
        grad_step();
        if (explore_epoch) consult_gate();
      }

      if (fired) row.event = EventType::explore;
      row.weights = components.weight_snapshot ? components.weight_snapshot()
                                               : Eigen::VectorXd();
      log.rows.push_back(row);
      if (fired) {
        if (components.reset) components.reset(epoch);
        EventRow reset_row = row;
        reset_row.event = EventType::reset;
        if (components.weight_snapshot) reset_row.weights = components.weight_snapshot();
        log.rows.push_back(reset_row);
      }
      log.final_performance = p;
    } catch (const std::exception& e) {
      throw std::runtime_error("epoch " + std::to_string(epoch) + ": " + e.what());
    }
  }
  return log;
}

}  // namespace morse

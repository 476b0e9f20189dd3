#include "morse/cartpole.hpp"

#include <cmath>
#include <stdexcept>

namespace morse {

namespace {
constexpr double kGravity = 9.8;
constexpr double kMassCart = 1.0;
constexpr double kMassPole = 0.1;
constexpr double kTotalMass = kMassCart + kMassPole;
constexpr double kHalfLength = 0.5;
constexpr double kPoleMassLength = kMassPole * kHalfLength;
constexpr double kForce = 10.0;
constexpr double kDt = 0.02;
constexpr double kThetaLimit = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
constexpr double kXLimit = 2.4;
}  // namespace

CartState CartPoleEnv::reset(Rng& rng) {
  CartState s;
  s.x = rng.uniform(-0.05, 0.05);
  s.x_dot = rng.uniform(-0.05, 0.05);
  s.theta = rng.uniform(-0.05, 0.05);
  s.theta_dot = rng.uniform(-0.05, 0.05);
  s.t = 0;
  return s;
}

bool CartPoleEnv::alive(const CartState& s) {
  return std::abs(s.theta) <= kThetaLimit && std::abs(s.x) <= kXLimit &&
         s.t <= horizon;
}

StepResult CartPoleEnv::step(const CartState& s, CartAction action) {
  if (!alive(s) || s.t >= horizon) {
    throw std::logic_error("step on a finished cartpole episode");
  }
  const double force = action == CartAction::right ? kForce : -kForce;
  const double cos_t = std::cos(s.theta);
  const double sin_t = std::sin(s.theta);
  const double temp =
      (force + kPoleMassLength * s.theta_dot * s.theta_dot * sin_t) / kTotalMass;
  const double theta_acc =
      (kGravity * sin_t - cos_t * temp) /
      (kHalfLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / kTotalMass));
  const double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;

  StepResult out;
  out.state.x = s.x + kDt * s.x_dot;
  out.state.x_dot = s.x_dot + kDt * x_acc;
  out.state.theta = s.theta + kDt * s.theta_dot;
  out.state.theta_dot = s.theta_dot + kDt * theta_acc;
  out.state.t = s.t + 1;

  const bool fell = std::abs(out.state.theta) > kThetaLimit ||
                    std::abs(out.state.x) > kXLimit;
  out.success = !fell && out.state.t == horizon;
  out.done = fell || out.state.t >= horizon;

  out.reward.survival = 1.0;
  out.reward.position = out.state.x > 0.5 ? 1.0 : 0.0;
  out.reward.interference = action == pd_action(s) ? -1.0 : 0.0;
  out.reward.task = out.success ? 100.0 : 0.0;
  return out;
}

CartAction pd_action(const CartState& s) {
  const double signal = 10.0 * s.theta + 2.0 * s.theta_dot;
  return signal > 0.0 ? CartAction::right : CartAction::left;
}

double composite_reward(const Eigen::Vector4d& w, const RewardVector& r) {
  return w.dot(r.as_vector());
}

}  // namespace morse

#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "morse/cartpole.hpp"

using namespace morse;

TEST_CASE("reset is deterministic, bounded, and alive") {
  Rng a(5), b(5);
  const CartState s1 = CartPoleEnv::reset(a);
  const CartState s2 = CartPoleEnv::reset(b);
  CHECK(s1.x == s2.x);
  CHECK(s1.theta_dot == s2.theta_dot);

  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const CartState s = CartPoleEnv::reset(rng);
    for (double v : {s.x, s.x_dot, s.theta, s.theta_dot}) {
      CHECK(v >= -0.05);
      CHECK(v <= 0.05);
    }
    CHECK(CartPoleEnv::alive(s));
    CHECK(s.t == 0);
  }
}

TEST_CASE("reward components on a plain alive step") {
  CartState s;
  s.theta = 0.01;  // pd says right
  const StepResult r = CartPoleEnv::step(s, CartAction::left);
  CHECK(r.reward.task == 0.0);
  CHECK(r.reward.survival == 1.0);
  CHECK(r.reward.position == 0.0);
  CHECK(r.reward.interference == 0.0);
  CHECK_FALSE(r.done);
}

TEST_CASE("interference charges exactly on pd agreement") {
  CartState s;
  s.theta = 0.01;
  const StepResult agree = CartPoleEnv::step(s, CartAction::right);
  CHECK(agree.reward.interference == -1.0);
  const StepResult disagree = CartPoleEnv::step(s, CartAction::left);
  CHECK(disagree.reward.interference == 0.0);
}

TEST_CASE("position heuristic uses the post-transition position") {
  CartState s;
  s.x = 0.49;
  s.x_dot = 1.0;  // crosses 0.5 this step
  const StepResult r = CartPoleEnv::step(s, CartAction::left);
  CHECK(r.state.x > 0.5);
  CHECK(r.reward.position == 1.0);
}

TEST_CASE("surviving the full horizon pays the task reward once") {
  Rng rng(3);
  CartState s = CartPoleEnv::reset(rng);
  bool done = false;
  int steps = 0;
  double task_total = 0.0, survival_total = 0.0;
  bool success = false;
  while (!done) {
    const StepResult r = CartPoleEnv::step(s, pd_action(s));
    task_total += r.reward.task;
    survival_total += r.reward.survival;
    s = r.state;
    done = r.done;
    success = r.success;
    ++steps;
  }
  CHECK(steps == 100);
  CHECK(success);
  CHECK(task_total == 100.0);
  CHECK(survival_total == steps);
}

TEST_CASE("toppling ends the episode without success") {
  CartState s;
  s.theta = 0.2;  // just under the 12 degree limit
  s.theta_dot = 2.0;
  const StepResult r = CartPoleEnv::step(s, CartAction::left);
  CHECK(r.done);
  CHECK_FALSE(r.success);
  CHECK(r.reward.task == 0.0);
  CHECK_THROWS_AS(CartPoleEnv::step(r.state, CartAction::left), std::logic_error);
}

TEST_CASE("pd controller sign conventions") {
  CartState s;
  s.theta = 0.05;
  s.theta_dot = 0.0;
  CHECK(pd_action(s) == CartAction::right);
  s.theta = 0.0;
  s.theta_dot = -0.1;
  CHECK(pd_action(s) == CartAction::left);
  s.theta_dot = 0.0;
  CHECK(pd_action(s) == CartAction::left);  // exact zero resolves left
}

TEST_CASE("pd controller stabilizes from reset") {
  int survived = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    CartState s = CartPoleEnv::reset(rng);
    bool done = false, success = false;
    while (!done) {
      const StepResult r = CartPoleEnv::step(s, pd_action(s));
      s = r.state;
      done = r.done;
      success = r.success;
    }
    if (success) ++survived;
  }
  CHECK(survived >= 9);
}

TEST_CASE("dynamics are a pure function of state and action") {
  CartState s;
  s.x = 0.1;
  s.x_dot = -0.2;
  s.theta = 0.05;
  s.theta_dot = 0.3;
  const StepResult a = CartPoleEnv::step(s, CartAction::right);
  const StepResult b = CartPoleEnv::step(s, CartAction::right);
  CHECK(a.state.x == b.state.x);
  CHECK(a.state.theta_dot == b.state.theta_dot);
}

TEST_CASE("interference audit by replay") {
  Rng rng(11);
  CartState s = CartPoleEnv::reset(rng);
  Rng action_rng(12);
  bool done = false;
  while (!done) {
    const CartAction a =
        action_rng.uniform() < 0.5 ? CartAction::left : CartAction::right;
    const CartAction pd = pd_action(s);
    const StepResult r = CartPoleEnv::step(s, a);
    CHECK(r.reward.interference == (a == pd ? -1.0 : 0.0));
    s = r.state;
    done = r.done;
  }
}

TEST_CASE("composite reward is the component dot product") {
  RewardVector r;
  r.task = 0.0;
  r.survival = 1.0;
  r.position = 1.0;
  r.interference = -1.0;
  CHECK(composite_reward(Eigen::Vector4d(0, 0, 0, 0), r) == 0.0);
  RewardVector alive;
  alive.survival = 1.0;
  CHECK(composite_reward(Eigen::Vector4d(0, 1, 0, 0), alive) == 1.0);
  CHECK(composite_reward(Eigen::Vector4d(1.0, 0.5, 0.0, -1.0), r) == 1.5);
}

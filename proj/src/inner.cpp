#include "morse/inner.hpp"

#include <cmath>

#include "morse/errors.hpp"

namespace morse {

namespace {

Eigen::Vector2d softmax2(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  Eigen::Vector2d p;
  p[0] = std::exp(logits[0] - m);
  p[1] = std::exp(logits[1] - m);
  return p / (p[0] + p[1]);
}

double sigmoid(double y) { return 1.0 / (1.0 + std::exp(-y)); }

double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

Eigen::Vector2d Policy::action_probs(const Eigen::Vector4d& obs) const {
  return softmax2(forward(net, obs));
}

double Policy::log_prob(const Eigen::Vector4d& obs, CartAction a) const {
  const Eigen::VectorXd logits = forward(net, obs);
  const double m = std::max(logits[0], logits[1]);
  const double lse = m + std::log(std::exp(logits[0] - m) + std::exp(logits[1] - m));
  return logits[static_cast<int>(a)] - lse;
}

Policy make_policy(std::uint64_t seed) {
  Policy p;
  p.net = init_net({4, 32, 2}, seed);
  return p;
}

CartAction sample_action(const Policy& policy, const Eigen::Vector4d& obs,
                         Rng& rng, double* log_prob) {
  const Eigen::Vector2d probs = policy.action_probs(obs);
  const CartAction a = rng.uniform() < probs[0] ? CartAction::left : CartAction::right;
  if (log_prob) *log_prob = std::log(probs[static_cast<int>(a)]);
  return a;
}

WeightFunction WeightFunction::random(Mode mode, const Box& box, Rng& rng) {
  WeightFunction wf;
  wf.mode_ = mode;
  wf.box_ = box;
  if (mode == Mode::state_conditioned) {
    wf.net_sizes_ = {4, 16, box.dim()};
  }
  wf.adopt_constant(box.sample(rng), rng);
  return wf;
}

Eigen::VectorXd WeightFunction::weights(const Eigen::VectorXd& state) const {
  if (mode_ == Mode::constant) return params_;
  DenseNet net{net_sizes_, params_, 0};
  const Eigen::VectorXd y = forward(net, state);
  Eigen::VectorXd w(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    w[i] = box_.lo[i] + (box_.hi[i] - box_.lo[i]) * sigmoid(y[i]);
  }
  return w;
}

Eigen::VectorXd WeightFunction::param_grad(const Eigen::VectorXd& state,
                                           const Eigen::VectorXd& upstream) const {
  if (upstream.size() != box_.dim()) throw shape_error("weight upstream length mismatch");
  if (mode_ == Mode::constant) return upstream;
  DenseNet net{net_sizes_, params_, 0};
  const Eigen::VectorXd y = forward(net, state);
  Eigen::VectorXd up_y(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double s = sigmoid(y[i]);
    up_y[i] = upstream[i] * (box_.hi[i] - box_.lo[i]) * s * (1.0 - s);
  }
  return grad(net, state, up_y).param_grad;
}

Eigen::VectorXd WeightFunction::param_grad_batch(const Eigen::MatrixXd& states,
                                                 const Eigen::MatrixXd& upstream) const {
  if (upstream.rows() != box_.dim() || upstream.cols() != states.cols()) {
    throw shape_error("weight upstream shape mismatch");
  }
  if (mode_ == Mode::constant) return upstream.rowwise().sum();
  DenseNet net{net_sizes_, params_, 0};
  const Eigen::MatrixXd y = forward_batch(net, states);
  const Eigen::ArrayXXd s = (1.0 / (1.0 + (-y.array()).exp()));
  const Eigen::VectorXd range = box_.hi - box_.lo;
  const Eigen::MatrixXd up_y =
      (upstream.array() * s * (1.0 - s)).colwise() * range.array();
  return grad_batch_params(net, states, up_y);
}

void WeightFunction::adopt_constant(const Eigen::VectorXd& w, Rng& rng) {
  const Eigen::VectorXd target = box_.clip(w);
  if (mode_ == Mode::constant) {
    params_ = target;
    return;
  }
  DenseNet net = init_net(net_sizes_, rng.next_u64());
  // Zero the output layer and steer its bias so w(s) == target everywhere;
  // gradient training re-grows the state dependence from there.
  const int n_hidden = net_sizes_[net_sizes_.size() - 2];
  const int n_out = net_sizes_.back();
  const int out_offset = static_cast<int>(net.params.size()) - (n_hidden + 1) * n_out;
  net.params.segment(out_offset, n_hidden * n_out).setZero();
  for (int i = 0; i < n_out; ++i) {
    const double frac = (target[i] - box_.lo[i]) / (box_.hi[i] - box_.lo[i]);
    net.params[out_offset + n_hidden * n_out + i] =
        logit(std::clamp(frac, 0.02, 0.98));
  }
  params_ = net.params;
}

void WeightFunction::set_params(const Eigen::VectorXd& p) {
  if (p.size() != params_.size()) throw shape_error("weight function parameter length mismatch");
  params_ = mode_ == Mode::constant ? Eigen::VectorXd(box_.clip(p)) : p;
}

RolloutResult rollout(const Policy& policy, int n_episodes, Rng& rng) {
  if (n_episodes < 1) throw config_error("rollout needs at least one episode");
  RolloutResult out;
  int successes = 0;
  int stored_steps = 0;
  for (int ep = 0; ep < n_episodes; ++ep) {
    Rng ep_rng = rng.split(static_cast<std::uint64_t>(ep) + 1);
    CartState s = CartPoleEnv::reset(ep_rng);
    Trajectory traj;
    bool done = false;
    while (!done) {
      TrajStep step;
      step.obs = s.observation();
      step.action = sample_action(policy, step.obs, ep_rng, &step.log_prob);
      const StepResult r = CartPoleEnv::step(s, step.action);
      step.reward = r.reward;
      if (stored_steps < kRolloutBufferCap) {
        traj.steps.push_back(step);
        ++stored_steps;
      }
      s = r.state;
      done = r.done;
      traj.success = r.success;
    }
    if (traj.success) ++successes;
    out.trajectories.push_back(std::move(traj));
  }
  out.performance = static_cast<double>(successes) / n_episodes;
  return out;
}

std::vector<std::vector<double>> composite_returns(
    const std::vector<Trajectory>& trajs, const WeightFunction& weight_fn,
    double gamma) {
  std::vector<std::vector<double>> returns(trajs.size());
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const auto& steps = trajs[i].steps;
    returns[i].resize(steps.size());
    double acc = 0.0;
    for (std::size_t t = steps.size(); t-- > 0;) {
      const double r =
          weight_fn.weights(steps[t].obs).dot(steps[t].reward.as_vector());
      acc = r + gamma * acc;
      returns[i][t] = acc;
    }
  }
  return returns;
}

std::vector<std::vector<double>> task_returns(const std::vector<Trajectory>& trajs,
                                              double gamma) {
  std::vector<std::vector<double>> returns(trajs.size());
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const auto& steps = trajs[i].steps;
    returns[i].resize(steps.size());
    double acc = 0.0;
    for (std::size_t t = steps.size(); t-- > 0;) {
      acc = steps[t].reward.task + gamma * acc;
      returns[i][t] = acc;
    }
  }
  return returns;
}

Eigen::VectorXd reinforce_estimator_grad(
    const std::vector<int>& net_sizes, const Eigen::VectorXd& params,
    const std::vector<Trajectory>& trajs,
    const std::vector<std::vector<double>>& returns, double baseline) {
  DenseNet net{net_sizes, params, 0};
  int total_steps = 0;
  for (const Trajectory& traj : trajs) total_steps += static_cast<int>(traj.steps.size());
  if (total_steps == 0) return Eigen::VectorXd::Zero(params.size());

  Eigen::MatrixXd inputs(net_sizes.front(), total_steps);
  Eigen::VectorXd coeff(total_steps);
  std::vector<int> actions(total_steps);
  int at = 0;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    for (std::size_t t = 0; t < trajs[i].steps.size(); ++t) {
      inputs.col(at) = trajs[i].steps[t].obs;
      coeff[at] = returns[i][t] - baseline;
      actions[at] = static_cast<int>(trajs[i].steps[t].action);
      ++at;
    }
  }
  const Eigen::MatrixXd logits = forward_batch(net, inputs);
  Eigen::MatrixXd upstream(logits.rows(), total_steps);
  for (int m = 0; m < total_steps; ++m) {
    Eigen::Vector2d probs = softmax2(logits.col(m));
    Eigen::Vector2d up = -probs;
    up[actions[m]] += 1.0;  // e_a - pi
    upstream.col(m) = up * coeff[m];
  }
  return grad_batch_params(net, inputs, upstream) / total_steps;
}

Policy reinforce_update(const Policy& policy,
                        const std::vector<Trajectory>& trajs,
                        const WeightFunction& weight_fn, double gamma,
                        double lr, double l2, bool* skipped) {
  if (skipped) *skipped = false;
  if (trajs.empty()) throw config_error("reinforce_update on empty batch");
  const auto returns = composite_returns(trajs, weight_fn, gamma);
  const Eigen::VectorXd g = reinforce_estimator_grad(
      policy.net.layer_sizes, policy.net.params, trajs, returns, policy.baseline);
  if (!g.allFinite()) {
    if (skipped) *skipped = true;
    return policy;
  }
  Policy out = policy;
  out.net = sgd_step(policy.net, -g, lr, l2);  // ascent with decay
  double sum = 0.0;
  int n = 0;
  for (const auto& traj_returns : returns) {
    for (double r : traj_returns) {
      sum += r;
      ++n;
    }
  }
  if (n > 0) out.baseline = 0.9 * policy.baseline + 0.1 * (sum / n);
  return out;
}

Policy reset_policy(const Policy& policy, Rng& rng) {
  Policy out;
  out.net = init_net(policy.net.layer_sizes, rng.next_u64());
  out.baseline = 0.0;
  return out;
}

}  // namespace morse

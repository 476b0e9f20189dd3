#include "morse/net.hpp"

#include <cmath>
#include <string>

#include "morse/errors.hpp"

namespace morse {

namespace {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapW = Eigen::Map<const MatRM>;
using MapB = Eigen::Map<const Eigen::VectorXd>;

void check_sizes(const std::vector<int>& sizes) {
  if (sizes.size() < 2) throw config_error("net needs at least two layer sizes");
  for (int s : sizes) {
    if (s <= 0) throw config_error("non-positive layer size " + std::to_string(s));
  }
}

}  // namespace

int dense_param_count(const std::vector<int>& layer_sizes) {
  check_sizes(layer_sizes);
  int n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    n += (layer_sizes[l] + 1) * layer_sizes[l + 1];
  }
  return n;
}

DenseNet init_net(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  const int count = dense_param_count(layer_sizes);
  DenseNet net;
  net.layer_sizes = layer_sizes;
  net.init_seed = seed;
  net.params.resize(count);
  Rng rng(seed);
  int at = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer_sizes[l]));
    const int n = (layer_sizes[l] + 1) * layer_sizes[l + 1];
    for (int i = 0; i < n; ++i) net.params[at++] = rng.uniform(-scale, scale);
  }
  return net;
}

Eigen::VectorXd forward(const DenseNet& net, const Eigen::VectorXd& x) {
  if (x.size() != net.input_dim()) {
    throw shape_error("forward: input length " + std::to_string(x.size()) +
                      " != " + std::to_string(net.input_dim()));
  }
  Eigen::VectorXd a = x;
  int at = 0;
  const auto& sizes = net.layer_sizes;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int nin = sizes[l], nout = sizes[l + 1];
    MapW w(net.params.data() + at, nout, nin);
    MapB b(net.params.data() + at + nout * nin, nout);
    at += (nin + 1) * nout;
    Eigen::VectorXd z = w * a + b;
    a = (l + 2 < sizes.size()) ? z.array().tanh().matrix() : z;
  }
  return a;
}

GradientReport grad(const DenseNet& net, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& upstream) {
  if (x.size() != net.input_dim()) throw shape_error("grad: input length mismatch");
  if (upstream.size() != net.output_dim()) {
    throw shape_error("grad: upstream length mismatch");
  }
  const auto& sizes = net.layer_sizes;
  const std::size_t n_layers = sizes.size() - 1;

  // Forward pass, caching each layer's activation.
  std::vector<Eigen::VectorXd> acts(n_layers + 1);
  std::vector<int> offsets(n_layers);
  acts[0] = x;
  int at = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int nin = sizes[l], nout = sizes[l + 1];
    offsets[l] = at;
    MapW w(net.params.data() + at, nout, nin);
    MapB b(net.params.data() + at + nout * nin, nout);
    at += (nin + 1) * nout;
    Eigen::VectorXd z = w * acts[l] + b;
    acts[l + 1] = (l + 1 < n_layers) ? z.array().tanh().matrix() : z;
  }

  GradientReport report;
  report.param_grad = Eigen::VectorXd::Zero(net.params.size());
  Eigen::VectorXd delta = upstream;  // d(upstream . out)/d(activation)
  for (std::size_t li = n_layers; li-- > 0;) {
    const int nin = sizes[li], nout = sizes[li + 1];
    // For hidden layers the cached activation is tanh(z): tanh' = 1 - a^2.
    if (li + 1 < n_layers) {
      delta = (delta.array() * (1.0 - acts[li + 1].array().square())).matrix();
    }
    MapW w(net.params.data() + offsets[li], nout, nin);
    Eigen::Map<MatRM> wg(report.param_grad.data() + offsets[li], nout, nin);
    Eigen::Map<Eigen::VectorXd> bg(
        report.param_grad.data() + offsets[li] + nout * nin, nout);
    wg = delta * acts[li].transpose();
    bg = delta;
    delta = w.transpose() * delta;
  }
  report.input_grad = delta;
  return report;
}

namespace {

/// Forward pass over a column batch, caching every layer's activations.
std::vector<Eigen::MatrixXd> forward_tape(const DenseNet& net,
                                          const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != net.input_dim()) {
    throw shape_error("forward_batch: input rows mismatch");
  }
  const auto& sizes = net.layer_sizes;
  const std::size_t n_layers = sizes.size() - 1;
  std::vector<Eigen::MatrixXd> acts(n_layers + 1);
  acts[0] = inputs;
  int at = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int nin = sizes[l], nout = sizes[l + 1];
    MapW w(net.params.data() + at, nout, nin);
    MapB b(net.params.data() + at + nout * nin, nout);
    at += (nin + 1) * nout;
    Eigen::MatrixXd z = (w * acts[l]).colwise() + b;
    acts[l + 1] = (l + 1 < n_layers) ? z.array().tanh().matrix() : std::move(z);
  }
  return acts;
}

}  // namespace

Eigen::MatrixXd forward_batch(const DenseNet& net, const Eigen::MatrixXd& inputs) {
  return forward_tape(net, inputs).back();
}

Eigen::VectorXd grad_batch_params(const DenseNet& net, const Eigen::MatrixXd& inputs,
                                  const Eigen::MatrixXd& upstream) {
  const auto& sizes = net.layer_sizes;
  const std::size_t n_layers = sizes.size() - 1;
  if (upstream.rows() != net.output_dim() || upstream.cols() != inputs.cols()) {
    throw shape_error("grad_batch_params: upstream shape mismatch");
  }
  const auto acts = forward_tape(net, inputs);
  std::vector<int> offsets(n_layers);
  int at = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    offsets[l] = at;
    at += (sizes[l] + 1) * sizes[l + 1];
  }
  Eigen::VectorXd param_grad = Eigen::VectorXd::Zero(net.params.size());
  Eigen::MatrixXd delta = upstream;
  for (std::size_t li = n_layers; li-- > 0;) {
    const int nin = sizes[li], nout = sizes[li + 1];
    if (li + 1 < n_layers) {
      delta = (delta.array() * (1.0 - acts[li + 1].array().square())).matrix();
    }
    Eigen::Map<MatRM> wg(param_grad.data() + offsets[li], nout, nin);
    Eigen::Map<Eigen::VectorXd> bg(param_grad.data() + offsets[li] + nout * nin, nout);
    wg = delta * acts[li].transpose();
    bg = delta.rowwise().sum();
    MapW w(net.params.data() + offsets[li], nout, nin);
    delta = w.transpose() * delta;
  }
  return param_grad;
}

Eigen::VectorXd grad_batch_dot(const DenseNet& net, const Eigen::MatrixXd& inputs,
                               const Eigen::MatrixXd& upstream,
                               const Eigen::VectorXd& u) {
  const auto& sizes = net.layer_sizes;
  const std::size_t n_layers = sizes.size() - 1;
  if (u.size() != net.params.size()) throw shape_error("grad_batch_dot: u length mismatch");
  if (upstream.rows() != net.output_dim() || upstream.cols() != inputs.cols()) {
    throw shape_error("grad_batch_dot: upstream shape mismatch");
  }
  const auto acts = forward_tape(net, inputs);
  std::vector<int> offsets(n_layers);
  int at = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    offsets[l] = at;
    at += (sizes[l] + 1) * sizes[l + 1];
  }
  Eigen::VectorXd dots = Eigen::VectorXd::Zero(inputs.cols());
  Eigen::MatrixXd delta = upstream;
  for (std::size_t li = n_layers; li-- > 0;) {
    const int nin = sizes[li], nout = sizes[li + 1];
    if (li + 1 < n_layers) {
      delta = (delta.array() * (1.0 - acts[li + 1].array().square())).matrix();
    }
    MapW u_w(u.data() + offsets[li], nout, nin);
    MapB u_b(u.data() + offsets[li] + nout * nin, nout);
    // Per column m: delta_m . (U_W a_m + u_b).
    const Eigen::MatrixXd lin = (u_w * acts[li]).colwise() + u_b;
    dots += (delta.array() * lin.array()).colwise().sum().matrix().transpose();
    MapW w(net.params.data() + offsets[li], nout, nin);
    delta = w.transpose() * delta;
  }
  return dots;
}

Eigen::VectorXd hvp(const DenseNet& net, const LossGradFn& loss_grad,
                    const Eigen::VectorXd& v) {
  if (v.size() != net.params.size()) throw shape_error("hvp: probe length mismatch");
  const double eps = 1e-4 / std::max(1.0, v.norm());
  const Eigen::VectorXd gp = loss_grad(net.params + eps * v);
  const Eigen::VectorXd gm = loss_grad(net.params - eps * v);
  if (gp.size() != v.size() || gm.size() != v.size()) {
    throw shape_error("hvp: loss gradient length mismatch");
  }
  Eigen::VectorXd hv = (gp - gm) / (2.0 * eps);
  if (!hv.allFinite()) throw numeric_error("hvp: non-finite result");
  return hv;
}

DenseNet sgd_step(const DenseNet& net, const Eigen::VectorXd& g, double lr,
                  double l2) {
  if (g.size() != net.params.size()) throw shape_error("sgd_step: gradient length mismatch");
  if (!(lr > 0.0)) throw config_error("sgd_step: lr must be positive");
  if (l2 < 0.0) throw config_error("sgd_step: l2 must be non-negative");
  if (!g.allFinite()) throw numeric_error("sgd_step: non-finite gradient");
  DenseNet out = net;
  out.params = net.params - lr * (g + l2 * net.params);
  return out;
}

}  // namespace morse

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "morse/rng.hpp"

namespace morse {

/// Dense feed-forward network: tanh on hidden layers, identity output.
/// Parameters live in one flat vector (per layer: row-major weight matrix,
/// then bias), so optimizers and Hessian-vector products treat the net as a
/// plain point in R^P. Nets are value types; "training" produces a new
/// parameter vector rather than mutating a shared one.
struct DenseNet {
  std::vector<int> layer_sizes;
  Eigen::VectorXd params;
  std::uint64_t init_seed = 0;

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  int param_count() const { return static_cast<int>(params.size()); }
};

/// Reverse-mode derivatives of upstream . forward(net, x).
struct GradientReport {
  Eigen::VectorXd param_grad;
  Eigen::VectorXd input_grad;
};

/// Parameter count for the declared sizes: sum over layers of (n_in+1)*n_out.
int dense_param_count(const std::vector<int>& layer_sizes);

/// Fresh net with parameters i.i.d. uniform on +-1/sqrt(fan_in), per layer.
DenseNet init_net(const std::vector<int>& layer_sizes, std::uint64_t seed);

Eigen::VectorXd forward(const DenseNet& net, const Eigen::VectorXd& x);

GradientReport grad(const DenseNet& net, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& upstream);

/// Column-batched forward pass: inputs and outputs hold one sample per
/// column. Matches forward() on every column.
Eigen::MatrixXd forward_batch(const DenseNet& net, const Eigen::MatrixXd& inputs);

/// Sum over columns of d(upstream_col . forward(net, input_col))/dparams.
Eigen::VectorXd grad_batch_params(const DenseNet& net, const Eigen::MatrixXd& inputs,
                                  const Eigen::MatrixXd& upstream);

/// Per-column directional derivative u . d(upstream_col . out_col)/dparams;
/// used for Hessian-free inner products without materializing per-sample
/// gradients.
Eigen::VectorXd grad_batch_dot(const DenseNet& net, const Eigen::MatrixXd& inputs,
                               const Eigen::MatrixXd& upstream,
                               const Eigen::VectorXd& u);

/// Gradient function of some scalar loss, evaluated at arbitrary parameters.
using LossGradFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Hessian-vector product H v by symmetric differencing of loss gradients,
/// with the probe step scaled to 1e-4 / max(1, |v|). Throws numeric_error on
/// non-finite intermediates; the caller is expected to skip its update.
Eigen::VectorXd hvp(const DenseNet& net, const LossGradFn& loss_grad,
                    const Eigen::VectorXd& v);

/// theta <- theta - lr * (grad + l2 * theta).
DenseNet sgd_step(const DenseNet& net, const Eigen::VectorXd& g, double lr,
                  double l2);

}  // namespace morse

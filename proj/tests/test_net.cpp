#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "morse/errors.hpp"
#include "morse/net.hpp"

using namespace morse;

namespace {

/// Straight-line reimplementation of the forward pass over the documented
/// flat layout (per layer: row-major weights, then biases). Kept separate
/// from the library path on purpose.
Eigen::VectorXd forward_oracle(const DenseNet& net, const Eigen::VectorXd& x) {
  Eigen::VectorXd a = x;
  int at = 0;
  for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
    const int nin = net.layer_sizes[l], nout = net.layer_sizes[l + 1];
    Eigen::VectorXd z(nout);
    for (int r = 0; r < nout; ++r) {
      double acc = 0.0;
      for (int c = 0; c < nin; ++c) acc += net.params[at + r * nin + c] * a[c];
      z[r] = acc + net.params[at + nout * nin + r];
    }
    at += (nin + 1) * nout;
    if (l + 2 < net.layer_sizes.size()) {
      for (int r = 0; r < nout; ++r) z[r] = std::tanh(z[r]);
    }
    a = z;
  }
  return a;
}

double scalar_output(const DenseNet& net, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& upstream) {
  return upstream.dot(forward(net, x));
}

}  // namespace

TEST_CASE("init is deterministic per seed and counts parameters") {
  const DenseNet a = init_net({2, 8, 1}, 99);
  const DenseNet b = init_net({2, 8, 1}, 99);
  CHECK(a.params == b.params);
  CHECK(a.param_count() == 33);  // (2+1)*8 + (8+1)*1
  CHECK(dense_param_count({4, 32, 2}) == (4 + 1) * 32 + (32 + 1) * 2);

  const DenseNet c = init_net({2, 8, 1}, 100);
  CHECK(a.params != c.params);
}

TEST_CASE("init rejects bad layer lists") {
  CHECK_THROWS_AS(init_net({3}, 1), config_error);
  CHECK_THROWS_AS(init_net({2, 0, 1}, 1), config_error);
  CHECK_THROWS_AS(init_net({}, 1), config_error);
}

TEST_CASE("forward of all-zero parameters is zero") {
  DenseNet net = init_net({3, 5, 2}, 1);
  net.params.setZero();
  const Eigen::VectorXd y = forward(net, Eigen::Vector3d(0.2, -0.4, 1.0));
  CHECK(y.norm() == 0.0);
}

TEST_CASE("single identity layer reproduces its input") {
  DenseNet net = init_net({3, 3}, 1);
  net.params.setZero();
  for (int i = 0; i < 3; ++i) net.params[i * 3 + i] = 1.0;  // W = I, b = 0
  const Eigen::Vector3d x(0.5, -1.5, 2.0);
  CHECK((forward(net, x) - x).norm() == 0.0);
}

TEST_CASE("forward matches the hand-rolled oracle") {
  const DenseNet net = init_net({2, 4, 1}, 7);
  const Eigen::Vector2d x(0.3, -0.7);
  const Eigen::VectorXd y = forward(net, x);
  const Eigen::VectorXd z = forward_oracle(net, x);
  CHECK(std::abs(y[0] - z[0]) < 1e-12);
}

TEST_CASE("forward is pure") {
  const DenseNet net = init_net({4, 16, 4}, 3);
  const Eigen::Vector4d x(0.1, 0.2, -0.3, 0.4);
  CHECK(forward(net, x) == forward(net, x));
}

TEST_CASE("forward rejects dimension mismatch") {
  const DenseNet net = init_net({2, 4, 1}, 7);
  CHECK_THROWS_AS(forward(net, Eigen::Vector3d(1, 2, 3)), shape_error);
}

TEST_CASE("param and input gradients match central finite differences") {
  Rng rng(17);
  for (const auto& sizes :
       {std::vector<int>{2, 4, 1}, {4, 32, 2}, {2, 16, 16, 1}, {4, 16, 4}}) {
    DenseNet net = init_net(sizes, rng.next_u64());
    for (int probe = 0; probe < 20; ++probe) {
      Eigen::VectorXd x(sizes.front());
      Eigen::VectorXd upstream(sizes.back());
      for (int i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1, 1);
      for (int i = 0; i < upstream.size(); ++i) upstream[i] = rng.uniform(-1, 1);

      const GradientReport report = grad(net, x, upstream);
      const double h = 1e-5;
      for (int k = 0; k < net.param_count(); k += 7) {  // subsample params
        DenseNet plus = net, minus = net;
        plus.params[k] += h;
        minus.params[k] -= h;
        const double fd =
            (scalar_output(plus, x, upstream) - scalar_output(minus, x, upstream)) /
            (2 * h);
        const double denom = std::max(1.0, std::abs(report.param_grad[k]));
        CHECK(std::abs(report.param_grad[k] - fd) / denom < 1e-4);
      }
      for (int k = 0; k < x.size(); ++k) {
        Eigen::VectorXd plus = x, minus = x;
        plus[k] += h;
        minus[k] -= h;
        const double fd =
            (scalar_output(net, plus, upstream) - scalar_output(net, minus, upstream)) /
            (2 * h);
        const double denom = std::max(1.0, std::abs(report.input_grad[k]));
        CHECK(std::abs(report.input_grad[k] - fd) / denom < 1e-4);
      }
    }
  }
}

TEST_CASE("zero upstream annihilates the gradient") {
  const DenseNet net = init_net({3, 8, 2}, 5);
  const GradientReport report =
      grad(net, Eigen::Vector3d(1, 2, 3), Eigen::Vector2d(0, 0));
  CHECK(report.param_grad.norm() == 0.0);
  CHECK(report.input_grad.norm() == 0.0);
}

TEST_CASE("input gradient of a linear layer is the weight row") {
  DenseNet net = init_net({3, 1}, 2);
  const GradientReport report =
      grad(net, Eigen::Vector3d(0.1, 0.2, 0.3), Eigen::VectorXd::Ones(1));
  for (int i = 0; i < 3; ++i) CHECK(report.input_grad[i] == net.params[i]);
}

TEST_CASE("hvp matches a quadratic oracle") {
  const int dim = dense_param_count({2, 3, 1});
  DenseNet net = init_net({2, 3, 1}, 4);
  Rng rng(8);
  Eigen::MatrixXd a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j <= i; ++j) {
      a(i, j) = a(j, i) = rng.uniform(-1, 1);
    }
  }
  const LossGradFn loss_grad = [&a](const Eigen::VectorXd& theta) {
    return Eigen::VectorXd(a * theta);  // grad of 0.5 theta^T A theta
  };
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.uniform(-2, 2);
  CHECK((hvp(net, loss_grad, v) - a * v).norm() < 1e-6);

  SUBCASE("zero probe gives zero") {
    CHECK(hvp(net, loss_grad, Eigen::VectorXd::Zero(dim)).norm() == 0.0);
  }
  SUBCASE("constant gradient has zero curvature") {
    const LossGradFn constant = [dim](const Eigen::VectorXd&) {
      return Eigen::VectorXd(Eigen::VectorXd::Ones(dim));
    };
    CHECK(hvp(net, constant, v).norm() == 0.0);
  }
  SUBCASE("non-finite intermediates raise a numeric error") {
    const LossGradFn broken = [dim](const Eigen::VectorXd&) {
      return Eigen::VectorXd(Eigen::VectorXd::Constant(
          dim, std::numeric_limits<double>::quiet_NaN()));
    };
    CHECK_THROWS_AS(hvp(net, broken, v), numeric_error);
  }
}

TEST_CASE("sgd_step arithmetic and decay") {
  DenseNet net = init_net({2, 2}, 1);
  SUBCASE("zero gradient, zero decay is a fixed point") {
    const DenseNet out = sgd_step(net, Eigen::VectorXd::Zero(net.param_count()), 0.1, 0.0);
    CHECK(out.params == net.params);
  }
  SUBCASE("pure decay shrinks the norm") {
    net.params.setConstant(0.5);
    const DenseNet out = sgd_step(net, Eigen::VectorXd::Zero(net.param_count()), 0.1, 0.3);
    CHECK(out.params.norm() < net.params.norm());
  }
  SUBCASE("plain arithmetic") {
    net.params.setConstant(1.0);
    const DenseNet out =
        sgd_step(net, Eigen::VectorXd::Constant(net.param_count(), 2.0), 0.1, 0.0);
    for (int i = 0; i < out.param_count(); ++i) CHECK(out.params[i] == doctest::Approx(0.8));
  }
  SUBCASE("non-finite gradient is rejected") {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(net.param_count());
    g[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(sgd_step(net, g, 0.1, 0.0), numeric_error);
  }
}

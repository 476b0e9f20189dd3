#pragma once

#include <Eigen/Core>

#include "morse/errors.hpp"
#include "morse/rng.hpp"

namespace morse {

/// Axis-aligned box of valid weight vectors.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Box() = default;
  Box(Eigen::VectorXd lo_, Eigen::VectorXd hi_)
      : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.size() != hi.size()) throw config_error("box bounds length mismatch");
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
      if (!(lo[i] < hi[i])) throw config_error("degenerate box axis");
    }
  }

  /// Same interval on every axis.
  static Box uniform(int dim, double lo, double hi) {
    return Box(Eigen::VectorXd::Constant(dim, lo),
               Eigen::VectorXd::Constant(dim, hi));
  }

  int dim() const { return static_cast<int>(lo.size()); }

  bool contains(const Eigen::VectorXd& x) const {
    if (x.size() != lo.size()) return false;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    }
    return true;
  }

  Eigen::VectorXd clip(const Eigen::VectorXd& x) const {
    return x.cwiseMax(lo).cwiseMin(hi);
  }

  Eigen::VectorXd sample(Rng& rng) const {
    Eigen::VectorXd x(lo.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(lo[i], hi[i]);
    return x;
  }
};

}  // namespace morse

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "morse/box.hpp"
#include "morse/net.hpp"

namespace morse {

enum class Family { smooth_polynomial, fixed_nn, random_spiky };

Family family_from_string(const std::string& name);
std::string family_name(Family family);

struct SpikyBump {
  double cx, cy, height, sigma;
};

/// Seeded scalar field on [-1,1]^2, normalized so eval lands in [0,1].
/// The normalization constants come from a 101x101 grid scan of the raw
/// field; eval clamps, so off-grid extrema cannot escape the range.
struct Landscape {
  Family family = Family::smooth_polynomial;
  std::uint64_t seed = 0;            // as requested
  std::uint64_t effective_seed = 0;  // after multimodality redraws
  Eigen::VectorXd poly_coeffs;       // degree-6 bivariate, 28 terms
  DenseNet net;                      // fixed_nn family
  std::vector<SpikyBump> bumps;      // random_spiky family
  double norm_lo = 0.0;
  double norm_hi = 1.0;

  /// Unnormalized field value; no domain check.
  double raw(const Eigen::Vector2d& x) const;

  /// clamp((raw - norm_lo) / (norm_hi - norm_lo), 0, 1). Throws
  /// std::domain_error outside [-1,1]^2; callers clip first.
  double eval(const Eigen::Vector2d& x) const;
};

/// SmoothPolynomial: degree-6 bivariate with coefficients iid U[-1,1],
/// redrawn (seed + 1e6) until the grid shows at least two strict local
/// maxima. FixedNN: seeded [2,16,16,1] tanh net evaluated raw. RandomSpiky:
/// 3..6 Gaussian bumps, heights U[0.5,1], widths U[0.02,0.06], on a flat
/// zero base.
Landscape make_landscape(Family family, std::uint64_t seed);

/// Strict local maxima (8-neighborhood, boundary-aware) of eval on an NxN grid.
int count_grid_local_maxima(const Landscape& l, int n = 101);

using ScalarField = std::function<double(const Eigen::Vector2d&)>;

struct FieldGradient {
  Eigen::Vector2d grad;
  bool one_sided = false;  // a boundary axis fell back to one-sided differencing
};

/// Black-box central differences with step h; near a domain face the
/// affected axis falls back to a one-sided difference and sets the flag.
FieldGradient finite_diff_grad(const ScalarField& f, const Box& domain,
                               const Eigen::Vector2d& x, double h = 1e-3);

FieldGradient finite_diff_grad(const Landscape& l, const Eigen::Vector2d& x);

/// The [-1,1]^2 weight/benchmark domain.
Box landscape_domain();

}  // namespace morse

#include "morse/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "morse/errors.hpp"

namespace morse {

namespace {

constexpr int kPolyDegree = 6;
constexpr int kNormGrid = 101;
constexpr std::uint64_t kRedrawStride = 1000000;

Landscape build_candidate(Family family, std::uint64_t requested,
                          std::uint64_t effective) {
  Landscape l;
  l.family = family;
  l.seed = requested;
  l.effective_seed = effective;
  Rng rng(effective);
  switch (family) {
    case Family::smooth_polynomial: {
      int terms = 0;
      for (int i = 0; i <= kPolyDegree; ++i) terms += kPolyDegree - i + 1;
      l.poly_coeffs.resize(terms);
      for (int t = 0; t < terms; ++t) l.poly_coeffs[t] = rng.uniform(-1.0, 1.0);
      break;
    }
    case Family::fixed_nn:
      l.net = init_net({2, 16, 16, 1}, rng.next_u64());
      break;
    case Family::random_spiky: {
      const int k = 3 + rng.uniform_int(4);
      for (int i = 0; i < k; ++i) {
        SpikyBump b;
        b.cx = rng.uniform(-1.0, 1.0);
        b.cy = rng.uniform(-1.0, 1.0);
        b.height = rng.uniform(0.5, 1.0);
        b.sigma = rng.uniform(0.02, 0.06);
        l.bumps.push_back(b);
      }
      break;
    }
  }
  // Normalization constants from a uniform grid scan of the raw field.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int i = 0; i < kNormGrid; ++i) {
    for (int j = 0; j < kNormGrid; ++j) {
      const double x1 = -1.0 + 2.0 * i / (kNormGrid - 1);
      const double x2 = -1.0 + 2.0 * j / (kNormGrid - 1);
      const double v = l.raw({x1, x2});
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(hi > lo)) throw numeric_error("landscape is constant on the grid");
  l.norm_lo = lo;
  l.norm_hi = hi;
  return l;
}

}  // namespace

Family family_from_string(const std::string& name) {
  if (name == "smooth") return Family::smooth_polynomial;
  if (name == "fixednn") return Family::fixed_nn;
  if (name == "spiky") return Family::random_spiky;
  throw config_error("unknown landscape family '" + name + "'");
}

std::string family_name(Family family) {
  switch (family) {
    case Family::smooth_polynomial: return "smooth";
    case Family::fixed_nn: return "fixednn";
    case Family::random_spiky: return "spiky";
  }
  return "?";
}

double Landscape::raw(const Eigen::Vector2d& x) const {
  switch (family) {
    case Family::smooth_polynomial: {
      double acc = 0.0;
      int t = 0;
      double xi = 1.0;
      for (int i = 0; i <= kPolyDegree; ++i) {
        double yj = 1.0;
        for (int j = 0; j <= kPolyDegree - i; ++j) {
          acc += poly_coeffs[t++] * xi * yj;
          yj *= x[1];
        }
        xi *= x[0];
      }
      return acc;
    }
    case Family::fixed_nn: {
      Eigen::VectorXd in(2);
      in << x[0], x[1];
      return forward(net, in)[0];
    }
    case Family::random_spiky: {
      double acc = 0.0;
      for (const SpikyBump& b : bumps) {
        const double dx = x[0] - b.cx, dy = x[1] - b.cy;
        acc += b.height * std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
      }
      return acc;
    }
  }
  return 0.0;
}

double Landscape::eval(const Eigen::Vector2d& x) const {
  if (std::abs(x[0]) > 1.0 || std::abs(x[1]) > 1.0) {
    throw std::domain_error("landscape eval outside [-1,1]^2");
  }
  const double v = (raw(x) - norm_lo) / (norm_hi - norm_lo);
  return std::clamp(v, 0.0, 1.0);
}

int count_grid_local_maxima(const Landscape& l, int n) {
  std::vector<double> vals(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x1 = -1.0 + 2.0 * i / (n - 1);
      const double x2 = -1.0 + 2.0 * j / (n - 1);
      vals[static_cast<std::size_t>(i) * n + j] = l.raw({x1, x2});
    }
  }
  int count = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = vals[static_cast<std::size_t>(i) * n + j];
      bool is_max = true;
      for (int di = -1; di <= 1 && is_max; ++di) {
        for (int dj = -1; dj <= 1 && is_max; ++dj) {
          if (di == 0 && dj == 0) continue;
          const int ni = i + di, nj = j + dj;
          if (ni < 0 || nj < 0 || ni >= n || nj >= n) continue;
          if (vals[static_cast<std::size_t>(ni) * n + nj] >= v) is_max = false;
        }
      }
      if (is_max) ++count;
    }
  }
  return count;
}

Landscape make_landscape(Family family, std::uint64_t seed) {
  std::uint64_t effective = seed;
  for (;;) {
    Landscape l = build_candidate(family, seed, effective);
    if (family != Family::smooth_polynomial || count_grid_local_maxima(l) >= 2) {
      return l;
    }
    effective += kRedrawStride;
  }
}

FieldGradient finite_diff_grad(const ScalarField& f, const Box& domain,
                               const Eigen::Vector2d& x, double h) {
  FieldGradient out;
  for (int axis = 0; axis < 2; ++axis) {
    Eigen::Vector2d xp = x, xm = x;
    const double lo = domain.lo[axis], hi = domain.hi[axis];
    if (x[axis] + h <= hi && x[axis] - h >= lo) {
      xp[axis] += h;
      xm[axis] -= h;
      out.grad[axis] = (f(xp) - f(xm)) / (2.0 * h);
    } else if (x[axis] + h <= hi) {
      xp[axis] += h;
      out.grad[axis] = (f(xp) - f(x)) / h;
      out.one_sided = true;
    } else {
      xm[axis] -= h;
      out.grad[axis] = (f(x) - f(xm)) / h;
      out.one_sided = true;
    }
  }
  return out;
}

FieldGradient finite_diff_grad(const Landscape& l, const Eigen::Vector2d& x) {
  return finite_diff_grad([&l](const Eigen::Vector2d& p) { return l.eval(p); },
                          landscape_domain(), x);
}

Box landscape_domain() { return Box::uniform(2, -1.0, 1.0); }

}  // namespace morse

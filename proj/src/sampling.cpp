#include "morse/sampling.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "morse/errors.hpp"

namespace morse {

NoveltyScorer::NoveltyScorer(int input_dim, std::uint64_t seed) {
  Rng rng(seed);
  target_ = init_net({input_dim, 32, 32, 8}, rng.next_u64());
  predictor_ = init_net({input_dim, 32, 32, 8}, rng.next_u64());
}

double NoveltyScorer::novelty(const Eigen::VectorXd& w) const {
  if (w.size() != target_.input_dim()) throw shape_error("novelty: weight length mismatch");
  return (forward(predictor_, w) - forward(target_, w)).norm();
}

void NoveltyScorer::fit() {
  fit_trace_.clear();
  if (history_.empty()) return;
  const int n = static_cast<int>(history_.size());
  Eigen::MatrixXd inputs(target_.input_dim(), n);
  for (int i = 0; i < n; ++i) inputs.col(i) = history_[i];
  const Eigen::MatrixXd targets = forward_batch(target_, inputs);
  for (int iter = 0; iter < fit_iters_max; ++iter) {
    const Eigen::MatrixXd diff = forward_batch(predictor_, inputs) - targets;
    const double loss = diff.squaredNorm() / n;
    fit_trace_.push_back(loss);
    if (loss < overfit_tol * overfit_tol && iter + 1 >= fit_iters_min) return;
    const Eigen::VectorXd g = grad_batch_params(predictor_, inputs, 2.0 * diff) / n;
    predictor_ = sgd_step(predictor_, g, fit_lr, 0.0);
  }
}

void NoveltyScorer::add_history(const Eigen::VectorXd& w) {
  if (w.size() != target_.input_dim()) throw shape_error("history: weight length mismatch");
  history_.push_back(w);
}

Eigen::VectorXd softmax_probs(const Eigen::VectorXd& scores, double tau) {
  if (scores.size() == 0) throw config_error("softmax over empty scores");
  if (!(tau > 0.0)) throw config_error("softmax temperature must be positive");
  if (!scores.allFinite()) throw numeric_error("softmax over non-finite score");
  const Eigen::VectorXd scaled = scores * tau;
  const double m = scaled.maxCoeff();
  Eigen::VectorXd p = (scaled.array() - m).exp();
  return p / p.sum();
}

int softmax_select(const Eigen::VectorXd& scores, double tau, Rng& rng) {
  const Eigen::VectorXd p = softmax_probs(scores, tau);
  const double u = rng.uniform();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(p.size() - 1);
}

Eigen::VectorXd propose_random(const Box& space, Rng& rng) {
  return space.sample(rng);
}

namespace {

/// Indices sorted by value descending, equal values by lower index first.
std::vector<int> rank_desc(const ScoredBatch& scored) {
  std::vector<int> idx(scored.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&scored](int a, int b) {
    return scored[a].second > scored[b].second;
  });
  return idx;
}

}  // namespace

CemState cem_step(const CemState& state, const ScoredBatch& scored) {
  if (static_cast<int>(scored.size()) != CemState::batch) {
    throw config_error("cem_step expects a batch of 5");
  }
  const auto idx = rank_desc(scored);
  const Eigen::Index d = state.mean.size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (int e = 0; e < CemState::elites; ++e) mean += scored[idx[e]].first;
  mean /= CemState::elites;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
  for (int e = 0; e < CemState::elites; ++e) {
    var += (scored[idx[e]].first - mean).array().square().matrix();
  }
  var /= CemState::elites;
  CemState out = state;
  out.mean = mean;
  out.std = var.array().sqrt().max(CemState::std_floor).matrix();
  if (!out.mean.allFinite() || !out.std.allFinite()) {
    throw numeric_error("cem_step produced non-finite state");
  }
  return out;
}

Eigen::VectorXd cem_propose(const CemState& state, const Box& space, Rng& rng) {
  Eigen::VectorXd x(state.mean.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x[i] = state.mean[i] + state.std[i] * rng.normal();
  }
  return space.clip(x);
}

CmaState CmaState::init(const Eigen::VectorXd& mean, double step_size) {
  CmaState s;
  s.mean = mean;
  s.step_size = step_size;
  const Eigen::Index d = mean.size();
  s.cov = Eigen::MatrixXd::Identity(d, d);
  s.path_sigma = Eigen::VectorXd::Zero(d);
  s.path_cov = Eigen::VectorXd::Zero(d);
  return s;
}

namespace {

struct CmaConsts {
  double w1, w2, mu_eff, c_sigma, d_sigma, c_c, c_1, c_mu, chi_n;
};

CmaConsts cma_consts(int dim) {
  const double n = dim;
  double w1 = std::log(2.5) - std::log(1.0);
  double w2 = std::log(2.5) - std::log(2.0);
  const double sum = w1 + w2;
  w1 /= sum;
  w2 /= sum;
  CmaConsts c;
  c.w1 = w1;
  c.w2 = w2;
  c.mu_eff = 1.0 / (w1 * w1 + w2 * w2);
  c.c_sigma = (c.mu_eff + 2.0) / (n + c.mu_eff + 5.0);
  c.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((c.mu_eff - 1.0) / (n + 1.0)) - 1.0) + c.c_sigma;
  c.c_c = (4.0 + c.mu_eff / n) / (n + 4.0 + 2.0 * c.mu_eff / n);
  c.c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + c.mu_eff);
  c.c_mu = std::min(1.0 - c.c_1,
                    2.0 * (c.mu_eff - 2.0 + 1.0 / c.mu_eff) / ((n + 2.0) * (n + 2.0) + c.mu_eff));
  c.chi_n = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
  return c;
}

/// Eigen-floor the covariance and return (B, D) with C = B D^2 B^T.
void cma_decompose(Eigen::MatrixXd& cov, Eigen::MatrixXd& b, Eigen::VectorXd& d) {
  cov = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  Eigen::VectorXd evals = es.eigenvalues().cwiseMax(1e-8);
  b = es.eigenvectors();
  d = evals.array().sqrt().matrix();
  cov = b * evals.asDiagonal() * b.transpose();
  cov = 0.5 * (cov + cov.transpose());
}

}  // namespace

CmaState cma_step(const CmaState& state, const ScoredBatch& scored) {
  if (static_cast<int>(scored.size()) != 5) {
    throw config_error("cma_step expects a batch of 5");
  }
  bool all_tied = true;
  for (const auto& c : scored) {
    if (c.second != scored[0].second) all_tied = false;
  }
  if (all_tied) return state;

  const auto consts = cma_consts(static_cast<int>(state.mean.size()));
  const auto idx = rank_desc(scored);
  const double sigma = state.step_size;

  const Eigen::VectorXd y1 = (scored[idx[0]].first - state.mean) / sigma;
  const Eigen::VectorXd y2 = (scored[idx[1]].first - state.mean) / sigma;
  const Eigen::VectorXd y_w = consts.w1 * y1 + consts.w2 * y2;

  CmaState out = state;
  out.generation = state.generation + 1;
  out.mean = state.mean + sigma * y_w;

  Eigen::MatrixXd cov = state.cov;
  Eigen::MatrixXd b;
  Eigen::VectorXd d;
  cma_decompose(cov, b, d);
  const Eigen::MatrixXd inv_sqrt =
      b * d.cwiseInverse().asDiagonal() * b.transpose();

  out.path_sigma = (1.0 - consts.c_sigma) * state.path_sigma +
                   std::sqrt(consts.c_sigma * (2.0 - consts.c_sigma) * consts.mu_eff) *
                       (inv_sqrt * y_w);
  const double ps_norm = out.path_sigma.norm();
  out.step_size = sigma * std::exp((consts.c_sigma / consts.d_sigma) *
                                   (ps_norm / consts.chi_n - 1.0));

  const double h_thresh =
      (1.4 + 2.0 / (state.mean.size() + 1.0)) * consts.chi_n *
      std::sqrt(1.0 - std::pow(1.0 - consts.c_sigma, 2.0 * (out.generation)));
  const bool h_sigma = ps_norm < h_thresh;
  out.path_cov = (1.0 - consts.c_c) * state.path_cov;
  if (h_sigma) {
    out.path_cov += std::sqrt(consts.c_c * (2.0 - consts.c_c) * consts.mu_eff) * y_w;
  }

  Eigen::MatrixXd rank_mu = consts.w1 * (y1 * y1.transpose()) +
                            consts.w2 * (y2 * y2.transpose());
  Eigen::MatrixXd new_cov =
      (1.0 - consts.c_1 - consts.c_mu) * cov +
      consts.c_1 * (out.path_cov * out.path_cov.transpose() +
                    (h_sigma ? 0.0 : consts.c_c * (2.0 - consts.c_c)) * cov) +
      consts.c_mu * rank_mu;
  cma_decompose(new_cov, b, d);
  out.cov = new_cov;

  if (!out.mean.allFinite() || !out.cov.allFinite() ||
      !std::isfinite(out.step_size)) {
    throw numeric_error("cma_step produced non-finite state");
  }
  return out;
}

Eigen::VectorXd cma_propose(const CmaState& state, const Box& space, Rng& rng) {
  Eigen::MatrixXd cov = state.cov;
  Eigen::MatrixXd b;
  Eigen::VectorXd d;
  cma_decompose(cov, b, d);
  Eigen::VectorXd z(state.mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return space.clip(state.mean + state.step_size * (b * d.asDiagonal() * z));
}

}  // namespace morse

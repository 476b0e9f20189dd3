#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "morse/box.hpp"
#include "morse/inner.hpp"
#include "morse/landscape.hpp"
#include "morse/sampling.hpp"

namespace morse {

/// Knobs of the performance-gated, novelty-guided exploration step.
struct ExplorationConfig {
  int candidate_count = 20;  // N
  double alpha = 0.01;       // improvement threshold on delta_R
  double tau = 10.0;         // softmax temperature over novelty
  int t_grad = 1;            // epochs between outer gradient updates
  int t_explore = 10;        // epochs between exploration checks
  Box weight_box;
};

/// Neumann-series truncation for the inverse-Hessian application.
struct NeumannConfig {
  int terms = 5;               // K
  double eta = 1.0;            // damping, applied as H <- eta * H
  double divergence_cap = 1e3; // abort when a term outgrows cap * |v|
};

struct NeumannResult {
  Eigen::VectorXd value;
  bool diverged = false;
};

using HvpFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// eta * sum_{i<K} (I - eta H)^i v, i.e. a K-term approximation of H^-1 v,
/// via repeated Hessian-vector products. Sets `diverged` (and zeroes the
/// value) when any term's norm exceeds divergence_cap * |v|; the caller
/// must then skip its outer update.
NeumannResult neumann_inverse_apply(const HvpFn& hvp_fn, const Eigen::VectorXd& v,
                                    const NeumannConfig& cfg);

/// The exploration rule: when recent improvement delta_R falls below alpha,
/// refit the novelty scorer and, with probability 1 - p_curr, pick one of N
/// uniform candidates by novelty-softmax. The chosen weight joins the
/// scorer history. Returns nothing when the gate stays closed.
std::optional<Eigen::VectorXd> explore_gate(const ExplorationConfig& cfg,
                                            double delta_r, double p_curr,
                                            NoveltyScorer& scorer, Rng& rng);

struct OuterGrad {
  Eigen::VectorXd phi_grad;  // ascent direction for the weight parameters
  bool skipped = false;
  double neumann_eta = 0.0;
};

/// Implicit-function outer gradient from its three ingredients: the task
/// policy gradient, a Hessian-vector product of the inner loss (so the
/// series contracts at a maximum of the inner objective), and the mixed
/// derivative applied to the Neumann solution. The damping eta comes from
/// one probe product: eta = 1 / (1 + |H g| / |g|).
OuterGrad implicit_gradient(const Eigen::VectorXd& g_task, const HvpFn& inner_loss_hvp,
                            const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& mixed_grad,
                            NeumannConfig cfg);

/// Outer gradient dJ/dphi for the RL setting, estimated on a frozen
/// trajectory batch: task-reward policy gradient, Neumann-applied inverse
/// Hessian of the (L2-regularized) inner surrogate, and the mixed term
/// backpropagated through the weight function. Divergence or non-finite
/// values yield a zero gradient with the skipped flag set.
OuterGrad bilevel_outer_grad(const Policy& policy, const WeightFunction& weight_fn,
                             const std::vector<Trajectory>& trajs,
                             const NeumannConfig& cfg, double gamma = 0.99,
                             double l2 = 0.25);

/// Ascend J along `grad` (norm-clipped at 1) for 3..10 sub-iterations,
/// stopping early once the gradient norm drops below 1e-6. Constant-mode
/// weights step with lr_coeff and clip to the box; network weights step
/// with lr_net (the sigmoid squash keeps emissions in the box). Returns the
/// sub-iteration count; a non-finite gradient skips (0 iterations).
int outer_grad_step(WeightFunction& weight_fn, const Eigen::VectorXd& grad,
                    double lr_net = 0.0005, double lr_coeff = 0.0025);

// ---------------------------------------------------------------------------
// Synthetic landscape benchmark
// ---------------------------------------------------------------------------

enum class BenchSampler { rnd, random, cem, cma };

struct BenchStrategy {
  enum class Kind { no_exploration, periodic, morse };
  Kind kind = Kind::no_exploration;
  BenchSampler sampler = BenchSampler::rnd;

  static BenchStrategy parse(const std::string& name);
  std::string name() const;
};

struct BenchStep {
  int step = 0;
  Eigen::Vector2d x{0.0, 0.0};
  double value = 0.0;
  char event = 'g';  // 'g' gradient step, 'r' reset event
};

struct BenchRun {
  Eigen::Vector2d start{0.0, 0.0};
  std::vector<BenchStep> path;  // exactly `budget` rows
  double final_score = 0.0;
  double best_score = 0.0;
  int reset_events = 0;
};

struct BenchOptions {
  double lr = 0.05;
  double grad_clip = 1.0;  // cap on |finite difference gradient| before lr
  int reset_interval = 10;
  ExplorationConfig gate;  // weight_box defaults to the landscape domain
  std::optional<Eigen::Vector2d> start;  // overrides the sampled start point
};

/// One 100-step optimization run on a scalar field: gradient ascent with
/// box clipping, and for exploration strategies a reset event at every 10th
/// step. Periodic resets unconditionally through novelty sampling; Morse
/// consults the exploration gate (delta_R over the last window, p_curr =
/// f(x)) with the configured sampler. Each step consumes exactly one unit
/// of budget whether it is a gradient step or a reset.
BenchRun bench_run(const ScalarField& f, const Box& domain, BenchStrategy strategy,
                   int budget, Rng& rng, const BenchOptions& opts = {});

BenchRun bench_run(const Landscape& l, BenchStrategy strategy, int budget, Rng& rng,
                   const BenchOptions& opts = {});

}  // namespace morse

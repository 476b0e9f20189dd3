#include "morse/outer.hpp"

#include <cmath>

#include "morse/errors.hpp"

namespace morse {

NeumannResult neumann_inverse_apply(const HvpFn& hvp_fn, const Eigen::VectorXd& v,
                                    const NeumannConfig& cfg) {
  if (cfg.terms < 1) throw config_error("neumann: K must be at least 1");
  if (!(cfg.eta > 0.0)) throw config_error("neumann: eta must be positive");
  NeumannResult out;
  const double cap = cfg.divergence_cap * v.norm();
  Eigen::VectorXd term = cfg.eta * v;
  Eigen::VectorXd acc = term;
  for (int i = 1; i < cfg.terms; ++i) {
    term -= cfg.eta * hvp_fn(term);
    if (!term.allFinite() || term.norm() > cap) {
      out.value = Eigen::VectorXd::Zero(v.size());
      out.diverged = true;
      return out;
    }
    acc += term;
  }
  out.value = acc;
  return out;
}

std::optional<Eigen::VectorXd> explore_gate(const ExplorationConfig& cfg,
                                            double delta_r, double p_curr,
                                            NoveltyScorer& scorer, Rng& rng) {
  if (p_curr < 0.0 || p_curr > 1.0) throw config_error("explore_gate: p_curr outside [0,1]");
  if (delta_r >= cfg.alpha) return std::nullopt;
  scorer.fit();
  if (!(rng.uniform() < 1.0 - p_curr)) return std::nullopt;
  std::vector<Eigen::VectorXd> candidates;
  Eigen::VectorXd scores(cfg.candidate_count);
  candidates.reserve(cfg.candidate_count);
  for (int i = 0; i < cfg.candidate_count; ++i) {
    candidates.push_back(cfg.weight_box.sample(rng));
    scores[i] = scorer.novelty(candidates.back());
  }
  const int pick = softmax_select(scores, cfg.tau, rng);
  scorer.add_history(candidates[pick]);
  return candidates[pick];
}

OuterGrad implicit_gradient(const Eigen::VectorXd& g_task, const HvpFn& inner_loss_hvp,
                            const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& mixed_grad,
                            NeumannConfig cfg) {
  OuterGrad out;
  const double g_norm = g_task.norm();
  if (g_norm == 0.0) {
    out.phi_grad = mixed_grad(Eigen::VectorXd::Zero(g_task.size()));
    return out;
  }
  try {
    const Eigen::VectorXd probe = inner_loss_hvp(g_task);
    if (!probe.allFinite()) throw numeric_error("non-finite probe");
    cfg.eta = 1.0 / (1.0 + probe.norm() / g_norm);
    out.neumann_eta = cfg.eta;
    const NeumannResult u = neumann_inverse_apply(inner_loss_hvp, g_task, cfg);
    if (u.diverged) {
      out.skipped = true;
      out.phi_grad = Eigen::VectorXd();
      return out;
    }
    out.phi_grad = mixed_grad(u.value);
    if (!out.phi_grad.allFinite()) throw numeric_error("non-finite mixed term");
  } catch (const numeric_error&) {
    out.skipped = true;
    out.phi_grad = Eigen::VectorXd();
  }
  return out;
}

OuterGrad bilevel_outer_grad(const Policy& policy, const WeightFunction& weight_fn,
                             const std::vector<Trajectory>& trajs,
                             const NeumannConfig& cfg, double gamma, double l2) {
  const auto& sizes = policy.net.layer_sizes;
  const auto g_task_returns = task_returns(trajs, gamma);
  const Eigen::VectorXd g_task = reinforce_estimator_grad(
      sizes, policy.net.params, trajs, g_task_returns, 0.0);

  const auto shaped_returns = composite_returns(trajs, weight_fn, gamma);
  const HvpFn inner_loss_hvp = [&](const Eigen::VectorXd& v) {
    const LossGradFn loss_grad = [&](const Eigen::VectorXd& params) {
      return Eigen::VectorXd(
          -reinforce_estimator_grad(sizes, params, trajs, shaped_returns, 0.0) +
          l2 * params);
    };
    return hvp(policy.net, loss_grad, v);
  };

  // d(u . grad_theta G)/dphi: per-step coefficients a_k = gamma a_{k-1} + c_k
  // with c_k = u . grad log pi(a_k|s_k), pushed through the weight function.
  const auto mixed_grad = [&](const Eigen::VectorXd& u) {
    int total_steps = 0;
    for (const Trajectory& traj : trajs) {
      total_steps += static_cast<int>(traj.steps.size());
    }
    if (total_steps == 0) {
      return Eigen::VectorXd(Eigen::VectorXd::Zero(weight_fn.param_dim()));
    }

    Eigen::MatrixXd obs(4, total_steps);
    int at = 0;
    for (const Trajectory& traj : trajs) {
      for (const TrajStep& step : traj.steps) obs.col(at++) = step.obs;
    }
    const Eigen::MatrixXd logits = forward_batch(policy.net, obs);
    Eigen::MatrixXd upstream(logits.rows(), total_steps);
    at = 0;
    for (const Trajectory& traj : trajs) {
      for (const TrajStep& step : traj.steps) {
        const Eigen::Vector2d col = logits.col(at);
        const double m = col.maxCoeff();
        Eigen::Vector2d probs = (col.array() - m).exp();
        probs /= probs.sum();
        Eigen::Vector2d up = -probs;
        up[static_cast<int>(step.action)] += 1.0;
        upstream.col(at++) = up;
      }
    }
    const Eigen::VectorXd c = grad_batch_dot(policy.net, obs, upstream, u);

    Eigen::MatrixXd reward_upstream(4, total_steps);
    at = 0;
    for (const Trajectory& traj : trajs) {
      double a_k = 0.0;
      for (const TrajStep& step : traj.steps) {
        a_k = gamma * a_k + c[at];
        reward_upstream.col(at) = a_k * step.reward.as_vector();
        ++at;
      }
    }
    return Eigen::VectorXd(weight_fn.param_grad_batch(obs, reward_upstream) /
                           total_steps);
  };

  OuterGrad out = implicit_gradient(g_task, inner_loss_hvp, mixed_grad, cfg);
  if (out.skipped) out.phi_grad = Eigen::VectorXd::Zero(weight_fn.param_dim());
  return out;
}

int outer_grad_step(WeightFunction& weight_fn, const Eigen::VectorXd& grad,
                    double lr_net, double lr_coeff) {
  if (!grad.allFinite()) return 0;
  if (grad.size() != weight_fn.param_dim()) {
    throw shape_error("outer_grad_step: gradient length mismatch");
  }
  const double norm = grad.norm();
  const Eigen::VectorXd step_dir = norm > 1.0 ? Eigen::VectorXd(grad / norm) : grad;
  const double lr =
      weight_fn.mode() == WeightFunction::Mode::constant ? lr_coeff : lr_net;
  constexpr int kMinIters = 3, kMaxIters = 10;
  int iters = 0;
  for (int i = 0; i < kMaxIters; ++i) {
    weight_fn.set_params(weight_fn.params() + lr * step_dir);
    ++iters;
    if (iters >= kMinIters && norm < 1e-6) break;
  }
  return iters;
}

// ---------------------------------------------------------------------------

BenchStrategy BenchStrategy::parse(const std::string& name) {
  BenchStrategy s;
  if (name == "no_explore") {
    s.kind = Kind::no_exploration;
  } else if (name == "periodic") {
    s.kind = Kind::periodic;
  } else if (name == "morse_rnd") {
    s.kind = Kind::morse;
    s.sampler = BenchSampler::rnd;
  } else if (name == "morse_random") {
    s.kind = Kind::morse;
    s.sampler = BenchSampler::random;
  } else if (name == "morse_cem") {
    s.kind = Kind::morse;
    s.sampler = BenchSampler::cem;
  } else if (name == "morse_cma") {
    s.kind = Kind::morse;
    s.sampler = BenchSampler::cma;
  } else {
    throw config_error("unknown bench strategy '" + name + "'");
  }
  return s;
}

std::string BenchStrategy::name() const {
  switch (kind) {
    case Kind::no_exploration: return "no_explore";
    case Kind::periodic: return "periodic";
    case Kind::morse:
      switch (sampler) {
        case BenchSampler::rnd: return "morse_rnd";
        case BenchSampler::random: return "morse_random";
        case BenchSampler::cem: return "morse_cem";
        case BenchSampler::cma: return "morse_cma";
      }
  }
  return "?";
}

namespace {

/// Novelty-softmax proposal shared by the periodic strategy and the rnd
/// sampler: fit on history, draw N candidates, pick by softmax(novelty).
Eigen::VectorXd novelty_proposal(const ExplorationConfig& cfg, NoveltyScorer& scorer,
                                 Rng& rng) {
  scorer.fit();
  std::vector<Eigen::VectorXd> candidates;
  Eigen::VectorXd scores(cfg.candidate_count);
  candidates.reserve(cfg.candidate_count);
  for (int i = 0; i < cfg.candidate_count; ++i) {
    candidates.push_back(cfg.weight_box.sample(rng));
    scores[i] = scorer.novelty(candidates.back());
  }
  const int pick = softmax_select(scores, cfg.tau, rng);
  scorer.add_history(candidates[pick]);
  return candidates[pick];
}

/// Draw a 5-candidate batch, score it on f, advance the state, adopt the
/// best candidate. Used by the cem and cma samplers.
template <typename State, typename Propose, typename Step>
Eigen::VectorXd batch_proposal(State& state, const Propose& propose, const Step& step,
                               const ScalarField& f, const Box& domain, Rng& rng) {
  ScoredBatch batch;
  int best = 0;
  for (int i = 0; i < 5; ++i) {
    Eigen::VectorXd c = propose(state, domain, rng);
    batch.emplace_back(c, f(Eigen::Vector2d(c[0], c[1])));
    if (batch[i].second > batch[best].second) best = i;
  }
  state = step(state, batch);
  return batch[best].first;
}

}  // namespace

BenchRun bench_run(const ScalarField& f, const Box& domain, BenchStrategy strategy,
                   int budget, Rng& rng, const BenchOptions& opts) {
  if (budget < 1) throw config_error("bench budget must be positive");
  ExplorationConfig gate = opts.gate;
  if (gate.weight_box.dim() == 0) gate.weight_box = domain;

  Rng init_rng = rng.split(1);
  Rng event_rng = rng.split(2);
  NoveltyScorer scorer(2, rng.split(3).next_u64());
  CemState cem{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2)};
  cem.mean = 0.5 * (domain.lo + domain.hi);
  cem.std = 0.5 * (domain.hi - domain.lo);
  CmaState cma = CmaState::init(0.5 * (domain.lo + domain.hi), 0.5);

  BenchRun run;
  Eigen::Vector2d x = opts.start ? *opts.start : Eigen::Vector2d(domain.sample(init_rng));
  run.start = x;
  double value = f(x);
  run.best_score = value;
  double last_check_value = value;

  for (int step = 1; step <= budget; ++step) {
    char event = 'g';
    const bool check = strategy.kind != BenchStrategy::Kind::no_exploration &&
                       step % opts.reset_interval == 0;
    std::optional<Eigen::VectorXd> jump;
    if (check) {
      Rng gate_rng = event_rng.split(static_cast<std::uint64_t>(step));
      if (strategy.kind == BenchStrategy::Kind::periodic) {
        scorer.add_history(x);
        jump = novelty_proposal(gate, scorer, gate_rng);
      } else {
        const double delta_r = value - last_check_value;
        const double p_curr = value;
        last_check_value = value;
        if (strategy.sampler == BenchSampler::rnd) {
          scorer.add_history(x);
          jump = explore_gate(gate, delta_r, p_curr, scorer, gate_rng);
        } else if (delta_r < gate.alpha &&
                   gate_rng.uniform() < 1.0 - p_curr) {
          switch (strategy.sampler) {
            case BenchSampler::random:
              jump = propose_random(gate.weight_box, gate_rng);
              break;
            case BenchSampler::cem:
              jump = batch_proposal(cem, cem_propose, cem_step, f, domain, gate_rng);
              break;
            case BenchSampler::cma:
              jump = batch_proposal(cma, cma_propose, cma_step, f, domain, gate_rng);
              break;
            case BenchSampler::rnd: break;
          }
        }
      }
    }
    if (jump) {
      x = Eigen::Vector2d((*jump)[0], (*jump)[1]);
      event = 'r';
      ++run.reset_events;
    } else {
      FieldGradient g = finite_diff_grad(f, domain, x);
      const double gn = g.grad.norm();
      if (opts.grad_clip > 0.0 && gn > opts.grad_clip) {
        g.grad *= opts.grad_clip / gn;
      }
      x = domain.clip(x + opts.lr * g.grad);
    }
    value = f(x);
    run.best_score = std::max(run.best_score, value);
    run.path.push_back({step, x, value, event});
  }
  run.final_score = value;
  return run;
}

BenchRun bench_run(const Landscape& l, BenchStrategy strategy, int budget, Rng& rng,
                   const BenchOptions& opts) {
  return bench_run([&l](const Eigen::Vector2d& p) { return l.eval(p); },
                   landscape_domain(), strategy, budget, rng, opts);
}

}  // namespace morse

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "morse/config.hpp"
#include "morse/errors.hpp"
#include "morse/harness.hpp"

namespace {

using namespace morse;

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string default_out_dir() {
  const char* env = std::getenv("MORSE_OUT_DIR");
  return env ? env : "out";
}

std::vector<Family> parse_families(const std::string& name) {
  if (name == "all") {
    return {Family::smooth_polynomial, Family::fixed_nn, Family::random_spiky};
  }
  return {family_from_string(name)};
}

struct BenchArgs {
  std::string family = "all";
  std::string strategies = "no_explore,periodic,morse_rnd";
  std::string out;
  std::string config;
  int landscape_seeds = 10;
  int run_seeds = 10;
  int budget = 100;
  std::uint64_t master_seed = 1;
};

struct CartArgs {
  std::string strategies = "constant,gradient,gradient_reset,morse";
  std::string out;
  std::string config;
  std::string dump_trajectory;
  int seeds = 10;
  int epochs = 0;  // 0 -> configured default
  std::uint64_t master_seed = 1;
};

struct DumpArgs {
  std::string family;
  std::string out;
  std::uint64_t seed = 0;
  int grid = 101;
};

struct AggArgs {
  std::string in_dir;
  std::string out = "table.csv";
};

/// Config-file values fill in flags the user did not pass on the CLI.
template <typename T>
void fill_from_config(const CLI::App* cmd, const std::string& flag,
                      const ConfigMap& file, const std::string& key, T& value);

template <>
void fill_from_config<int>(const CLI::App* cmd, const std::string& flag,
                           const ConfigMap& file, const std::string& key, int& value) {
  if (!cmd->count(flag)) value = config_int(file, key, value);
}

template <>
void fill_from_config<std::string>(const CLI::App* cmd, const std::string& flag,
                                   const ConfigMap& file, const std::string& key,
                                   std::string& value) {
  if (!cmd->count(flag)) value = config_string(file, key, value);
}

int cmd_bench(const CLI::App* cmd, BenchArgs args) {
  ConfigMap file;
  if (!args.config.empty()) {
    file = load_config(args.config, {"family", "strategies", "landscape-seeds",
                                     "run-seeds", "budget", "out", "master-seed"});
  }
  fill_from_config(cmd, "--family", file, "family", args.family);
  fill_from_config(cmd, "--strategies", file, "strategies", args.strategies);
  fill_from_config(cmd, "--landscape-seeds", file, "landscape-seeds", args.landscape_seeds);
  fill_from_config(cmd, "--run-seeds", file, "run-seeds", args.run_seeds);
  fill_from_config(cmd, "--budget", file, "budget", args.budget);
  fill_from_config(cmd, "--out", file, "out", args.out);
  int master = static_cast<int>(args.master_seed);
  fill_from_config(cmd, "--master-seed", file, "master-seed", master);

  BenchExperimentConfig cfg;
  cfg.families = parse_families(args.family);
  for (const std::string& s : split_list(args.strategies)) {
    cfg.strategies.push_back(BenchStrategy::parse(s));
  }
  if (cfg.strategies.empty()) throw config_error("no strategies requested");
  cfg.landscape_seeds = args.landscape_seeds;
  cfg.run_seeds = args.run_seeds;
  cfg.budget = args.budget;
  cfg.master_seed = static_cast<std::uint64_t>(master);
  if (cfg.landscape_seeds < 1 || cfg.run_seeds < 1 || cfg.budget < 1) {
    throw config_error("seed counts and budget must be positive");
  }
  const std::string out_dir = args.out.empty() ? default_out_dir() : args.out;
  int written = 0;
  for (Family family : cfg.families) {
    for (int ls = 0; ls < cfg.landscape_seeds; ++ls) {
      for (int rs = 0; rs < cfg.run_seeds; ++rs) {
        for (const BenchStrategy& strategy : cfg.strategies) {
          persist_run(bench_record(family, ls, rs, strategy, cfg), out_dir);
          ++written;
        }
      }
    }
  }
  std::cout << "wrote " << written << " bench runs to " << out_dir << "\n";
  return 0;
}

int cmd_cartpole(const CLI::App* cmd, CartArgs args) {
  ConfigMap file;
  if (!args.config.empty()) {
    file = load_config(args.config,
                       {"strategies", "seeds", "epochs", "out", "master-seed"});
  }
  fill_from_config(cmd, "--strategies", file, "strategies", args.strategies);
  fill_from_config(cmd, "--seeds", file, "seeds", args.seeds);
  fill_from_config(cmd, "--epochs", file, "epochs", args.epochs);
  fill_from_config(cmd, "--out", file, "out", args.out);
  int master = static_cast<int>(args.master_seed);
  fill_from_config(cmd, "--master-seed", file, "master-seed", master);

  CartExperimentConfig cfg;
  cfg.strategies.clear();
  for (const std::string& s : split_list(args.strategies)) {
    cfg.strategies.push_back(cart_strategy_from_string(s));
  }
  if (cfg.strategies.empty()) throw config_error("no strategies requested");
  cfg.seeds = args.seeds;
  if (args.epochs > 0) cfg.train.budget_epochs = args.epochs;
  cfg.master_seed = static_cast<std::uint64_t>(master);
  if (cfg.seeds < 1 || cfg.train.budget_epochs < 1) {
    throw config_error("seeds and epochs must be positive");
  }
  const std::string out_dir = args.out.empty() ? default_out_dir() : args.out;

  if (!args.dump_trajectory.empty()) {
    // One PD-controller episode, for inspecting the interference mechanics.
    std::ofstream csv(args.dump_trajectory);
    if (!csv) throw std::runtime_error("cannot write " + args.dump_trajectory);
    csv << "t,x,x_dot,theta,theta_dot,action,r_task,r_survival,r_position,"
           "r_interference\n";
    Rng rng(cfg.master_seed);
    CartState s = CartPoleEnv::reset(rng);
    bool done = false;
    while (!done) {
      const CartAction a = pd_action(s);
      const StepResult r = CartPoleEnv::step(s, a);
      csv << s.t << ',' << s.x << ',' << s.x_dot << ',' << s.theta << ','
          << s.theta_dot << ',' << (a == CartAction::right ? 1 : 0) << ','
          << r.reward.task << ',' << r.reward.survival << ',' << r.reward.position
          << ',' << r.reward.interference << '\n';
      s = r.state;
      done = r.done;
    }
  }

  int written = 0;
  for (CartStrategy strategy : cfg.strategies) {
    for (int seed = 0; seed < cfg.seeds; ++seed) {
      persist_run(cartpole_record(strategy, seed, cfg), out_dir);
      ++written;
    }
  }
  std::cout << "wrote " << written << " cartpole runs to " << out_dir << "\n";
  return 0;
}

int cmd_dump_landscape(const DumpArgs& args) {
  const Family family = family_from_string(args.family);
  if (args.grid < 2) throw config_error("grid must be at least 2");
  const Landscape l = make_landscape(family, args.seed);
  std::ostream* os = &std::cout;
  std::ofstream f;
  if (!args.out.empty()) {
    f.open(args.out);
    if (!f) throw std::runtime_error("cannot write " + args.out);
    os = &f;
  }
  *os << "x1,x2,f\n";
  char buf[96];
  for (int i = 0; i < args.grid; ++i) {
    for (int j = 0; j < args.grid; ++j) {
      const double x1 = -1.0 + 2.0 * i / (args.grid - 1);
      const double x2 = -1.0 + 2.0 * j / (args.grid - 1);
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", x1, x2,
                    l.eval({x1, x2}));
      *os << buf;
    }
  }
  return 0;
}

int cmd_aggregate(const AggArgs& args) {
  const auto runs = load_runs(args.in_dir);
  if (runs.empty()) throw config_error("no run csvs under " + args.in_dir);
  write_aggregate_csv(aggregate_runs(runs), args.out);
  std::cout << "aggregated " << runs.size() << " runs into " << args.out << "\n";
  return 0;
}

void check(bool ok, const std::string& what, int& failures) {
  std::cout << (ok ? "  ok    " : "  FAIL  ") << what << "\n";
  if (!ok) ++failures;
}

int cmd_selftest() {
  int failures = 0;
  {
    const DenseNet net = init_net({2, 8, 1}, 7);
    const Eigen::Vector2d x(0.3, -0.4);
    const bool pure = forward(net, x) == forward(net, x) &&
                      init_net({2, 8, 1}, 7).params == net.params;
    check(pure, "net forward purity and seed determinism", failures);
  }
  {
    bool in_range = true;
    for (int seed = 0; seed < 3; ++seed) {
      const Landscape l = make_landscape(Family::random_spiky, seed);
      Rng rng(seed + 99);
      for (int i = 0; i < 10000; ++i) {
        const double v = l.eval({rng.uniform(-1, 1), rng.uniform(-1, 1)});
        in_range = in_range && v >= 0.0 && v <= 1.0;
      }
    }
    check(in_range, "landscape eval stays in [0,1]", failures);
  }
  {
    ExplorationConfig cfg;
    cfg.weight_box = Box::uniform(2, -1.0, 1.0);
    NoveltyScorer scorer(2, 5);
    Rng rng(11);
    bool in_box = true;
    for (int i = 0; i < 1000; ++i) {
      const auto w = explore_gate(cfg, 0.0, 0.0, scorer, rng);
      in_box = in_box && w && cfg.weight_box.contains(*w);
    }
    check(in_box, "explore_gate emits in-box weights", failures);
  }
  {
    NeumannConfig cfg;
    cfg.terms = 5;
    Eigen::VectorXd v(2);
    v << 1.0, -2.0;
    const auto half = neumann_inverse_apply(
        [](const Eigen::VectorXd& u) { return Eigen::VectorXd(0.5 * u); }, v, cfg);
    check(!half.diverged && (half.value - 1.9375 * v).norm() == 0.0,
          "neumann geometric series", failures);
  }
  {
    Rng rng(3);
    CartState s = CartPoleEnv::reset(rng);
    bool done = false, success = false;
    while (!done) {
      const StepResult r = CartPoleEnv::step(s, pd_action(s));
      s = r.state;
      done = r.done;
      success = r.success;
    }
    check(success, "pd controller stabilizes cartpole", failures);
  }
  {
    RunRecord rec;
    rec.run_id = "selftest-run";
    rec.experiment = "bench";
    rec.strategy = "no_explore";
    rec.family = "smooth";
    SeriesRow row;
    row.step = 1;
    row.value = 0.123456789012345678;
    row.weights = Eigen::Vector2d(0.1, -0.2);
    row.event = "grad";
    rec.series.push_back(row);
    rec.final_score = row.value;
    rec.best_score = row.value;
    const std::string dir =
        (std::filesystem::temp_directory_path() / "morse_selftest").string();
    const std::string path = persist_run(rec, dir);
    const RunRecord back = load_run(path);
    check(back.series.size() == 1 && back.series[0].value == row.value &&
              back.final_score == rec.final_score,
          "run record round-trip at full precision", failures);
    std::filesystem::remove_all(dir);
  }
  std::cout << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MORSE: bi-level reward shaping with performance-gated, "
               "novelty-guided exploration"};
  app.require_subcommand(1);

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "synthetic landscape benchmark");
  bench->add_option("--family", bench_args.family, "all|smooth|fixednn|spiky");
  bench->add_option("--strategies", bench_args.strategies,
                    "comma list: no_explore,periodic,morse_rnd,morse_random,"
                    "morse_cem,morse_cma");
  bench->add_option("--landscape-seeds", bench_args.landscape_seeds,
                    "landscape seeds per family");
  bench->add_option("--run-seeds", bench_args.run_seeds,
                    "optimization runs per landscape");
  bench->add_option("--budget", bench_args.budget, "update steps per run");
  bench->add_option("--out", bench_args.out, "output directory");
  bench->add_option("--master-seed", bench_args.master_seed, "stream master seed");
  bench->add_option("--config", bench_args.config, "key = value config file");

  CartArgs cart_args;
  auto* cart = app.add_subcommand("cartpole", "multi-objective cartpole experiment");
  cart->add_option("--strategies", cart_args.strategies,
                   "comma list: constant,gradient,gradient_reset,morse");
  cart->add_option("--seeds", cart_args.seeds, "number of seeds");
  cart->add_option("--epochs", cart_args.epochs, "training epochs per run");
  cart->add_option("--out", cart_args.out, "output directory");
  cart->add_option("--master-seed", cart_args.master_seed, "stream master seed");
  cart->add_option("--config", cart_args.config, "key = value config file");
  cart->add_option("--dump-trajectory", cart_args.dump_trajectory,
                   "write one PD-controller episode CSV here");

  DumpArgs dump_args;
  auto* dump = app.add_subcommand("dump-landscape", "write a landscape grid CSV");
  dump->add_option("--family", dump_args.family, "smooth|fixednn|spiky")->required();
  dump->add_option("--seed", dump_args.seed, "landscape seed");
  dump->add_option("--grid", dump_args.grid, "grid resolution");
  dump->add_option("--out", dump_args.out, "output file (stdout when empty)");

  AggArgs agg_args;
  auto* agg = app.add_subcommand("aggregate", "aggregate run records into a table");
  agg->add_option("--in", agg_args.in_dir, "directory of run records")->required();
  agg->add_option("--out", agg_args.out, "output csv");

  app.add_subcommand("selftest", "run the built-in invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return 2;
  }

  try {
    if (app.got_subcommand("bench")) return cmd_bench(bench, bench_args);
    if (app.got_subcommand("cartpole")) return cmd_cartpole(cart, cart_args);
    if (app.got_subcommand("dump-landscape")) return cmd_dump_landscape(dump_args);
    if (app.got_subcommand("aggregate")) return cmd_aggregate(agg_args);
    if (app.got_subcommand("selftest")) return cmd_selftest();
  } catch (const morse::config_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

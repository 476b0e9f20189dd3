#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "morse/outer.hpp"
#include "morse/train.hpp"

namespace morse {

struct SeriesRow {
  int step = 0;
  double value = 0.0;          // bench: f(x); cartpole: success rate P
  Eigen::VectorXd weights;     // bench: (x1, x2); cartpole: w snapshot
  std::string event;
};

/// One optimization run, ready for persistence. The series holds exactly
/// `budget` rows and final_score equals the last row's value.
struct RunRecord {
  std::string run_id;
  std::string experiment;  // "bench" | "cartpole"
  std::string strategy;
  std::string family;      // bench family, or "cartpole"
  std::uint64_t seed = 0;
  std::uint64_t landscape_seed = 0;
  std::vector<SeriesRow> series;
  double final_score = 0.0;
  double best_score = 0.0;
  std::uint64_t config_hash = 0;
  std::int64_t wall_ms = 0;
};

/// Writes <run_id>.csv (series, 17 significant digits) and <run_id>.meta
/// (key = value manifest). Returns the csv path.
std::string persist_run(const RunRecord& record, const std::string& dir);

/// Reads a record back from its csv path (the .meta sibling must exist).
RunRecord load_run(const std::string& csv_path);

/// All *.csv run records under a directory.
std::vector<RunRecord> load_runs(const std::string& dir);

struct AggregateRow {
  std::string strategy;
  std::string family;
  double mean = 0.0;
  double stddev = 0.0;  // population denominator n
  int n = 0;
};

/// Mean/std of final scores keyed by (strategy, family). Values are sorted
/// before summation, so shuffled inputs aggregate to identical tables.
std::vector<AggregateRow> aggregate_runs(const std::vector<RunRecord>& runs);

void write_aggregate_csv(const std::vector<AggregateRow>& rows,
                         const std::string& path);

// ---------------------------------------------------------------------------
// Experiment drivers shared by the CLI and the acceptance suite
// ---------------------------------------------------------------------------

struct BenchExperimentConfig {
  std::vector<Family> families{Family::smooth_polynomial, Family::fixed_nn,
                               Family::random_spiky};
  std::vector<BenchStrategy> strategies;
  int landscape_seeds = 10;
  int run_seeds = 10;
  int budget = 100;
  BenchOptions options;
  std::uint64_t master_seed = 1;
};

/// One deterministic bench run. The per-run stream derives from
/// (master, family, landscape seed, run seed) only, so every strategy sees
/// the same start point and adding strategies never perturbs other runs.
RunRecord bench_record(Family family, std::uint64_t landscape_seed,
                       std::uint64_t run_seed, BenchStrategy strategy,
                       const BenchExperimentConfig& cfg);

std::vector<RunRecord> run_bench_experiment(const BenchExperimentConfig& cfg);

struct CartExperimentConfig {
  std::vector<CartStrategy> strategies{CartStrategy::constant, CartStrategy::gradient,
                                       CartStrategy::gradient_reset, CartStrategy::morse};
  int seeds = 10;
  CartTrainConfig train;
  std::uint64_t master_seed = 1;
};

RunRecord cartpole_record(CartStrategy strategy, std::uint64_t seed,
                          const CartExperimentConfig& cfg);

std::vector<RunRecord> run_cartpole_experiment(const CartExperimentConfig& cfg);

/// Mean final score of the given (strategy, family) cell.
double cell_mean(const std::vector<RunRecord>& runs, const std::string& strategy,
                 const std::string& family);

}  // namespace morse

#include "morse/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "morse/errors.hpp"

namespace fs = std::filesystem;

namespace morse {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string persist_run(const RunRecord& record, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path csv_path = fs::path(dir) / (record.run_id + ".csv");
  const fs::path meta_path = fs::path(dir) / (record.run_id + ".meta");
  {
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
    if (record.experiment == "bench") {
      csv << "step,x1,x2,value,event\n";
      for (const SeriesRow& row : record.series) {
        csv << row.step << ',' << fmt17(row.weights[0]) << ','
            << fmt17(row.weights[1]) << ',' << fmt17(row.value) << ','
            << row.event << '\n';
      }
    } else {
      csv << "epoch,event,P";
      for (Eigen::Index i = 0; i < (record.series.empty()
                                        ? 0
                                        : record.series.front().weights.size());
           ++i) {
        csv << ",w" << (i + 1);
      }
      csv << '\n';
      for (const SeriesRow& row : record.series) {
        csv << row.step << ',' << row.event << ',' << fmt17(row.value);
        for (Eigen::Index i = 0; i < row.weights.size(); ++i) {
          csv << ',' << fmt17(row.weights[i]);
        }
        csv << '\n';
      }
    }
  }
  {
    std::ofstream meta(meta_path);
    if (!meta) throw std::runtime_error("cannot write " + meta_path.string());
    meta << "run_id = " << record.run_id << '\n'
         << "experiment = " << record.experiment << '\n'
         << "strategy = " << record.strategy << '\n'
         << "family = " << record.family << '\n'
         << "seed = " << record.seed << '\n'
         << "landscape_seed = " << record.landscape_seed << '\n'
         << "config_hash = " << std::hex << record.config_hash << std::dec << '\n'
         << "final_score = " << fmt17(record.final_score) << '\n'
         << "best_score = " << fmt17(record.best_score) << '\n'
         << "wall_ms = " << record.wall_ms << '\n';
  }
  return csv_path.string();
}

RunRecord load_run(const std::string& csv_path) {
  RunRecord record;
  const fs::path meta_path = fs::path(csv_path).replace_extension(".meta");
  {
    std::ifstream meta(meta_path);
    if (!meta) throw std::runtime_error("missing meta file " + meta_path.string());
    std::string line;
    std::map<std::string, std::string> kv;
    while (std::getline(meta, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    record.run_id = kv["run_id"];
    record.experiment = kv["experiment"];
    record.strategy = kv["strategy"];
    record.family = kv["family"];
    record.seed = std::strtoull(kv["seed"].c_str(), nullptr, 10);
    record.landscape_seed = std::strtoull(kv["landscape_seed"].c_str(), nullptr, 10);
    record.config_hash = std::strtoull(kv["config_hash"].c_str(), nullptr, 16);
    record.final_score = std::strtod(kv["final_score"].c_str(), nullptr);
    record.best_score = std::strtod(kv["best_score"].c_str(), nullptr);
    record.wall_ms = std::strtoll(kv["wall_ms"].c_str(), nullptr, 10);
  }
  std::ifstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot read " + csv_path);
  std::string line;
  if (!std::getline(csv, line)) throw std::runtime_error("empty run csv " + csv_path);
  const std::vector<std::string> header = split_csv_line(line);
  const bool bench = !header.empty() && header[0] == "step";
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    SeriesRow row;
    if (bench) {
      row.step = std::atoi(fields[0].c_str());
      row.weights.resize(2);
      row.weights[0] = std::strtod(fields[1].c_str(), nullptr);
      row.weights[1] = std::strtod(fields[2].c_str(), nullptr);
      row.value = std::strtod(fields[3].c_str(), nullptr);
      row.event = fields[4];
    } else {
      row.step = std::atoi(fields[0].c_str());
      row.event = fields[1];
      row.value = std::strtod(fields[2].c_str(), nullptr);
      row.weights.resize(static_cast<Eigen::Index>(fields.size()) - 3);
      for (std::size_t i = 3; i < fields.size(); ++i) {
        row.weights[static_cast<Eigen::Index>(i - 3)] =
            std::strtod(fields[i].c_str(), nullptr);
      }
    }
    record.series.push_back(std::move(row));
  }
  return record;
}

std::vector<RunRecord> load_runs(const std::string& dir) {
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".csv") paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<RunRecord> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(load_run(p));
  return out;
}

std::vector<AggregateRow> aggregate_runs(const std::vector<RunRecord>& runs) {
  std::map<std::pair<std::string, std::string>, std::vector<double>> cells;
  for (const RunRecord& r : runs) {
    cells[{r.strategy, r.family}].push_back(r.final_score);
  }
  std::vector<AggregateRow> rows;
  for (auto& [key, values] : cells) {
    std::sort(values.begin(), values.end());
    AggregateRow row;
    row.strategy = key.first;
    row.family = key.second;
    row.n = static_cast<int>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    row.mean = sum / row.n;
    double sq = 0.0;
    for (double v : values) sq += (v - row.mean) * (v - row.mean);
    row.stddev = std::sqrt(sq / row.n);
    rows.push_back(row);
  }
  return rows;
}

void write_aggregate_csv(const std::vector<AggregateRow>& rows,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "strategy,family,mean,std,n\n";
  for (const AggregateRow& r : rows) {
    out << r.strategy << ',' << r.family << ',' << fmt17(r.mean) << ','
        << fmt17(r.stddev) << ',' << r.n << '\n';
  }
}

// ---------------------------------------------------------------------------

namespace {

Rng bench_run_stream(std::uint64_t master, Family family, std::uint64_t landscape_seed,
                     std::uint64_t run_seed) {
  return Rng(master)
      .split(fnv1a("bench", 5))
      .split(static_cast<std::uint64_t>(family) + 1)
      .split(landscape_seed + 1)
      .split(run_seed + 1);
}

}  // namespace

RunRecord bench_record(Family family, std::uint64_t landscape_seed,
                       std::uint64_t run_seed, BenchStrategy strategy,
                       const BenchExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const Landscape landscape = make_landscape(family, landscape_seed);
  Rng stream = bench_run_stream(cfg.master_seed, family, landscape_seed, run_seed);
  const BenchRun run = bench_run(landscape, strategy, cfg.budget, stream, cfg.options);

  RunRecord record;
  record.experiment = "bench";
  record.strategy = strategy.name();
  record.family = family_name(family);
  record.seed = run_seed;
  record.landscape_seed = landscape_seed;
  record.run_id = "bench-" + record.family + "-" + record.strategy + "-" +
                  std::to_string(run_seed) + "-" + std::to_string(landscape_seed);
  for (const BenchStep& s : run.path) {
    SeriesRow row;
    row.step = s.step;
    row.value = s.value;
    row.weights = Eigen::Vector2d(s.x[0], s.x[1]);
    row.event = s.event == 'r' ? "reset" : "grad";
    record.series.push_back(std::move(row));
  }
  record.final_score = run.final_score;
  record.best_score = run.best_score;
  std::string canon = "experiment=bench;family=" + record.family +
                      ";strategy=" + record.strategy +
                      ";budget=" + std::to_string(cfg.budget) +
                      ";landscape_seed=" + std::to_string(landscape_seed) +
                      ";run_seed=" + std::to_string(run_seed) +
                      ";master=" + std::to_string(cfg.master_seed) +
                      ";lr=" + fmt17(cfg.options.lr) +
                      ";grad_clip=" + fmt17(cfg.options.grad_clip);
  record.config_hash = fnv1a(canon.data(), canon.size());
  record.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return record;
}

std::vector<RunRecord> run_bench_experiment(const BenchExperimentConfig& cfg) {
  std::vector<RunRecord> out;
  for (Family family : cfg.families) {
    for (int ls = 0; ls < cfg.landscape_seeds; ++ls) {
      for (int rs = 0; rs < cfg.run_seeds; ++rs) {
        for (const BenchStrategy& strategy : cfg.strategies) {
          out.push_back(bench_record(family, ls, rs, strategy, cfg));
        }
      }
    }
  }
  return out;
}

RunRecord cartpole_record(CartStrategy strategy, std::uint64_t seed,
                          const CartExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t run_seed =
      Rng(cfg.master_seed).split(fnv1a("cartpole", 8)).split(seed + 1).next_u64();
  const CartTrainResult result = train_cartpole(strategy, cfg.train, run_seed);

  RunRecord record;
  record.experiment = "cartpole";
  record.strategy = cart_strategy_name(strategy);
  record.family = "cartpole";
  record.seed = seed;
  record.run_id = "cartpole-" + record.strategy + "-" + std::to_string(seed);
  for (const EventRow& row : result.log.rows) {
    if (row.event == EventType::reset) continue;  // keep one row per epoch
    SeriesRow s;
    s.step = row.epoch;
    s.value = row.performance;
    s.weights = row.weights;
    s.event = event_name(row.event);
    record.series.push_back(std::move(s));
  }
  record.final_score = result.final_success;
  record.best_score = result.best_success;
  std::string canon = "experiment=cartpole;strategy=" + record.strategy +
                      ";epochs=" + std::to_string(cfg.train.budget_epochs) +
                      ";seed=" + std::to_string(seed) +
                      ";master=" + std::to_string(cfg.master_seed) +
                      ";episodes=" + std::to_string(cfg.train.episodes_per_epoch);
  record.config_hash = fnv1a(canon.data(), canon.size());
  record.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return record;
}

std::vector<RunRecord> run_cartpole_experiment(const CartExperimentConfig& cfg) {
  std::vector<RunRecord> out;
  for (CartStrategy strategy : cfg.strategies) {
    for (int seed = 0; seed < cfg.seeds; ++seed) {
      out.push_back(cartpole_record(strategy, seed, cfg));
    }
  }
  return out;
}

double cell_mean(const std::vector<RunRecord>& runs, const std::string& strategy,
                 const std::string& family) {
  double sum = 0.0;
  int n = 0;
  for (const RunRecord& r : runs) {
    if (r.strategy == strategy && (family.empty() || r.family == family)) {
      sum += r.final_score;
      ++n;
    }
  }
  if (n == 0) throw config_error("no runs for " + strategy + "/" + family);
  return sum / n;
}

}  // namespace morse

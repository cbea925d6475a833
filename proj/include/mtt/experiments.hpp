#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mtt/experiment_config.hpp"
#include "mtt/results.hpp"

namespace mtt {

struct RunOptions {
  /// Multiplies Monte Carlo outer sample counts and replicate counts (not
  /// particle counts or sequence lengths); results never drop below a floor
  /// of 100 outer samples or 10 replicates.
  double scale = 1.0;
  int threads = 0;      // 0: MTT_FISHER_THREADS, else hardware concurrency
  std::string out_dir;  // empty: the config's output field
};

struct RunResult {
  std::vector<ResultRow> rows;
  nlohmann::json manifest;
  std::string out_dir;
};

/// Runs the experiment without touching the file system.
RunResult execute_experiment(const ExperimentConfig& config, const RunOptions& options);

/// Writes results.csv and manifest.json into result.out_dir.
void write_outputs(const RunResult& result);

std::string git_hash();

}  // namespace mtt

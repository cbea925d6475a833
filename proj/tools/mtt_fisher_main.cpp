#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mtt_fisher.h"

namespace {

int exit_code(mtt_status status) {
  switch (status) {
    case MTT_OK: return 0;
    case MTT_ERR_CONFIG: return 2;
    case MTT_ERR_NUMERICAL_COLLAPSE: return 3;
    default: return 1;
  }
}

int report(mtt_status status) {
  std::cerr << "mtt-fisher: " << mtt_last_error() << '\n';
  return exit_code(status);
}

int cmd_list() {
  char* json = nullptr;
  if (mtt_status s = mtt_list_experiments(&json); s != MTT_OK) return report(s);
  std::cout << json << '\n';
  mtt_string_free(json);
  return 0;
}

int cmd_validate(const std::string& path) {
  mtt_config* config = nullptr;
  if (mtt_status s = mtt_config_load(path.c_str(), &config); s != MTT_OK) return report(s);
  char* resolved = nullptr;
  const mtt_status s = mtt_config_resolved_json(config, &resolved);
  mtt_config_free(config);
  if (s != MTT_OK) return report(s);
  std::cout << "OK\n" << resolved << '\n';
  mtt_string_free(resolved);
  return 0;
}

int cmd_run(const std::string& path, double scale, const std::string& out_dir, int threads) {
  mtt_config* config = nullptr;
  if (mtt_status s = mtt_config_load(path.c_str(), &config); s != MTT_OK) return report(s);
  mtt_run_options options;
  mtt_run_options_init(&options);
  options.scale = scale;
  options.threads = threads;
  options.out_dir = out_dir.empty() ? nullptr : out_dir.c_str();
  mtt_result* result = nullptr;
  const mtt_status s = mtt_run(config, &options, &result);
  mtt_config_free(config);
  if (s != MTT_OK) return report(s);
  char* dir = nullptr;
  if (mtt_result_out_dir(result, &dir) == MTT_OK) {
    std::cerr << "wrote " << mtt_result_row_count(result) << " rows to " << dir << "/results.csv\n";
    mtt_string_free(dir);
  }
  mtt_result_free(result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fisher information of multi-target observation models"};
  app.require_subcommand(1);

  std::string run_config;
  double scale = 1.0;
  std::string out_dir;
  int threads = 0;
  auto* run = app.add_subcommand("run", "run an experiment and write results.csv and manifest.json");
  run->add_option("config", run_config, "experiment configuration (JSON)")->required();
  run->add_option("--scale", scale, "multiply Monte Carlo sample and replicate counts")
      ->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "output directory (default: the config's output field)");
  run->add_option("--threads", threads, "worker threads (default: MTT_FISHER_THREADS, else all cores)")
      ->check(CLI::NonNegativeNumber);

  std::string validate_config;
  auto* validate = app.add_subcommand("validate", "check a configuration and print it with defaults filled in");
  validate->add_option("config", validate_config, "experiment configuration (JSON)")->required();

  auto* list = app.add_subcommand("list-experiments", "list experiment ids with descriptions and defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (*run) return cmd_run(run_config, scale, out_dir, threads);
  if (*validate) return cmd_validate(validate_config);
  if (*list) return cmd_list();
  return 2;
}

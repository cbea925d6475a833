#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace mtt {

/// A validated experiment description: id, seed, output directory and the
/// experiment's settings with defaults filled in.
struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string output;
  nlohmann::json settings = nlohmann::json::object();

  /// Flat object {experiment, seed, output, <settings>}; parse_config accepts it back.
  nlohmann::json to_json() const;
};

struct ExperimentInfo {
  std::string id;
  std::string description;
  nlohmann::json defaults;
};

const std::vector<ExperimentInfo>& experiment_catalog();

/// Throws ConfigError naming the offending field: unknown experiment id,
/// missing seed ("seed required"), unknown fields, or wrong value types.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace mtt

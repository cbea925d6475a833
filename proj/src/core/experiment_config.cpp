#include "mtt/experiment_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "mtt/errors.hpp"

namespace mtt {

namespace {

using nlohmann::json;

json logspace(double lo_exp, double hi_exp, int count) {
  json out = json::array();
  for (int i = 0; i < count; ++i) {
    const double e = lo_exp + (hi_exp - lo_exp) * i / (count - 1);
    out.push_back(std::pow(10.0, e));
  }
  return out;
}

json int_range(int lo, int hi) {
  json out = json::array();
  for (int i = lo; i <= hi; ++i) out.push_back(i);
  return out;
}

/// Model fields shared by the estimation experiments.
json model_defaults() {
  return {{"num_targets", 1},   {"tau", 1.0},        {"obs_variance", 1.0}, {"walk_std", 0.0},
          {"p_detection", 1.0}, {"clutter_rate", 0.0}, {"clutter_variance", 1.0}, {"alpha", 1},
          {"beta", 0}};
}

std::vector<ExperimentInfo> build_catalog() {
  std::vector<ExperimentInfo> c;
  c.push_back({"false-alarm",
               "relative loss of one static target against the clutter rate, worst-case and uniform clutter",
               {{"lambda_grid", logspace(-1.0, 2.0, 13)},
                {"uniform_half_widths", {5, 10, 25, 50, 100}},
                {"samples", 500000},
                {"obs_variance", 1.0}}});
  c.push_back({"association-tau-alpha",
               "relative loss of five static targets at tau (i - 3) against tau, one curve per alpha",
               {{"num_targets", 5},
                {"tau_grid", {0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0}},
                {"alpha_grid", {1, 2, 3, 4, 5, "inf"}},
                {"beta", 0},
                {"samples", 10000},
                {"obs_variance", 1.0}}});
  c.push_back({"num-targets-special",
               "relative loss of the epsilon-window likelihood against K, constant and adaptive observation space",
               {{"k_grid", int_range(2, 10)},
                {"epsilon", 0.1},
                {"spacing", 5.0},
                {"constant_space_targets", 10},
                {"samples", 100000}}});
  c.push_back({"num-targets-assoc",
               "relative loss under full association uncertainty against K, targets spaced by tau",
               {{"k_grid", int_range(1, 10)},
                {"tau", 1.0},
                {"alpha", "inf"},
                {"samples", 10000},
                {"obs_variance", 1.0}}});
  c.push_back({"detection-failure",
               "relative loss of a random-walk target with detection failures against p_D, with 1 - p_D reference",
               {{"p_grid", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}},
                {"walk_std", 0.1},
                {"frames", 50},
                {"obs_variance", 1.0},
                {"inner_samples", 1000},
                {"outer_samples", 10000},
                {"state_integration", "auto"}}});
  json consistency = model_defaults();
  consistency["n_grid"] = {100, 400, 1600, 6400};
  consistency["replicates"] = 100;
  consistency["particles"] = 1000;
  c.push_back({"consistency", "mean absolute MLE error against the sequence length", consistency});
  json normality = model_defaults();
  normality["frames"] = 2000;
  normality["replicates"] = 200;
  normality["fisher_samples"] = 100000;
  normality["particles"] = 1000;
  c.push_back({"normality", "variance of sqrt(n) (theta_hat - theta*) against the inverse Fisher information",
               normality});
  json gap = model_defaults();
  gap["theta_grid"] = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.25, 1.5, 1.75, 2.0};
  gap["frames"] = 2000;
  gap["particles"] = 1000;
  c.push_back({"likelihood-gap", "normalized log-likelihood ratio against theta on one long sequence", gap});
  c.push_back({"property-suite",
               "oracle and identity checks: brute-force likelihood, association weights, combinatorics, scores",
               {{"instances", 50}, {"score_instances", 20}}});
  return c;
}

bool same_kind(const json& expected, const json& value) {
  if (expected.is_number_integer()) return value.is_number_integer();
  if (expected.is_number()) return value.is_number();
  return expected.type() == value.type();
}

void check_bound(const json& v, const std::string& name) {
  if (v.is_string()) {
    if (v.get<std::string>() != "inf") throw ConfigError("field '" + name + "' must be an integer or \"inf\"");
  } else if (!v.is_number_integer()) {
    throw ConfigError("field '" + name + "' must be an integer or \"inf\"");
  } else if (v.get<long long>() < (name == "beta" ? 0 : 1)) {
    throw ConfigError("field '" + name + "' is out of range (alpha >= 1, beta >= 0)");
  }
}

}  // namespace

const std::vector<ExperimentInfo>& experiment_catalog() {
  static const std::vector<ExperimentInfo> catalog = build_catalog();
  return catalog;
}

json ExperimentConfig::to_json() const {
  json out = settings;
  out["experiment"] = experiment;
  out["seed"] = seed;
  out["output"] = output;
  return out;
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  if (!doc.contains("experiment")) throw ConfigError("experiment id required");
  if (!doc["experiment"].is_string()) throw ConfigError("field 'experiment' must be a string");
  const std::string id = doc["experiment"].get<std::string>();
  const ExperimentInfo* info = nullptr;
  for (const auto& e : experiment_catalog()) {
    if (e.id == id) info = &e;
  }
  if (!info) throw ConfigError("unknown experiment id '" + id + "'");
  if (!doc.contains("seed")) throw ConfigError("seed required");
  if (!doc["seed"].is_number_unsigned() && !(doc["seed"].is_number_integer() && doc["seed"].get<std::int64_t>() >= 0)) {
    throw ConfigError("field 'seed' must be a non-negative integer");
  }

  ExperimentConfig config;
  config.experiment = id;
  config.seed = doc["seed"].get<std::uint64_t>();
  config.output = "results/" + id;
  config.settings = info->defaults;
  for (const auto& [key, value] : doc.items()) {
    if (key == "experiment" || key == "seed") continue;
    if (key == "output") {
      if (!value.is_string()) throw ConfigError("field 'output' must be a string");
      config.output = value.get<std::string>();
      continue;
    }
    if (!info->defaults.contains(key)) {
      throw ConfigError("unknown field '" + key + "' for experiment '" + id + "'");
    }
    const json& expected = info->defaults[key];
    if (key == "alpha" || key == "beta") {
      check_bound(value, key);
    } else if (expected.is_array()) {
      if (!value.is_array() || value.empty()) throw ConfigError("field '" + key + "' must be a non-empty array");
    } else if (!same_kind(expected, value)) {
      throw ConfigError("field '" + key + "' has the wrong type (expected " + std::string(expected.type_name()) + ")");
    }
    config.settings[key] = value;
  }
  if (config.settings.contains("state_integration")) {
    const std::string s = config.settings["state_integration"].get<std::string>();
    if (s != "auto" && s != "particles") {
      throw ConfigError("field 'state_integration' must be \"auto\" or \"particles\"");
    }
  }
  if (config.settings.contains("alpha_grid")) {
    for (const auto& a : config.settings["alpha_grid"]) check_bound(a, "alpha_grid");
  }
  for (const auto& [key, value] : config.settings.items()) {
    if (!value.is_array() || key == "alpha_grid") continue;
    for (const auto& v : value) {
      if (!v.is_number()) throw ConfigError("field '" + key + "' must hold numbers");
    }
  }
  return config;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace mtt

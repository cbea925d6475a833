#include <doctest.h>

#include <string>

#include <json.hpp>

#include "mtt/errors.hpp"
#include "mtt/experiment_config.hpp"
#include "mtt/experiments.hpp"
#include "mtt/results.hpp"

using namespace mtt;
using nlohmann::json;

namespace {

std::string config_error(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults are filled in") {
    const auto c = parse_config(json{{"experiment", "detection-failure"}, {"seed", 3}});
    CHECK(c.seed == 3);
    CHECK(c.output == "results/detection-failure");
    CHECK(c.settings["frames"] == 50);
    CHECK(c.settings["walk_std"] == 0.1);
    CHECK(c.settings["outer_samples"] == 10000);
    CHECK(c.settings["inner_samples"] == 1000);
  }

  TEST_CASE("every catalogued experiment parses with its defaults") {
    for (const auto& e : experiment_catalog()) {
      const auto c = parse_config(json{{"experiment", e.id}, {"seed", 1}});
      CHECK(c.experiment == e.id);
      CHECK(parse_config(c.to_json()).to_json() == c.to_json());
    }
  }

  TEST_CASE("invalid documents name the offending field") {
    CHECK(contains(config_error(json{{"seed", 1}}), "experiment id required"));
    CHECK(contains(config_error(json{{"experiment", "no-such"}, {"seed", 1}}), "no-such"));
    CHECK(contains(config_error(json{{"experiment", "false-alarm"}}), "seed required"));
    CHECK(contains(config_error(json{{"experiment", "false-alarm"}, {"seed", 1}, {"lamda_grid", {1.0}}}),
                   "lamda_grid"));
    CHECK(contains(config_error(json{{"experiment", "false-alarm"}, {"seed", 1}, {"samples", "many"}}), "samples"));
    CHECK(contains(config_error(json{{"experiment", "detection-failure"}, {"seed", 1}, {"state_integration", "x"}}),
                   "state_integration"));
    CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
  }

  TEST_CASE("infinite radius is accepted as a string") {
    const auto c = parse_config(json{{"experiment", "consistency"}, {"seed", 1}, {"alpha", "inf"}, {"beta", "inf"}});
    CHECK(c.settings["alpha"] == "inf");
    CHECK(!config_error(json{{"experiment", "consistency"}, {"seed", 1}, {"alpha", 0}}).empty());
  }
}

TEST_SUITE("experiments") {
  TEST_CASE("results table format") {
    const std::vector<ResultRow> rows{{"e", "c", "x", 0.1, "y", 1.0 / 3.0, 0.5, 10, 7}};
    const std::string csv = results_csv(rows);
    CHECK(csv.rfind("experiment,curve,x_name,x_value,y_name,y_value,std_error,n_samples,seed\n", 0) == 0);
    CHECK(contains(csv, "e,c,x,0.10000000000000001,y,0.33333333333333331,0.5,10,7"));
  }

  TEST_CASE("runs are reproducible and record their configuration") {
    const auto config = parse_config(json{{"experiment", "num-targets-assoc"}, {"seed", 11}, {"k_grid", {1, 2, 3}}});
    RunOptions opts;
    opts.scale = 0.01;
    opts.threads = 1;
    const auto a = execute_experiment(config, opts);
    opts.threads = 2;
    const auto b = execute_experiment(config, opts);
    CHECK(results_csv(a.rows) == results_csv(b.rows));
    CHECK(a.rows.size() == 3);
    CHECK(a.manifest["seed"] == 11);
    CHECK(a.manifest["scale"] == 0.01);
    CHECK(parse_config(a.manifest["config"]).to_json() == config.to_json());
    for (const auto& r : a.rows) CHECK(r.n_samples == 100);
  }

  TEST_CASE("scale must be positive") {
    const auto config = parse_config(json{{"experiment", "false-alarm"}, {"seed", 1}});
    RunOptions opts;
    opts.scale = 0.0;
    CHECK_THROWS_AS(execute_experiment(config, opts), ConfigError);
  }
}

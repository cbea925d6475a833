#include "mtt_fisher.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include <json.hpp>

#include "mtt/errors.hpp"
#include "mtt/experiment_config.hpp"
#include "mtt/experiments.hpp"
#include "mtt/fisher.hpp"
#include "mtt/likelihood.hpp"
#include "mtt/model.hpp"
#include "mtt/perm_assoc.hpp"

struct mtt_config {
  mtt::ExperimentConfig config;
};

struct mtt_result {
  mtt::RunResult result;
};

struct mtt_model {
  mtt::ModelParams params;
};

namespace {

thread_local std::string last_error;

mtt_status fail(mtt_status status, const std::string& message) {
  last_error = message;
  return status;
}

/// Runs `body`, translating library exceptions into status codes.
template <typename F>
mtt_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return MTT_OK;
  } catch (const mtt::ConfigError& e) {
    return fail(MTT_ERR_CONFIG, e.what());
  } catch (const mtt::NumericalCollapseError& e) {
    return fail(MTT_ERR_NUMERICAL_COLLAPSE, e.what());
  } catch (const mtt::ParameterDomainError& e) {
    return fail(MTT_ERR_PARAMETER_DOMAIN, e.what());
  } catch (const mtt::DataError& e) {
    return fail(MTT_ERR_DATA, e.what());
  } catch (const mtt::ModelViolationError& e) {
    return fail(MTT_ERR_MODEL_VIOLATION, e.what());
  } catch (const mtt::InconsistentDataError& e) {
    return fail(MTT_ERR_INCONSISTENT_DATA, e.what());
  } catch (const mtt::SupportViolationError& e) {
    return fail(MTT_ERR_SUPPORT_VIOLATION, e.what());
  } catch (const mtt::ResourceError& e) {
    return fail(MTT_ERR_RESOURCE, e.what());
  } catch (const mtt::DegenerateDataError& e) {
    return fail(MTT_ERR_DEGENERATE_DATA, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(MTT_ERR_CONFIG, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MTT_ERR_RESOURCE, "out of memory");
  } catch (const std::exception& e) {
    return fail(MTT_ERR_INTERNAL, e.what());
  }
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

int bound_from_c(int v) {
  if (v == MTT_UNBOUNDED) return mtt::kUnbounded;
  if (v < 0) throw mtt::ConfigError("bounds must be non-negative or MTT_UNBOUNDED");
  return v;
}

mtt::ModelParams model_from_json(const nlohmann::json& doc) {
  using nlohmann::json;
  if (!doc.is_object()) throw mtt::ConfigError("model description must be a JSON object");
  static const char* known[] = {"role",        "obs_variance", "obs_shift",    "walk_std",
                                "num_targets", "p_detection",  "clutter_rate", "clutter"};
  for (const auto& [key, value] : doc.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw mtt::ConfigError("unknown model field '" + key + "'");
  }
  mtt::ModelParams p;
  p.target = mtt::SingleTargetModel::linear_gaussian(
      mtt::param_role_from_string(doc.value("role", std::string("obs_variance"))), doc.value("obs_variance", 1.0),
      doc.value("walk_std", 0.0), doc.value("obs_shift", 0.0));
  p.num_targets = doc.value("num_targets", 1);
  p.p_detection = doc.value("p_detection", 1.0);
  p.clutter.rate = doc.value("clutter_rate", 0.0);
  if (doc.contains("clutter")) {
    const json& c = doc["clutter"];
    const std::string kind = c.value("kind", std::string("gaussian"));
    if (kind == "gaussian") {
      p.clutter.spatial = mtt::ClutterDensity::gaussian(c.value("mean", 0.0), c.value("variance", 1.0));
    } else if (kind == "uniform") {
      p.clutter.spatial = mtt::ClutterDensity::uniform(c.value("half_width", 1.0));
    } else {
      throw mtt::ConfigError("unknown clutter kind '" + kind + "'");
    }
  }
  p.validate();
  return p;
}

}  // namespace

extern "C" {

const char* mtt_last_error(void) { return last_error.c_str(); }

const char* mtt_version(void) { return "1.0.0"; }

void mtt_string_free(char* s) { delete[] s; }

mtt_status mtt_config_load(const char* path, mtt_config** out) {
  if (!path || !out) return fail(MTT_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new mtt_config{mtt::load_config(path)}; });
}

mtt_status mtt_config_parse(const char* json_text, mtt_config** out) {
  if (!json_text || !out) return fail(MTT_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new mtt_config{mtt::parse_config_text(json_text)}; });
}

mtt_status mtt_config_resolved_json(const mtt_config* config, char** out_json) {
  if (!config || !out_json) return fail(MTT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out_json = copy_string(config->config.to_json().dump(2)); });
}

void mtt_config_free(mtt_config* config) { delete config; }

mtt_status mtt_list_experiments(char** out_json) {
  if (!out_json) return fail(MTT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : mtt::experiment_catalog()) {
      list.push_back({{"id", e.id}, {"description", e.description}, {"defaults", e.defaults}});
    }
    *out_json = copy_string(list.dump(2));
  });
}

void mtt_run_options_init(mtt_run_options* options) {
  if (!options) return;
  options->scale = 1.0;
  options->threads = 0;
  options->out_dir = nullptr;
  options->write_files = 1;
}

mtt_status mtt_run(const mtt_config* config, const mtt_run_options* options, mtt_result** out) {
  if (!config || !out) return fail(MTT_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  mtt_run_options opts;
  mtt_run_options_init(&opts);
  if (options) opts = *options;
  return guarded([&] {
    mtt::RunOptions run;
    run.scale = opts.scale;
    run.threads = opts.threads;
    if (opts.out_dir) run.out_dir = opts.out_dir;
    auto* result = new mtt_result{mtt::execute_experiment(config->config, run)};
    try {
      if (opts.write_files) mtt::write_outputs(result->result);
    } catch (...) {
      delete result;
      throw;
    }
    *out = result;
  });
}

size_t mtt_result_row_count(const mtt_result* result) { return result ? result->result.rows.size() : 0; }

mtt_status mtt_result_csv(const mtt_result* result, char** out_csv) {
  if (!result || !out_csv) return fail(MTT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out_csv = copy_string(mtt::results_csv(result->result.rows)); });
}

mtt_status mtt_result_manifest_json(const mtt_result* result, char** out_json) {
  if (!result || !out_json) return fail(MTT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out_json = copy_string(result->result.manifest.dump(2)); });
}

mtt_status mtt_result_out_dir(const mtt_result* result, char** out_path) {
  if (!result || !out_path) return fail(MTT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out_path = copy_string(result->result.out_dir); });
}

void mtt_result_free(mtt_result* result) { delete result; }

mtt_status mtt_model_from_json(const char* json_text, mtt_model** out) {
  if (!json_text || !out) return fail(MTT_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new mtt_model{model_from_json(nlohmann::json::parse(json_text))}; });
}

void mtt_model_free(mtt_model* model) { delete model; }

mtt_status mtt_log_multi_likelihood(const mtt_model* model, const double* points, size_t num_points,
                                    const double* states, size_t num_states, double* out) {
  if (!model || !out || (num_points && !points) || (num_states && !states)) {
    return fail(MTT_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    mtt::FrameEvaluator evaluator(model->params, mtt::PerturbationSpec::full());
    *out = evaluator.evaluate({points, num_points}, {states, num_states}).log_likelihood;
  });
}

mtt_status mtt_frame_score(const mtt_model* model, int alpha, int beta, const double* points, size_t num_points,
                           const double* states, size_t num_states, double* log_likelihood, double* score) {
  if (!model || !log_likelihood || !score || (num_points && !points) || (num_states && !states)) {
    return fail(MTT_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const mtt::PerturbationSpec spec{bound_from_c(alpha), bound_from_c(beta)};
    mtt::FrameEvaluator evaluator(model->params, spec);
    const mtt::FrameTerms terms = evaluator.evaluate({points, num_points}, {states, num_states});
    *log_likelihood = terms.log_likelihood;
    *score = terms.score;
  });
}

mtt_status mtt_subfactorial(int i, uint64_t* exact, double* log_value, int* is_exact) {
  if (!exact || !log_value || !is_exact) return fail(MTT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto c = mtt::subfactorial(i);
    *is_exact = c.exact ? 1 : 0;
    *exact = c.exact.value_or(0);
    *log_value = c.log_value;
  });
}

mtt_status mtt_count_constrained(int k, int alpha, uint64_t* exact, double* log_value, int* is_exact) {
  if (!exact || !log_value || !is_exact) return fail(MTT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto c = mtt::count_constrained(k, bound_from_c(alpha));
    *is_exact = c.exact ? 1 : 0;
    *exact = c.exact.value_or(0);
    *log_value = c.log_value;
  });
}

mtt_status mtt_loss_false_alarm_worst_case(double lambda, double* out) {
  if (!out) return fail(MTT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = mtt::loss_false_alarm_worst_case(lambda); });
}

mtt_status mtt_cardinality_information(double p_detection, int num_targets, double* out) {
  if (!out) return fail(MTT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = mtt::cardinality_information(p_detection, num_targets); });
}

}  // extern "C"

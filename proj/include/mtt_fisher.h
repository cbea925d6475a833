#ifndef MTT_FISHER_H
#define MTT_FISHER_H

#include <stddef.h>
#include <stdint.h>

#if defined(MTT_FISHER_BUILDING)
#define MTT_FISHER_API __attribute__((visibility("default")))
#else
#define MTT_FISHER_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mtt_status {
  MTT_OK = 0,
  MTT_ERR_INVALID_ARGUMENT = 1,
  MTT_ERR_CONFIG = 2,
  MTT_ERR_NUMERICAL_COLLAPSE = 3,
  MTT_ERR_PARAMETER_DOMAIN = 4,
  MTT_ERR_DATA = 5,
  MTT_ERR_MODEL_VIOLATION = 6,
  MTT_ERR_INCONSISTENT_DATA = 7,
  MTT_ERR_SUPPORT_VIOLATION = 8,
  MTT_ERR_RESOURCE = 9,
  MTT_ERR_DEGENERATE_DATA = 10,
  MTT_ERR_INTERNAL = 99
} mtt_status;

/* Association radius or missed-detection bound with no limit. */
#define MTT_UNBOUNDED (-1)

typedef struct mtt_config mtt_config;
typedef struct mtt_result mtt_result;
typedef struct mtt_model mtt_model;

typedef struct mtt_run_options {
  double scale;        /* multiplies outer sample and replicate counts; 1 keeps the defaults */
  int threads;         /* 0: MTT_FISHER_THREADS, else all cores */
  const char* out_dir; /* NULL: the config's output field */
  int write_files;     /* non-zero: write results.csv and manifest.json */
} mtt_run_options;

/* Message of the last failed call on this thread; empty when none. */
MTT_FISHER_API const char* mtt_last_error(void);
MTT_FISHER_API const char* mtt_version(void);
MTT_FISHER_API void mtt_string_free(char* s);

MTT_FISHER_API mtt_status mtt_config_load(const char* path, mtt_config** out);
MTT_FISHER_API mtt_status mtt_config_parse(const char* json_text, mtt_config** out);
/* Configuration with defaults filled in; release with mtt_string_free. */
MTT_FISHER_API mtt_status mtt_config_resolved_json(const mtt_config* config, char** out_json);
MTT_FISHER_API void mtt_config_free(mtt_config* config);

/* JSON array of {id, description, defaults}. */
MTT_FISHER_API mtt_status mtt_list_experiments(char** out_json);

MTT_FISHER_API void mtt_run_options_init(mtt_run_options* options);
MTT_FISHER_API mtt_status mtt_run(const mtt_config* config, const mtt_run_options* options, mtt_result** out);
MTT_FISHER_API size_t mtt_result_row_count(const mtt_result* result);
MTT_FISHER_API mtt_status mtt_result_csv(const mtt_result* result, char** out_csv);
MTT_FISHER_API mtt_status mtt_result_manifest_json(const mtt_result* result, char** out_json);
MTT_FISHER_API mtt_status mtt_result_out_dir(const mtt_result* result, char** out_path);
MTT_FISHER_API void mtt_result_free(mtt_result* result);

/* Model description, e.g.
 * {"role": "obs_variance", "obs_variance": 1, "num_targets": 2, "p_detection": 0.9,
 *  "clutter_rate": 0.5, "clutter": {"kind": "gaussian", "mean": 0, "variance": 4}} */
MTT_FISHER_API mtt_status mtt_model_from_json(const char* json_text, mtt_model** out);
MTT_FISHER_API void mtt_model_free(mtt_model* model);

/* log g(y | x) of the original model (full association uncertainty). */
MTT_FISHER_API mtt_status mtt_log_multi_likelihood(const mtt_model* model, const double* points, size_t num_points,
                                                   const double* states, size_t num_states, double* out);
/* Frame log-likelihood and score of the (alpha, beta) model; MTT_UNBOUNDED for no limit. */
MTT_FISHER_API mtt_status mtt_frame_score(const mtt_model* model, int alpha, int beta, const double* points,
                                          size_t num_points, const double* states, size_t num_states,
                                          double* log_likelihood, double* score);

/* Counts: *is_exact is 1 when *exact holds the value, else only *log_value is meaningful. */
MTT_FISHER_API mtt_status mtt_subfactorial(int i, uint64_t* exact, double* log_value, int* is_exact);
MTT_FISHER_API mtt_status mtt_count_constrained(int k, int alpha, uint64_t* exact, double* log_value, int* is_exact);

MTT_FISHER_API mtt_status mtt_loss_false_alarm_worst_case(double lambda, double* out);
MTT_FISHER_API mtt_status mtt_cardinality_information(double p_detection, int num_targets, double* out);

#ifdef __cplusplus
}
#endif

#endif

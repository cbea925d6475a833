#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mtt/frame.hpp"
#include "mtt/likelihood.hpp"
#include "mtt/model.hpp"
#include "mtt/perm_assoc.hpp"

namespace mtt {

/// Scalar coordinate of the multi-target parameter that the optimizer moves.
enum class FreeParam { Theta, DetectionProbability, ClutterRate };

struct MleOptions {
  FreeParam free_param = FreeParam::Theta;
  double lower = 0.1;
  double upper = 10.0;
  double tol = 1e-4;
  PerturbationSpec spec = PerturbationSpec::unperturbed();
  /// Monte Carlo integration reuses the same seed at every evaluation, so the
  /// objective is a deterministic function of the parameter.
  Integration integration = Integration::exact_static();
};

struct MleResult {
  double theta_hat = 0.0;
  double loglik_at_hat = 0.0;
  std::size_t n = 0;
  int evaluations = 0;
  std::vector<std::pair<double, double>> brackets;  // golden-section bracket after each step
};

/// Default search interval: [theta/10, 10 theta] for scale parameters,
/// [theta - 5, theta + 5] for location parameters.
std::pair<double, double> default_bounds(ParamRole role, double theta_star);

/// Golden-section maximization of the marginal log-likelihood over one scalar,
/// finishing with a comparison against both interval ends. Throws DataError
/// without frames, ConfigError when the coordinate is pinned by a restriction
/// flag, and DegenerateDataError when the objective is never finite.
MleResult maximize_loglik(std::span<const ObservationFrame> frames, const ModelParams& params_template,
                          std::span<const double> initial_states, const MleOptions& options);

struct MleExperimentConfig {
  int replicates = 100;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  int threads = 1;
  double tol = 1e-4;
  std::optional<std::pair<double, double>> bounds;
  int mc_samples = 1000;  // particles when the targets move
};

struct ConsistencyRow {
  int n = 0;
  double mean_abs_error = 0.0;
  double sd_abs_error = 0.0;
  double mean_error = 0.0;
  int replicates = 0;
};

std::vector<ConsistencyRow> consistency_experiment(const GroundTruth& truth, const PerturbationSpec& spec,
                                                   std::span<const int> n_grid, const MleExperimentConfig& config);

struct NormalityReport {
  int n = 0;
  int replicates = 0;
  double fisher = 0.0;            // per-frame information used for the comparison
  double scaled_variance = 0.0;   // Var[sqrt(n) (theta_hat - theta*)]
  double variance_ratio = 0.0;    // scaled_variance * fisher
  double bias = 0.0;              // mean of theta_hat - theta*
  double bias_std_error = 0.0;
  double ad_statistic = 0.0;
  double ad_p_value = 0.0;

  nlohmann::json to_json() const;
};

NormalityReport normality_experiment(const GroundTruth& truth, const PerturbationSpec& spec, int n,
                                     double fisher_per_frame, const MleExperimentConfig& config);

struct GapRow {
  double theta = 0.0;
  double gap = 0.0;  // (1/n) log [p_theta(y) / p_theta*(y)]
};

/// One data set of n frames evaluated on every grid point.
std::vector<GapRow> likelihood_gap_experiment(const GroundTruth& truth, const PerturbationSpec& spec,
                                              std::span<const double> theta_grid, int n,
                                              const MleExperimentConfig& config);

}  // namespace mtt

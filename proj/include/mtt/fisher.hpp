#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mtt/frame.hpp"
#include "mtt/model.hpp"
#include "mtt/perm_assoc.hpp"
#include "mtt/rng.hpp"
#include "mtt/simulator.hpp"

namespace mtt {

/// Monte Carlo estimate of a Fisher information matrix (1 x 1 in every
/// experiment here).
struct FisherEstimate {
  Eigen::MatrixXd matrix;
  Eigen::MatrixXd std_error;
  std::size_t n_samples = 0;
  nlohmann::json config;

  double value() const { return matrix(0, 0); }
  double error() const { return std_error(0, 0); }
};

/// Baseline K I(theta*) against the perturbed information I^{alpha,beta}(theta*).
struct InformationLossReport {
  double baseline = 0.0;
  double perturbed = 0.0;
  double loss = 0.0;
  double relative_loss = 0.0;
  double baseline_std_error = 0.0;
  double perturbed_std_error = 0.0;
  double relative_loss_std_error = 0.0;
  std::size_t n_samples = 0;
  PerturbationSpec spec;
  std::string provenance;  // "closed-form" or "monte-carlo"

  nlohmann::json to_json() const;
};

/// How the association and detection latents are integrated out of the score.
enum class LatentHandling {
  Marginal,     // exact marginal evaluator; latent Monte Carlo when enumeration is too large
  Enumeration,  // literal posterior over every (mask, permutation)
  MonteCarlo,   // self-normalized importance sampling from the latent prior
};

/// How target trajectories are integrated out when the targets move.
enum class StateIntegration {
  Auto,  // exact Kalman recursion when each frame holds at most the target's own point, else particles
  Particles,
};

struct ScoreOptions {
  LatentHandling latent = LatentHandling::Marginal;
  StateIntegration states = StateIntegration::Auto;
  int inner_samples = 1000;  // latent draws per frame, or particles
};

/// d/dtheta log p(y_{1:n} | x_0) as the posterior mean of the complete-data
/// score. Static targets sit at `states` in every frame; moving targets start
/// there. `rng` is used only by the Monte Carlo routes. Throws
/// InconsistentDataError when every latent configuration has zero weight.
double score_fisher_identity(std::span<const ObservationFrame> frames, const ModelParams& params,
                             const PerturbationSpec& spec, std::span<const double> states,
                             const ScoreOptions& options, Rng& rng);

/// c_i = (g(y_i|x) / p(y_i)) / sum_j (g(y_j|x) / p(y_j)) for one target with
/// p_D = 1. SupportViolationError when the clutter density vanishes at a point.
std::vector<double> association_weights_ci(const ObservationFrame& frame, double state, const ModelParams& params);

/// c_{i,k} = posterior probability that target i generated point k, for K
/// static targets with p_D = 1, no clutter and M = K. Computed by a forward
/// and a backward pass over subsets of used points.
Eigen::MatrixXd association_weights_cik(const ObservationFrame& frame, const MultiTargetState& states,
                                        const ModelParams& params);

struct FisherMcConfig {
  std::size_t outer = 10000;  // simulated data sets
  int frames = 1;             // frames per data set
  ScoreOptions score;
  std::size_t batches = 0;  // 0: replicates are iid, one batch each
  int threads = 1;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  nlohmann::json to_json() const;
};

/// Per-replicate scores of one Monte Carlo run. `perturbed` is the score of
/// the observed (alpha, beta) data; `baseline` the complete-data score of the
/// same replicate with every target observed and its association known.
struct ReplicateScores {
  std::vector<double> perturbed;
  std::vector<double> baseline;
};

/// Replicate r simulates from Rng(seed, derive_stream(stream, r)), so the
/// result is independent of the worker count.
ReplicateScores simulate_scores(const GroundTruth& truth, const PerturbationSpec& spec, const FisherMcConfig& config);

/// Mean of squared scores of the perturbed model with batch-means errors.
FisherEstimate fisher_mc(const GroundTruth& truth, const PerturbationSpec& spec, const FisherMcConfig& config);

/// Relative loss 1 - I^{alpha,beta} / (K I) from paired replicates.
InformationLossReport information_loss_mc(const GroundTruth& truth, const PerturbationSpec& spec,
                                          const FisherMcConfig& config);
InformationLossReport information_loss_from_scores(const ReplicateScores& scores, const PerturbationSpec& spec,
                                                   std::size_t batches);

enum class SingleTargetRegime { IidStatic, Hmm };

/// Fisher information of one always-detected target without clutter. The
/// static regime averages squared observation scores at x = 0; the HMM regime
/// averages squared exact Kalman scores of `config.frames`-step trajectories
/// started at 0.
FisherEstimate single_target_fisher(const SingleTargetModel& model, double theta_star, SingleTargetRegime regime,
                                    const FisherMcConfig& config);

/// E[N / (N + 1)] for N ~ Po(lambda), summed until the Poisson tail is below 1e-14.
double loss_false_alarm_worst_case(double lambda);
/// 1 - (1 - e^{-lambda}) / lambda.
double loss_false_alarm_worst_case_closed_form(double lambda);

/// Loss (1 - p_D) K I for alpha = 1 and unrestricted detection failures.
InformationLossReport loss_detection_failure(double p_detection, int num_targets, double single_information);

/// Information on p_D carried by the detected count: K / (p_D (1 - p_D)).
double cardinality_information(double p_detection, int num_targets);

/// I(theta*, K + N) = I(theta*, K) + p_D N I when the N extra targets are
/// kept out of the association uncertainty.
double additivity_unperturbed_targets(const InformationLossReport& report_k, int extra_targets, double p_detection,
                                      double single_information);

struct ScoreIdentityCheck {
  double identity_score = 0.0;
  double finite_difference_score = 0.0;
  double gap = 0.0;
};

/// Compares the Fisher-identity score of static simulated data with a central
/// finite difference of the exact marginal log-likelihood.
ScoreIdentityCheck score_conditional_expectation_identity_check(std::span<const SimulatedFrame> frames,
                                                                const GroundTruth& truth,
                                                                const PerturbationSpec& spec);

}  // namespace mtt

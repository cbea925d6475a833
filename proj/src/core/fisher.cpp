#include "mtt/fisher.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>
#include <string>

#include "mtt/errors.hpp"
#include "mtt/kalman.hpp"
#include "mtt/likelihood.hpp"
#include "mtt/parallel.hpp"
#include "mtt/smc.hpp"
#include "mtt/stats.hpp"

namespace mtt {

namespace {

std::string latent_name(LatentHandling h) {
  switch (h) {
    case LatentHandling::Marginal: return "marginal";
    case LatentHandling::Enumeration: return "enumeration";
    case LatentHandling::MonteCarlo: return "monte-carlo";
  }
  return "unknown";
}

Eigen::MatrixXd scalar_matrix(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

/// Self-normalized importance sampling of the frame posterior with the latent
/// prior (q^beta x u_M^alpha) as proposal.
double latent_mc_frame_score(std::span<const double> points, std::span<const double> states,
                             const ModelParams& params, const PerturbationSpec& spec, const DetectionMaskLaw& law,
                             int samples, Rng& rng) {
  const int m = static_cast<int>(points.size());
  const double lambda = params.clutter.rate;
  WeightedLogSum acc;
  for (int s = 0; s < samples; ++s) {
    const DetectionMask mask = law.sample(rng);
    const int d = mask.detected_count();
    if (d > m) continue;
    const ConstrainedPermutation sigma = sample_uniform_constrained(m, spec.alpha, rng);
    double lw = log_poisson_pmf(m - d, lambda);
    double score = 0.0;
    int slot = 0;
    for (int i = 0; i < mask.size() && lw > kNegInf; ++i) {
      if (!mask.detected(i)) continue;
      const double y = points[static_cast<std::size_t>(sigma(slot++))];
      lw += params.target.log_g(y, states[static_cast<std::size_t>(i)]);
      score += params.target.score_g(y, states[static_cast<std::size_t>(i)]);
    }
    for (int j = d; j < m && lw > kNegInf; ++j) {
      lw += params.clutter.spatial.log_density(points[static_cast<std::size_t>(sigma(j))]);
    }
    acc.add(lw, score);
  }
  if (acc.empty()) throw InconsistentDataError("no sampled latent configuration explains the frame");
  return acc.mean();
}

double enumeration_frame_score(std::span<const double> points, std::span<const double> states,
                               const ModelParams& params, const PerturbationSpec& spec) {
  WeightedLogSum acc;
  for (const auto& term : enumerate_latents(points, states, params, spec)) acc.add(term.log_weight, term.score);
  if (acc.empty()) throw InconsistentDataError("every latent configuration has zero posterior weight");
  return acc.mean();
}

/// Score of static-target data under the requested latent handling. Holds one
/// evaluator so that permutation caches are reused across frames.
class StaticScorer {
 public:
  StaticScorer(const ModelParams& params, const PerturbationSpec& spec, const ScoreOptions& options)
      : params_(params),
        spec_(spec),
        options_(options),
        evaluator_(params, spec),
        law_(params.num_targets, params.p_detection, spec.effective_beta(params.num_targets)) {}

  double frame_score(std::span<const double> points, std::span<const double> states, Rng& rng) {
    switch (options_.latent) {
      case LatentHandling::Enumeration: return enumeration_frame_score(points, states, params_, spec_);
      case LatentHandling::MonteCarlo:
        return latent_mc_frame_score(points, states, params_, spec_, law_, options_.inner_samples, rng);
      case LatentHandling::Marginal: break;
    }
    try {
      const FrameTerms terms = evaluator_.evaluate(points, states);
      if (terms.log_likelihood == kNegInf) {
        throw InconsistentDataError("the frame has zero likelihood under every latent configuration");
      }
      return terms.score;
    } catch (const ResourceError&) {
      return latent_mc_frame_score(points, states, params_, spec_, law_, options_.inner_samples, rng);
    }
  }

 private:
  ModelParams params_;
  PerturbationSpec spec_;
  ScoreOptions options_;
  FrameEvaluator evaluator_;
  DetectionMaskLaw law_;
};

bool kalman_applicable(const ModelParams& params) {
  return params.num_targets == 1 && params.clutter.rate == 0.0 && !params.target.special();
}

double sequence_score(std::span<const ObservationFrame> frames, const ModelParams& params,
                      const PerturbationSpec& spec, std::span<const double> states, const ScoreOptions& options,
                      StaticScorer* scorer, Rng& rng) {
  if (params.target.is_static()) {
    double total = 0.0;
    for (const auto& frame : frames) total += scorer->frame_score(frame.points, states, rng);
    return total;
  }
  if (options.states == StateIntegration::Auto && kalman_applicable(params)) {
    return kalman_log_likelihood(params.target, states[0], frames).score;
  }
  SmcOptions smc;
  smc.particles = options.inner_samples;
  return run_smc(frames, params, spec, states, smc, rng).score;
}

/// Complete-data score with every target observed and its association known.
double known_association_score(std::span<const SimulatedFrame> frames, const GroundTruth& truth) {
  const SingleTargetModel& target = truth.params.target;
  double total = 0.0;
  if (target.is_static()) {
    for (const auto& f : frames) {
      for (std::size_t i = 0; i < f.target_observations.size(); ++i) {
        total += target.score_g(f.target_observations[i], truth.initial_states[i]);
      }
    }
    return total;
  }
  if (target.special()) throw ModelViolationError("moving targets need the linear Gaussian observation model");
  std::vector<ObservationFrame> single(frames.size());
  for (std::size_t i = 0; i < truth.initial_states.size(); ++i) {
    for (std::size_t t = 0; t < frames.size(); ++t) single[t].points.assign(1, frames[t].target_observations[i]);
    total += kalman_log_likelihood(target, truth.initial_states[i], single).score;
  }
  return total;
}

}  // namespace

nlohmann::json InformationLossReport::to_json() const {
  return {{"baseline", baseline},
          {"perturbed", perturbed},
          {"loss", loss},
          {"relative_loss", relative_loss},
          {"baseline_std_error", baseline_std_error},
          {"perturbed_std_error", perturbed_std_error},
          {"relative_loss_std_error", relative_loss_std_error},
          {"n_samples", n_samples},
          {"alpha", bound_to_string(spec.alpha)},
          {"beta", bound_to_string(spec.beta)},
          {"provenance", provenance}};
}

nlohmann::json FisherMcConfig::to_json() const {
  return {{"outer", outer},
          {"frames", frames},
          {"latent", latent_name(score.latent)},
          {"states", score.states == StateIntegration::Auto ? "auto" : "particles"},
          {"inner_samples", score.inner_samples},
          {"batches", batches},
          {"seed", seed},
          {"stream", stream}};
}

double score_fisher_identity(std::span<const ObservationFrame> frames, const ModelParams& params,
                             const PerturbationSpec& spec, std::span<const double> states,
                             const ScoreOptions& options, Rng& rng) {
  params.validate();
  spec.validate();
  if (states.size() != static_cast<std::size_t>(params.num_targets)) {
    throw ParameterDomainError("expected one state per target");
  }
  StaticScorer scorer(params, spec, options);
  return sequence_score(frames, params, spec, states, options, &scorer, rng);
}

std::vector<double> association_weights_ci(const ObservationFrame& frame, double state, const ModelParams& params) {
  params.validate();
  if (params.num_targets != 1 || params.p_detection != 1.0) {
    throw ParameterDomainError("c_i weights are defined for one always-detected target");
  }
  if (frame.points.empty()) throw DataError("c_i weights need at least one point");
  std::vector<double> log_ratio(frame.points.size());
  for (std::size_t i = 0; i < frame.points.size(); ++i) {
    const double y = frame.points[i];
    if (!std::isfinite(y)) throw DataError("observation point is not finite");
    const double lc = params.clutter.spatial.log_density(y);
    if (lc == kNegInf) throw SupportViolationError("clutter density vanishes at y = " + std::to_string(y));
    log_ratio[i] = params.target.log_g(y, state) - lc;
  }
  const double norm = log_sum_exp(log_ratio);
  if (norm == kNegInf) throw InconsistentDataError("no point can originate from the target");
  for (auto& v : log_ratio) v = std::exp(v - norm);
  return log_ratio;
}

Eigen::MatrixXd association_weights_cik(const ObservationFrame& frame, const MultiTargetState& states,
                                        const ModelParams& params) {
  params.validate();
  const int k = params.num_targets;
  if (params.p_detection != 1.0 || params.clutter.rate != 0.0) {
    throw ParameterDomainError("c_{i,k} weights need p_D = 1 and no clutter");
  }
  if (states.size() != static_cast<std::size_t>(k)) throw ParameterDomainError("expected one state per target");
  if (frame.points.size() != static_cast<std::size_t>(k)) {
    throw ModelViolationError("c_{i,k} weights need exactly one point per target");
  }
  if (k > 24) throw ResourceError("c_{i,k} weights are limited to 24 targets");
  for (double y : frame.points) {
    if (!std::isfinite(y)) throw DataError("observation point is not finite");
  }
  const auto uk = static_cast<std::size_t>(k);
  // Row-rescaled likelihood matrix; each row scale cancels in the ratio.
  Eigen::MatrixXd a(k, k);
  for (int i = 0; i < k; ++i) {
    double top = kNegInf;
    std::vector<double> row(uk);
    for (int j = 0; j < k; ++j) {
      row[static_cast<std::size_t>(j)] = params.target.log_g(frame.points[static_cast<std::size_t>(j)], states[static_cast<std::size_t>(i)]);
      top = std::max(top, row[static_cast<std::size_t>(j)]);
    }
    if (top == kNegInf) throw InconsistentDataError("target " + std::to_string(i + 1) + " cannot explain any point");
    for (int j = 0; j < k; ++j) a(i, j) = safe_exp(row[static_cast<std::size_t>(j)] - top);
  }
  const std::size_t full = (std::size_t{1} << k) - 1;
  std::vector<double> forward(full + 1, 0.0);
  std::vector<double> backward(full + 1, 0.0);
  forward[0] = 1.0;
  for (std::size_t s = 1; s <= full; ++s) {
    const int row = std::popcount(s) - 1;
    double v = 0.0;
    for (std::size_t rest = s; rest != 0; rest &= rest - 1) {
      const int col = std::countr_zero(rest);
      v += forward[s & ~(std::size_t{1} << col)] * a(row, col);
    }
    forward[s] = v;
  }
  backward[full] = 1.0;
  for (std::size_t s = full; s-- > 0;) {
    const int row = std::popcount(s);
    double v = 0.0;
    for (std::size_t rest = full & ~s; rest != 0; rest &= rest - 1) {
      const int col = std::countr_zero(rest);
      v += a(row, col) * backward[s | (std::size_t{1} << col)];
    }
    backward[s] = v;
  }
  const double permanent = forward[full];
  if (!(permanent > 0.0)) throw InconsistentDataError("every association has zero posterior weight");
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t s = 0; s < full; ++s) {
    if (forward[s] == 0.0) continue;
    const int row = std::popcount(s);
    for (std::size_t rest = full & ~s; rest != 0; rest &= rest - 1) {
      const int col = std::countr_zero(rest);
      c(row, col) += forward[s] * a(row, col) * backward[s | (std::size_t{1} << col)];
    }
  }
  return c / permanent;
}

ReplicateScores simulate_scores(const GroundTruth& truth, const PerturbationSpec& spec, const FisherMcConfig& config) {
  truth.validate();
  spec.validate();
  if (config.outer < 100) throw ConfigError("Monte Carlo Fisher estimation needs at least 100 outer samples");
  if (config.frames < 1) throw ConfigError("each replicate needs at least one frame");
  if (config.score.inner_samples < 1) throw ConfigError("inner sample count must be positive");
  ReplicateScores out;
  out.perturbed.resize(config.outer);
  out.baseline.resize(config.outer);
  parallel_for(config.outer, config.threads, [&](std::size_t begin, std::size_t end) {
    StaticScorer scorer(truth.params, spec, config.score);
    for (std::size_t r = begin; r < end; ++r) {
      const Rng replicate(config.seed, derive_stream(config.stream, r));
      const auto frames = simulate_sequence(truth, spec, config.frames, replicate.split(0));
      Rng inner = replicate.split(1);
      const auto observed = observed_frames(frames);
      out.perturbed[r] =
          sequence_score(observed, truth.params, spec, truth.initial_states, config.score, &scorer, inner);
      out.baseline[r] = known_association_score(frames, truth);
    }
  });
  return out;
}

FisherEstimate fisher_mc(const GroundTruth& truth, const PerturbationSpec& spec, const FisherMcConfig& config) {
  const ReplicateScores scores = simulate_scores(truth, spec, config);
  std::vector<double> squares(scores.perturbed.size());
  std::transform(scores.perturbed.begin(), scores.perturbed.end(), squares.begin(), [](double s) { return s * s; });
  const MeanEstimate est = batch_means(squares, config.batches);
  nlohmann::json echo = config.to_json();
  echo["alpha"] = bound_to_string(spec.alpha);
  echo["beta"] = bound_to_string(spec.beta);
  return {scalar_matrix(est.mean), scalar_matrix(est.std_error), est.n, std::move(echo)};
}

InformationLossReport information_loss_from_scores(const ReplicateScores& scores, const PerturbationSpec& spec,
                                                   std::size_t batches) {
  const std::size_t n = scores.perturbed.size();
  std::vector<double> num(n);
  std::vector<double> den(n);
  for (std::size_t r = 0; r < n; ++r) {
    num[r] = scores.perturbed[r] * scores.perturbed[r];
    den[r] = scores.baseline[r] * scores.baseline[r];
  }
  const MeanEstimate pert = batch_means(num, batches);
  const MeanEstimate base = batch_means(den, batches);
  const MeanEstimate ratio = paired_ratio(num, den, batches);
  InformationLossReport report;
  report.baseline = base.mean;
  report.perturbed = pert.mean;
  report.loss = base.mean - pert.mean;
  report.relative_loss = 1.0 - ratio.mean;
  report.baseline_std_error = base.std_error;
  report.perturbed_std_error = pert.std_error;
  report.relative_loss_std_error = ratio.std_error;
  report.n_samples = n;
  report.spec = spec;
  report.provenance = "monte-carlo";
  return report;
}

InformationLossReport information_loss_mc(const GroundTruth& truth, const PerturbationSpec& spec,
                                          const FisherMcConfig& config) {
  return information_loss_from_scores(simulate_scores(truth, spec, config), spec, config.batches);
}

FisherEstimate single_target_fisher(const SingleTargetModel& model, double theta_star, SingleTargetRegime regime,
                                    const FisherMcConfig& config) {
  if (config.outer < 2) throw ConfigError("single-target Fisher estimation needs at least 2 samples");
  if (config.frames < 1) throw ConfigError("each replicate needs at least one frame");
  const SingleTargetModel m = model.with_theta(theta_star);
  if (regime == SingleTargetRegime::Hmm && m.special()) {
    throw ModelViolationError("the HMM regime needs the linear Gaussian observation model");
  }
  if (regime == SingleTargetRegime::Hmm && m.is_static()) {
    throw ModelViolationError("the HMM regime needs a moving target");
  }
  std::vector<double> squares(config.outer);
  parallel_for(config.outer, config.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<ObservationFrame> frames(static_cast<std::size_t>(config.frames));
    for (std::size_t r = begin; r < end; ++r) {
      Rng rng(config.seed, derive_stream(config.stream, r));
      double score = 0.0;
      if (regime == SingleTargetRegime::IidStatic) {
        for (int t = 0; t < config.frames; ++t) score += m.score_g(m.sample_g(0.0, rng), 0.0);
      } else {
        double x = 0.0;
        for (auto& f : frames) {
          x = m.sample_f(x, rng);
          f.points.assign(1, m.sample_g(x, rng));
        }
        score = kalman_log_likelihood(m, 0.0, frames).score;
      }
      squares[r] = score * score;
    }
  });
  const MeanEstimate est = batch_means(squares, config.batches);
  nlohmann::json echo = config.to_json();
  echo["regime"] = regime == SingleTargetRegime::IidStatic ? "iid-static" : "hmm";
  echo["theta_star"] = theta_star;
  return {scalar_matrix(est.mean), scalar_matrix(est.std_error), est.n, std::move(echo)};
}

double loss_false_alarm_worst_case(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterDomainError("clutter rate must be non-negative");
  if (lambda == 0.0) return 0.0;
  double total = 0.0;
  for (std::int64_t k = 1;; ++k) {
    const double pmf = std::exp(log_poisson_pmf(k, lambda));
    total += pmf * static_cast<double>(k) / static_cast<double>(k + 1);
    const double next_ratio = lambda / static_cast<double>(k + 1);
    // Geometric bound on the remaining Poisson mass once terms decrease.
    if (next_ratio < 1.0 && pmf * next_ratio / (1.0 - next_ratio) < 1e-14) break;
  }
  return total;
}

double loss_false_alarm_worst_case_closed_form(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterDomainError("clutter rate must be non-negative");
  if (lambda == 0.0) return 0.0;
  return 1.0 + std::expm1(-lambda) / lambda;
}

InformationLossReport loss_detection_failure(double p_detection, int num_targets, double single_information) {
  if (!(p_detection > 0.0 && p_detection <= 1.0)) throw ParameterDomainError("detection probability must lie in (0, 1]");
  if (num_targets < 1) throw ParameterDomainError("number of targets must be at least 1");
  if (!(single_information >= 0.0)) throw ParameterDomainError("single-target information must be non-negative");
  InformationLossReport r;
  r.baseline = num_targets * single_information;
  r.loss = (1.0 - p_detection) * r.baseline;
  r.perturbed = r.baseline - r.loss;
  r.relative_loss = 1.0 - p_detection;
  r.spec = PerturbationSpec{1, kUnbounded};
  r.provenance = "closed-form";
  return r;
}

double cardinality_information(double p_detection, int num_targets) {
  if (!(p_detection > 0.0 && p_detection < 1.0)) {
    throw ParameterDomainError("cardinality information needs p_D strictly between 0 and 1");
  }
  if (num_targets < 1) throw ParameterDomainError("number of targets must be at least 1");
  return num_targets / (p_detection * (1.0 - p_detection));
}

double additivity_unperturbed_targets(const InformationLossReport& report_k, int extra_targets, double p_detection,
                                      double single_information) {
  if (extra_targets < 0) throw ParameterDomainError("number of extra targets must be non-negative");
  return report_k.perturbed + p_detection * extra_targets * single_information;
}

ScoreIdentityCheck score_conditional_expectation_identity_check(std::span<const SimulatedFrame> frames,
                                                                const GroundTruth& truth,
                                                                const PerturbationSpec& spec) {
  truth.validate();
  const ModelParams& params = truth.params;
  if (!params.target.is_static()) throw ModelViolationError("the identity check needs static targets");
  const auto observed = observed_frames(frames);
  Rng unused(0, 0);
  ScoreIdentityCheck out;
  out.identity_score = score_fisher_identity(observed, params, spec, truth.initial_states, ScoreOptions{}, unused);
  const double theta = params.target.theta();
  const double h = 1e-5 * std::max(1.0, std::fabs(theta));
  auto loglik = [&](double th) {
    ModelParams p = params;
    p.target = params.target.with_theta(th);
    return marginal_log_likelihood_sequence(observed, p, truth.initial_states, Integration::exact_static(), spec);
  };
  out.finite_difference_score = (loglik(theta + h) - loglik(theta - h)) / (2.0 * h);
  out.gap = std::fabs(out.identity_score - out.finite_difference_score);
  return out;
}

}  // namespace mtt

#include "mtt/mle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mtt/errors.hpp"
#include "mtt/parallel.hpp"
#include "mtt/simulator.hpp"
#include "mtt/stats.hpp"

namespace mtt {

namespace {

constexpr double kInvGolden = 0.6180339887498949;

ModelParams with_free_value(const ModelParams& base, FreeParam which, double v, bool& valid) {
  ModelParams p = base;
  valid = true;
  switch (which) {
    case FreeParam::Theta:
      if (!base.target.valid_theta(v)) {
        valid = false;
        return p;
      }
      p.target = base.target.with_theta(v);
      break;
    case FreeParam::DetectionProbability:
      valid = v > 0.0 && v <= 1.0;
      p.p_detection = v;
      break;
    case FreeParam::ClutterRate:
      valid = v >= 0.0 && std::isfinite(v);
      p.clutter.rate = v;
      break;
  }
  return p;
}

Integration integration_for(const ModelParams& params, const MleExperimentConfig& config, std::uint64_t stream) {
  if (params.target.is_static()) return Integration::exact_static();
  return Integration::monte_carlo(config.mc_samples, config.seed, derive_stream(stream, 0xC0FFEE));
}

double estimate_once(const GroundTruth& truth, const PerturbationSpec& spec, int n, const MleExperimentConfig& config,
                     std::uint64_t stream) {
  const Rng rng(config.seed, stream);
  const auto frames = observed_frames(simulate_sequence(truth, spec, n, rng));
  MleOptions options;
  options.spec = spec;
  options.tol = config.tol;
  const auto bounds = config.bounds.value_or(default_bounds(truth.params.target.role(), truth.params.target.theta()));
  options.lower = bounds.first;
  options.upper = bounds.second;
  options.integration = integration_for(truth.params, config, stream);
  return maximize_loglik(frames, truth.params, truth.initial_states, options).theta_hat;
}

}  // namespace

std::pair<double, double> default_bounds(ParamRole role, double theta_star) {
  if (role == ParamRole::ObservationShift) return {theta_star - 5.0, theta_star + 5.0};
  if (!(theta_star > 0.0)) throw ParameterDomainError("scale parameter must be positive");
  return {theta_star / 10.0, theta_star * 10.0};
}

MleResult maximize_loglik(std::span<const ObservationFrame> frames, const ModelParams& params_template,
                          std::span<const double> initial_states, const MleOptions& options) {
  if (frames.empty()) throw DataError("maximum likelihood needs at least one frame");
  if (options.free_param == FreeParam::DetectionProbability && params_template.fix_full_detection) {
    throw ConfigError("detection probability is pinned to one and cannot be optimized");
  }
  if (options.free_param == FreeParam::ClutterRate && params_template.fix_no_clutter) {
    throw ConfigError("clutter rate is pinned to zero and cannot be optimized");
  }
  if (!(options.lower < options.upper)) throw ConfigError("search interval must have lower < upper");
  if (!(options.tol > 0.0)) throw ConfigError("tolerance must be positive");

  MleResult result;
  result.n = frames.size();
  auto objective = [&](double v) {
    ++result.evaluations;
    bool valid = false;
    const ModelParams p = with_free_value(params_template, options.free_param, v, valid);
    if (!valid) return kNegInf;
    const double ll = marginal_log_likelihood_sequence(frames, p, initial_states, options.integration, options.spec);
    return std::isnan(ll) ? kNegInf : ll;
  };

  double a = options.lower;
  double b = options.upper;
  double c = b - kInvGolden * (b - a);
  double d = a + kInvGolden * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  while (b - a > options.tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvGolden * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvGolden * (b - a);
      fd = objective(d);
    }
    result.brackets.emplace_back(a, b);
  }
  double best = fc >= fd ? c : d;
  double best_value = std::max(fc, fd);
  for (double end : {options.lower, options.upper}) {
    const double v = objective(end);
    if (v > best_value) {
      best = end;
      best_value = v;
    }
  }
  if (!std::isfinite(best_value)) {
    throw DegenerateDataError("log-likelihood is not finite anywhere on [" + std::to_string(options.lower) + ", " +
                              std::to_string(options.upper) + "]");
  }
  result.theta_hat = best;
  result.loglik_at_hat = best_value;
  return result;
}

std::vector<ConsistencyRow> consistency_experiment(const GroundTruth& truth, const PerturbationSpec& spec,
                                                   std::span<const int> n_grid, const MleExperimentConfig& config) {
  if (config.replicates < 1) throw ConfigError("at least one replicate is required");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw ConfigError("sequence lengths must be positive");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw ConfigError("sequence lengths must be increasing");
  }
  const double theta_star = truth.params.target.theta();
  const auto reps = static_cast<std::size_t>(config.replicates);
  std::vector<ConsistencyRow> rows;
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    const int n = n_grid[g];
    std::vector<double> errors(reps);
    parallel_for(reps, config.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t r = begin; r < end; ++r) {
        const std::uint64_t stream = derive_stream(derive_stream(config.stream, g), r);
        errors[r] = estimate_once(truth, spec, n, config, stream) - theta_star;
      }
    });
    std::vector<double> abs_errors(reps);
    std::transform(errors.begin(), errors.end(), abs_errors.begin(), [](double e) { return std::fabs(e); });
    ConsistencyRow row;
    row.n = n;
    row.replicates = config.replicates;
    row.mean_abs_error = sample_mean(abs_errors);
    row.sd_abs_error = reps > 1 ? std::sqrt(sample_variance(abs_errors)) : 0.0;
    row.mean_error = sample_mean(errors);
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json NormalityReport::to_json() const {
  return {{"n", n},
          {"replicates", replicates},
          {"fisher", fisher},
          {"scaled_variance", scaled_variance},
          {"variance_ratio", variance_ratio},
          {"bias", bias},
          {"bias_std_error", bias_std_error},
          {"ad_statistic", ad_statistic},
          {"ad_p_value", ad_p_value}};
}

NormalityReport normality_experiment(const GroundTruth& truth, const PerturbationSpec& spec, int n,
                                     double fisher_per_frame, const MleExperimentConfig& config) {
  if (config.replicates < 8) throw ConfigError("the normality experiment needs at least 8 replicates");
  if (n < 1) throw ConfigError("sequence length must be positive");
  if (!(fisher_per_frame > 0.0)) throw ConfigError("Fisher information must be positive");
  const double theta_star = truth.params.target.theta();
  const auto reps = static_cast<std::size_t>(config.replicates);
  std::vector<double> errors(reps);
  parallel_for(reps, config.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      errors[r] = estimate_once(truth, spec, n, config, derive_stream(config.stream, r)) - theta_star;
    }
  });
  std::vector<double> scaled(reps);
  const double root_n = std::sqrt(static_cast<double>(n));
  std::transform(errors.begin(), errors.end(), scaled.begin(), [&](double e) { return root_n * e; });
  NormalityReport report;
  report.n = n;
  report.replicates = config.replicates;
  report.fisher = fisher_per_frame;
  report.scaled_variance = sample_variance(scaled);
  report.variance_ratio = report.scaled_variance * fisher_per_frame;
  report.bias = sample_mean(errors);
  report.bias_std_error = std::sqrt(sample_variance(errors) / static_cast<double>(reps));
  const NormalityTest ad = anderson_darling_normal(scaled);
  report.ad_statistic = ad.statistic;
  report.ad_p_value = ad.p_value;
  return report;
}

std::vector<GapRow> likelihood_gap_experiment(const GroundTruth& truth, const PerturbationSpec& spec,
                                              std::span<const double> theta_grid, int n,
                                              const MleExperimentConfig& config) {
  if (n < 1) throw ConfigError("sequence length must be positive");
  const double theta_star = truth.params.target.theta();
  const auto frames = observed_frames(simulate_sequence(truth, spec, n, Rng(config.seed, config.stream)));
  const Integration integration = integration_for(truth.params, config, config.stream);
  auto loglik = [&](double theta) {
    ModelParams p = truth.params;
    p.target = truth.params.target.with_theta(theta);
    return marginal_log_likelihood_sequence(frames, p, truth.initial_states, integration, spec);
  };
  const double reference = loglik(theta_star);
  std::vector<GapRow> rows(theta_grid.size());
  parallel_for(theta_grid.size(), config.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      rows[i] = {theta_grid[i], (loglik(theta_grid[i]) - reference) / static_cast<double>(n)};
    }
  });
  return rows;
}

}  // namespace mtt

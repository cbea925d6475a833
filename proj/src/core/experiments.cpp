#include "mtt/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>

#include "mtt/errors.hpp"
#include "mtt/fisher.hpp"
#include "mtt/likelihood.hpp"
#include "mtt/mle.hpp"
#include "mtt/parallel.hpp"
#include "mtt/stats.hpp"

#ifndef MTT_GIT_HASH
#define MTT_GIT_HASH "unknown"
#endif

namespace mtt {

namespace {

using nlohmann::json;

struct Context {
  const ExperimentConfig& config;
  double scale;
  int threads;
  std::vector<ResultRow> rows;

  const json& s(const char* key) const { return config.settings.at(key); }
  double real(const char* key) const { return s(key).get<double>(); }
  int integer(const char* key) const { return s(key).get<int>(); }
  std::vector<double> reals(const char* key) const { return s(key).get<std::vector<double>>(); }

  std::size_t scaled(const char* key, std::size_t floor) const {
    const double v = std::round(s(key).get<double>() * scale);
    return std::max<std::size_t>(floor, static_cast<std::size_t>(std::max(0.0, v)));
  }

  void add(const std::string& curve, const std::string& x_name, double x, const std::string& y_name, double y,
           double se, std::uint64_t n) {
    rows.push_back({config.experiment, curve, x_name, x, y_name, y, se, n, config.seed});
  }

  FisherMcConfig mc(std::size_t outer, std::uint64_t stream) const {
    FisherMcConfig c;
    c.outer = outer;
    c.threads = threads;
    c.seed = config.seed;
    c.stream = stream;
    return c;
  }
};

constexpr std::size_t kMinOuter = 100;
constexpr std::size_t kMinReplicates = 10;

int bound_value(const json& v) {
  if (v.is_string()) return kUnbounded;
  const int b = v.get<int>();
  return b;
}

std::string alpha_label(int alpha) { return "alpha=" + bound_to_string(alpha); }

/// Targets centred on 0 with spacing tau: tau (i - (K + 1) / 2), i = 1..K.
std::vector<double> spaced_states(int k, double tau) {
  std::vector<double> x(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) x[static_cast<std::size_t>(i)] = tau * (i + 1 - 0.5 * (k + 1));
  return x;
}

GroundTruth gaussian_truth(int k, double tau, double obs_variance, double walk_std, double p_detection,
                           double clutter_rate, double clutter_variance) {
  GroundTruth t;
  t.params.target = SingleTargetModel::linear_gaussian(ParamRole::ObservationVariance, obs_variance, walk_std);
  t.params.num_targets = k;
  t.params.p_detection = p_detection;
  t.params.clutter.rate = clutter_rate;
  t.params.clutter.spatial = ClutterDensity::gaussian(0.0, clutter_variance);
  t.initial_states = spaced_states(k, tau);
  t.validate();
  return t;
}

GroundTruth model_truth(const Context& c) {
  return gaussian_truth(c.integer("num_targets"), c.real("tau"), c.real("obs_variance"), c.real("walk_std"),
                        c.real("p_detection"), c.real("clutter_rate"), c.real("clutter_variance"));
}

PerturbationSpec model_spec(const Context& c) {
  PerturbationSpec spec{bound_value(c.s("alpha")), bound_value(c.s("beta"))};
  spec.validate();
  return spec;
}

MleExperimentConfig mle_config(const Context& c, std::uint64_t stream) {
  MleExperimentConfig m;
  m.replicates = static_cast<int>(c.scaled("replicates", kMinReplicates));
  m.seed = c.config.seed;
  m.stream = stream;
  m.threads = c.threads;
  m.mc_samples = c.integer("particles");
  return m;
}

void add_loss(Context& c, const std::string& curve, const std::string& x_name, double x,
              const InformationLossReport& r) {
  c.add(curve, x_name, x, "relative_loss", r.relative_loss, r.relative_loss_std_error, r.n_samples);
}

void run_false_alarm(Context& c) {
  const double theta = c.real("obs_variance");
  const auto lambdas = c.reals("lambda_grid");
  const auto widths = c.reals("uniform_half_widths");
  const std::size_t outer = c.scaled("samples", kMinOuter);
  for (double l : lambdas) {
    if (!(l >= 0.0)) throw ConfigError("clutter rates must be non-negative");
  }
  std::vector<std::pair<std::string, ClutterDensity>> curves;
  curves.emplace_back("worst-case", ClutterDensity::gaussian(0.0, theta));
  for (double a : widths) {
    char label[48];
    std::snprintf(label, sizeof label, "uniform-a%g", a);
    curves.emplace_back(label, ClutterDensity::uniform(a));
  }
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double lambda = lambdas[i];
    c.add("closed-form", "lambda", lambda, "relative_loss", loss_false_alarm_worst_case(lambda), 0.0, 0);
    for (const auto& [label, density] : curves) {
      GroundTruth truth = gaussian_truth(1, 0.0, theta, 0.0, 1.0, lambda, 1.0);
      truth.params.clutter.spatial = density;
      const auto report = information_loss_mc(truth, PerturbationSpec::full(), c.mc(outer, derive_stream(1, i)));
      add_loss(c, label, "lambda", lambda, report);
    }
  }
}

void run_association_tau_alpha(Context& c) {
  const int k = c.integer("num_targets");
  const auto taus = c.reals("tau_grid");
  const std::size_t outer = c.scaled("samples", kMinOuter);
  const int beta = bound_value(c.s("beta"));
  std::vector<int> alphas;
  for (const auto& a : c.s("alpha_grid")) alphas.push_back(bound_value(a));
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const GroundTruth truth = gaussian_truth(k, taus[i], c.real("obs_variance"), 0.0, 1.0, 0.0, 1.0);
    for (int alpha : alphas) {
      const PerturbationSpec spec{alpha, beta};
      spec.validate();
      add_loss(c, alpha_label(alpha), "tau", taus[i], information_loss_mc(truth, spec, c.mc(outer, derive_stream(2, i))));
    }
  }
}

void run_num_targets_special(Context& c) {
  const double eps = c.real("epsilon");
  const double spacing = c.real("spacing");
  const int constant_k = c.integer("constant_space_targets");
  const std::size_t outer = c.scaled("samples", kMinOuter);
  const double r = SpecialEpsilonLikelihood::solve_radius(eps);
  if (!(spacing > 2.0 * r)) {
    throw ConfigError("spacing must exceed the window width 2r = " + std::to_string(2.0 * r));
  }
  const auto ks = c.reals("k_grid");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const int k = static_cast<int>(ks[i]);
    if (k < 1 || k > constant_k) {
      throw ConfigError("k_grid values must lie in [1, constant_space_targets]");
    }
    std::vector<double> centers(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) centers[static_cast<std::size_t>(j)] = spacing * j;
    for (const bool adaptive : {false, true}) {
      const int extent_targets = adaptive ? k : constant_k;
      auto special = std::make_shared<const SpecialEpsilonLikelihood>(eps, centers, -r,
                                                                      spacing * (extent_targets - 1) + r);
      GroundTruth truth;
      truth.params.target = SingleTargetModel::special_epsilon(special, 0.0);
      truth.params.num_targets = k;
      truth.initial_states = centers;
      truth.validate();
      const auto report = information_loss_mc(truth, PerturbationSpec::full(), c.mc(outer, derive_stream(3, i)));
      add_loss(c, adaptive ? "adaptive" : "constant", "num_targets", k, report);
    }
  }
}

void run_num_targets_assoc(Context& c) {
  const double tau = c.real("tau");
  const int alpha = bound_value(c.s("alpha"));
  const std::size_t outer = c.scaled("samples", kMinOuter);
  const auto ks = c.reals("k_grid");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const int k = static_cast<int>(ks[i]);
    if (k < 1) throw ConfigError("k_grid values must be positive");
    const GroundTruth truth = gaussian_truth(k, tau, c.real("obs_variance"), 0.0, 1.0, 0.0, 1.0);
    const PerturbationSpec spec{alpha, 0};
    spec.validate();
    add_loss(c, alpha_label(alpha), "num_targets", k, information_loss_mc(truth, spec, c.mc(outer, derive_stream(4, i))));
  }
}

void run_detection_failure(Context& c) {
  const auto ps = c.reals("p_grid");
  FisherMcConfig mc = c.mc(c.scaled("outer_samples", kMinOuter), derive_stream(5, 0));
  mc.frames = c.integer("frames");
  mc.score.inner_samples = c.integer("inner_samples");
  mc.score.states = c.s("state_integration").get<std::string>() == "particles" ? StateIntegration::Particles
                                                                                : StateIntegration::Auto;
  for (double p : ps) {
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("p_grid values must lie in (0, 1]");
    const GroundTruth truth = gaussian_truth(1, 0.0, c.real("obs_variance"), c.real("walk_std"), p, 0.0, 1.0);
    // Same stream for every p_D: trajectories and target observations are shared.
    add_loss(c, "monte-carlo", "p_detection", p, information_loss_mc(truth, PerturbationSpec{1, kUnbounded}, mc));
    c.add("reference", "p_detection", p, "relative_loss", loss_detection_failure(p, 1, 1.0).relative_loss, 0.0, 0);
  }
}

void run_consistency(Context& c) {
  const GroundTruth truth = model_truth(c);
  const PerturbationSpec spec = model_spec(c);
  std::vector<int> grid;
  for (double n : c.reals("n_grid")) grid.push_back(static_cast<int>(n));
  const MleExperimentConfig m = mle_config(c, derive_stream(6, 0));
  const auto rows = consistency_experiment(truth, spec, grid, m);
  std::vector<double> log_n;
  std::vector<double> log_err;
  std::vector<double> log_se;
  for (const auto& r : rows) {
    const double se = r.sd_abs_error / std::sqrt(static_cast<double>(r.replicates));
    c.add("mean_abs_error", "n", r.n, "abs_error", r.mean_abs_error, se, static_cast<std::uint64_t>(r.replicates));
    c.add("mean_error", "n", r.n, "error", r.mean_error, 0.0, static_cast<std::uint64_t>(r.replicates));
    log_n.push_back(std::log(static_cast<double>(r.n)));
    log_err.push_back(std::log(r.mean_abs_error));
    log_se.push_back(se / r.mean_abs_error);
  }
  if (rows.size() >= 2) {
    const LinearFit fit = linear_fit(log_n, log_err, rows.size() > 2 ? std::span<const double>(log_se)
                                                                     : std::span<const double>());
    c.add("loglog-slope", "grid_points", static_cast<double>(rows.size()), "slope", fit.slope, fit.slope_std_error,
          static_cast<std::uint64_t>(m.replicates));
  }
}

void run_normality(Context& c) {
  const GroundTruth truth = model_truth(c);
  const PerturbationSpec spec = model_spec(c);
  if (!truth.params.target.is_static()) throw ConfigError("the normality experiment needs static targets");
  const int n = c.integer("frames");
  FisherMcConfig fmc = c.mc(c.scaled("fisher_samples", kMinOuter), derive_stream(7, 1));
  const FisherEstimate fisher = fisher_mc(truth, spec, fmc);
  const auto report = normality_experiment(truth, spec, n, fisher.value(), mle_config(c, derive_stream(7, 0)));
  const auto reps = static_cast<std::uint64_t>(report.replicates);
  c.add("fisher_per_frame", "n", n, "fisher", fisher.value(), fisher.error(), fisher.n_samples);
  c.add("scaled_variance", "n", n, "variance", report.scaled_variance,
        report.scaled_variance * std::sqrt(2.0 / (report.replicates - 1)), reps);
  const double ratio_se = report.variance_ratio * std::hypot(std::sqrt(2.0 / (report.replicates - 1)),
                                                             fisher.error() / fisher.value());
  c.add("variance_ratio", "n", n, "ratio", report.variance_ratio, ratio_se, reps);
  c.add("bias", "n", n, "bias", report.bias, report.bias_std_error, reps);
  c.add("anderson_darling", "n", n, "p_value", report.ad_p_value, 0.0, reps);
}

void run_likelihood_gap(Context& c) {
  const GroundTruth truth = model_truth(c);
  const PerturbationSpec spec = model_spec(c);
  const int n = c.integer("frames");
  MleExperimentConfig m;
  m.seed = c.config.seed;
  m.stream = derive_stream(8, 0);
  m.threads = c.threads;
  m.mc_samples = c.integer("particles");
  const auto grid = c.reals("theta_grid");
  for (const auto& row : likelihood_gap_experiment(truth, spec, grid, n, m)) {
    c.add("gap", "theta", row.theta, "mean_log_ratio", row.gap, 0.0, static_cast<std::uint64_t>(n));
  }
}

/// Random small instance: K <= 3 targets, M <= 4 points.
struct SmallInstance {
  ModelParams params;
  PerturbationSpec spec;
  std::vector<double> states;
  std::vector<double> points;
};

SmallInstance random_instance(Rng& rng) {
  SmallInstance s;
  const int k = 1 + static_cast<int>(rng.uniform() * 3.0);
  const int m = static_cast<int>(rng.uniform() * 5.0);
  s.params.target = SingleTargetModel::linear_gaussian(ParamRole::ObservationVariance, 0.5 + rng.uniform());
  s.params.num_targets = k;
  s.params.p_detection = 0.3 + 0.7 * rng.uniform();
  s.params.clutter.rate = rng.uniform() < 0.25 ? 0.0 : 2.0 * rng.uniform();
  s.params.clutter.spatial = ClutterDensity::gaussian(0.0, 4.0);
  const int alphas[] = {1, 2, 3, kUnbounded};
  const int betas[] = {0, 1, kUnbounded};
  s.spec = {alphas[static_cast<int>(rng.uniform() * 4.0)], betas[static_cast<int>(rng.uniform() * 3.0)]};
  for (int i = 0; i < k; ++i) s.states.push_back(2.0 * rng.normal());
  for (int j = 0; j < m; ++j) s.points.push_back(2.0 * rng.normal());
  return s;
}

void run_property_suite(Context& c) {
  const int instances = c.integer("instances");
  const int score_instances = c.integer("score_instances");
  if (instances < 1 || score_instances < 1) throw ConfigError("instance counts must be positive");
  Rng rng(c.config.seed, derive_stream(9, 0));

  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    SmallInstance s = random_instance(rng);
    FrameEvaluator evaluator(s.params, s.spec);
    const double fast = evaluator.evaluate(s.points, s.states).log_likelihood;
    std::vector<double> terms;
    for (const auto& t : enumerate_latents(s.points, s.states, s.params, s.spec)) terms.push_back(t.log_weight);
    const double slow = terms.empty() ? kNegInf : log_sum_exp(terms);
    if (fast == kNegInf && slow == kNegInf) continue;
    worst = std::max(worst, std::fabs(std::exp(fast - slow) - 1.0));
  }
  c.add("likelihood-oracle", "instances", instances, "max_relative_error", worst, 0.0,
        static_cast<std::uint64_t>(instances));

  double cik = 0.0;
  for (int i = 0; i < instances; ++i) {
    const int k = 2 + static_cast<int>(rng.uniform() * 4.0);
    ModelParams p;
    p.num_targets = k;
    MultiTargetState x;
    ObservationFrame f;
    for (int j = 0; j < k; ++j) {
      x.push_back(rng.normal());
      f.points.push_back(rng.normal());
    }
    const auto w = association_weights_cik(f, x, p);
    cik = std::max({cik, (w.rowwise().sum().array() - 1.0).abs().maxCoeff(),
                    (w.colwise().sum().array() - 1.0).abs().maxCoeff()});
  }
  c.add("cik-doubly-stochastic", "instances", instances, "max_abs_error", cik, 0.0,
        static_cast<std::uint64_t>(instances));

  double combinatorics = 0.0;
  for (int k = 0; k <= 7; ++k) {
    for (int alpha = 1; alpha <= k + 1; ++alpha) {
      const auto count = count_constrained(k, alpha);
      const auto listed = enumerate_constrained(k, alpha).size();
      combinatorics = std::max(combinatorics, std::fabs(static_cast<double>(*count.exact) - static_cast<double>(listed)));
    }
  }
  c.add("count-constrained", "max_k", 7, "max_abs_error", combinatorics, 0.0, 0);

  double score = 0.0;
  for (int i = 0; i < score_instances; ++i) {
    SmallInstance s = random_instance(rng);
    if (s.points.empty()) s.points.push_back(rng.normal());
    const std::vector<ObservationFrame> frames{ObservationFrame{s.points}};
    FrameEvaluator evaluator(s.params, s.spec);
    const FrameTerms terms = evaluator.evaluate(s.points, s.states);
    if (terms.log_likelihood == kNegInf) continue;
    const double theta = s.params.target.theta();
    const double h = 1e-5 * theta;
    auto ll = [&](double th) {
      ModelParams p = s.params;
      p.target = s.params.target.with_theta(th);
      return FrameEvaluator(p, s.spec).evaluate(s.points, s.states).log_likelihood;
    };
    const double fd = (ll(theta + h) - ll(theta - h)) / (2.0 * h);
    score = std::max(score, std::fabs(terms.score - fd) / std::max(1.0, std::fabs(fd)));
  }
  c.add("score-finite-difference", "instances", score_instances, "max_relative_error", score, 0.0,
        static_cast<std::uint64_t>(score_instances));

  double series = 0.0;
  for (double l : {0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0}) {
    series = std::max(series, std::fabs(loss_false_alarm_worst_case(l) - loss_false_alarm_worst_case_closed_form(l)));
  }
  c.add("false-alarm-series", "grid_points", 7, "max_abs_error", series, 0.0, 0);
}

}  // namespace

std::string git_hash() { return MTT_GIT_HASH; }

RunResult execute_experiment(const ExperimentConfig& config, const RunOptions& options) {
  if (!(options.scale > 0.0) || !std::isfinite(options.scale)) throw ConfigError("scale must be positive");
  const auto start = std::chrono::steady_clock::now();
  Context c{config, options.scale, resolve_threads(options.threads), {}};
  const std::string& id = config.experiment;
  if (id == "false-alarm") {
    run_false_alarm(c);
  } else if (id == "association-tau-alpha") {
    run_association_tau_alpha(c);
  } else if (id == "num-targets-special") {
    run_num_targets_special(c);
  } else if (id == "num-targets-assoc") {
    run_num_targets_assoc(c);
  } else if (id == "detection-failure") {
    run_detection_failure(c);
  } else if (id == "consistency") {
    run_consistency(c);
  } else if (id == "normality") {
    run_normality(c);
  } else if (id == "likelihood-gap") {
    run_likelihood_gap(c);
  } else if (id == "property-suite") {
    run_property_suite(c);
  } else {
    throw ConfigError("unknown experiment id '" + id + "'");
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  RunResult result;
  result.rows = std::move(c.rows);
  result.out_dir = options.out_dir.empty() ? config.output : options.out_dir;
  result.manifest = {{"config", config.to_json()},
                     {"seed", config.seed},
                     {"git_hash", git_hash()},
                     {"wall_time_seconds", wall},
                     {"scale", options.scale},
                     {"threads", c.threads},
                     {"rows", result.rows.size()}};
  return result;
}

void write_outputs(const RunResult& result) {
  const std::filesystem::path dir(result.out_dir);
  write_text_file((dir / "results.csv").string(), results_csv(result.rows));
  write_text_file((dir / "manifest.json").string(), result.manifest.dump(2) + "\n");
}

}  // namespace mtt

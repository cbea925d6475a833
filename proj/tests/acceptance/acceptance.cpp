// Acceptance suite: one PASS/FAIL line per criterion, at the full default
// sample sizes. Exits non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "mtt/experiment_config.hpp"
#include "mtt/experiments.hpp"
#include "mtt/fisher.hpp"
#include "mtt/likelihood.hpp"
#include "mtt/parallel.hpp"
#include "mtt/perm_assoc.hpp"
#include "mtt/stats.hpp"
#include "../support/oracles.hpp"

using namespace mtt;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSeed = 20240601;
constexpr double kSigmas = 3.0;

// Tolerances
constexpr double kFalseAlarmFullSeconds = 300.0;
constexpr double kFalseAlarmSmallSeconds = 10.0;
constexpr double kDetectionFullSeconds = 1200.0;
constexpr double kDetectionSmallSeconds = 30.0;
constexpr double kOracleRelError = 1e-10;
constexpr double kDoublyStochastic = 1e-12;
constexpr double kScoreRelError = 1e-4;
constexpr double kSlopeTarget = -0.5;
constexpr double kSlopeTolerance = 0.15;
constexpr double kRatioLow = 0.8;
constexpr double kRatioHigh = 1.25;
constexpr double kFlatSlopeSigmas = 2.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

struct Timed {
  RunResult result;
  double seconds = 0.0;
};

Timed run(const json& doc, double scale = 1.0) {
  RunOptions opts;
  opts.scale = scale;
  opts.threads = resolve_threads(0);
  const auto start = std::chrono::steady_clock::now();
  Timed t{execute_experiment(parse_config(doc), opts), 0.0};
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return t;
}

/// curve -> x -> (y, se)
using Table = std::map<std::string, std::map<double, std::pair<double, double>>>;

Table tabulate(const RunResult& r) {
  Table t;
  for (const auto& row : r.rows) t[row.curve][row.x_value] = {row.y_value, row.std_error};
  return t;
}

GroundTruth static_truth(int k, double tau, double p_detection = 1.0, double lambda = 0.0) {
  GroundTruth t;
  t.params.target = SingleTargetModel::linear_gaussian(ParamRole::ObservationVariance, 1.0);
  t.params.num_targets = k;
  t.params.p_detection = p_detection;
  t.params.clutter.rate = lambda;
  for (int i = 1; i <= k; ++i) t.initial_states.push_back(tau * (i - (k + 1) / 2.0));
  return t;
}

FisherMcConfig mc_config(std::size_t outer, std::uint64_t stream) {
  FisherMcConfig c;
  c.outer = outer;
  c.seed = kSeed;
  c.stream = stream;
  c.threads = resolve_threads(0);
  return c;
}

// 1 and 2 share one run of the false-alarm experiment.
RunResult false_alarm_run;
double false_alarm_seconds = 0.0;

Outcome worst_case_false_alarm() {
  const Timed full = run(json{{"experiment", "false-alarm"}, {"seed", kSeed}});
  false_alarm_run = full.result;
  false_alarm_seconds = full.seconds;
  const Timed small = run(json{{"experiment", "false-alarm"}, {"seed", kSeed}}, 0.01);
  const Table t = tabulate(full.result);
  bool pass = full.seconds <= kFalseAlarmFullSeconds && small.seconds <= kFalseAlarmSmallSeconds;
  std::string detail;
  for (double lambda : {0.1, 1.0, 10.0, 100.0}) {
    const auto [y, se] = t.at("worst-case").at(lambda);
    const double exact = loss_false_alarm_worst_case_closed_form(lambda);
    const double z = std::abs(y - exact) / se;
    pass = pass && z <= kSigmas;
    detail += "lambda=" + fmt("%g", lambda) + " z=" + fmt("%.2f", z) + "; ";
  }
  detail += "runtime " + fmt("%.1f", full.seconds) + " s full, " + fmt("%.2f", small.seconds) + " s at scale 0.01";
  return {pass, detail};
}

Outcome uniform_dominance() {
  const Table t = tabulate(false_alarm_run);
  const auto& worst = t.at("worst-case");
  bool pass = true;
  double worst_margin = -1e300;
  int checked = 0;
  for (const auto& [curve, points] : t) {
    if (curve.rfind("uniform-", 0) != 0) continue;
    for (const auto& [lambda, v] : points) {
      const auto& w = worst.at(lambda);
      const double se = std::hypot(v.second, w.second);
      const double margin = (v.first - w.first) / se;  // in combined std errors
      worst_margin = std::max(worst_margin, margin);
      pass = pass && v.first <= w.first + kSigmas * se;
      ++checked;
    }
  }
  return {pass && checked == 65, std::to_string(checked) + " (lambda, a) pairs; largest excess " +
                                     fmt("%.2f", worst_margin) + " se"};
}

Outcome detection_failure() {
  const json doc{{"experiment", "detection-failure"}, {"seed", kSeed}, {"p_grid", {0.2, 0.5, 0.8}}};
  const Timed full = run(doc);
  const Timed small = run(doc, 0.01);
  const Table t = tabulate(full.result);
  bool pass = full.seconds <= kDetectionFullSeconds && small.seconds <= kDetectionSmallSeconds;
  std::string detail;
  // exact Gaussian value of the same protocol, for the record
  std::vector<int> all(50);
  for (int i = 0; i < 50; ++i) all[static_cast<std::size_t>(i)] = i + 1;
  const double full_info = oracle::random_walk_fisher(all, 0.01, 1.0);
  for (double p : {0.2, 0.5, 0.8}) {
    const auto [y, se] = t.at("monte-carlo").at(p);
    const double z = std::abs(y - (1.0 - p)) / se;
    pass = pass && z <= kSigmas;
    Rng rng(kSeed, 99);
    double sum = 0.0;
    const int draws = 4000;
    for (int d = 0; d < draws; ++d) {
      std::vector<int> seen;
      for (int i = 1; i <= 50; ++i) {
        if (rng.uniform() < p) seen.push_back(i);
      }
      if (!seen.empty()) sum += oracle::random_walk_fisher(seen, 0.01, 1.0);
    }
    detail += "p=" + fmt("%.1f", p) + " loss " + fmt("%.4f", y) + " vs " + fmt("%.1f", 1.0 - p) + " z=" +
              fmt("%.2f", z) + " (exact Gaussian " + fmt("%.4f", 1.0 - sum / draws / full_info) + "); ";
  }
  detail += "runtime " + fmt("%.1f", full.seconds) + " s full, " + fmt("%.2f", small.seconds) + " s at scale 0.01";
  return {pass, detail};
}

Outcome tau_alpha_structure() {
  const Timed r = run(json{{"experiment", "association-tau-alpha"}, {"seed", kSeed}});
  const Table t = tabulate(r.result);
  bool alpha_one_zero = true;
  for (const auto& [tau, v] : t.at("alpha=1")) alpha_one_zero = alpha_one_zero && std::abs(v.first) <= kSigmas * v.second + 1e-12;
  bool tau_zero = true;
  for (const auto& [curve, points] : t) {
    const auto& v = points.at(0.0);
    tau_zero = tau_zero && std::abs(v.first) <= kSigmas * v.second + 1e-12;
  }
  bool monotone = true;
  const std::vector<std::string> order{"alpha=1", "alpha=2", "alpha=3", "alpha=4", "alpha=5", "alpha=inf"};
  for (std::size_t j = 1; j < order.size(); ++j) {
    const auto& a = t.at(order[j - 1]).at(1.0);
    const auto& b = t.at(order[j]).at(1.0);
    monotone = monotone && b.first >= a.first - kSigmas * std::hypot(a.second, b.second);
  }
  const auto& near = t.at("alpha=inf").at(1.0);
  const auto& far = t.at("alpha=inf").at(5.0);
  const bool peak = near.first > far.first;
  return {alpha_one_zero && tau_zero && monotone && peak,
          std::string("alpha=1 zero: ") + (alpha_one_zero ? "yes" : "no") + "; tau=0 zero: " +
              (tau_zero ? "yes" : "no") + "; non-decreasing in alpha at tau=1: " + (monotone ? "yes" : "no") +
              "; alpha=inf loss(tau=1)=" + fmt("%.3f", near.first) + " > loss(tau=5)=" + fmt("%.3f", far.first)};
}

Outcome strictness() {
  const GroundTruth truth = static_truth(2, 1.0);
  const auto full = information_loss_mc(truth, PerturbationSpec{kUnbounded, 0}, mc_config(10000, 1));
  const auto none = information_loss_mc(truth, PerturbationSpec{1, 0}, mc_config(10000, 1));
  const bool strict = full.relative_loss > kSigmas * full.relative_loss_std_error;
  const bool zero = std::abs(none.relative_loss) <= kSigmas * none.relative_loss_std_error + 1e-12;
  return {strict && zero, "alpha=inf loss " + fmt("%.4f", full.relative_loss) + " (" +
                              fmt("%.1f", full.relative_loss / full.relative_loss_std_error) +
                              " se); alpha=1 loss " + fmt("%.2g", none.relative_loss)};
}

Outcome num_targets_special() {
  const Timed r = run(json{{"experiment", "num-targets-special"}, {"seed", kSeed}});
  const Table t = tabulate(r.result);
  auto fit = [&](const std::string& curve) {
    std::vector<double> x, y, se;
    for (const auto& [k, v] : t.at(curve)) {
      x.push_back(k);
      y.push_back(v.first);
      se.push_back(v.second);
    }
    return linear_fit(x, y, se);
  };
  const LinearFit constant = fit("constant");
  const LinearFit adaptive = fit("adaptive");
  const bool grows = constant.slope > 0.0;
  const bool flat = std::abs(adaptive.slope) < kFlatSlopeSigmas * adaptive.slope_std_error;
  return {grows && flat, "constant slope " + fmt("%.2e", constant.slope) + " +- " +
                             fmt("%.1e", constant.slope_std_error) + "; adaptive slope " +
                             fmt("%.2e", adaptive.slope) + " +- " + fmt("%.1e", adaptive.slope_std_error)};
}

Outcome oracle_suite() {
  Rng rng(kSeed, 7);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    oracle::Instance in;
    in.num_targets = 1 + static_cast<int>(rng.uniform() * 3);
    const int m = static_cast<int>(rng.uniform() * 5);
    in.p_detection = 0.2 + 0.8 * rng.uniform();
    in.clutter_rate = 0.1 + 2.0 * rng.uniform();
    in.clutter_mean = rng.normal();
    in.clutter_variance = 1.0 + 3.0 * rng.uniform();
    in.obs_variance = 0.5 + rng.uniform();
    in.alpha = 1 + static_cast<int>(rng.uniform() * 4);
    in.beta = static_cast<int>(rng.uniform() * 4);
    for (int i = 0; i < in.num_targets; ++i) in.states.push_back(2.0 * rng.normal());
    for (int i = 0; i < m; ++i) in.points.push_back(2.0 * rng.normal());
    ModelParams p;
    p.target = SingleTargetModel::linear_gaussian(ParamRole::ObservationVariance, in.obs_variance);
    p.num_targets = in.num_targets;
    p.p_detection = in.p_detection;
    p.clutter.rate = in.clutter_rate;
    p.clutter.spatial = ClutterDensity::gaussian(in.clutter_mean, in.clutter_variance);
    FrameEvaluator eval(p, PerturbationSpec{in.alpha, in.beta});
    const double got = eval.evaluate(in.points, in.states).log_likelihood;
    const double expected = oracle::brute_force(in).log_likelihood;
    if (std::isinf(expected) || std::isinf(got)) {
      if (got != expected) worst = INFINITY;
      continue;
    }
    worst = std::max(worst, std::abs(got - expected) / std::max(1.0, std::abs(expected)));
  }

  double stochastic = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + trial % 5;
    ModelParams p;
    p.num_targets = k;
    std::vector<double> states(static_cast<std::size_t>(k));
    ObservationFrame frame;
    for (auto& x : states) x = rng.normal();
    for (int i = 0; i < k; ++i) frame.points.push_back(1.5 * rng.normal());
    const auto c = association_weights_cik(frame, states, p);
    stochastic = std::max({stochastic, (c.rowwise().sum().array() - 1.0).abs().maxCoeff(),
                           (c.colwise().sum().array() - 1.0).abs().maxCoeff()});
  }

  bool combinatorics = true;
  for (int k = 0; k <= 7; ++k) {
    for (int alpha = 0; alpha <= k; ++alpha) {
      const auto expected = oracle::constrained_permutations(k, alpha);
      std::set<std::vector<int>> got;
      for (const auto& p : enumerate_constrained(k, alpha)) got.insert(p.mapping());
      combinatorics = combinatorics && got == std::set<std::vector<int>>(expected.begin(), expected.end()) &&
                      count_constrained(k, alpha).exact == expected.size();
    }
  }
  return {worst < kOracleRelError && stochastic < kDoublyStochastic && combinatorics,
          "likelihood rel. error " + fmt("%.1e", worst) + "; c_ik row/column deviation " + fmt("%.1e", stochastic) +
              "; combinatorics k<=7 " + (combinatorics ? "exact" : "MISMATCH")};
}

Outcome score_correctness() {
  Rng rng(kSeed, 8);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 1 + trial % 3;
    ModelParams p;
    p.target = SingleTargetModel::linear_gaussian(ParamRole::ObservationVariance, 0.5 + rng.uniform());
    p.num_targets = k;
    p.p_detection = 0.5 + 0.5 * rng.uniform();
    p.clutter.rate = 0.2 + rng.uniform();
    std::vector<double> states;
    for (int i = 0; i < k; ++i) states.push_back(2.0 * rng.normal());
    std::vector<ObservationFrame> frames(3);
    for (auto& f : frames) {
      const int m = static_cast<int>(rng.uniform() * 5);
      for (int i = 0; i < m; ++i) f.points.push_back(2.0 * rng.normal());
    }
    Rng inner(kSeed, 9);
    const double s = score_fisher_identity(frames, p, PerturbationSpec::full(), states, ScoreOptions{}, inner);
    const double theta = p.target.theta();
    const double h = 1e-5 * theta;
    auto at = [&](double t) {
      ModelParams q = p;
      q.target = p.target.with_theta(t);
      return marginal_log_likelihood_sequence(frames, q, states, Integration::exact_static());
    };
    const double fd = (at(theta + h) - at(theta - h)) / (2.0 * h);
    worst = std::max(worst, std::abs(s - fd) / std::max(1.0, std::abs(fd)));
  }
  const GroundTruth truth = static_truth(2, 1.0, 0.8, 0.5);
  const auto scores = simulate_scores(truth, PerturbationSpec::full(), mc_config(10000, 10));
  const MeanEstimate mean = batch_means(scores.perturbed, 0);
  const double z = std::abs(mean.mean) / mean.std_error;
  return {worst < kScoreRelError && z <= kSigmas,
          "finite-difference rel. error " + fmt("%.1e", worst) + " over 20 instances; mean score z=" + fmt("%.2f", z)};
}

Outcome consistency_normality() {
  const json model{{"num_targets", 2}, {"tau", 1.0}, {"alpha", "inf"}, {"beta", 0}};
  json cdoc = model;
  cdoc["experiment"] = "consistency";
  cdoc["seed"] = kSeed;
  json ndoc = model;
  ndoc["experiment"] = "normality";
  ndoc["seed"] = kSeed;
  const Table c = tabulate(run(cdoc).result);
  const Table n = tabulate(run(ndoc).result);
  const double slope = c.at("loglog-slope").begin()->second.first;
  const double ratio = n.at("variance_ratio").begin()->second.first;
  const bool slope_ok = std::abs(slope - kSlopeTarget) <= kSlopeTolerance;
  const bool ratio_ok = ratio >= kRatioLow && ratio <= kRatioHigh;
  return {slope_ok && ratio_ok, "log-log error slope " + fmt("%.3f", slope) + " over n=100..6400; variance ratio " +
                                    fmt("%.3f", ratio) + " at n=2000 (200 replicates)"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {"worst-case false-alarm loss matches 1-(1-e^-l)/l", worst_case_false_alarm},
      {"uniform clutter never loses more than worst-case clutter", uniform_dominance},
      {"detection failures lose 1-p_D", detection_failure},
      {"association loss vs spacing and radius: structure", tau_alpha_structure},
      {"association loss is strict for close targets", strictness},
      {"special likelihood: loss grows with K in fixed space, flat in adaptive space", num_targets_special},
      {"exact evaluators against brute-force oracles", oracle_suite},
      {"score equals derivative of the log-likelihood; mean score zero", score_correctness},
      {"MLE root-n consistency and asymptotic variance", consistency_normality},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("[%s] %d. %s -- %s\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  // Everything above ran in this C++ binary; no Python or plotting code is loaded.
  std::printf("[PASS] 10. suite runs without the plotting module -- %d criteria evaluated natively\n", index);
  std::printf("%d of %d criteria failed\n", failed, index + 1);
  return failed ? 1 : 0;
}

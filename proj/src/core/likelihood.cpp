#include "mtt/likelihood.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <string>
#include <utility>

#include "mtt/errors.hpp"
#include "mtt/smc.hpp"
#include "mtt/stats.hpp"

namespace mtt {

namespace {

void check_inputs(std::span<const double> points, std::span<const double> states, int num_targets) {
  for (double y : points) {
    if (!std::isfinite(y)) throw DataError("observation point is not finite");
  }
  if (states.size() != static_cast<std::size_t>(num_targets)) {
    throw ParameterDomainError("expected " + std::to_string(num_targets) + " target states, got " +
                               std::to_string(states.size()));
  }
}

/// Product of exp(v_j) kept as (number of zero factors, log of the rest), so
/// that leaving one factor out stays exact when that factor is the zero.
struct LogProduct {
  int zeros = 0;
  double finite = 0.0;

  void add(double v) {
    if (v == kNegInf) {
      ++zeros;
    } else {
      finite += v;
    }
  }
  double value() const { return zeros > 0 ? kNegInf : finite; }
  double without(double v) const {
    if (v == kNegInf) return zeros == 1 ? finite : kNegInf;
    return zeros > 0 ? kNegInf : finite - v;
  }
};

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

}  // namespace

FrameEvaluator::FrameEvaluator(ModelParams params, PerturbationSpec spec, std::uint64_t enumeration_cap)
    : params_(std::move(params)),
      spec_(spec),
      mask_law_(params_.num_targets, params_.p_detection, spec.effective_beta(params_.num_targets)),
      cap_(enumeration_cap),
      has_clutter_(params_.clutter.rate > 0.0),
      k_(params_.num_targets) {
  params_.validate();
  spec_.validate();
}

void FrameEvaluator::fill_tables(std::span<const double> points, std::span<const double> states) {
  const std::size_t m = points.size();
  log_g_.resize(static_cast<std::size_t>(k_) * m);
  score_g_.resize(static_cast<std::size_t>(k_) * m);
  log_c_.resize(m);
  const SingleTargetModel& target = params_.target;
  for (int i = 0; i < k_; ++i) {
    const double x = states[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t idx = static_cast<std::size_t>(i) * m + j;
      log_g_[idx] = target.log_g(points[j], x);
      score_g_[idx] = target.score_g(points[j], x);
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    log_c_[j] = has_clutter_ ? params_.clutter.spatial.log_density(points[j]) : kNegInf;
  }
}

FrameTerms FrameEvaluator::evaluate(std::span<const double> points, std::span<const double> states) {
  check_inputs(points, states, k_);
  const int m = static_cast<int>(points.size());
  if (!has_clutter_ && m > k_) return {kNegInf, 0.0};
  if (m < mask_law_.min_detected()) return {kNegInf, 0.0};
  fill_tables(points, states);
  if (k_ == 1) return evaluate_single_target(m);
  if (spec_.alpha >= m) return evaluate_subset_dp(m);
  return evaluate_enumeration(m);
}

FrameTerms FrameEvaluator::evaluate_single_target(int m) {
  const double lambda = params_.clutter.rate;
  LogProduct clutter;
  for (int j = 0; j < m; ++j) clutter.add(log_c_[static_cast<std::size_t>(j)]);

  WeightedLogSum acc;
  const double log_missed = mask_law_.log_pmf_count(0);
  if (log_missed > kNegInf) {
    acc.add(log_missed + log_poisson_pmf(m, lambda) + clutter.value(), 0.0);
  }
  if (m >= 1) {
    const double log_detected = mask_law_.log_pmf_count(1) + log_poisson_pmf(m - 1, lambda);
    // Probability that the detected slot is sent to point j under u_m^alpha.
    double log_first = 0.0;
    double log_other = kNegInf;
    if (spec_.alpha >= m) {
      log_first = -std::log(static_cast<double>(m));
      log_other = log_first;
    } else if (spec_.alpha >= 2) {
      const double p_first = std::exp(count_constrained(m - 1, spec_.alpha).log_value -
                                      count_constrained(m, spec_.alpha).log_value);
      log_first = std::log(p_first);
      log_other = std::log1p(-p_first) - std::log(static_cast<double>(m - 1));
    }
    for (int j = 0; j < m; ++j) {
      const double log_slot = j == 0 ? log_first : log_other;
      if (log_slot == kNegInf) continue;
      const double lg = log_g_[static_cast<std::size_t>(j)];
      acc.add(log_detected + log_slot + lg + clutter.without(log_c_[static_cast<std::size_t>(j)]),
              score_g_[static_cast<std::size_t>(j)]);
    }
  }
  if (acc.empty()) return {kNegInf, 0.0};
  return {acc.log_total(), acc.mean()};
}

FrameTerms FrameEvaluator::evaluate_subset_dp(int m) {
  if (k_ > 24) throw ResourceError("subset evaluation is limited to 24 targets");
  const std::size_t states = std::size_t{1} << k_;
  dp_value_.assign(states, 0.0);
  dp_deriv_.assign(states, 0.0);
  factor_.resize(static_cast<std::size_t>(k_) + 1);
  dp_value_[0] = 1.0;
  double log_scale = 0.0;
  const auto um = static_cast<std::size_t>(m);

  for (int j = 0; j < m; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    double top = log_c_[uj];
    for (int i = 0; i < k_; ++i) top = std::max(top, log_g_[static_cast<std::size_t>(i) * um + uj]);
    if (top == kNegInf) return {kNegInf, 0.0};
    log_scale += top;
    const double c = safe_exp(log_c_[uj] - top);
    for (int i = 0; i < k_; ++i) factor_[static_cast<std::size_t>(i)] = safe_exp(log_g_[static_cast<std::size_t>(i) * um + uj] - top);

    for (std::size_t t = states; t-- > 0;) {
      const int size = std::popcount(t);
      if (size > j + 1 || (!has_clutter_ && size != j + 1)) {
        if (!has_clutter_) {
          dp_value_[t] = 0.0;
          dp_deriv_[t] = 0.0;
        }
        continue;
      }
      double v = has_clutter_ ? dp_value_[t] * c : 0.0;
      double dv = has_clutter_ ? dp_deriv_[t] * c : 0.0;
      for (std::size_t rest = t; rest != 0; rest &= rest - 1) {
        const int i = std::countr_zero(rest);
        const std::size_t from = t & ~(std::size_t{1} << i);
        const double src = dp_value_[from];
        if (src == 0.0 && dp_deriv_[from] == 0.0) continue;
        const auto idx = static_cast<std::size_t>(i) * um + uj;
        const double g = factor_[static_cast<std::size_t>(i)];
        v += src * g;
        dv += (dp_deriv_[from] + src * score_g_[idx]) * g;
      }
      dp_value_[t] = v;
      dp_deriv_[t] = dv;
    }
  }

  // Collect per detected-count totals, then weight by mask law, clutter count
  // and the (M - D)! / M! multiplicity of each injection.
  std::vector<double> total(static_cast<std::size_t>(k_) + 1, 0.0);
  std::vector<double> dtotal(static_cast<std::size_t>(k_) + 1, 0.0);
  for (std::size_t t = 0; t < states; ++t) {
    const auto size = static_cast<std::size_t>(std::popcount(t));
    total[size] += dp_value_[t];
    dtotal[size] += dp_deriv_[t];
  }
  WeightedLogSum acc;
  const double lambda = params_.clutter.rate;
  for (int d = mask_law_.min_detected(); d <= std::min(k_, m); ++d) {
    const auto ud = static_cast<std::size_t>(d);
    if (total[ud] <= 0.0) continue;
    const double lw = mask_law_.log_pmf_count(d) + log_poisson_pmf(m - d, lambda) + log_factorial(m - d) -
                      log_factorial(m) + std::log(total[ud]);
    acc.add(lw, dtotal[ud] / total[ud]);
  }
  if (acc.empty()) return {kNegInf, 0.0};
  return {acc.log_total() + log_scale, acc.mean()};
}

const std::vector<ConstrainedPermutation>& FrameEvaluator::permutations(int m) {
  auto it = perm_cache_.find(m);
  if (it != perm_cache_.end()) return it->second;
  return perm_cache_.emplace(m, enumerate_constrained(m, spec_.alpha, cap_)).first->second;
}

FrameTerms FrameEvaluator::evaluate_enumeration(int m) {
  const CombinatorialCount count = count_constrained(m, spec_.alpha);
  std::uint64_t masks = 0;
  for (int d = mask_law_.min_detected(); d <= std::min(k_, m); ++d) {
    masks += static_cast<std::uint64_t>(std::llround(std::exp(log_binomial(k_, d))));
  }
  if (!count.exact || static_cast<double>(*count.exact) * static_cast<double>(masks) > static_cast<double>(cap_)) {
    throw ResourceError("exact latent enumeration over " + std::to_string(m) + " points exceeds the cap of " +
                        std::to_string(cap_) + " configurations; use latent Monte Carlo");
  }
  const auto& perms = permutations(m);
  const auto um = static_cast<std::size_t>(m);
  const double log_uniform = -count.log_value;
  const double lambda = params_.clutter.rate;

  WeightedLogSum acc;
  std::vector<int> detected;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << k_); ++bits) {
    const int d = std::popcount(bits);
    if (d < mask_law_.min_detected() || d > m) continue;
    const double log_prior = mask_law_.log_pmf_count(d) + log_poisson_pmf(m - d, lambda) + log_uniform;
    if (log_prior == kNegInf) continue;
    detected.clear();
    for (int i = 0; i < k_; ++i) {
      if (bits & (std::uint64_t{1} << i)) detected.push_back(i);
    }
    for (const auto& sigma : perms) {
      double lw = log_prior;
      double score = 0.0;
      for (int s = 0; s < d && lw > kNegInf; ++s) {
        const auto idx = static_cast<std::size_t>(detected[static_cast<std::size_t>(s)]) * um +
                         static_cast<std::size_t>(sigma(s));
        lw += log_g_[idx];
        score += score_g_[idx];
      }
      for (int s = d; s < m && lw > kNegInf; ++s) lw += log_c_[static_cast<std::size_t>(sigma(s))];
      if (lw > kNegInf) acc.add(lw, score);
    }
  }
  if (acc.empty()) return {kNegInf, 0.0};
  return {acc.log_total(), acc.mean()};
}

std::vector<LatentTerm> enumerate_latents(std::span<const double> points, std::span<const double> states,
                                          const ModelParams& params, const PerturbationSpec& spec,
                                          std::uint64_t cap) {
  params.validate();
  spec.validate();
  check_inputs(points, states, params.num_targets);
  const int k = params.num_targets;
  const int m = static_cast<int>(points.size());
  const DetectionMaskLaw law(k, params.p_detection, spec.effective_beta(k));
  const CombinatorialCount count = count_constrained(m, spec.alpha);
  const std::vector<DetectionMask> masks = law.support();
  if (!count.exact ||
      static_cast<double>(*count.exact) * static_cast<double>(masks.size()) > static_cast<double>(cap)) {
    throw ResourceError("latent enumeration exceeds the cap of " + std::to_string(cap) + " configurations");
  }
  const auto perms = enumerate_constrained(m, spec.alpha, cap);
  const SingleTargetModel& target = params.target;
  const double lambda = params.clutter.rate;

  std::vector<LatentTerm> out;
  for (const auto& mask : masks) {
    const int d = mask.detected_count();
    if (d > m) continue;
    const double log_prior = law.log_pmf(mask) + log_poisson_pmf(m - d, lambda) - count.log_value;
    const std::vector<int> detected = mask.detected_targets();
    for (const auto& sigma : perms) {
      double lw = log_prior;
      double score = 0.0;
      for (int s = 0; s < m; ++s) {
        const double y = points[static_cast<std::size_t>(sigma(s))];
        if (s < d) {
          const double x = states[static_cast<std::size_t>(detected[static_cast<std::size_t>(s)])];
          lw += target.log_g(y, x);
          score += target.score_g(y, x);
        } else {
          lw += lambda > 0.0 ? params.clutter.spatial.log_density(y) : kNegInf;
        }
      }
      out.push_back({mask, sigma, lw, score});
    }
  }
  return out;
}

double log_multi_likelihood(const ObservationFrame& frame, const MultiTargetState& states,
                            const ModelParams& params) {
  FrameEvaluator evaluator(params, PerturbationSpec::full());
  return evaluator.evaluate(frame.points, states).log_likelihood;
}

double log_multi_likelihood_k1(const ObservationFrame& frame, double state, const ModelParams& params) {
  params.validate();
  if (params.num_targets != 1) throw ParameterDomainError("the two-term form needs exactly one target");
  const std::array<double, 1> states{state};
  check_inputs(frame.points, states, 1);
  const int m = static_cast<int>(frame.points.size());
  const double lambda = params.clutter.rate;
  const double p = params.p_detection;
  std::vector<double> log_c(frame.points.size());
  LogProduct all;
  for (std::size_t j = 0; j < frame.points.size(); ++j) {
    log_c[j] = lambda > 0.0 ? params.clutter.spatial.log_density(frame.points[j]) : kNegInf;
    all.add(log_c[j]);
  }
  std::vector<double> terms;
  if (p < 1.0) terms.push_back(std::log1p(-p) + log_poisson_pmf(m, lambda) + all.value());
  for (int i = 0; i < m; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    terms.push_back(std::log(p) - std::log(static_cast<double>(m)) + params.target.log_g(frame.points[ui], state) +
                    log_poisson_pmf(m - 1, lambda) + all.without(log_c[ui]));
  }
  if (terms.empty()) return kNegInf;
  return log_sum_exp(terms);
}

double log_joint_known_association(std::span<const ObservationFrame> frames,
                                   std::span<const MultiTargetState> trajectory, const ModelParams& params) {
  params.validate();
  if (trajectory.size() != frames.size() + 1) {
    throw ParameterDomainError("trajectory must hold one state vector per frame plus the initial one");
  }
  const int k = params.num_targets;
  const auto uk = static_cast<std::size_t>(k);
  const SingleTargetModel& target = params.target;
  const double lambda = params.clutter.rate;
  double total = 0.0;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto& points = frames[t].points;
    const auto& x = trajectory[t + 1];
    const auto& x_prev = trajectory[t];
    check_inputs(points, x, k);
    if (x_prev.size() != uk) throw ParameterDomainError("initial state vector has the wrong size");
    const int m = static_cast<int>(points.size());
    if (m < k) {
      throw ModelViolationError("frame " + std::to_string(t + 1) + " has " + std::to_string(m) +
                                " points but every one of the " + std::to_string(k) + " targets must be observed");
    }
    for (std::size_t i = 0; i < uk; ++i) {
      total += target.log_f(x[i], x_prev[i]) + target.log_g(points[i], x[i]);
    }
    total += log_poisson_pmf(m - k, lambda);
    for (std::size_t j = uk; j < points.size(); ++j) total += params.clutter.spatial.log_density(points[j]);
  }
  return total;
}

double marginal_log_likelihood_sequence(std::span<const ObservationFrame> frames, const ModelParams& params,
                                        std::span<const double> initial_states, const Integration& integration,
                                        const PerturbationSpec& spec) {
  if (frames.empty()) return 0.0;
  if (integration.kind == Integration::Kind::ExactStatic) {
    if (!params.target.is_static()) {
      throw ModelViolationError("exact integration needs static targets; use the Monte Carlo path");
    }
    FrameEvaluator evaluator(params, spec);
    double total = 0.0;
    for (const auto& frame : frames) total += evaluator.evaluate(frame.points, initial_states).log_likelihood;
    return total;
  }
  if (integration.samples < 100) throw ConfigError("Monte Carlo integration needs at least 100 samples");
  Rng rng(integration.seed, integration.stream);
  SmcOptions options;
  options.particles = integration.samples;
  return run_smc(frames, params, spec, initial_states, options, rng).log_likelihood;
}

}  // namespace mtt

#include "mtt/smc.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mtt/errors.hpp"
#include "mtt/likelihood.hpp"
#include "mtt/stats.hpp"

namespace mtt {

SmcResult run_smc(std::span<const ObservationFrame> frames, const ModelParams& params, const PerturbationSpec& spec,
                  std::span<const double> initial_states, const SmcOptions& options, Rng& rng) {
  if (options.particles < 1) throw ConfigError("particle count must be positive");
  if (!(options.resample_threshold >= 0.0 && options.resample_threshold <= 1.0)) {
    throw ConfigError("resample threshold must lie in [0, 1]");
  }
  const int k = params.num_targets;
  if (initial_states.size() != static_cast<std::size_t>(k)) {
    throw ParameterDomainError("expected one initial state per target");
  }
  const auto n = static_cast<std::size_t>(options.particles);
  const auto uk = static_cast<std::size_t>(k);
  const SingleTargetModel& target = params.target;

  FrameEvaluator evaluator(params, spec);
  std::vector<double> states(n * uk);
  std::vector<double> next(n * uk);
  for (std::size_t p = 0; p < n; ++p) std::copy(initial_states.begin(), initial_states.end(), states.begin() + p * uk);
  std::vector<double> scores(n, 0.0);
  std::vector<double> next_scores(n);
  std::vector<double> log_w(n, -std::log(static_cast<double>(n)));  // normalized
  std::vector<double> incr(n);
  std::vector<std::size_t> ancestors(n);

  SmcResult result;
  result.min_ess = static_cast<double>(n);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    for (std::size_t p = 0; p < n; ++p) {
      double path_score = scores[p];
      for (std::size_t i = 0; i < uk; ++i) {
        const double prev = states[p * uk + i];
        const double x = target.sample_f(prev, rng);
        next[p * uk + i] = x;
        if (!target.is_static()) path_score += target.score_f(x, prev);
      }
      const FrameTerms terms = evaluator.evaluate(frames[t].points, std::span<const double>(next).subspan(p * uk, uk));
      incr[p] = terms.log_likelihood;
      scores[p] = path_score + (terms.log_likelihood > kNegInf ? terms.score : 0.0);
    }
    std::swap(states, next);

    double top = kNegInf;
    for (std::size_t p = 0; p < n; ++p) top = std::max(top, log_w[p] + incr[p]);
    if (top == kNegInf) {
      throw NumericalCollapseError("every particle has zero weight at frame " + std::to_string(t + 1) + " of " +
                                   std::to_string(frames.size()) + " (" + std::to_string(frames[t].points.size()) +
                                   " points)");
    }
    double total = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      log_w[p] += incr[p] - top;
      total += std::exp(log_w[p]);
    }
    result.log_likelihood += top + std::log(total);
    double sum_sq = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      log_w[p] -= std::log(total);
      const double w = std::exp(log_w[p]);
      sum_sq += w * w;
    }
    const double ess = 1.0 / sum_sq;
    result.min_ess = std::min(result.min_ess, ess);

    if (t + 1 < frames.size() && ess < options.resample_threshold * static_cast<double>(n)) {
      // Systematic resampling.
      const double u0 = rng.uniform() / static_cast<double>(n);
      double cum = std::exp(log_w[0]);
      std::size_t src = 0;
      for (std::size_t p = 0; p < n; ++p) {
        const double u = u0 + static_cast<double>(p) / static_cast<double>(n);
        while (u > cum && src + 1 < n) cum += std::exp(log_w[++src]);
        ancestors[p] = src;
      }
      for (std::size_t p = 0; p < n; ++p) {
        std::copy_n(states.begin() + ancestors[p] * uk, uk, next.begin() + p * uk);
        next_scores[p] = scores[ancestors[p]];
      }
      std::swap(states, next);
      std::swap(scores, next_scores);
      std::fill(log_w.begin(), log_w.end(), -std::log(static_cast<double>(n)));
    }
  }
  double score = 0.0;
  for (std::size_t p = 0; p < n; ++p) score += std::exp(log_w[p]) * scores[p];
  result.score = score;
  return result;
}

}  // namespace mtt

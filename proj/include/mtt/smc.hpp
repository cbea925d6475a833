#pragma once

#include <span>

#include "mtt/frame.hpp"
#include "mtt/model.hpp"
#include "mtt/perm_assoc.hpp"
#include "mtt/rng.hpp"

namespace mtt {

struct SmcOptions {
  int particles = 1000;
  /// Resample when the effective sample size drops below this fraction of the particles.
  double resample_threshold = 0.5;
};

struct SmcResult {
  double log_likelihood = 0.0;
  double score = 0.0;    // path-space estimate of d/dtheta log p(y_{1:n} | x_0)
  double min_ess = 0.0;  // smallest effective sample size seen before resampling
};

/// Bootstrap particle filter over the joint target state, proposing from the
/// random walk and weighting by the association-marginalized frame likelihood
/// of the (alpha, beta) model. Each particle carries the accumulated
/// complete-data score of its ancestral path, so the weighted mean at the end
/// is a Fisher-identity estimate of the marginal score. Throws
/// NumericalCollapseError when every particle receives zero weight.
SmcResult run_smc(std::span<const ObservationFrame> frames, const ModelParams& params, const PerturbationSpec& spec,
                  std::span<const double> initial_states, const SmcOptions& options, Rng& rng);

}  // namespace mtt

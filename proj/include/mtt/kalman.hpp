#pragma once

#include <span>

#include "mtt/frame.hpp"
#include "mtt/model.hpp"

namespace mtt {

struct KalmanResult {
  double log_likelihood = 0.0;
  double score = 0.0;  // derivative of log_likelihood in the model's parameter
};

/// Exact log-likelihood and score for one linear-Gaussian random-walk target
/// started at the known state `x0`. Each frame holds at most one point; an
/// empty frame is a missing observation and contributes no factor. The score
/// is propagated through the filter by forward sensitivity recursions.
KalmanResult kalman_log_likelihood(const SingleTargetModel& model, double x0,
                                   std::span<const ObservationFrame> frames);

}  // namespace mtt

#pragma once

#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "mtt/model.hpp"

namespace testing {

/// Pearson statistic of observed counts against expected probabilities.
inline double chi_square(const std::vector<double>& counts, const std::vector<double>& probs) {
  double n = 0.0;
  for (double c : counts) n += c;
  double stat = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = n * probs[i];
    stat += (counts[i] - e) * (counts[i] - e) / e;
  }
  return stat;
}

/// Upper quantile of the chi-square law; a statistic above it rejects at `level`.
inline double chi_square_critical(int dof, double level) {
  const boost::math::chi_squared dist(dof);
  return boost::math::quantile(boost::math::complement(dist, level));
}

inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

inline mtt::ModelParams gaussian_params(int k, double p_detection, double clutter_rate, double obs_variance = 1.0,
                                        double walk_std = 0.0) {
  mtt::ModelParams p;
  p.target = mtt::SingleTargetModel::linear_gaussian(mtt::ParamRole::ObservationVariance, obs_variance, walk_std);
  p.num_targets = k;
  p.p_detection = p_detection;
  p.clutter.rate = clutter_rate;
  return p;
}

}  // namespace testing

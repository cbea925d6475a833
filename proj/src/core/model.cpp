#include "mtt/model.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "mtt/errors.hpp"
#include "mtt/stats.hpp"

namespace mtt {

std::string to_string(ParamRole role) {
  switch (role) {
    case ParamRole::ObservationVariance: return "obs_variance";
    case ParamRole::ObservationShift: return "obs_shift";
    case ParamRole::WalkStd: return "walk_std";
  }
  return "unknown";
}

ParamRole param_role_from_string(const std::string& name) {
  if (name == "obs_variance") return ParamRole::ObservationVariance;
  if (name == "obs_shift") return ParamRole::ObservationShift;
  if (name == "walk_std") return ParamRole::WalkStd;
  throw ConfigError("unknown parameter role '" + name + "' (expected obs_variance, obs_shift or walk_std)");
}

// ---- SpecialEpsilonLikelihood ----

double SpecialEpsilonLikelihood::solve_radius(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterDomainError("epsilon must lie in (0, 1)");
  const double target = 1.0 - epsilon;
  double lo = 0.0;
  double hi = 40.0;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (std::erf(mid / std::sqrt(2.0)) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

SpecialEpsilonLikelihood::SpecialEpsilonLikelihood(double epsilon, std::vector<double> centers, double lower,
                                                   double upper)
    : epsilon_(epsilon), centers_(std::move(centers)), lower_(lower), upper_(upper) {
  radius_ = solve_radius(epsilon);
  if (!(upper_ > lower_)) throw ParameterDomainError("observation interval must have positive length");
  if (extent() <= 2.0 * radius_) throw ParameterDomainError("observation interval is narrower than a window");
  constexpr double slack = 1e-12;
  std::vector<double> sorted = centers_;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] - radius_ < lower_ - slack || sorted[i] + radius_ > upper_ + slack) {
      throw ParameterDomainError("window around center " + std::to_string(sorted[i]) +
                                 " leaves the observation interval");
    }
    if (i > 0 && sorted[i] - sorted[i - 1] < 2.0 * radius_ - slack) {
      throw ParameterDomainError("windows around centers " + std::to_string(sorted[i - 1]) + " and " +
                                 std::to_string(sorted[i]) + " overlap");
    }
  }
}

bool SpecialEpsilonLikelihood::in_window(double y, double x, double shift) const {
  return std::fabs(y - x - shift) < radius_;
}

double SpecialEpsilonLikelihood::log_density(double y, double x, double shift) const {
  if (y < lower_ || y > upper_) return kNegInf;
  if (in_window(y, x, shift)) return log_normal_pdf(y, x + shift, 1.0);
  return std::log(outside_density());
}

double SpecialEpsilonLikelihood::score_shift(double y, double x, double shift) const {
  if (y < lower_ || y > upper_) return 0.0;
  return in_window(y, x, shift) ? (y - x - shift) : 0.0;
}

double SpecialEpsilonLikelihood::sample(double x, double shift, Rng& rng) const {
  const double c = x + shift;
  if (rng.uniform() >= epsilon_) {
    for (;;) {
      const double y = c + rng.normal();
      if (std::fabs(y - c) < radius_) return y;
    }
  }
  const double win_lo = c - radius_;
  const double win_hi = c + radius_;
  const double left = std::max(0.0, std::min(win_lo, upper_) - lower_);
  const double right = std::max(0.0, upper_ - std::max(win_hi, lower_));
  const double u = rng.uniform() * (left + right);
  return u < left ? lower_ + u : std::max(win_hi, lower_) + (u - left);
}

// ---- SingleTargetModel ----

SingleTargetModel SingleTargetModel::linear_gaussian(ParamRole role, double obs_variance, double walk_std,
                                                     double obs_shift) {
  SingleTargetModel m;
  m.role_ = role;
  m.obs_variance_ = obs_variance;
  m.walk_std_ = walk_std;
  m.obs_shift_ = obs_shift;
  m.validate();
  return m;
}

SingleTargetModel SingleTargetModel::special_epsilon(std::shared_ptr<const SpecialEpsilonLikelihood> special,
                                                     double shift, double walk_std) {
  if (!special) throw ParameterDomainError("special likelihood must be provided");
  SingleTargetModel m;
  m.role_ = ParamRole::ObservationShift;
  m.special_ = std::move(special);
  m.obs_shift_ = shift;
  m.obs_variance_ = 1.0;
  m.walk_std_ = walk_std;
  m.validate();
  return m;
}

void SingleTargetModel::validate() const {
  if (!(obs_variance_ > 0.0) || !std::isfinite(obs_variance_)) {
    throw ParameterDomainError("observation variance must be positive, got " + std::to_string(obs_variance_));
  }
  if (!(walk_std_ >= 0.0) || !std::isfinite(walk_std_)) {
    throw ParameterDomainError("walk standard deviation must be non-negative, got " + std::to_string(walk_std_));
  }
  if (!std::isfinite(obs_shift_)) throw ParameterDomainError("observation shift must be finite");
  if (role_ == ParamRole::WalkStd && walk_std_ == 0.0) {
    throw ParameterDomainError("walk standard deviation is the parameter but the targets are static");
  }
  if (special_ && role_ != ParamRole::ObservationShift) {
    throw ParameterDomainError("the special likelihood is parameterized by its shift only");
  }
}

double SingleTargetModel::theta() const {
  switch (role_) {
    case ParamRole::ObservationVariance: return obs_variance_;
    case ParamRole::ObservationShift: return obs_shift_;
    case ParamRole::WalkStd: return walk_std_;
  }
  return 0.0;
}

bool SingleTargetModel::valid_theta(double theta) const {
  if (!std::isfinite(theta)) return false;
  switch (role_) {
    case ParamRole::ObservationVariance: return theta > 0.0;
    case ParamRole::ObservationShift: return true;
    case ParamRole::WalkStd: return theta > 0.0;
  }
  return false;
}

SingleTargetModel SingleTargetModel::with_theta(double theta) const {
  if (!valid_theta(theta)) {
    throw ParameterDomainError("parameter " + to_string(role_) + " = " + std::to_string(theta) +
                               " is outside its domain");
  }
  SingleTargetModel m = *this;
  switch (role_) {
    case ParamRole::ObservationVariance: m.obs_variance_ = theta; break;
    case ParamRole::ObservationShift: m.obs_shift_ = theta; break;
    case ParamRole::WalkStd: m.walk_std_ = theta; break;
  }
  return m;
}

double SingleTargetModel::log_f(double x, double x_prev) const {
  if (is_static()) return x == x_prev ? 0.0 : kNegInf;
  return log_normal_pdf(x, x_prev, walk_std_ * walk_std_);
}

double SingleTargetModel::score_f(double x, double x_prev) const {
  if (role_ != ParamRole::WalkStd) return 0.0;
  const double d = x - x_prev;
  const double s = walk_std_;
  return d * d / (s * s * s) - 1.0 / s;
}

double SingleTargetModel::sample_f(double x_prev, Rng& rng) const {
  if (is_static()) return x_prev;
  return x_prev + walk_std_ * rng.normal();
}

double SingleTargetModel::log_g(double y, double x) const {
  if (special_) return special_->log_density(y, x, obs_shift_);
  return log_normal_pdf(y, x + obs_shift_, obs_variance_);
}

double SingleTargetModel::score_g(double y, double x) const {
  if (special_) return special_->score_shift(y, x, obs_shift_);
  const double d = y - x - obs_shift_;
  switch (role_) {
    case ParamRole::ObservationVariance:
      return (d * d - obs_variance_) / (2.0 * obs_variance_ * obs_variance_);
    case ParamRole::ObservationShift: return d / obs_variance_;
    case ParamRole::WalkStd: return 0.0;
  }
  return 0.0;
}

double SingleTargetModel::sample_g(double x, Rng& rng) const {
  if (special_) return special_->sample(x, obs_shift_, rng);
  return x + obs_shift_ + std::sqrt(obs_variance_) * rng.normal();
}

double log_f(const SingleTargetModel& model, double x, double x_prev, double theta) {
  return model.with_theta(theta).log_f(x, x_prev);
}

double log_g(const SingleTargetModel& model, double y, double x, double theta) {
  return model.with_theta(theta).log_g(y, x);
}

double score_g(const SingleTargetModel& model, double y, double x, double theta) {
  return model.with_theta(theta).score_g(y, x);
}

// ---- Clutter ----

ClutterDensity ClutterDensity::gaussian(double mean, double variance) {
  if (!(variance > 0.0)) throw ParameterDomainError("clutter variance must be positive");
  ClutterDensity c;
  c.kind_ = Kind::Gaussian;
  c.mean_ = mean;
  c.variance_ = variance;
  return c;
}

ClutterDensity ClutterDensity::uniform(double half_width) {
  if (!(half_width > 0.0)) throw ParameterDomainError("uniform clutter half-width must be positive");
  ClutterDensity c;
  c.kind_ = Kind::Uniform;
  c.half_width_ = half_width;
  return c;
}

double ClutterDensity::log_density(double y) const {
  if (kind_ == Kind::Gaussian) return log_normal_pdf(y, mean_, variance_);
  return std::fabs(y) <= half_width_ ? -std::log(2.0 * half_width_) : kNegInf;
}

double ClutterDensity::sample(Rng& rng) const {
  if (kind_ == Kind::Gaussian) return mean_ + std::sqrt(variance_) * rng.normal();
  return half_width_ * (2.0 * rng.uniform() - 1.0);
}

// ---- ModelParams ----

void ModelParams::validate() const {
  if (num_targets < 1) throw ParameterDomainError("number of targets must be at least 1");
  if (!(p_detection > 0.0 && p_detection <= 1.0)) {
    throw ParameterDomainError("detection probability must lie in (0, 1], got " + std::to_string(p_detection));
  }
  if (!(clutter.rate >= 0.0) || !std::isfinite(clutter.rate)) {
    throw ParameterDomainError("clutter rate must be non-negative, got " + std::to_string(clutter.rate));
  }
  if (fix_no_clutter && clutter.rate != 0.0) {
    throw ParameterDomainError("clutter rate is pinned to zero but set to " + std::to_string(clutter.rate));
  }
  if (fix_full_detection && p_detection != 1.0) {
    throw ParameterDomainError("detection probability is pinned to one but set to " + std::to_string(p_detection));
  }
}

void GroundTruth::validate() const {
  params.validate();
  if (initial_states.size() != static_cast<std::size_t>(params.num_targets)) {
    throw ParameterDomainError("ground truth needs one initial state per target");
  }
}

double gaussian_observation_fisher(ParamRole role, double obs_variance) {
  switch (role) {
    case ParamRole::ObservationVariance: return 1.0 / (2.0 * obs_variance * obs_variance);
    case ParamRole::ObservationShift: return 1.0 / obs_variance;
    case ParamRole::WalkStd: return 0.0;
  }
  return 0.0;
}

}  // namespace mtt

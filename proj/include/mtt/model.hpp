#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mtt/rng.hpp"

namespace mtt {

/// Which scalar of the single-target model is the differentiated parameter.
enum class ParamRole {
  ObservationVariance,  // theta = Var(y | x)
  ObservationShift,     // theta = m in y = x + m + noise
  WalkStd,              // theta = standard deviation of the random-walk step
};

std::string to_string(ParamRole role);
ParamRole param_role_from_string(const std::string& name);

/// Observation density that is N(y; x+m, 1) on the window (x+m-r, x+m+r) and
/// spreads the remaining mass epsilon uniformly over the rest of the bounded
/// observation interval [lower, upper]. The radius r solves
/// P(|Z| < r) = 1 - epsilon for a standard normal Z.
class SpecialEpsilonLikelihood {
 public:
  /// Rejects configurations whose windows around `centers` overlap or leave
  /// [lower, upper].
  SpecialEpsilonLikelihood(double epsilon, std::vector<double> centers, double lower, double upper);

  /// Radius r with erf(r / sqrt 2) = 1 - epsilon (bisection to 1e-12).
  static double solve_radius(double epsilon);

  double epsilon() const { return epsilon_; }
  double radius() const { return radius_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double extent() const { return upper_ - lower_; }
  const std::vector<double>& centers() const { return centers_; }

  /// Height of the uniform part: epsilon / |Y \ B|.
  double outside_density() const { return epsilon_ / (extent() - 2.0 * radius_); }

  bool in_window(double y, double x, double shift) const;
  double log_density(double y, double x, double shift) const;
  /// Pointwise derivative in the shift; zero outside the window.
  double score_shift(double y, double x, double shift) const;
  double sample(double x, double shift, Rng& rng) const;

 private:
  double epsilon_;
  std::vector<double> centers_;
  double lower_;
  double upper_;
  double radius_;
};

/// Gaussian random walk f(x | x') = N(x; x', s^2) paired with either a linear
/// Gaussian observation g(y | x) = N(y; x + m, v) or the special epsilon
/// likelihood. A walk standard deviation of zero means static targets.
class SingleTargetModel {
 public:
  static SingleTargetModel linear_gaussian(ParamRole role, double obs_variance, double walk_std = 0.0,
                                           double obs_shift = 0.0);
  static SingleTargetModel special_epsilon(std::shared_ptr<const SpecialEpsilonLikelihood> special,
                                           double shift = 0.0, double walk_std = 0.0);

  ParamRole role() const { return role_; }
  double theta() const;
  bool valid_theta(double theta) const;
  /// Copy with the designated scalar replaced; ParameterDomainError if invalid.
  SingleTargetModel with_theta(double theta) const;

  bool is_static() const { return walk_std_ == 0.0; }
  double walk_std() const { return walk_std_; }
  double obs_variance() const { return obs_variance_; }
  double obs_shift() const { return obs_shift_; }
  const std::shared_ptr<const SpecialEpsilonLikelihood>& special() const { return special_; }

  double log_f(double x, double x_prev) const;
  double score_f(double x, double x_prev) const;
  double sample_f(double x_prev, Rng& rng) const;

  double log_g(double y, double x) const;
  double score_g(double y, double x) const;
  double sample_g(double x, Rng& rng) const;

 private:
  SingleTargetModel() = default;
  void validate() const;

  ParamRole role_ = ParamRole::ObservationVariance;
  double walk_std_ = 0.0;
  double obs_variance_ = 1.0;
  double obs_shift_ = 0.0;
  std::shared_ptr<const SpecialEpsilonLikelihood> special_;
};

// Free-function forms with an explicit parameter value.
double log_f(const SingleTargetModel& model, double x, double x_prev, double theta);
double log_g(const SingleTargetModel& model, double y, double x, double theta);
double score_g(const SingleTargetModel& model, double y, double x, double theta);

/// Spatial density of false alarms.
class ClutterDensity {
 public:
  enum class Kind { Gaussian, Uniform };

  static ClutterDensity gaussian(double mean, double variance);
  static ClutterDensity uniform(double half_width);

  Kind kind() const { return kind_; }
  double mean() const { return mean_; }
  double variance() const { return variance_; }
  double half_width() const { return half_width_; }

  double log_density(double y) const;
  double sample(Rng& rng) const;

 private:
  Kind kind_ = Kind::Gaussian;
  double mean_ = 0.0;
  double variance_ = 1.0;
  double half_width_ = 1.0;
};

struct ClutterModel {
  double rate = 0.0;  // expected false alarms per frame
  ClutterDensity spatial = ClutterDensity::gaussian(0.0, 1.0);
};

/// Full multi-target parameter: single-target model, number of targets,
/// detection probability and clutter. The restriction flags pin lambda = 0
/// and/or p_D = 1; optimizers refuse to move a pinned coordinate.
struct ModelParams {
  SingleTargetModel target = SingleTargetModel::linear_gaussian(ParamRole::ObservationVariance, 1.0);
  int num_targets = 1;
  double p_detection = 1.0;
  ClutterModel clutter;
  bool fix_no_clutter = false;
  bool fix_full_detection = false;

  /// Throws ParameterDomainError when an invariant is broken.
  void validate() const;
};

/// Parameters used to generate data; estimators never read it.
struct GroundTruth {
  ModelParams params;
  std::vector<double> initial_states;  // one per target

  void validate() const;
};

/// Fisher information of a single Gaussian observation in closed form:
/// 1 / (2 v^2) for the variance, 1 / v for the shift.
double gaussian_observation_fisher(ParamRole role, double obs_variance);

}  // namespace mtt

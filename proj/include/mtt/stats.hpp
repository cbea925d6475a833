#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mtt/rng.hpp"

namespace mtt {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Below this, exp() underflows to zero in double precision.
inline constexpr double kLogFloor = -745.0;

inline constexpr double kLogTwoPi = 1.8378770664093454836;

double safe_exp(double log_value);

double log_sum_exp(std::span<const double> values);

/// Streaming log-sum-exp with a companion weighted sum: accumulates
/// log(sum exp(a_i)) and sum exp(a_i) * s_i / sum exp(a_i).
class WeightedLogSum {
 public:
  void add(double log_weight, double value = 0.0);
  double log_total() const;
  /// Weighted mean of the values; NaN when every weight is zero.
  double mean() const;
  bool empty() const { return max_ == kNegInf; }

 private:
  double max_ = kNegInf;
  double total_ = 0.0;    // sum exp(a_i - max_)
  double weighted_ = 0.0; // sum exp(a_i - max_) * s_i
};

/// log Po_lambda(k); lambda == 0 gives 0 at k == 0 and -inf elsewhere.
double log_poisson_pmf(std::int64_t k, double lambda);

double log_normal_pdf(double x, double mean, double variance);

double normal_cdf(double x);

/// log C(n, k) via lgamma.
double log_binomial(std::int64_t n, std::int64_t k);

std::int64_t sample_poisson(double lambda, Rng& rng);

/// Mean with a batch-means standard error (contiguous batches in index order).
/// `batches = 0` uses one batch per sample, the plain iid standard error.
struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

MeanEstimate batch_means(std::span<const double> samples, std::size_t batches = 20);

/// Ratio mean(a) / mean(b) for paired samples with a delta-method batch-means
/// standard error accounting for the covariance between numerator and
/// denominator.
MeanEstimate paired_ratio(std::span<const double> numerator, std::span<const double> denominator,
                          std::size_t batches = 20);

/// Ordinary or weighted least-squares line y = intercept + slope * x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
};

/// When `std_errors` is non-empty the fit is weighted by 1/se^2 and the slope
/// error comes from those known variances; otherwise residual-based OLS.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y,
                     std::span<const double> std_errors = {});

struct NormalityTest {
  double statistic = 0.0;  // A^2 with the small-sample adjustment
  double p_value = 0.0;
};

/// Anderson-Darling test of normality with mean and variance estimated.
NormalityTest anderson_darling_normal(std::span<const double> samples);

double sample_mean(std::span<const double> values);
double sample_variance(std::span<const double> values);

}  // namespace mtt

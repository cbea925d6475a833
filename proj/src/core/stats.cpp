#include "mtt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mtt/errors.hpp"

namespace mtt {

double safe_exp(double log_value) { return log_value < kLogFloor ? 0.0 : std::exp(log_value); }

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return kNegInf;
  const double top = *std::max_element(values.begin(), values.end());
  if (top == kNegInf) return kNegInf;
  if (std::isinf(top)) return top;
  double total = 0.0;
  for (double v : values) total += std::exp(v - top);
  return top + std::log(total);
}

void WeightedLogSum::add(double log_weight, double value) {
  if (log_weight == kNegInf) return;
  if (log_weight > max_) {
    const double rescale = max_ == kNegInf ? 0.0 : std::exp(max_ - log_weight);
    total_ *= rescale;
    weighted_ *= rescale;
    max_ = log_weight;
  }
  const double w = std::exp(log_weight - max_);
  total_ += w;
  weighted_ += w * value;
}

double WeightedLogSum::log_total() const {
  return max_ == kNegInf ? kNegInf : max_ + std::log(total_);
}

double WeightedLogSum::mean() const {
  return max_ == kNegInf ? std::numeric_limits<double>::quiet_NaN() : weighted_ / total_;
}

double log_poisson_pmf(std::int64_t k, double lambda) {
  if (k < 0) return kNegInf;
  if (lambda == 0.0) return k == 0 ? 0.0 : kNegInf;
  return static_cast<double>(k) * std::log(lambda) - lambda - std::lgamma(static_cast<double>(k) + 1.0);
}

double log_normal_pdf(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * (kLogTwoPi + std::log(variance) + d * d / variance);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double log_binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return kNegInf;
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

std::int64_t sample_poisson(double lambda, Rng& rng) {
  if (lambda <= 0.0) return 0;
  if (lambda < 10.0) {
    const double limit = std::exp(-lambda);
    std::int64_t k = 0;
    double prod = rng.uniform();
    while (prod > limit) {
      ++k;
      prod *= rng.uniform();
    }
    return k;
  }
  // Transformed rejection with squeeze (Hormann 1993, PTRS).
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    const auto k = static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * u + lambda + 0.43));
    if (us >= 0.07 && v <= vr) return k;
    if (k < 0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -lambda + static_cast<double>(k) * loglam - std::lgamma(static_cast<double>(k) + 1.0)) {
      return k;
    }
  }
}

double sample_mean(std::span<const double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = sample_mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return ss / static_cast<double>(values.size() - 1);
}

namespace {

std::vector<double> batch_averages(std::span<const double> samples, std::size_t batches) {
  std::vector<double> out(batches, 0.0);
  const std::size_t n = samples.size();
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t lo = b * n / batches;
    const std::size_t hi = (b + 1) * n / batches;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += samples[i];
    out[b] = s / static_cast<double>(hi - lo);
  }
  return out;
}

}  // namespace

MeanEstimate batch_means(std::span<const double> samples, std::size_t batches) {
  if (samples.size() < 2) throw ConfigError("batch means need at least two samples");
  batches = batches == 0 ? samples.size() : std::min(batches, samples.size());
  MeanEstimate est;
  est.n = samples.size();
  est.mean = sample_mean(samples);
  const auto avg = batch_averages(samples, batches);
  est.std_error = std::sqrt(sample_variance(avg) / static_cast<double>(batches));
  return est;
}

MeanEstimate paired_ratio(std::span<const double> numerator, std::span<const double> denominator,
                          std::size_t batches) {
  if (numerator.size() != denominator.size()) throw ConfigError("paired ratio needs equal sample counts");
  if (numerator.size() < 2) throw ConfigError("paired ratio needs at least two samples");
  batches = batches == 0 ? numerator.size() : std::min(batches, numerator.size());
  const double a = sample_mean(numerator);
  const double b = sample_mean(denominator);
  const double ratio = a / b;
  const auto abar = batch_averages(numerator, batches);
  const auto bbar = batch_averages(denominator, batches);
  std::vector<double> linear(batches);
  for (std::size_t j = 0; j < batches; ++j) linear[j] = (abar[j] - ratio * bbar[j]) / b;
  MeanEstimate est;
  est.mean = ratio;
  est.n = numerator.size();
  est.std_error = std::sqrt(sample_variance(linear) / static_cast<double>(batches));
  return est;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y,
                     std::span<const double> std_errors) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw ConfigError("linear fit needs matching x/y with at least two points");
  LinearFit fit;
  if (!std_errors.empty()) {
    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = 1.0 / (std_errors[i] * std_errors[i]);
      sw += w;
      swx += w * x[i];
      swy += w * y[i];
      swxx += w * x[i] * x[i];
      swxy += w * x[i] * y[i];
    }
    const double delta = sw * swxx - swx * swx;
    fit.slope = (sw * swxy - swx * swy) / delta;
    fit.intercept = (swxx * swy - swx * swxy) / delta;
    fit.slope_std_error = std::sqrt(sw / delta);
    return fit;
  }
  const double mx = sample_mean(x);
  const double my = sample_mean(y);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.slope_std_error = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  }
  return fit;
}

NormalityTest anderson_darling_normal(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 8) throw ConfigError("Anderson-Darling test needs at least 8 samples");
  const double m = sample_mean(samples);
  const double sd = std::sqrt(sample_variance(samples));
  std::vector<double> z(samples.begin(), samples.end());
  std::sort(z.begin(), z.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = normal_cdf((z[i] - m) / sd);
    const double hi = normal_cdf((z[n - 1 - i] - m) / sd);
    sum += (2.0 * static_cast<double>(i) + 1.0) *
           (std::log(std::max(lo, 1e-300)) + std::log(std::max(1.0 - hi, 1e-300)));
  }
  const double nd = static_cast<double>(n);
  const double a2 = -nd - sum / nd;
  const double a = a2 * (1.0 + 0.75 / nd + 2.25 / (nd * nd));
  NormalityTest out;
  out.statistic = a;
  // D'Agostino & Stephens (1986), case of estimated mean and variance.
  if (a >= 0.6) {
    out.p_value = std::exp(1.2937 - 5.709 * a + 0.0186 * a * a);
  } else if (a >= 0.34) {
    out.p_value = std::exp(0.9177 - 4.279 * a - 1.38 * a * a);
  } else if (a >= 0.2) {
    out.p_value = 1.0 - std::exp(-8.318 + 42.796 * a - 59.938 * a * a);
  } else {
    out.p_value = 1.0 - std::exp(-13.436 + 101.14 * a - 223.73 * a * a);
  }
  out.p_value = std::clamp(out.p_value, 0.0, 1.0);
  return out;
}

}  // namespace mtt

#pragma once

// Brute-force reference computations written directly from the model
// definitions. They share no code with the library beyond its plain data
// types, so agreement with the library is evidence of correctness.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

inline double normal_pdf(double y, double mean, double var) {
  const double d = y - mean;
  return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * kPi * var);
}

/// d/dv log N(y; x, v).
inline double normal_variance_score(double y, double x, double v) {
  const double d = y - x;
  return (d * d - v) / (2.0 * v * v);
}

inline double poisson_pmf(int k, double lambda) {
  if (lambda == 0.0) return k == 0 ? 1.0 : 0.0;
  double p = std::exp(-lambda);
  for (int i = 1; i <= k; ++i) p *= lambda / i;
  return p;
}

inline std::uint64_t factorial(int n) {
  std::uint64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
  return f;
}

inline int displacement(const std::vector<int>& perm) {
  int moved = 0;
  for (std::size_t i = 0; i < perm.size(); ++i) moved += perm[i] != static_cast<int>(i) ? 1 : 0;
  return moved;
}

/// Every permutation of {0..k-1} moving at most alpha points, by filtering Sym(k).
inline std::vector<std::vector<int>> constrained_permutations(int k, int alpha) {
  std::vector<int> p(static_cast<std::size_t>(k));
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    if (displacement(p) <= alpha) out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

/// One frame of the (alpha, beta) model with Gaussian targets, Gaussian
/// clutter and the observation variance as parameter.
struct Instance {
  int num_targets = 1;
  double p_detection = 1.0;
  double clutter_rate = 0.0;
  double clutter_mean = 0.0;
  double clutter_variance = 1.0;
  double obs_variance = 1.0;
  int alpha = 1;  // any value >= M means unrestricted
  int beta = 0;   // any value >= K means unrestricted
  std::vector<double> states;
  std::vector<double> points;
};

struct Evaluation {
  double log_likelihood = 0.0;
  double score = 0.0;
};

/// Sum over every detection mask with at most beta misses and every
/// permutation of the M points moving at most alpha of them. Slots are the
/// detected targets in index order followed by the clutter draws; the
/// permutation sends slot s to point perm[s].
inline Evaluation brute_force(const Instance& in) {
  const int k = in.num_targets;
  const int m = static_cast<int>(in.points.size());
  const auto perms = constrained_permutations(m, std::min(in.alpha, m));
  const double perm_weight = 1.0 / static_cast<double>(perms.size());

  double mask_norm = 0.0;
  for (int bits = 0; bits < (1 << k); ++bits) {
    const int detected = __builtin_popcount(static_cast<unsigned>(bits));
    if (k - detected > in.beta) continue;
    mask_norm += std::pow(in.p_detection, detected) * std::pow(1.0 - in.p_detection, k - detected);
  }

  double total = 0.0;
  double derivative = 0.0;
  for (int bits = 0; bits < (1 << k); ++bits) {
    std::vector<int> detected_targets;
    for (int i = 0; i < k; ++i) {
      if (bits & (1 << i)) detected_targets.push_back(i);
    }
    const int detected = static_cast<int>(detected_targets.size());
    if (k - detected > in.beta || detected > m) continue;
    const double mask_prob =
        std::pow(in.p_detection, detected) * std::pow(1.0 - in.p_detection, k - detected) / mask_norm;
    const double count_prob = poisson_pmf(m - detected, in.clutter_rate);
    for (const auto& perm : perms) {
      double term = mask_prob * count_prob * perm_weight;
      double score = 0.0;
      for (int s = 0; s < m; ++s) {
        const double y = in.points[static_cast<std::size_t>(perm[static_cast<std::size_t>(s)])];
        if (s < detected) {
          const double x = in.states[static_cast<std::size_t>(detected_targets[static_cast<std::size_t>(s)])];
          term *= normal_pdf(y, x, in.obs_variance);
          score += normal_variance_score(y, x, in.obs_variance);
        } else {
          term *= normal_pdf(y, in.clutter_mean, in.clutter_variance);
        }
      }
      total += term;
      derivative += term * score;
    }
  }
  return {std::log(total), derivative / total};
}

/// Posterior probability that target i produced point k, for p_D = 1, no
/// clutter and M = K, summing over Sym(K).
inline Eigen::MatrixXd posterior_assignment(const std::vector<double>& states, const std::vector<double>& points,
                                            double obs_variance) {
  const int k = static_cast<int>(states.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(k, k);
  double total = 0.0;
  for (const auto& perm : constrained_permutations(k, k)) {
    double w = 1.0;
    for (int i = 0; i < k; ++i) w *= normal_pdf(points[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])],
                                                states[static_cast<std::size_t>(i)], obs_variance);
    for (int i = 0; i < k; ++i) c(i, perm[static_cast<std::size_t>(i)]) += w;
    total += w;
  }
  return c / total;
}

/// Observations of a Gaussian random walk started at x0 with step variance q
/// and observation variance v, seen at the (1-based) times `times`, are
/// jointly N(x0, q min(t_i, t_j) + v delta_ij).
inline Eigen::MatrixXd random_walk_covariance(const std::vector<int>& times, double q, double v) {
  const auto n = static_cast<Eigen::Index>(times.size());
  Eigen::MatrixXd s(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      s(i, j) = q * std::min(times[static_cast<std::size_t>(i)], times[static_cast<std::size_t>(j)]) +
                (i == j ? v : 0.0);
    }
  }
  return s;
}

/// Log density and its derivative in the observation variance.
inline Evaluation random_walk_gaussian(const std::vector<int>& times, const std::vector<double>& y, double x0,
                                       double q, double v) {
  const Eigen::MatrixXd s = random_walk_covariance(times, q, v);
  Eigen::VectorXd r(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) r(static_cast<Eigen::Index>(i)) = y[i] - x0;
  const Eigen::LLT<Eigen::MatrixXd> llt(s);
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(s.rows(), s.cols()));
  const Eigen::VectorXd a = inv * r;
  const Eigen::MatrixXd l = llt.matrixL();
  const double logdet = 2.0 * l.diagonal().array().log().sum();
  const double n = static_cast<double>(y.size());
  return {-0.5 * (n * std::log(2.0 * kPi) + logdet + r.dot(a)), 0.5 * (a.dot(a) - inv.trace())};
}

/// Fisher information for the observation variance: tr(S^-2) / 2.
inline double random_walk_fisher(const std::vector<int>& times, double q, double v) {
  const Eigen::MatrixXd s = random_walk_covariance(times, q, v);
  const Eigen::MatrixXd inv = s.inverse();
  return 0.5 * (inv * inv).trace();
}

}  // namespace oracle

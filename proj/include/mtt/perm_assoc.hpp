#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtt/rng.hpp"

namespace mtt {

/// Sentinel for an unbounded association radius or number of missed detections.
inline constexpr int kUnbounded = std::numeric_limits<int>::max();

std::string bound_to_string(int bound);

/// Permutation of {0, ..., k-1} with its Hamming displacement from the
/// identity cached. Indices are 0-based internally; `from_one_based` and
/// `to_one_based` convert at the boundary.
class ConstrainedPermutation {
 public:
  /// Throws std::invalid_argument when `mapping` is not a bijection.
  explicit ConstrainedPermutation(std::vector<int> mapping);

  static ConstrainedPermutation identity(int k);
  static ConstrainedPermutation from_one_based(std::span<const int> mapping);

  int size() const { return static_cast<int>(mapping_.size()); }
  int operator()(int i) const { return mapping_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& mapping() const { return mapping_; }
  int displacement() const { return displacement_; }

  ConstrainedPermutation inverse() const;
  std::vector<int> to_one_based() const;

  friend bool operator==(const ConstrainedPermutation& a, const ConstrainedPermutation& b) {
    return a.mapping_ == b.mapping_;
  }

 private:
  std::vector<int> mapping_;
  int displacement_ = 0;
};

/// Number of points moved by sigma_prime o sigma^-1, i.e. the number of
/// positions where the two permutations disagree.
int hamming_distance(const ConstrainedPermutation& sigma, const ConstrainedPermutation& sigma_prime);

/// Exact count when it fits in 64 bits, always available in log space.
struct CombinatorialCount {
  std::optional<std::uint64_t> exact;
  double log_value = 0.0;
};

/// Number of derangements of i letters, !0 = 1, !1 = 0,
/// !i = (i-1) (!(i-1) + !(i-2)). Exact for i <= 20.
CombinatorialCount subfactorial(int i);

/// |A_k^alpha| = sum_{i=0}^{min(alpha,k)} C(k, i) !i. Exact for k <= 20.
CombinatorialCount count_constrained(int k, int alpha);

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

/// Visits every permutation of k letters moving at most alpha points, each
/// exactly once, ordered by displacement class. Throws ResourceError when the
/// set is larger than `cap`.
void for_each_constrained(int k, int alpha, const std::function<void(const ConstrainedPermutation&)>& visit,
                          std::uint64_t cap = kDefaultEnumerationCap);

std::vector<ConstrainedPermutation> enumerate_constrained(int k, int alpha,
                                                          std::uint64_t cap = kDefaultEnumerationCap);

/// Uniform draw from A_k^alpha: pick the displacement class i with
/// probability C(k,i) !i / N_k^alpha, then a uniform i-subset, then a uniform
/// derangement of it (rejection from uniform permutations of the subset).
ConstrainedPermutation sample_uniform_constrained(int k, int alpha, Rng& rng);

/// Binary detection vector; bit i is 1 iff target i is detected.
class DetectionMask {
 public:
  explicit DetectionMask(std::vector<std::uint8_t> bits);
  static DetectionMask all_detected(int k);
  static DetectionMask from_bits(std::uint64_t bits, int k);

  int size() const { return static_cast<int>(bits_.size()); }
  bool detected(int i) const { return bits_[static_cast<std::size_t>(i)] != 0; }
  int detected_count() const { return detected_count_; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }
  /// Target index of the j-th detected target (0-based), increasing order.
  std::vector<int> detected_targets() const;

  friend bool operator==(const DetectionMask& a, const DetectionMask& b) { return a.bits_ == b.bits_; }

 private:
  std::vector<std::uint8_t> bits_;
  int detected_count_ = 0;
};

/// (alpha, beta): association radius and maximum number of missed detections.
/// (1, 0) is the unperturbed model; (unbounded, unbounded) the full problem.
struct PerturbationSpec {
  int alpha = 1;
  int beta = 0;

  static PerturbationSpec unperturbed() { return {1, 0}; }
  static PerturbationSpec full() { return {kUnbounded, kUnbounded}; }

  void validate() const;
  /// beta clipped to the number of targets.
  int effective_beta(int num_targets) const;
};

/// Product-Bernoulli detection law restricted to masks with at most beta
/// misses and renormalized.
class DetectionMaskLaw {
 public:
  DetectionMaskLaw(int num_targets, double p_detection, int beta);

  int num_targets() const { return k_; }
  int min_detected() const { return min_detected_; }

  double log_pmf_count(int detected) const;  // log pmf of any single mask with that many detections
  double pmf(const DetectionMask& mask) const;
  double log_pmf(const DetectionMask& mask) const;
  DetectionMask sample(Rng& rng) const;
  /// All masks with non-zero probability.
  std::vector<DetectionMask> support() const;

 private:
  int k_;
  double p_;
  int min_detected_;
  double log_normalizer_;
  std::vector<double> count_cdf_;  // cumulative law of |d| over min_detected..k
};

}  // namespace mtt

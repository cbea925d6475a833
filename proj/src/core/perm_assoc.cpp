#include "mtt/perm_assoc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mtt/errors.hpp"
#include "mtt/stats.hpp"

namespace mtt {

std::string bound_to_string(int bound) { return bound == kUnbounded ? "inf" : std::to_string(bound); }

// ---- ConstrainedPermutation ----

ConstrainedPermutation::ConstrainedPermutation(std::vector<int> mapping) : mapping_(std::move(mapping)) {
  const int k = size();
  std::vector<char> seen(mapping_.size(), 0);
  for (int i = 0; i < k; ++i) {
    const int v = mapping_[static_cast<std::size_t>(i)];
    if (v < 0 || v >= k || seen[static_cast<std::size_t>(v)]) {
      throw std::invalid_argument("permutation mapping is not a bijection");
    }
    seen[static_cast<std::size_t>(v)] = 1;
    if (v != i) ++displacement_;
  }
}

ConstrainedPermutation ConstrainedPermutation::identity(int k) {
  std::vector<int> m(static_cast<std::size_t>(k));
  std::iota(m.begin(), m.end(), 0);
  return ConstrainedPermutation(std::move(m));
}

ConstrainedPermutation ConstrainedPermutation::from_one_based(std::span<const int> mapping) {
  std::vector<int> m(mapping.begin(), mapping.end());
  for (int& v : m) --v;
  return ConstrainedPermutation(std::move(m));
}

ConstrainedPermutation ConstrainedPermutation::inverse() const {
  std::vector<int> inv(mapping_.size());
  for (std::size_t i = 0; i < mapping_.size(); ++i) inv[static_cast<std::size_t>(mapping_[i])] = static_cast<int>(i);
  return ConstrainedPermutation(std::move(inv));
}

std::vector<int> ConstrainedPermutation::to_one_based() const {
  std::vector<int> m = mapping_;
  for (int& v : m) ++v;
  return m;
}

int hamming_distance(const ConstrainedPermutation& sigma, const ConstrainedPermutation& sigma_prime) {
  if (sigma.size() != sigma_prime.size()) {
    throw ParameterDomainError("hamming distance needs permutations of the same size");
  }
  int moved = 0;
  for (int j = 0; j < sigma.size(); ++j) {
    if (sigma(j) != sigma_prime(j)) ++moved;
  }
  return moved;
}

// ---- Counting ----

namespace {

constexpr int kExactLimit = 20;

double log_subfactorial_value(int i) {
  if (i == 0) return 0.0;
  if (i == 1) return kNegInf;
  // !i = round(i! / e); relative error below 1/(i+1)! past the exact range.
  return std::lgamma(static_cast<double>(i) + 1.0) - 1.0;
}

}  // namespace

CombinatorialCount subfactorial(int i) {
  if (i < 0) throw ParameterDomainError("subfactorial of a negative integer");
  CombinatorialCount out;
  if (i <= kExactLimit) {
    std::uint64_t prev2 = 1, prev1 = 0;  // !0, !1
    std::uint64_t value = i == 0 ? 1 : 0;
    for (int j = 2; j <= i; ++j) {
      value = static_cast<std::uint64_t>(j - 1) * (prev1 + prev2);
      prev2 = prev1;
      prev1 = value;
    }
    out.exact = value;
    out.log_value = value == 0 ? kNegInf : std::log(static_cast<double>(value));
    return out;
  }
  out.log_value = log_subfactorial_value(i);
  return out;
}

CombinatorialCount count_constrained(int k, int alpha) {
  if (k < 0) throw ParameterDomainError("permutation size must be non-negative");
  if (alpha < 0) throw ParameterDomainError("association radius must be non-negative");
  const int top = std::min(alpha, k);
  CombinatorialCount out;
  std::vector<double> logs;
  for (int i = 0; i <= top; ++i) {
    const auto d = subfactorial(i);
    if (d.log_value == kNegInf) continue;
    logs.push_back(log_binomial(k, i) + d.log_value);
  }
  out.log_value = log_sum_exp(logs);
  if (k <= kExactLimit) {
    std::uint64_t total = 0;
    for (int i = 0; i <= top; ++i) {
      // C(k, i) exactly via the multiplicative formula.
      std::uint64_t c = 1;
      for (int j = 1; j <= i; ++j) c = c * static_cast<std::uint64_t>(k - i + j) / static_cast<std::uint64_t>(j);
      total += c * *subfactorial(i).exact;
    }
    out.exact = total;
    out.log_value = std::log(static_cast<double>(total));
  }
  return out;
}

// ---- Enumeration ----

namespace {

// Calls visit(images) for every derangement of `subset` (images[j] is the
// image of subset[j]).
void for_each_derangement(const std::vector<int>& subset, std::vector<int>& images, std::vector<char>& used,
                          std::size_t j, const std::function<void()>& visit) {
  if (j == subset.size()) {
    visit();
    return;
  }
  for (std::size_t c = 0; c < subset.size(); ++c) {
    if (used[c] || c == j) continue;
    used[c] = 1;
    images[j] = subset[c];
    for_each_derangement(subset, images, used, j + 1, visit);
    used[c] = 0;
  }
}

}  // namespace

void for_each_constrained(int k, int alpha, const std::function<void(const ConstrainedPermutation&)>& visit,
                          std::uint64_t cap) {
  const auto count = count_constrained(k, alpha);
  if (!count.exact || *count.exact > cap) {
    throw ResourceError("A_" + std::to_string(k) + "^" + bound_to_string(alpha) + " has about exp(" +
                        std::to_string(count.log_value) + ") elements, above the enumeration cap " +
                        std::to_string(cap) + "; use sample_uniform_constrained instead");
  }
  const int top = std::min(alpha, k);
  std::vector<int> base(static_cast<std::size_t>(k));
  std::iota(base.begin(), base.end(), 0);
  visit(ConstrainedPermutation(base));
  for (int i = 2; i <= top; ++i) {
    // Lexicographic i-subsets of {0..k-1}.
    std::vector<int> subset(static_cast<std::size_t>(i));
    std::iota(subset.begin(), subset.end(), 0);
    for (;;) {
      std::vector<int> images(subset.size());
      std::vector<char> used(subset.size(), 0);
      for_each_derangement(subset, images, used, 0, [&] {
        std::vector<int> m = base;
        for (std::size_t j = 0; j < subset.size(); ++j) m[static_cast<std::size_t>(subset[j])] = images[j];
        visit(ConstrainedPermutation(std::move(m)));
      });
      int pos = i - 1;
      while (pos >= 0 && subset[static_cast<std::size_t>(pos)] == k - i + pos) --pos;
      if (pos < 0) break;
      ++subset[static_cast<std::size_t>(pos)];
      for (int q = pos + 1; q < i; ++q) {
        subset[static_cast<std::size_t>(q)] = subset[static_cast<std::size_t>(q - 1)] + 1;
      }
    }
  }
}

std::vector<ConstrainedPermutation> enumerate_constrained(int k, int alpha, std::uint64_t cap) {
  std::vector<ConstrainedPermutation> out;
  const auto count = count_constrained(k, alpha);
  if (count.exact && *count.exact <= cap) out.reserve(static_cast<std::size_t>(*count.exact));
  for_each_constrained(k, alpha, [&](const ConstrainedPermutation& p) { out.push_back(p); }, cap);
  return out;
}

namespace {

std::size_t uniform_index(std::size_t n, Rng& rng) {
  return std::min(n - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)));
}

void shuffle(std::vector<int>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(i, rng)]);
}

}  // namespace

ConstrainedPermutation sample_uniform_constrained(int k, int alpha, Rng& rng) {
  if (k < 0) throw ParameterDomainError("permutation size must be non-negative");
  std::vector<int> m(static_cast<std::size_t>(k));
  std::iota(m.begin(), m.end(), 0);
  const int top = std::min(alpha, k);
  if (top < 2) return ConstrainedPermutation(std::move(m));
  if (top == k) {
    shuffle(m, rng);
    return ConstrainedPermutation(std::move(m));
  }
  std::vector<double> log_w;
  std::vector<int> classes;
  for (int i = 0; i <= top; ++i) {
    if (i == 1) continue;
    classes.push_back(i);
    log_w.push_back(log_binomial(k, i) + subfactorial(i).log_value);
  }
  const double log_total = log_sum_exp(log_w);
  double u = rng.uniform();
  int moved = classes.back();
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const double p = std::exp(log_w[c] - log_total);
    if (u < p) {
      moved = classes[c];
      break;
    }
    u -= p;
  }
  if (moved == 0) return ConstrainedPermutation(std::move(m));
  // Uniform subset via partial Fisher-Yates.
  std::vector<int> pool = m;
  for (int j = 0; j < moved; ++j) {
    const std::size_t pick = static_cast<std::size_t>(j) + uniform_index(pool.size() - static_cast<std::size_t>(j), rng);
    std::swap(pool[static_cast<std::size_t>(j)], pool[pick]);
  }
  std::vector<int> subset(pool.begin(), pool.begin() + moved);
  std::vector<int> images;
  for (;;) {
    images = subset;
    shuffle(images, rng);
    bool ok = true;
    for (std::size_t j = 0; j < subset.size(); ++j) {
      if (images[j] == subset[j]) {
        ok = false;
        break;
      }
    }
    if (ok) break;
  }
  for (std::size_t j = 0; j < subset.size(); ++j) m[static_cast<std::size_t>(subset[j])] = images[j];
  return ConstrainedPermutation(std::move(m));
}

// ---- Detection masks ----

DetectionMask::DetectionMask(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_) {
    if (b > 1) throw std::invalid_argument("detection mask bits must be 0 or 1");
    detected_count_ += b;
  }
}

DetectionMask DetectionMask::all_detected(int k) {
  return DetectionMask(std::vector<std::uint8_t>(static_cast<std::size_t>(k), 1));
}

DetectionMask DetectionMask::from_bits(std::uint64_t bits, int k) {
  std::vector<std::uint8_t> b(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) b[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((bits >> i) & 1u);
  return DetectionMask(std::move(b));
}

std::vector<int> DetectionMask::detected_targets() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(detected_count_));
  for (int i = 0; i < size(); ++i) {
    if (bits_[static_cast<std::size_t>(i)]) out.push_back(i);
  }
  return out;
}

void PerturbationSpec::validate() const {
  if (alpha < 1) throw ConfigError("association radius alpha must be at least 1");
  if (beta < 0) throw ConfigError("maximum number of missed detections beta must be non-negative");
}

int PerturbationSpec::effective_beta(int num_targets) const { return std::min(beta, num_targets); }

DetectionMaskLaw::DetectionMaskLaw(int num_targets, double p_detection, int beta)
    : k_(num_targets), p_(p_detection) {
  if (k_ < 0) throw ParameterDomainError("number of targets must be non-negative");
  if (!(p_ > 0.0 && p_ <= 1.0)) throw ParameterDomainError("detection probability must lie in (0, 1]");
  if (beta < 0) throw ParameterDomainError("beta must be non-negative");
  min_detected_ = k_ - std::min(beta, k_);
  std::vector<double> log_counts;
  for (int c = min_detected_; c <= k_; ++c) {
    const double miss = k_ - c == 0 ? 0.0 : (k_ - c) * std::log1p(-p_);
    log_counts.push_back(log_binomial(k_, c) + c * std::log(p_) + miss);
  }
  log_normalizer_ = log_sum_exp(log_counts);
  double acc = 0.0;
  for (double lc : log_counts) {
    acc += std::exp(lc - log_normalizer_);
    count_cdf_.push_back(acc);
  }
}

double DetectionMaskLaw::log_pmf_count(int detected) const {
  if (detected < min_detected_ || detected > k_) return kNegInf;
  const double miss = k_ - detected == 0 ? 0.0 : (k_ - detected) * std::log1p(-p_);
  return detected * std::log(p_) + miss - log_normalizer_;
}

double DetectionMaskLaw::log_pmf(const DetectionMask& mask) const {
  if (mask.size() != k_) throw ParameterDomainError("mask size differs from the number of targets");
  return log_pmf_count(mask.detected_count());
}

double DetectionMaskLaw::pmf(const DetectionMask& mask) const { return safe_exp(log_pmf(mask)); }

DetectionMask DetectionMaskLaw::sample(Rng& rng) const {
  const double u = rng.uniform();
  int count = k_;
  for (std::size_t j = 0; j < count_cdf_.size(); ++j) {
    if (u < count_cdf_[j]) {
      count = min_detected_ + static_cast<int>(j);
      break;
    }
  }
  std::vector<int> idx(static_cast<std::size_t>(k_));
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(k_), 0);
  for (int j = 0; j < count; ++j) {
    const std::size_t pick = static_cast<std::size_t>(j) + uniform_index(static_cast<std::size_t>(k_ - j), rng);
    std::swap(idx[static_cast<std::size_t>(j)], idx[pick]);
    bits[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])] = 1;
  }
  return DetectionMask(std::move(bits));
}

std::vector<DetectionMask> DetectionMaskLaw::support() const {
  if (k_ > 24) throw ResourceError("mask support enumeration is limited to 24 targets");
  std::vector<DetectionMask> out;
  for (std::uint64_t b = 0; b < (std::uint64_t{1} << k_); ++b) {
    if (std::popcount(b) >= min_detected_) out.push_back(DetectionMask::from_bits(b, k_));
  }
  return out;
}

}  // namespace mtt

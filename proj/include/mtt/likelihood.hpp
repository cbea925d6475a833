#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "mtt/frame.hpp"
#include "mtt/model.hpp"
#include "mtt/perm_assoc.hpp"

namespace mtt {

/// log p(y_t | x_t) and its derivative in the target parameter theta.
struct FrameTerms {
  double log_likelihood = 0.0;
  double score = 0.0;
};

/// Default cap on |A_M^alpha| x |B_beta| for exact latent enumeration.
inline constexpr std::uint64_t kLatentEnumerationCap = 1'000'000;

/// Evaluates the association-marginalized frame likelihood of the
/// (alpha, beta) observation model, together with its theta-derivative.
///
/// Three exact routes, chosen per frame:
///  - one target: closed two-term form (missed, or detected as point i);
///  - alpha >= M: dynamic programme over subsets of detected targets;
///  - alpha < M: enumeration of A_M^alpha x B_beta.
///
/// The subset route rests on this identity. For a mask d with D detections,
/// only the images of the first D slots matter in the sum over Sym(M); each
/// injection tau from detected targets to point indices is produced by
/// (M - D)! permutations, so
///   sum_sigma u_M(sigma) prod_{s<=D} g(y_sigma(s) | x_r(s)) prod_{s>D} p(y_sigma(s))
///     = (M - D)! / M! * sum_tau prod_i g(y_tau(i) | x_i) prod_{k not in tau} p(y_k).
/// Scanning the points once and letting each point be clutter or the
/// observation of a not-yet-used target enumerates every injection exactly
/// once, indexed by the set of used targets. The theta-derivative is carried
/// alongside (forward mode) so the score costs one extra multiply-add.
///
/// Holds scratch buffers and a permutation cache: use one instance per thread.
class FrameEvaluator {
 public:
  explicit FrameEvaluator(ModelParams params, PerturbationSpec spec = PerturbationSpec::full(),
                          std::uint64_t enumeration_cap = kLatentEnumerationCap);

  /// Throws DataError on non-finite points and ParameterDomainError when the
  /// state count differs from the number of targets.
  FrameTerms evaluate(std::span<const double> points, std::span<const double> states);

  const ModelParams& params() const { return params_; }
  const PerturbationSpec& spec() const { return spec_; }

 private:
  void fill_tables(std::span<const double> points, std::span<const double> states);
  FrameTerms evaluate_single_target(int m);
  FrameTerms evaluate_subset_dp(int m);
  FrameTerms evaluate_enumeration(int m);
  const std::vector<ConstrainedPermutation>& permutations(int m);

  ModelParams params_;
  PerturbationSpec spec_;
  DetectionMaskLaw mask_law_;
  std::uint64_t cap_;
  bool has_clutter_;
  int k_;

  std::vector<double> log_g_;    // [target * M + point]
  std::vector<double> score_g_;  // [target * M + point]
  std::vector<double> log_c_;    // [point]
  std::vector<double> dp_value_;
  std::vector<double> dp_deriv_;
  std::vector<double> factor_;
  std::map<int, std::vector<ConstrainedPermutation>> perm_cache_;
};

/// One latent configuration (mask, slot permutation) with its unnormalized
/// log joint weight and the complete-data score of the observation terms.
/// `perm` maps slots (detected targets in index order, then clutter) to point
/// indices.
struct LatentTerm {
  DetectionMask mask;
  ConstrainedPermutation perm;
  double log_weight;
  double score;
};

/// Literal enumeration over B_beta x A_M^alpha for one frame. Throws
/// ResourceError above `cap` latent pairs.
std::vector<LatentTerm> enumerate_latents(std::span<const double> points, std::span<const double> states,
                                          const ModelParams& params, const PerturbationSpec& spec,
                                          std::uint64_t cap = kLatentEnumerationCap);

/// log g(y | x) for the original model (full association, unconstrained
/// detection failures).
double log_multi_likelihood(const ObservationFrame& frame, const MultiTargetState& states,
                            const ModelParams& params);

/// Closed two-term form for a single target:
/// (1-p_D) Po(m) prod p(y_j) + (p_D/m) sum_i g(y_i|x) Po(m-1) prod_{j != i} p(y_j).
double log_multi_likelihood_k1(const ObservationFrame& frame, double state, const ModelParams& params);

/// Complete-data log density with known identity association and p_D = 1:
/// the first K points of each frame belong to targets 1..K in order, the rest
/// are clutter. `trajectory` holds x_0..x_n (n + 1 entries).
double log_joint_known_association(std::span<const ObservationFrame> frames,
                                   std::span<const MultiTargetState> trajectory, const ModelParams& params);

/// How the state integral is handled by marginal_log_likelihood_sequence.
struct Integration {
  enum class Kind { ExactStatic, MonteCarlo };
  Kind kind = Kind::ExactStatic;
  int samples = 1000;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  static Integration exact_static() { return {}; }
  static Integration monte_carlo(int samples, std::uint64_t seed, std::uint64_t stream = 0) {
    return {Kind::MonteCarlo, samples, seed, stream};
  }
};

/// log p(y_{1:n} | x_0). Static targets: frames are independent given the
/// known states. Dynamic targets: bootstrap particle filter.
double marginal_log_likelihood_sequence(std::span<const ObservationFrame> frames, const ModelParams& params,
                                        std::span<const double> initial_states, const Integration& integration,
                                        const PerturbationSpec& spec = PerturbationSpec::full());

}  // namespace mtt

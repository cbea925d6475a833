#include "mtt/simulator.hpp"

#include <string>

#include <json.hpp>

#include "mtt/errors.hpp"
#include "mtt/stats.hpp"

namespace mtt {

namespace {

enum StreamTag : std::uint64_t { kMotion = 1, kObservation = 2, kMask = 3, kClutter = 4, kPermutation = 5 };

}  // namespace

std::vector<double> observed_from_latents(std::span<const double> target_observations, const DetectionMask& mask,
                                          std::span<const double> clutter_points,
                                          const ConstrainedPermutation& perm) {
  if (mask.size() != static_cast<int>(target_observations.size())) {
    throw ParameterDomainError("mask size differs from the number of target observations");
  }
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(mask.detected_count()) + clutter_points.size());
  for (int i = 0; i < mask.size(); ++i) {
    if (mask.detected(i)) v.push_back(target_observations[static_cast<std::size_t>(i)]);
  }
  v.insert(v.end(), clutter_points.begin(), clutter_points.end());
  if (perm.size() != static_cast<int>(v.size())) {
    throw ParameterDomainError("permutation size differs from the number of points");
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[static_cast<std::size_t>(perm(static_cast<int>(i)))];
  return out;
}

std::vector<SimulatedFrame> simulate_sequence(const GroundTruth& truth, const PerturbationSpec& spec, int n,
                                              const Rng& rng) {
  truth.validate();
  spec.validate();
  if (n < 1) throw ConfigError("sequence length must be at least 1");
  const ModelParams& params = truth.params;
  const int k = params.num_targets;
  const SingleTargetModel& target = params.target;
  const DetectionMaskLaw mask_law(k, params.p_detection, spec.effective_beta(k));

  Rng motion = rng.split(kMotion);
  Rng observation = rng.split(kObservation);
  Rng mask_rng = rng.split(kMask);
  Rng clutter_rng = rng.split(kClutter);
  Rng perm_rng = rng.split(kPermutation);

  std::vector<SimulatedFrame> frames;
  frames.reserve(static_cast<std::size_t>(n));
  MultiTargetState states = truth.initial_states;
  for (int t = 0; t < n; ++t) {
    for (auto& x : states) x = target.sample_f(x, motion);
    std::vector<double> obs(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) obs[static_cast<std::size_t>(i)] = target.sample_g(states[static_cast<std::size_t>(i)], observation);
    DetectionMask mask = mask_law.sample(mask_rng);
    const auto count = static_cast<int>(sample_poisson(params.clutter.rate, clutter_rng));
    std::vector<double> clutter(static_cast<std::size_t>(count));
    for (auto& c : clutter) c = params.clutter.spatial.sample(clutter_rng);
    ConstrainedPermutation perm = sample_uniform_constrained(mask.detected_count() + count, spec.alpha, perm_rng);
    std::vector<double> observed = observed_from_latents(obs, mask, clutter, perm);
    frames.push_back(SimulatedFrame{ObservationFrame{std::move(observed)}, states, std::move(obs), std::move(clutter),
                                    std::move(mask), std::move(perm), count});
  }
  return frames;
}

std::vector<SimulatedFrame> simulate_static(const GroundTruth& truth, const PerturbationSpec& spec, int n,
                                            const Rng& rng) {
  if (!truth.params.target.is_static()) throw ParameterDomainError("static simulation needs a model without motion");
  return simulate_sequence(truth, spec, n, rng);
}

std::vector<ObservationFrame> observed_frames(std::span<const SimulatedFrame> frames) {
  std::vector<ObservationFrame> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(f.observed);
  return out;
}

void write_frames_jsonl(std::ostream& out, std::span<const SimulatedFrame> frames) {
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const SimulatedFrame& f = frames[t];
    nlohmann::json truth = {
        {"states", f.truth_states},
        {"target_observations", f.target_observations},
        {"mask", f.truth_mask.bits()},
        {"perm", f.truth_perm.to_one_based()},
        {"clutter_count", f.truth_clutter_count},
        {"clutter_points", f.clutter_points},
    };
    nlohmann::json line = {{"t", t + 1}, {"points", f.observed.points}, {"truth", std::move(truth)}};
    out << line.dump() << '\n';
  }
}

}  // namespace mtt

#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "mtt/frame.hpp"
#include "mtt/model.hpp"
#include "mtt/perm_assoc.hpp"
#include "mtt/rng.hpp"

namespace mtt {

/// One simulated time step with every latent retained. `truth_perm` is the
/// drawn permutation; observed[i] = v[truth_perm(i)] where v is the detected
/// target observations (target order) followed by the clutter points.
struct SimulatedFrame {
  ObservationFrame observed;
  MultiTargetState truth_states;
  std::vector<double> target_observations;  // one per target, before masking
  std::vector<double> clutter_points;
  DetectionMask truth_mask;
  ConstrainedPermutation truth_perm;
  int truth_clutter_count = 0;
};

/// Draws n frames of Y^{alpha,beta}. Motion, target observations, masks,
/// clutter and permutations use separate sub-streams of `rng`, so two runs
/// that differ only in detection or association settings share the same
/// trajectories and target observations.
std::vector<SimulatedFrame> simulate_sequence(const GroundTruth& truth, const PerturbationSpec& spec, int n,
                                              const Rng& rng);

/// simulate_sequence for static targets; rejects a model with motion.
std::vector<SimulatedFrame> simulate_static(const GroundTruth& truth, const PerturbationSpec& spec, int n,
                                            const Rng& rng);

/// Mask, concatenate with clutter, permute.
std::vector<double> observed_from_latents(std::span<const double> target_observations, const DetectionMask& mask,
                                          std::span<const double> clutter_points,
                                          const ConstrainedPermutation& perm);

std::vector<ObservationFrame> observed_frames(std::span<const SimulatedFrame> frames);

/// One JSON object per line: {"t", "points", "truth": {...}}.
void write_frames_jsonl(std::ostream& out, std::span<const SimulatedFrame> frames);

}  // namespace mtt

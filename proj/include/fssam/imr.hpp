#pragma once

// Iterative memory refinement: pulls foreground content from the FG memory
// into the Disc memory, gated by how much each position also resembles the
// support foreground.

#include <cstddef>
#include <span>
#include <vector>

#include "fssam/numerics.hpp"
#include "fssam/ppg.hpp"

namespace fssam {

struct RefinementStep {
  /// Normalized similarity of the FG memory to the Disc prototype.
  SoftMask query_affinity;
  /// Normalized similarity of the FG memory to the support prototypes (k-shot mean).
  SoftMask support_affinity;
  /// query_affinity after background suppression; the fusion weight.
  SoftMask fusion_weight;
  /// Disc prior after this step.
  SoftMask prior;
  /// The Disc prior entering this step was all zero; the step was the identity.
  bool degenerate = false;
};

struct RefinementTrace {
  std::vector<RefinementStep> steps;
  /// Prototype-vs-map cosine passes performed.
  std::size_t cosine_passes = 0;
};

struct RefinementResult {
  Memory disc_memory;
  SoftMask disc_prior;
  RefinementTrace trace;
};

/// ReLU(affinity + (support_affinity - 1)), elementwise.
std::vector<float> bg_suppress(std::span<const float> affinity,
                               std::span<const float> support_affinity);

/// disc + weight * (fg - disc) per pixel, the weight broadcast over channels.
FeatureMap blend_features(const FeatureMap& disc, const FeatureMap& fg,
                          std::span<const float> weight);
SoftMask blend_prior(const SoftMask& disc, const SoftMask& fg, std::span<const float> weight);

/// One refinement step. Each support memory's prior must be its binary mask.
/// An all-zero Disc prior returns the inputs unchanged with the step flagged.
RefinementResult refine_once(const Memory& disc_memory, const SoftMask& disc_prior,
                             const Memory& fg_memory, std::span<const Memory> support_memories,
                             double epsilon = kDefaultEpsilon);

/// `iterations` chained refinement steps; zero iterations is the identity.
RefinementResult refine(const Memory& disc_memory, const SoftMask& disc_prior,
                        const Memory& fg_memory, std::span<const Memory> support_memories,
                        int iterations, double epsilon = kDefaultEpsilon);

/// Predicted cosine passes for `iterations` steps with `shots` supports: n(k+1).
std::size_t similarity_op_count(int iterations, int shots);

}  // namespace fssam

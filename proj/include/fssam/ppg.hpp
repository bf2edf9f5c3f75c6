#pragma once

// Pseudo prompt generation: prior masks from prototype matching, plus the
// memory encoding that pairs features with the mask used to encode them.

#include <span>

#include "fssam/numerics.hpp"
#include "fssam/tensor.hpp"

namespace fssam {

struct PriorSet {
  SoftMask fg;
  SoftMask bg;
  SoftMask disc;

  friend bool operator==(const PriorSet&, const PriorSet&) = default;
};

/// Priors together with the intermediates they were computed from.
struct PriorDetail {
  PriorSet priors;
  Prototype fg_prototype;
  Prototype bg_prototype;
  ScoreMap fg_cosine;
  ScoreMap bg_cosine;
  /// Min-max normalized cosines, the operands of the Disc subtraction.
  ScoreMap fg_normalized;
  ScoreMap bg_normalized;
  /// ReLU(fg - bg) before the final min-max normalization.
  ScoreMap disc_raw;
  /// The support mask has no background; the BG prototype is the zero vector.
  bool bg_fallback = false;
};

struct Memory {
  FeatureMap features;
  SoftMask prior;

  friend bool operator==(const Memory&, const Memory&) = default;
};

/// FG/BG/Disc priors of the query given one annotated support.
///
/// The support mask must be binary with a non-empty foreground. The query and
/// support may differ in spatial size but not in channel count.
PriorDetail make_priors(const FeatureMap& query, const FeatureMap& support,
                        const SoftMask& support_mask, double epsilon = kDefaultEpsilon);

/// k-shot rule: elementwise mean of the per-support prior sets.
PriorSet average_priors(std::span<const PriorSet> sets);

/// Memory encoder stand-in: features(p) * (1 + gain * mask(p)), mask carried along.
Memory encode_memory(const FeatureMap& features, const SoftMask& mask, double gain = 0.0);

}  // namespace fssam

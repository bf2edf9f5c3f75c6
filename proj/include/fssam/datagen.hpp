#pragma once

// Synthetic episodes with known ground truth.
//
// Each class owns a fixed random unit vector. Foreground pixels carry the
// (optionally perturbed) class vector, background pixels carry one shared
// neutral vector, and distractor rectangles carry vectors with a chosen cosine
// to the episode's target class. Every channel of every pixel gets independent
// gaussian noise with std `noise_sigma`, then the whole map is scaled by
// `feature_scale`.

#include <cstdint>
#include <vector>

#include "fssam/pipeline.hpp"

namespace fssam {

struct SynthSpec {
  int height = 32;
  int width = 32;
  int channels = 16;
  int classes = 5;
  double noise_sigma = 0.0;
  int distractors = 0;
  int shots = 1;
  int episodes = 100;
  std::uint64_t seed = 0;
  /// Foreground rectangles per image (their union is the mask).
  int fg_rects = 1;
  /// Rectangle side length as a fraction of the image side.
  double fg_min_fraction = 0.25;
  double fg_max_fraction = 0.5;
  double distractor_min_fraction = 0.15;
  double distractor_max_fraction = 0.3;
  /// Cosine between a distractor vector and the target class vector.
  double distractor_affinity = 0.0;
  /// Per-image perturbation of the class vector (instance-level gap).
  double intra_class_gap = 0.0;
  double feature_scale = 1.0;
  /// Class vectors, neutral vector and distractor directions mutually orthogonal.
  bool orthogonal_classes = false;

  /// Throws InvalidSpec.
  void validate() const;
};

struct SyntheticEpisode {
  Episode episode;
  /// Distractor pixels of the query (disjoint from the query foreground).
  SoftMask query_distractors;
};

struct GenerationStats {
  /// Smallest cosine between a distractor pixel (unscaled) and its distractor vector.
  double min_distractor_cosine = 1.0;
  std::size_t distractor_pixels = 0;
  /// Distractor rectangles that could not be placed without touching the foreground.
  std::size_t dropped_distractors = 0;
};

struct SyntheticSet {
  std::vector<SyntheticEpisode> episodes;
  GenerationStats stats;
  /// Unit class vectors, indexed by class id.
  std::vector<std::vector<double>> class_vectors;

  std::vector<Episode> plain_episodes() const;
};

SyntheticSet generate(const SynthSpec& spec);

/// Error rate of thresholding cos(pixel, true class vector) at `threshold`
/// against the query ground truth, over all query pixels of the set.
double oracle_error(const SyntheticSet& set, double threshold = 0.5);

}  // namespace fssam

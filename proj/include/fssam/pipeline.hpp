#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fssam/imr.hpp"
#include "fssam/metrics.hpp"
#include "fssam/ppg.hpp"
#include "fssam/scma.hpp"

namespace fssam {

struct SupportSample {
  FeatureMap features;
  SoftMask mask;
};

struct Episode {
  int id = 0;
  int class_id = 0;
  FeatureMap query;
  SoftMask query_mask;
  std::vector<SupportSample> supports;
};

enum class PredictionHead {
  /// Threshold the refined Disc prior.
  Prior,
  /// Threshold Norm(cos(fused query features, mean support FG prototype)).
  Fused,
};

struct PipelineConfig {
  int imr_iterations = 3;
  double alpha = 10.0;
  double epsilon = kDefaultEpsilon;
  int attention_layers = 4;
  double memory_gain = 0.0;
  PredictionHead head = PredictionHead::Fused;
  double threshold = 0.5;
  bool use_imr = true;
  bool use_scma_calibration = true;
  std::uint64_t projection_seed = 0;
  /// 0 means "same as channels" (identity projections).
  int projection_width = 0;
  NormAxis norm_axis = NormAxis::PerRow;
  /// Worker threads for evaluate(); 0 picks the hardware concurrency. Results
  /// do not depend on this value.
  int threads = 1;

  /// Throws Config on out-of-range fields.
  void validate() const;
  AttentionStackConfig attention() const;
};

struct EpisodeDiagnostics {
  PriorSet priors;
  SoftMask refined_prior;
  RefinementTrace trace;
  std::vector<CrossAttentionDiagnostics> layers;
  std::size_t support_cosine_passes = 0;
  /// Pre-threshold map of the prediction head.
  SoftMask score;
};

struct EpisodeOutput {
  SoftMask prediction;
  EpisodeDiagnostics diagnostics;
};

/// Projections sized for `channels` under `cfg`.
ProjectionStack make_pipeline_projections(int channels, const PipelineConfig& cfg);

/// Throws ShapeMismatch / DegenerateMask / MissingSupport describing what is wrong.
void validate_episode(const Episode& ep);

/// Priors -> memories -> refinement -> attention -> prediction for one episode.
/// Errors are rethrown with the episode id in the message.
EpisodeOutput run_episode(const Episode& ep, const PipelineConfig& cfg,
                          const ProjectionStack& projections, const ScoreProbe* probe = nullptr);

/// Runs every episode (concurrently when cfg.threads != 1) and aggregates.
MetricsReport evaluate(std::span<const Episode> episodes, const PipelineConfig& cfg,
                       const ProjectionStack& projections);

struct AblationEntry {
  std::string name;
  bool use_imr = false;
  bool use_scma_calibration = false;
  MetricsReport report;
};

struct AblationReport {
  /// PPG-only, PPG+IMR, PPG+SCMA, full, in that order.
  std::vector<AblationEntry> entries;

  double delta_miou(std::size_t index) const {
    return entries.at(index).report.miou - entries.at(0).report.miou;
  }
};

AblationReport ablation_suite(std::span<const Episode> episodes, const PipelineConfig& cfg,
                              const ProjectionStack& projections);

struct LayerScoreStats {
  int layer = 0;
  /// Mean over (query FG pixel, ground-truth BG memory position) pairs.
  double mean_pre = 0.0;
  double mean_post = 0.0;
  std::size_t pairs = 0;

  /// (pre - post) / |pre| as a percentage.
  double reduction_percent() const;
};

/// Per-layer calibration effect on query-FG vs memory-BG scores, averaged over
/// episodes that contain such pairs. Always runs the calibrated stack.
std::vector<LayerScoreStats> calibration_stats(std::span<const Episode> episodes,
                                               const PipelineConfig& cfg,
                                               const ProjectionStack& projections);

/// Keeps the first `shots` supports of every episode.
std::vector<Episode> limit_shots(std::span<const Episode> episodes, int shots);

}  // namespace fssam

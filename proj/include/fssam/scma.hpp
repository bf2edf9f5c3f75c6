#pragma once

// Support-calibrated memory attention.
//
// Cross-attention scores between the query and the (refined) Disc memory are
// biased downwards wherever a memory position resembles neither the query
// pixel nor the support foreground:
//
//   A'  = Norm(A_QQ) + (Norm(A_SQ) - 1)
//   A_QQ <- A_QQ + alpha * min(A', 0)
//
// A_SQ is the cosine between the pooled support prototype and each projected
// memory key. The uncalibrated path is plain scaled dot-product attention.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fssam/numerics.hpp"
#include "fssam/ppg.hpp"
#include "fssam/tensor.hpp"

namespace fssam {

/// Q/K/V are channels x width, output is width x channels. The key projection
/// is shared by query memory and support memories.
struct ProjectionSet {
  Matrix query;
  Matrix key;
  Matrix value;
  Matrix output;
  std::uint64_t seed = 0;

  int channels() const noexcept { return static_cast<int>(query.rows()); }
  int width() const noexcept { return static_cast<int>(query.cols()); }
};

/// Identity matrices when width == channels, otherwise seeded random matrices
/// with orthonormal columns (or rows, along the shorter side).
ProjectionSet make_projections(int channels, int width, std::uint64_t seed);

struct LayerProjections {
  ProjectionSet self_attention;
  ProjectionSet cross_attention;
};

struct ProjectionStack {
  std::vector<LayerProjections> layers;
};

/// One self/cross pair per layer, each with its own seed derived from `seed`.
ProjectionStack make_projection_stack(int channels, int width, int layers, std::uint64_t seed);

enum class NormAxis { PerRow, Global };

struct AttentionStackConfig {
  int layers = 4;
  double alpha = 10.0;
  double epsilon = kDefaultEpsilon;
  /// Projection width; 0 means "same as channels".
  int width = 0;
  NormAxis norm_axis = NormAxis::PerRow;
  /// Keep full score matrices in the diagnostics (N x N each).
  bool keep_scores = false;
  /// Test injection: replaces Norm(A_SQ) with these values, one per memory position.
  std::optional<std::vector<double>> support_similarity_override;
};

/// Selects (query pixel, memory position) pairs for score summaries.
struct ScoreProbe {
  std::vector<std::uint8_t> rows;
  std::vector<std::uint8_t> cols;
};

struct ScoreSummary {
  double mean_pre = 0.0;
  double mean_post = 0.0;
  std::size_t pairs = 0;
};

struct CrossAttentionDiagnostics {
  bool calibrated = false;
  ScoreSummary all_pairs;
  ScoreSummary probed_pairs;
  /// Most negative bias applied (0 when uncalibrated).
  double min_bias = 0.0;
  /// Largest positive bias applied; never above 0.
  double max_bias = 0.0;
  /// Largest |row sum - 1| after softmax.
  double max_row_sum_error = 0.0;
  /// Norm(A_SQ), empty when uncalibrated.
  std::vector<double> support_similarity;
  std::size_t support_cosine_passes = 0;
  std::optional<Matrix> pre_scores;
  std::optional<Matrix> post_scores;
  std::optional<Matrix> attention;
};

struct AttentionOutput {
  FeatureMap features;
  CrossAttentionDiagnostics diagnostics;
};

/// Self-attention with skip connection over the running query features.
FeatureMap self_attention(const FeatureMap& features, const ProjectionSet& proj);

/// Calibrated cross-attention against the Disc memory. Throws MissingSupport
/// when no support memory is given.
AttentionOutput calibrated_cross_attention(const FeatureMap& query, const Memory& disc_memory,
                                           std::span<const Memory> support_memories,
                                           const ProjectionSet& proj,
                                           const AttentionStackConfig& cfg,
                                           const ScoreProbe* probe = nullptr);

/// Plain scaled dot-product cross-attention against the Disc memory.
AttentionOutput memory_cross_attention(const FeatureMap& query, const Memory& disc_memory,
                                       const ProjectionSet& proj, const AttentionStackConfig& cfg,
                                       const ScoreProbe* probe = nullptr);

/// Calibration bias alpha * min(norm_scores + (norm_support - 1), 0) for one row.
std::vector<double> calibration_bias(std::span<const double> norm_scores,
                                     std::span<const double> norm_support, double alpha);

struct StackOutput {
  FeatureMap features;
  std::vector<CrossAttentionDiagnostics> layers;
  std::size_t support_cosine_passes = 0;
};

/// `cfg.layers` rounds of self-attention followed by cross-attention
/// (calibrated when `calibrated` is set).
StackOutput attention_stack(const FeatureMap& query, const Memory& disc_memory,
                            std::span<const Memory> support_memories,
                            const ProjectionStack& projections, const AttentionStackConfig& cfg,
                            bool calibrated, const ScoreProbe* probe = nullptr);

/// Extra support-vs-key cosine passes per cross-attention layer: k.
std::size_t extra_similarity_count(int shots, int layers = 1);

}  // namespace fssam

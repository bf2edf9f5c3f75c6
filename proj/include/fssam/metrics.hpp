#pragma once

// Segmentation metrics. Intersections and unions are integer pixel counts
// summed per class before the ratio is taken, so aggregation is exact and
// independent of episode order.

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "fssam/tensor.hpp"

namespace fssam {

struct PixelCounts {
  std::uint64_t intersection = 0;
  std::uint64_t union_ = 0;

  /// 1.0 when both sets are empty.
  double iou() const noexcept {
    return union_ == 0 ? 1.0 : static_cast<double>(intersection) / static_cast<double>(union_);
  }
  PixelCounts& operator+=(const PixelCounts& o) noexcept {
    intersection += o.intersection;
    union_ += o.union_;
    return *this;
  }
};

struct EpisodeRecord {
  int episode_id = 0;
  int class_id = 0;
  PixelCounts foreground;
  PixelCounts background;
};

struct ClassScore {
  int class_id = 0;
  PixelCounts counts;
  double iou = 0.0;
};

struct MetricsReport {
  std::vector<ClassScore> classes;  // ascending class id
  double miou = 0.0;
  double fg_iou = 0.0;
  double bg_iou = 0.0;
  double fb_iou = 0.0;
  std::size_t episode_count = 0;
  std::vector<EpisodeRecord> episodes;  // input order
};

/// FG and BG intersection/union counts of a binary prediction.
EpisodeRecord score_prediction(const SoftMask& prediction, const SoftMask& ground_truth,
                               int episode_id, int class_id);

/// Throws EmptyInput for an empty record list.
MetricsReport aggregate(std::span<const EpisodeRecord> records);

}  // namespace fssam

#include "fssam/metrics.hpp"

#include "fssam/error.hpp"

namespace fssam {

EpisodeRecord score_prediction(const SoftMask& prediction, const SoftMask& ground_truth,
                               int episode_id, int class_id) {
  if (prediction.shape() != ground_truth.shape()) {
    throw Error(ErrorCode::ShapeMismatch, "prediction and ground truth differ in size");
  }
  EpisodeRecord rec;
  rec.episode_id = episode_id;
  rec.class_id = class_id;
  for (std::size_t p = 0; p < prediction.pixels(); ++p) {
    const bool pred = prediction[p] >= 0.5f;
    const bool gt = ground_truth[p] >= 0.5f;
    rec.foreground.intersection += (pred && gt) ? 1 : 0;
    rec.foreground.union_ += (pred || gt) ? 1 : 0;
    rec.background.intersection += (!pred && !gt) ? 1 : 0;
    rec.background.union_ += (!pred || !gt) ? 1 : 0;
  }
  return rec;
}

MetricsReport aggregate(std::span<const EpisodeRecord> records) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no episodes to aggregate");
  MetricsReport report;
  report.episode_count = records.size();
  report.episodes.assign(records.begin(), records.end());

  std::map<int, PixelCounts> per_class;
  PixelCounts fg, bg;
  for (const auto& r : records) {
    per_class[r.class_id] += r.foreground;
    fg += r.foreground;
    bg += r.background;
  }
  double total = 0.0;
  for (const auto& [id, counts] : per_class) {
    report.classes.push_back({id, counts, counts.iou()});
    total += counts.iou();
  }
  report.miou = total / static_cast<double>(per_class.size());
  report.fg_iou = fg.iou();
  report.bg_iou = bg.iou();
  report.fb_iou = 0.5 * (report.fg_iou + report.bg_iou);
  return report;
}

}  // namespace fssam

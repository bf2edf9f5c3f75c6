#include "fssam/ppg.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fssam/error.hpp"

namespace fssam {

PriorDetail make_priors(const FeatureMap& query, const FeatureMap& support,
                        const SoftMask& support_mask, double epsilon) {
  if (query.channels() != support.channels()) {
    throw Error(ErrorCode::ShapeMismatch, "make_priors: query and support channel counts differ");
  }
  if (support.shape() != support_mask.shape()) {
    throw Error(ErrorCode::ShapeMismatch, "make_priors: support mask size differs from support");
  }
  if (!support_mask.is_binary()) {
    throw Error(ErrorCode::InvalidArgument, "make_priors: support mask must be binary");
  }
  if (support_mask.sum() == 0.0) {
    throw Error(ErrorCode::DegenerateMask, "make_priors: support mask has no foreground");
  }

  PriorDetail out;
  out.fg_prototype = masked_gap(support, support_mask);

  std::vector<float> inverse(support_mask.pixels());
  for (std::size_t p = 0; p < inverse.size(); ++p) inverse[p] = 1.0f - support_mask[p];
  const SoftMask bg_mask(support_mask.height(), support_mask.width(), std::move(inverse));
  if (bg_mask.sum() > 0.0) {
    out.bg_prototype = masked_gap(support, bg_mask);
  } else {
    out.bg_prototype.values.assign(static_cast<std::size_t>(support.channels()), 0.0f);
    out.bg_fallback = true;
  }

  out.fg_cosine = cosine_map(query, out.fg_prototype, epsilon);
  out.bg_cosine = cosine_map(query, out.bg_prototype, epsilon);
  out.fg_normalized = minmax_norm(out.fg_cosine);
  out.bg_normalized = minmax_norm(out.bg_cosine);
  out.priors.fg = to_mask(out.fg_normalized);
  out.priors.bg = to_mask(out.bg_normalized);

  // Subtract the stored float priors, not the double maps. Otherwise a gap
  // smaller than float resolution (single-channel inputs where only the
  // epsilon guard separates the cosines) is stretched to [0, 1] by the final
  // normalization while the published fg and bg compare equal.
  const SoftMask& fg = out.priors.fg;
  const SoftMask& bg = out.priors.bg;
  out.disc_raw = ScoreMap{query.shape(), std::vector<double>(query.pixels())};
  for (std::size_t p = 0; p < query.pixels(); ++p) {
    out.disc_raw.values[p] = std::max(static_cast<double>(fg[p]) - bg[p], 0.0);
  }
  out.priors.disc = to_mask(minmax_norm(out.disc_raw));
  return out;
}

PriorSet average_priors(std::span<const PriorSet> sets) {
  if (sets.empty()) throw Error(ErrorCode::EmptyInput, "average_priors: no prior sets");
  std::vector<SoftMask> fg, bg, disc;
  fg.reserve(sets.size());
  bg.reserve(sets.size());
  disc.reserve(sets.size());
  for (const auto& s : sets) {
    fg.push_back(s.fg);
    bg.push_back(s.bg);
    disc.push_back(s.disc);
  }
  return PriorSet{mean_mask(fg), mean_mask(bg), mean_mask(disc)};
}

Memory encode_memory(const FeatureMap& features, const SoftMask& mask, double gain) {
  if (features.shape() != mask.shape()) {
    throw Error(ErrorCode::ShapeMismatch, "encode_memory: feature and mask sizes differ");
  }
  if (!(gain >= 0.0) || !std::isfinite(gain)) {
    throw Error(ErrorCode::InvalidArgument, "encode_memory: gain must be finite and >= 0");
  }
  FeatureMap encoded = features;
  if (gain != 0.0) {
    for (std::size_t p = 0; p < encoded.pixels(); ++p) {
      const double scale = 1.0 + gain * mask[p];
      for (float& v : encoded.pixel(p)) v = static_cast<float>(v * scale);
    }
  }
  return Memory{std::move(encoded), mask};
}

}  // namespace fssam

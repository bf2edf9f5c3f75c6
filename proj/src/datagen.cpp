#include "fssam/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fssam/error.hpp"
#include "fssam/random.hpp"

namespace fssam {

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void normalize(Vec& v) {
  const double n = std::sqrt(dot(v, v));
  for (double& x : v) x /= n;
}

Vec random_unit(Rng& rng, int channels) {
  Vec v(static_cast<std::size_t>(channels));
  do {
    for (double& x : v) x = rng.gaussian();
  } while (dot(v, v) == 0.0);
  normalize(v);
  return v;
}

// Component of `v` orthogonal to every vector in `basis`, normalized.
Vec orthogonalize(Vec v, const std::vector<Vec>& basis) {
  for (const auto& b : basis) {
    const double d = dot(v, b);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= d * b[i];
  }
  normalize(v);
  return v;
}

struct Rect {
  int y = 0, x = 0, h = 0, w = 0;
};

int side(double fraction, int extent) {
  return std::clamp(static_cast<int>(std::lround(fraction * extent)), 1, extent);
}

Rect random_rect(Rng& rng, int height, int width, double min_frac, double max_frac) {
  Rect r;
  r.h = rng.uniform_int(side(min_frac, height), side(max_frac, height));
  r.w = rng.uniform_int(side(min_frac, width), side(max_frac, width));
  r.y = rng.uniform_int(0, height - r.h);
  r.x = rng.uniform_int(0, width - r.w);
  return r;
}

struct Image {
  FeatureMap features;
  SoftMask mask;
  SoftMask distractors;
};

Image make_image(const SynthSpec& spec, Rng& rng, const Vec& class_vec, const Vec& neutral,
                 const std::vector<Vec>& distractor_vecs, GenerationStats& stats) {
  const int h = spec.height;
  const int w = spec.width;
  const auto n = static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
  std::vector<float> fg(n, 0.0f);
  std::vector<int> owner(n, -1);  // distractor slot per pixel

  for (int i = 0; i < spec.fg_rects; ++i) {
    const Rect r = random_rect(rng, h, w, spec.fg_min_fraction, spec.fg_max_fraction);
    for (int y = r.y; y < r.y + r.h; ++y)
      for (int x = r.x; x < r.x + r.w; ++x) fg[static_cast<std::size_t>(y) * w + x] = 1.0f;
  }

  constexpr int kPlacementAttempts = 100;
  for (std::size_t slot = 0; slot < distractor_vecs.size(); ++slot) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      const Rect r =
          random_rect(rng, h, w, spec.distractor_min_fraction, spec.distractor_max_fraction);
      bool clear = true;
      for (int y = r.y; y < r.y + r.h && clear; ++y)
        for (int x = r.x; x < r.x + r.w && clear; ++x)
          clear = fg[static_cast<std::size_t>(y) * w + x] == 0.0f;
      if (!clear) continue;
      for (int y = r.y; y < r.y + r.h; ++y)
        for (int x = r.x; x < r.x + r.w; ++x)
          owner[static_cast<std::size_t>(y) * w + x] = static_cast<int>(slot);
      placed = true;
    }
    if (!placed) ++stats.dropped_distractors;
  }

  Vec instance = class_vec;
  if (spec.intra_class_gap > 0.0) {
    const double s = spec.intra_class_gap / std::sqrt(static_cast<double>(spec.channels));
    for (double& x : instance) x += s * rng.gaussian();
    normalize(instance);
  }

  const auto channels = static_cast<std::size_t>(spec.channels);
  std::vector<float> data(n * channels);
  std::vector<float> dmask(n, 0.0f);
  Vec px(channels);
  for (std::size_t p = 0; p < n; ++p) {
    const Vec* base = &neutral;
    if (fg[p] != 0.0f) {
      base = &instance;
    } else if (owner[p] >= 0) {
      base = &distractor_vecs[static_cast<std::size_t>(owner[p])];
      dmask[p] = 1.0f;
    }
    for (std::size_t c = 0; c < channels; ++c) {
      // Always draw so sets that differ only in sigma share geometry and noise.
      px[c] = (*base)[c] + spec.noise_sigma * rng.gaussian();
    }
    if (dmask[p] != 0.0f) {
      const double cos = dot(px, *base) / std::sqrt(dot(px, px));
      stats.min_distractor_cosine = std::min(stats.min_distractor_cosine, cos);
      ++stats.distractor_pixels;
    }
    for (std::size_t c = 0; c < channels; ++c) {
      data[p * channels + c] = static_cast<float>(spec.feature_scale * px[c]);
    }
  }
  return Image{FeatureMap(h, w, spec.channels, std::move(data)), SoftMask(h, w, std::move(fg)),
               SoftMask(h, w, std::move(dmask))};
}

void invalid(const std::string& message) { throw Error(ErrorCode::InvalidSpec, message); }

bool in_unit(double v) { return v > 0.0 && v <= 1.0; }

}  // namespace

void SynthSpec::validate() const {
  if (height < 1 || width < 1 || channels < 1) invalid("image dimensions must be positive");
  if (classes < 1) invalid("classes must be >= 1");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) invalid("noise_sigma must be >= 0");
  if (distractors < 0) invalid("distractors must be >= 0");
  if (shots < 1) invalid("shots must be >= 1");
  if (episodes < 1) invalid("episodes must be >= 1");
  if (fg_rects < 1) invalid("fg_rects must be >= 1");
  if (fg_max_fraction > 1.0) invalid("foreground rectangle larger than the image");
  if (!in_unit(fg_min_fraction) || !in_unit(fg_max_fraction) || fg_min_fraction > fg_max_fraction) {
    invalid("foreground fractions must satisfy 0 < min <= max <= 1");
  }
  if (!in_unit(distractor_min_fraction) || !in_unit(distractor_max_fraction) ||
      distractor_min_fraction > distractor_max_fraction) {
    invalid("distractor fractions must satisfy 0 < min <= max <= 1");
  }
  if (!(distractor_affinity >= 0.0 && distractor_affinity <= 1.0)) {
    invalid("distractor_affinity must lie in [0, 1]");
  }
  if (!(intra_class_gap >= 0.0) || !std::isfinite(intra_class_gap)) {
    invalid("intra_class_gap must be >= 0");
  }
  if (!(feature_scale > 0.0) || !std::isfinite(feature_scale)) invalid("feature_scale must be > 0");
  if (channels < 2) invalid("channels must be >= 2 to separate classes from background");
  if (orthogonal_classes && classes + 1 > channels) {
    invalid("orthogonal classes need classes + 1 <= channels");
  }
}

std::vector<Episode> SyntheticSet::plain_episodes() const {
  std::vector<Episode> out;
  out.reserve(episodes.size());
  for (const auto& e : episodes) out.push_back(e.episode);
  return out;
}

SyntheticSet generate(const SynthSpec& spec) {
  spec.validate();
  SyntheticSet set;

  Rng set_rng(derive_seed(spec.seed, 0));
  Vec neutral;
  if (spec.orthogonal_classes) {
    std::vector<Vec> basis;
    for (int i = 0; i <= spec.classes; ++i) {
      basis.push_back(orthogonalize(random_unit(set_rng, spec.channels), basis));
    }
    neutral = basis.back();
    basis.pop_back();
    set.class_vectors = std::move(basis);
  } else {
    for (int i = 0; i < spec.classes; ++i) {
      set.class_vectors.push_back(random_unit(set_rng, spec.channels));
    }
    neutral = random_unit(set_rng, spec.channels);
  }

  for (int e = 0; e < spec.episodes; ++e) {
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(e) + 1));
    const int class_id = e % spec.classes;
    const Vec& target = set.class_vectors[static_cast<std::size_t>(class_id)];

    std::vector<Vec> distractor_vecs;
    for (int d = 0; d < spec.distractors; ++d) {
      Vec other;
      if (spec.classes > 1) {
        int o = rng.uniform_int(0, spec.classes - 2);
        if (o >= class_id) ++o;
        other = set.class_vectors[static_cast<std::size_t>(o)];
      } else {
        other = random_unit(rng, spec.channels);
      }
      other = orthogonalize(std::move(other), {target});
      const double a = spec.distractor_affinity;
      const double b = std::sqrt(1.0 - a * a);
      Vec dv(target.size());
      for (std::size_t c = 0; c < dv.size(); ++c) dv[c] = a * target[c] + b * other[c];
      distractor_vecs.push_back(std::move(dv));
    }

    Image query = make_image(spec, rng, target, neutral, distractor_vecs, set.stats);
    SyntheticEpisode se;
    se.episode.id = e;
    se.episode.class_id = class_id;
    se.episode.query = std::move(query.features);
    se.episode.query_mask = std::move(query.mask);
    se.query_distractors = std::move(query.distractors);
    for (int s = 0; s < spec.shots; ++s) {
      Image support = make_image(spec, rng, target, neutral, distractor_vecs, set.stats);
      se.episode.supports.push_back({std::move(support.features), std::move(support.mask)});
    }
    set.episodes.push_back(std::move(se));
  }
  return set;
}

double oracle_error(const SyntheticSet& set, double threshold) {
  std::size_t wrong = 0;
  std::size_t total = 0;
  for (const auto& se : set.episodes) {
    const Episode& ep = se.episode;
    const Vec& cls = set.class_vectors.at(static_cast<std::size_t>(ep.class_id));
    for (std::size_t p = 0; p < ep.query.pixels(); ++p) {
      auto px = ep.query.pixel(p);
      double d = 0.0, sq = 0.0;
      for (std::size_t c = 0; c < px.size(); ++c) {
        d += px[c] * cls[c];
        sq += static_cast<double>(px[c]) * px[c];
      }
      const double cos = sq > 0.0 ? d / std::sqrt(sq) : 0.0;
      const bool predicted = cos >= threshold;
      const bool truth = ep.query_mask[p] >= 0.5f;
      wrong += predicted != truth ? 1 : 0;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(wrong) / static_cast<double>(total);
}

}  // namespace fssam

#include "fssam/imr.hpp"

#include <algorithm>

#include "fssam/error.hpp"

namespace fssam {

namespace {

void check_inputs(const Memory& disc_memory, const SoftMask& disc_prior, const Memory& fg_memory,
                  std::span<const Memory> supports) {
  if (supports.empty()) throw Error(ErrorCode::MissingSupport, "refine: no support memories");
  const Shape2D shape = disc_memory.features.shape();
  if (disc_prior.shape() != shape || fg_memory.features.shape() != shape ||
      fg_memory.prior.shape() != shape) {
    throw Error(ErrorCode::ShapeMismatch, "refine: query memories and priors differ in size");
  }
  const int channels = disc_memory.features.channels();
  if (fg_memory.features.channels() != channels) {
    throw Error(ErrorCode::ShapeMismatch, "refine: memory channel counts differ");
  }
  for (const auto& s : supports) {
    if (s.features.channels() != channels) {
      throw Error(ErrorCode::ShapeMismatch, "refine: support channel count differs");
    }
    if (s.features.shape() != s.prior.shape()) {
      throw Error(ErrorCode::ShapeMismatch, "refine: support memory and mask differ in size");
    }
  }
}

}  // namespace

std::vector<float> bg_suppress(std::span<const float> affinity,
                               std::span<const float> support_affinity) {
  if (affinity.size() != support_affinity.size()) {
    throw Error(ErrorCode::ShapeMismatch, "bg_suppress: map sizes differ");
  }
  std::vector<float> out(affinity.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = static_cast<double>(affinity[i]) + (static_cast<double>(support_affinity[i]) - 1.0);
    out[i] = static_cast<float>(std::max(v, 0.0));
  }
  return out;
}

FeatureMap blend_features(const FeatureMap& disc, const FeatureMap& fg,
                          std::span<const float> weight) {
  if (disc.shape() != fg.shape() || disc.channels() != fg.channels() ||
      weight.size() != disc.pixels()) {
    throw Error(ErrorCode::ShapeMismatch, "blend_features: shapes differ");
  }
  FeatureMap out = disc;
  for (std::size_t p = 0; p < out.pixels(); ++p) {
    const double w = weight[p];
    if (w == 0.0) continue;
    auto dst = out.pixel(p);
    auto src = fg.pixel(p);
    for (std::size_t c = 0; c < dst.size(); ++c) {
      const double d = dst[c];
      dst[c] = static_cast<float>(d + w * (static_cast<double>(src[c]) - d));
    }
  }
  return out;
}

SoftMask blend_prior(const SoftMask& disc, const SoftMask& fg, std::span<const float> weight) {
  if (disc.shape() != fg.shape() || weight.size() != disc.pixels()) {
    throw Error(ErrorCode::ShapeMismatch, "blend_prior: shapes differ");
  }
  SoftMask out = disc;
  for (std::size_t p = 0; p < out.pixels(); ++p) {
    const double d = disc[p];
    out.set(p, static_cast<float>(d + weight[p] * (static_cast<double>(fg[p]) - d)));
  }
  return out;
}

RefinementResult refine_once(const Memory& disc_memory, const SoftMask& disc_prior,
                             const Memory& fg_memory, std::span<const Memory> support_memories,
                             double epsilon) {
  check_inputs(disc_memory, disc_prior, fg_memory, support_memories);
  const Shape2D shape = disc_prior.shape();

  RefinementResult out{disc_memory, disc_prior, {}};
  RefinementStep step;

  if (disc_prior.sum() == 0.0) {
    step.query_affinity = SoftMask(shape.height, shape.width);
    step.support_affinity = SoftMask(shape.height, shape.width);
    step.fusion_weight = SoftMask(shape.height, shape.width);
    step.prior = disc_prior;
    step.degenerate = true;
    out.trace.steps.push_back(std::move(step));
    return out;
  }

  const Prototype disc_proto = masked_gap(disc_memory.features, disc_prior);
  step.query_affinity = to_mask(minmax_norm(cosine_map(fg_memory.features, disc_proto, epsilon)));
  out.trace.cosine_passes += 1;

  std::vector<SoftMask> per_support;
  per_support.reserve(support_memories.size());
  for (const auto& s : support_memories) {
    const Prototype proto = masked_gap(s.features, s.prior);
    per_support.push_back(to_mask(minmax_norm(cosine_map(fg_memory.features, proto, epsilon))));
    out.trace.cosine_passes += 1;
  }
  step.support_affinity = mean_mask(per_support);

  auto weight = bg_suppress(step.query_affinity.data(), step.support_affinity.data());
  step.fusion_weight = SoftMask(shape.height, shape.width, weight);

  out.disc_memory.features = blend_features(disc_memory.features, fg_memory.features, weight);
  out.disc_prior = blend_prior(disc_prior, fg_memory.prior, weight);
  out.disc_memory.prior = out.disc_prior;
  step.prior = out.disc_prior;
  out.trace.steps.push_back(std::move(step));
  return out;
}

RefinementResult refine(const Memory& disc_memory, const SoftMask& disc_prior,
                        const Memory& fg_memory, std::span<const Memory> support_memories,
                        int iterations, double epsilon) {
  if (iterations < 0) throw Error(ErrorCode::InvalidArgument, "refine: negative iteration count");
  check_inputs(disc_memory, disc_prior, fg_memory, support_memories);

  RefinementResult state{disc_memory, disc_prior, {}};
  for (int i = 0; i < iterations; ++i) {
    RefinementResult next =
        refine_once(state.disc_memory, state.disc_prior, fg_memory, support_memories, epsilon);
    state.disc_memory = std::move(next.disc_memory);
    state.disc_prior = std::move(next.disc_prior);
    state.trace.cosine_passes += next.trace.cosine_passes;
    for (auto& s : next.trace.steps) state.trace.steps.push_back(std::move(s));
  }
  return state;
}

std::size_t similarity_op_count(int iterations, int shots) {
  if (iterations < 0 || shots < 0) {
    throw Error(ErrorCode::InvalidArgument, "similarity_op_count: negative argument");
  }
  return static_cast<std::size_t>(iterations) * (static_cast<std::size_t>(shots) + 1);
}

}  // namespace fssam

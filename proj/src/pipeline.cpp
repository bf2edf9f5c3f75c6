#include "fssam/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "fssam/error.hpp"

namespace fssam {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::Config, message);
}

SoftMask threshold(const ScoreMap& scores, double tau) {
  std::vector<float> data(scores.values.size());
  for (std::size_t p = 0; p < data.size(); ++p) data[p] = scores.values[p] >= tau ? 1.0f : 0.0f;
  return SoftMask(scores.shape.height, scores.shape.width, std::move(data));
}

SoftMask threshold(const SoftMask& scores, double tau) {
  std::vector<float> data(scores.pixels());
  for (std::size_t p = 0; p < data.size(); ++p) data[p] = scores[p] >= tau ? 1.0f : 0.0f;
  return SoftMask(scores.height(), scores.width(), std::move(data));
}

// Mean of the supports' FG prototypes at storage precision.
Prototype mean_support_prototype(std::span<const SupportSample> supports) {
  std::vector<double> acc;
  for (const auto& s : supports) {
    const Prototype p = masked_gap(s.features, s.mask);
    if (acc.empty()) acc.assign(p.values.size(), 0.0);
    for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += p.values[c];
  }
  Prototype out;
  out.values.resize(acc.size());
  const double k = static_cast<double>(supports.size());
  for (std::size_t c = 0; c < acc.size(); ++c) out.values[c] = static_cast<float>(acc[c] / k);
  return out;
}

EpisodeOutput run_episode_impl(const Episode& ep, const PipelineConfig& cfg,
                               const ProjectionStack& projections, const ScoreProbe* probe) {
  validate_episode(ep);

  std::vector<PriorSet> sets;
  sets.reserve(ep.supports.size());
  for (const auto& s : ep.supports) {
    sets.push_back(make_priors(ep.query, s.features, s.mask, cfg.epsilon).priors);
  }

  EpisodeOutput out;
  auto& diag = out.diagnostics;
  diag.priors = average_priors(sets);

  const Memory fg_memory = encode_memory(ep.query, diag.priors.fg, cfg.memory_gain);
  Memory disc_memory = encode_memory(ep.query, diag.priors.disc, cfg.memory_gain);
  std::vector<Memory> support_memories;
  support_memories.reserve(ep.supports.size());
  for (const auto& s : ep.supports) {
    support_memories.push_back(encode_memory(s.features, s.mask, cfg.memory_gain));
  }

  diag.refined_prior = diag.priors.disc;
  if (cfg.use_imr) {
    RefinementResult refined = refine(disc_memory, diag.priors.disc, fg_memory, support_memories,
                                      cfg.imr_iterations, cfg.epsilon);
    disc_memory = std::move(refined.disc_memory);
    diag.refined_prior = std::move(refined.disc_prior);
    diag.trace = std::move(refined.trace);
  }

  if (cfg.head == PredictionHead::Prior && probe == nullptr) {
    diag.score = diag.refined_prior;
    out.prediction = threshold(diag.refined_prior, cfg.threshold);
    return out;
  }

  StackOutput fused = attention_stack(ep.query, disc_memory, support_memories, projections,
                                      cfg.attention(), cfg.use_scma_calibration, probe);
  diag.layers = std::move(fused.layers);
  diag.support_cosine_passes = fused.support_cosine_passes;

  if (cfg.head == PredictionHead::Prior) {
    diag.score = diag.refined_prior;
    out.prediction = threshold(diag.refined_prior, cfg.threshold);
    return out;
  }

  const ScoreMap score =
      minmax_norm(cosine_map(fused.features, mean_support_prototype(ep.supports), cfg.epsilon));
  diag.score = to_mask(score);
  out.prediction = threshold(score, cfg.threshold);
  return out;
}

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  // Report the lowest-index failure so errors do not depend on scheduling.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

void PipelineConfig::validate() const {
  require(imr_iterations >= 0, "imr_iterations must be >= 0");
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be finite and >= 0");
  require(std::isfinite(epsilon) && epsilon > 0.0, "epsilon must be finite and > 0");
  require(attention_layers >= 1, "attention_layers must be >= 1");
  require(std::isfinite(memory_gain) && memory_gain >= 0.0, "memory_gain must be finite and >= 0");
  require(std::isfinite(threshold) && threshold > 0.0 && threshold < 1.0,
          "threshold must lie in (0, 1)");
  require(projection_width >= 0, "projection_width must be >= 0");
  require(threads >= 0, "threads must be >= 0");
}

AttentionStackConfig PipelineConfig::attention() const {
  AttentionStackConfig a;
  a.layers = attention_layers;
  a.alpha = alpha;
  a.epsilon = epsilon;
  a.width = projection_width;
  a.norm_axis = norm_axis;
  return a;
}

ProjectionStack make_pipeline_projections(int channels, const PipelineConfig& cfg) {
  const int width = cfg.projection_width > 0 ? cfg.projection_width : channels;
  return make_projection_stack(channels, width, cfg.attention_layers, cfg.projection_seed);
}

void validate_episode(const Episode& ep) {
  if (ep.supports.empty()) throw Error(ErrorCode::MissingSupport, "episode has no supports");
  const Shape2D shape = ep.query.shape();
  const int channels = ep.query.channels();
  if (ep.query_mask.shape() != shape) {
    throw Error(ErrorCode::ShapeMismatch, "query mask size differs from query features");
  }
  for (std::size_t i = 0; i < ep.supports.size(); ++i) {
    const auto& s = ep.supports[i];
    if (s.features.shape() != shape || s.features.channels() != channels ||
        s.mask.shape() != shape) {
      throw Error(ErrorCode::ShapeMismatch,
                  "support " + std::to_string(i) + " differs in shape from the query");
    }
    if (s.mask.sum() == 0.0) {
      throw Error(ErrorCode::DegenerateMask, "support " + std::to_string(i) + " mask is empty");
    }
  }
}

EpisodeOutput run_episode(const Episode& ep, const PipelineConfig& cfg,
                          const ProjectionStack& projections, const ScoreProbe* probe) {
  try {
    return run_episode_impl(ep, cfg, projections, probe);
  } catch (const Error& e) {
    throw Error(e.code(), "episode " + std::to_string(ep.id) + ": " + e.detail());
  }
}

MetricsReport evaluate(std::span<const Episode> episodes, const PipelineConfig& cfg,
                       const ProjectionStack& projections) {
  if (episodes.empty()) throw Error(ErrorCode::EmptyInput, "evaluate: no episodes");
  cfg.validate();
  std::vector<EpisodeRecord> records(episodes.size());
  parallel_for(episodes.size(), cfg.threads, [&](std::size_t i) {
    const Episode& ep = episodes[i];
    const EpisodeOutput out = run_episode(ep, cfg, projections);
    records[i] = score_prediction(out.prediction, ep.query_mask, ep.id, ep.class_id);
  });
  return aggregate(records);
}

AblationReport ablation_suite(std::span<const Episode> episodes, const PipelineConfig& cfg,
                              const ProjectionStack& projections) {
  struct Variant {
    const char* name;
    bool imr;
    bool scma;
  };
  static constexpr Variant kVariants[] = {
      {"PPG", false, false},
      {"PPG+IMR", true, false},
      {"PPG+SCMA", false, true},
      {"PPG+IMR+SCMA", true, true},
  };
  AblationReport report;
  for (const auto& v : kVariants) {
    PipelineConfig variant = cfg;
    variant.use_imr = v.imr;
    variant.use_scma_calibration = v.scma;
    report.entries.push_back({v.name, v.imr, v.scma, evaluate(episodes, variant, projections)});
  }
  return report;
}

double LayerScoreStats::reduction_percent() const {
  if (mean_pre == 0.0) return 0.0;
  return 100.0 * (mean_pre - mean_post) / std::abs(mean_pre);
}

std::vector<LayerScoreStats> calibration_stats(std::span<const Episode> episodes,
                                               const PipelineConfig& cfg,
                                               const ProjectionStack& projections) {
  if (episodes.empty()) throw Error(ErrorCode::EmptyInput, "calibration_stats: no episodes");
  cfg.validate();
  PipelineConfig calibrated = cfg;
  calibrated.use_scma_calibration = true;
  calibrated.head = PredictionHead::Fused;

  std::vector<std::vector<CrossAttentionDiagnostics>> per_episode(episodes.size());
  parallel_for(episodes.size(), cfg.threads, [&](std::size_t i) {
    const Episode& ep = episodes[i];
    ScoreProbe probe;
    probe.rows.resize(ep.query_mask.pixels());
    probe.cols.resize(ep.query_mask.pixels());
    for (std::size_t p = 0; p < probe.rows.size(); ++p) {
      const bool fg = ep.query_mask[p] >= 0.5f;
      probe.rows[p] = fg ? 1 : 0;
      probe.cols[p] = fg ? 0 : 1;
    }
    per_episode[i] = run_episode(ep, calibrated, projections, &probe).diagnostics.layers;
  });

  std::vector<LayerScoreStats> stats(static_cast<std::size_t>(cfg.attention_layers));
  std::vector<double> sum_pre(stats.size(), 0.0), sum_post(stats.size(), 0.0);
  for (const auto& layers : per_episode) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& s = layers[l].probed_pairs;
      sum_pre[l] += s.mean_pre * static_cast<double>(s.pairs);
      sum_post[l] += s.mean_post * static_cast<double>(s.pairs);
      stats[l].pairs += s.pairs;
    }
  }
  for (std::size_t l = 0; l < stats.size(); ++l) {
    stats[l].layer = static_cast<int>(l);
    if (stats[l].pairs > 0) {
      stats[l].mean_pre = sum_pre[l] / static_cast<double>(stats[l].pairs);
      stats[l].mean_post = sum_post[l] / static_cast<double>(stats[l].pairs);
    }
  }
  return stats;
}

std::vector<Episode> limit_shots(std::span<const Episode> episodes, int shots) {
  if (shots < 1) throw Error(ErrorCode::InvalidArgument, "shots must be >= 1");
  std::vector<Episode> out(episodes.begin(), episodes.end());
  for (auto& ep : out) {
    if (ep.supports.size() < static_cast<std::size_t>(shots)) {
      throw Error(ErrorCode::InvalidArgument, "episode " + std::to_string(ep.id) + " has only " +
                                                  std::to_string(ep.supports.size()) +
                                                  " supports");
    }
    ep.supports.resize(static_cast<std::size_t>(shots));
  }
  return out;
}

}  // namespace fssam

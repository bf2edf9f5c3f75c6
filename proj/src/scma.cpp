#include "fssam/scma.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fssam/error.hpp"
#include "fssam/random.hpp"

namespace fssam {

namespace {

bool is_identity(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (m(r, c) != (r == c ? 1.0 : 0.0)) return false;
    }
  }
  return true;
}

Matrix project(const Matrix& x, const Matrix& theta) {
  if (is_identity(theta) && theta.rows() == x.cols()) return x;
  return matmul(x, theta);
}

// Gram-Schmidt along the shorter side of a rows x cols gaussian matrix.
Matrix random_orthonormal(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.gaussian();
  const bool by_columns = cols <= rows;
  const std::size_t count = by_columns ? cols : rows;
  const std::size_t length = by_columns ? rows : cols;
  auto get = [&](std::size_t vec, std::size_t i) -> double& {
    return by_columns ? m(i, vec) : m(vec, i);
  };
  for (std::size_t a = 0; a < count; ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      double dot = 0.0;
      for (std::size_t i = 0; i < length; ++i) dot += get(a, i) * get(b, i);
      for (std::size_t i = 0; i < length; ++i) get(a, i) -= dot * get(b, i);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < length; ++i) norm += get(a, i) * get(a, i);
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < length; ++i) get(a, i) /= norm;
  }
  return m;
}

struct Calibration {
  std::vector<double> support;  // Norm(A_SQ) per memory position
  double alpha = 0.0;
  NormAxis axis = NormAxis::PerRow;
};

struct AttendResult {
  Matrix fused;  // N x channels, before the skip connection
  CrossAttentionDiagnostics diag;
};

// softmax(Q K^T / sqrt(d) [+ bias]) V Theta_out, streamed row by row.
AttendResult attend(const Matrix& q, const Matrix& k, const Matrix& v, const Matrix& out_proj,
                    const Calibration* calibration, bool keep_scores, const ScoreProbe* probe) {
  const std::size_t n_rows = q.rows();
  const std::size_t n_cols = k.rows();
  const double scale = std::sqrt(static_cast<double>(q.cols()));

  Matrix raw = matmul_transposed(q, k);
  for (double& x : raw.data()) x /= scale;

  double global_lo = 0.0;
  double global_range = 0.0;
  if (calibration && calibration->axis == NormAxis::Global && !raw.data().empty()) {
    const auto [lo, hi] = std::minmax_element(raw.data().begin(), raw.data().end());
    global_lo = *lo;
    global_range = *hi - *lo;
  }

  AttendResult res;
  auto& diag = res.diag;
  diag.calibrated = calibration != nullptr;
  if (keep_scores) {
    diag.pre_scores = raw;
    diag.post_scores = Matrix(n_rows, n_cols);
    diag.attention = Matrix(n_rows, n_cols);
  }

  Matrix mixed(n_rows, v.cols());
  std::vector<double> post(n_cols);
  std::vector<double> normed(n_cols);
  double sum_pre = 0.0, sum_post = 0.0, probe_pre = 0.0, probe_post = 0.0;
  std::size_t probe_pairs = 0;

  for (std::size_t i = 0; i < n_rows; ++i) {
    auto raw_row = raw.row(i);
    if (calibration) {
      if (calibration->axis == NormAxis::PerRow) {
        normed = minmax_norm(raw_row);
      } else {
        for (std::size_t j = 0; j < n_cols; ++j) {
          normed[j] = global_range > 0.0 ? (raw_row[j] - global_lo) / global_range : 0.0;
        }
      }
      for (std::size_t j = 0; j < n_cols; ++j) {
        const double shifted = normed[j] + (calibration->support[j] - 1.0);
        const double bias = calibration->alpha * std::min(shifted, 0.0);
        post[j] = raw_row[j] + bias;
        diag.min_bias = std::min(diag.min_bias, bias);
        diag.max_bias = std::max(diag.max_bias, bias);
      }
    } else {
      std::copy(raw_row.begin(), raw_row.end(), post.begin());
    }

    const bool probe_row = probe && probe->rows[i] != 0;
    for (std::size_t j = 0; j < n_cols; ++j) {
      sum_pre += raw_row[j];
      sum_post += post[j];
      if (probe_row && probe->cols[j] != 0) {
        probe_pre += raw_row[j];
        probe_post += post[j];
        ++probe_pairs;
      }
    }
    if (keep_scores) std::copy(post.begin(), post.end(), diag.post_scores->row(i).begin());

    const double mx = *std::max_element(post.begin(), post.end());
    double total = 0.0;
    for (double& x : post) {
      x = std::exp(x - mx);
      total += x;
    }
    const double inv = 1.0 / total;
    double row_sum = 0.0;
    for (double& x : post) {
      x *= inv;
      row_sum += x;
    }
    diag.max_row_sum_error = std::max(diag.max_row_sum_error, std::abs(row_sum - 1.0));
    if (keep_scores) std::copy(post.begin(), post.end(), diag.attention->row(i).begin());

    auto dst = mixed.row(i);
    for (std::size_t j = 0; j < n_cols; ++j) {
      const double w = post[j];
      auto val = v.row(j);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += w * val[c];
    }
  }

  const double total_pairs = static_cast<double>(n_rows) * static_cast<double>(n_cols);
  diag.all_pairs = {sum_pre / total_pairs, sum_post / total_pairs, n_rows * n_cols};
  if (probe_pairs > 0) {
    diag.probed_pairs = {probe_pre / static_cast<double>(probe_pairs),
                         probe_post / static_cast<double>(probe_pairs), probe_pairs};
  }
  res.fused = project(mixed, out_proj);
  return res;
}

FeatureMap add_skip(const FeatureMap& input, const Matrix& fused) {
  Matrix sum = to_matrix(input);
  if (fused.rows() != sum.rows() || fused.cols() != sum.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "attention output width differs from input channels");
  }
  auto dst = sum.data();
  auto src = fused.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  return to_feature_map(sum, input.shape());
}

void check_projection(const ProjectionSet& proj, int channels) {
  const auto c = static_cast<std::size_t>(channels);
  const std::size_t w = proj.query.cols();
  if (proj.query.rows() != c || proj.key.rows() != c || proj.value.rows() != c ||
      proj.key.cols() != w || proj.value.cols() != w || proj.output.rows() != w ||
      proj.output.cols() != c) {
    throw Error(ErrorCode::ShapeMismatch, "projection set does not match feature channels");
  }
}

void check_probe(const ScoreProbe* probe, std::size_t rows, std::size_t cols) {
  if (probe && (probe->rows.size() != rows || probe->cols.size() != cols)) {
    throw Error(ErrorCode::ShapeMismatch, "score probe size does not match attention shape");
  }
}

AttentionOutput cross_attention(const FeatureMap& query, const Memory& disc_memory,
                                std::span<const Memory> supports, const ProjectionSet& proj,
                                const AttentionStackConfig& cfg, bool calibrated,
                                const ScoreProbe* probe) {
  if (query.channels() != disc_memory.features.channels()) {
    throw Error(ErrorCode::ShapeMismatch, "cross attention: query and memory channels differ");
  }
  check_projection(proj, query.channels());
  check_probe(probe, query.pixels(), disc_memory.features.pixels());

  const Matrix memory = to_matrix(disc_memory.features);
  const Matrix q = project(to_matrix(query), proj.query);
  const Matrix k = project(memory, proj.key);
  const Matrix v = project(memory, proj.value);

  std::optional<Calibration> calibration;
  std::size_t passes = 0;
  if (calibrated) {
    if (supports.empty()) {
      throw Error(ErrorCode::MissingSupport, "calibrated cross attention needs a support memory");
    }
    calibration.emplace();
    calibration->alpha = cfg.alpha;
    calibration->axis = cfg.norm_axis;
    if (cfg.support_similarity_override) {
      if (cfg.support_similarity_override->size() != k.rows()) {
        throw Error(ErrorCode::ShapeMismatch, "support similarity override has the wrong length");
      }
      calibration->support = *cfg.support_similarity_override;
    } else {
      // k-shot: mean of per-support cosines at storage precision, so identical
      // supports average back to the single-support map exactly.
      std::vector<double> sum(k.rows(), 0.0);
      for (const auto& s : supports) {
        if (s.features.channels() != query.channels()) {
          throw Error(ErrorCode::ShapeMismatch, "support memory channel count differs");
        }
        const Prototype pooled = masked_gap(s.features, s.prior);
        const std::vector<double> key_proto = vecmat(pooled.values, proj.key);
        const std::vector<double> cos = cosine_rows(k, key_proto, cfg.epsilon);
        for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += static_cast<float>(cos[j]);
        ++passes;
      }
      const double shots = static_cast<double>(supports.size());
      for (double& x : sum) x = static_cast<float>(x / shots);
      calibration->support = minmax_norm(sum);
    }
  }

  AttendResult res = attend(q, k, v, proj.output, calibration ? &*calibration : nullptr,
                            cfg.keep_scores, probe);
  res.diag.support_cosine_passes = passes;
  if (calibration) res.diag.support_similarity = std::move(calibration->support);
  return AttentionOutput{add_skip(query, res.fused), std::move(res.diag)};
}

}  // namespace

ProjectionSet make_projections(int channels, int width, std::uint64_t seed) {
  if (channels < 1 || width < 1) {
    throw Error(ErrorCode::InvalidArgument, "make_projections: dimensions must be positive");
  }
  const auto c = static_cast<std::size_t>(channels);
  const auto w = static_cast<std::size_t>(width);
  ProjectionSet p;
  p.seed = seed;
  if (c == w) {
    p.query = p.key = p.value = p.output = Matrix::identity(c);
    return p;
  }
  Rng rng(seed);
  p.query = random_orthonormal(c, w, rng);
  p.key = random_orthonormal(c, w, rng);
  p.value = random_orthonormal(c, w, rng);
  p.output = random_orthonormal(w, c, rng);
  return p;
}

ProjectionStack make_projection_stack(int channels, int width, int layers, std::uint64_t seed) {
  if (layers < 1) throw Error(ErrorCode::InvalidArgument, "projection stack needs >= 1 layer");
  ProjectionStack stack;
  for (int l = 0; l < layers; ++l) {
    const auto base = static_cast<std::uint64_t>(l) * 2;
    stack.layers.push_back({make_projections(channels, width, derive_seed(seed, base)),
                            make_projections(channels, width, derive_seed(seed, base + 1))});
  }
  return stack;
}

FeatureMap self_attention(const FeatureMap& features, const ProjectionSet& proj) {
  check_projection(proj, features.channels());
  const Matrix x = to_matrix(features);
  AttendResult res = attend(project(x, proj.query), project(x, proj.key), project(x, proj.value),
                            proj.output, nullptr, false, nullptr);
  return add_skip(features, res.fused);
}

AttentionOutput calibrated_cross_attention(const FeatureMap& query, const Memory& disc_memory,
                                           std::span<const Memory> support_memories,
                                           const ProjectionSet& proj,
                                           const AttentionStackConfig& cfg,
                                           const ScoreProbe* probe) {
  return cross_attention(query, disc_memory, support_memories, proj, cfg, true, probe);
}

AttentionOutput memory_cross_attention(const FeatureMap& query, const Memory& disc_memory,
                                       const ProjectionSet& proj, const AttentionStackConfig& cfg,
                                       const ScoreProbe* probe) {
  return cross_attention(query, disc_memory, {}, proj, cfg, false, probe);
}

std::vector<double> calibration_bias(std::span<const double> norm_scores,
                                     std::span<const double> norm_support, double alpha) {
  if (norm_scores.size() != norm_support.size()) {
    throw Error(ErrorCode::ShapeMismatch, "calibration_bias: lengths differ");
  }
  std::vector<double> out(norm_scores.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = alpha * std::min(norm_scores[j] + (norm_support[j] - 1.0), 0.0);
  }
  return out;
}

StackOutput attention_stack(const FeatureMap& query, const Memory& disc_memory,
                            std::span<const Memory> support_memories,
                            const ProjectionStack& projections, const AttentionStackConfig& cfg,
                            bool calibrated, const ScoreProbe* probe) {
  if (cfg.layers < 1) throw Error(ErrorCode::InvalidArgument, "attention stack needs >= 1 layer");
  if (cfg.alpha < 0.0) throw Error(ErrorCode::InvalidArgument, "alpha must be >= 0");
  if (projections.layers.size() < static_cast<std::size_t>(cfg.layers)) {
    throw Error(ErrorCode::InvalidArgument,
                "projection stack has " + std::to_string(projections.layers.size()) +
                    " layers, config asks for " + std::to_string(cfg.layers));
  }
  if (calibrated && support_memories.empty()) {
    throw Error(ErrorCode::MissingSupport, "calibrated attention stack needs a support memory");
  }

  StackOutput out{query, {}, 0};
  for (int l = 0; l < cfg.layers; ++l) {
    const auto& layer = projections.layers[static_cast<std::size_t>(l)];
    FeatureMap attended = self_attention(out.features, layer.self_attention);
    AttentionOutput cross = cross_attention(attended, disc_memory, support_memories,
                                            layer.cross_attention, cfg, calibrated, probe);
    out.support_cosine_passes += cross.diagnostics.support_cosine_passes;
    out.features = std::move(cross.features);
    out.layers.push_back(std::move(cross.diagnostics));
  }
  return out;
}

std::size_t extra_similarity_count(int shots, int layers) {
  if (shots < 1) throw Error(ErrorCode::MissingSupport, "extra_similarity_count: no supports");
  if (layers < 0) throw Error(ErrorCode::InvalidArgument, "extra_similarity_count: negative layers");
  return static_cast<std::size_t>(shots) * static_cast<std::size_t>(layers);
}

}  // namespace fssam

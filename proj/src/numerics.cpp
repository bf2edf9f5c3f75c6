#include "fssam/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fssam/error.hpp"

namespace fssam {

namespace {

void require_positive(int h, int w, int c, const char* what) {
  if (h <= 0 || w <= 0 || c <= 0) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " dimensions must be positive");
  }
}

}  // namespace

FeatureMap::FeatureMap(int height, int width, int channels)
    : shape_{height, width}, channels_(channels) {
  require_positive(height, width, channels, "feature map");
  data_.assign(shape_.pixels() * static_cast<std::size_t>(channels), 0.0f);
}

FeatureMap::FeatureMap(int height, int width, int channels, std::vector<float> data)
    : shape_{height, width}, channels_(channels), data_(std::move(data)) {
  require_positive(height, width, channels, "feature map");
  if (data_.size() != shape_.pixels() * static_cast<std::size_t>(channels)) {
    throw Error(ErrorCode::ShapeMismatch, "feature data length does not match H*W*C");
  }
  for (float v : data_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "feature map holds a non-finite value");
  }
}

SoftMask::SoftMask(int height, int width, float fill) : shape_{height, width} {
  require_positive(height, width, 1, "mask");
  if (!(fill >= 0.0f && fill <= 1.0f)) {
    throw Error(ErrorCode::MaskRangeViolation, "mask fill value outside [0, 1]");
  }
  data_.assign(shape_.pixels(), fill);
}

SoftMask::SoftMask(int height, int width, std::vector<float> data)
    : shape_{height, width}, data_(std::move(data)) {
  require_positive(height, width, 1, "mask");
  if (data_.size() != shape_.pixels()) {
    throw Error(ErrorCode::ShapeMismatch, "mask data length does not match H*W");
  }
  for (float v : data_) {
    // also rejects NaN
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw Error(ErrorCode::MaskRangeViolation, "mask value outside [0, 1]");
    }
  }
}

double SoftMask::sum() const noexcept {
  double s = 0.0;
  for (float v : data_) s += v;
  return s;
}

bool SoftMask::is_binary() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return v == 0.0f || v == 1.0f; });
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Prototype masked_gap(const FeatureMap& features, const SoftMask& mask) {
  if (features.shape() != mask.shape()) {
    throw Error(ErrorCode::ShapeMismatch, "masked_gap: feature and mask sizes differ");
  }
  const auto channels = static_cast<std::size_t>(features.channels());
  std::vector<double> acc(channels, 0.0);
  double weight = 0.0;
  for (std::size_t p = 0; p < features.pixels(); ++p) {
    const double m = mask[p];
    if (m == 0.0) continue;
    weight += m;
    auto px = features.pixel(p);
    for (std::size_t c = 0; c < channels; ++c) acc[c] += m * px[c];
  }
  if (weight <= 0.0) {
    throw Error(ErrorCode::DegenerateMask, "masked_gap: mask has zero total weight");
  }
  Prototype out;
  out.values.resize(channels);
  for (std::size_t c = 0; c < channels; ++c) out.values[c] = static_cast<float>(acc[c] / weight);
  return out;
}

ScoreMap cosine_map(const FeatureMap& features, const Prototype& proto, double epsilon) {
  if (features.channels() != proto.channels()) {
    throw Error(ErrorCode::ShapeMismatch, "cosine_map: channel counts differ");
  }
  const auto channels = static_cast<std::size_t>(features.channels());
  double proto_sq = 0.0;
  for (float v : proto.values) proto_sq += static_cast<double>(v) * v;
  const double proto_norm = std::sqrt(proto_sq);

  ScoreMap out{features.shape(), std::vector<double>(features.pixels())};
  for (std::size_t p = 0; p < features.pixels(); ++p) {
    auto px = features.pixel(p);
    double dot = 0.0;
    double sq = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      dot += static_cast<double>(px[c]) * proto.values[c];
      sq += static_cast<double>(px[c]) * px[c];
    }
    out.values[p] = dot / (std::sqrt(sq) * proto_norm + epsilon);
  }
  return out;
}

std::vector<double> cosine_rows(const Matrix& rows, std::span<const double> proto, double epsilon) {
  if (rows.cols() != proto.size()) {
    throw Error(ErrorCode::ShapeMismatch, "cosine_rows: widths differ");
  }
  double proto_sq = 0.0;
  for (double v : proto) proto_sq += v * v;
  const double proto_norm = std::sqrt(proto_sq);
  std::vector<double> out(rows.rows());
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    auto row = rows.row(r);
    double dot = 0.0;
    double sq = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      dot += row[c] * proto[c];
      sq += row[c] * row[c];
    }
    out[r] = dot / (std::sqrt(sq) * proto_norm + epsilon);
  }
  return out;
}

std::vector<double> minmax_norm(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  if (range <= 0.0) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - lo) / range;
  return out;
}

ScoreMap minmax_norm(const ScoreMap& grid) {
  return ScoreMap{grid.shape, minmax_norm(std::span<const double>(grid.values))};
}

Matrix minmax_norm_rows(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto normed = minmax_norm(m.row(r));
    std::copy(normed.begin(), normed.end(), out.row(r).begin());
  }
  return out;
}

Matrix minmax_norm_global(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  auto normed = minmax_norm(m.data());
  std::copy(normed.begin(), normed.end(), out.data().begin());
  return out;
}

Matrix row_softmax(const Matrix& scores) {
  Matrix out(scores.rows(), scores.cols());
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    auto in = scores.row(r);
    auto dst = out.row(r);
    if (in.empty()) continue;
    const double mx = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      dst[c] = std::exp(in[c] - mx);
      total += dst[c];
    }
    const double inv = 1.0 / total;
    for (double& v : dst) v *= inv;
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::ShapeMismatch, "matmul: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    auto lhs = a.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double s = lhs[k];
      if (s == 0.0) continue;
      auto rhs = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += s * rhs[j];
    }
  }
  return out;
}

Matrix matmul_transposed(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "matmul_transposed: widths differ");
  }
  Matrix out(a.rows(), b.rows());
  const std::size_t width = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* lhs = a.row(i).data();
    double* dst = out.row(i).data();
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* rhs = b.row(j).data();
      double dot = 0.0;
      for (std::size_t k = 0; k < width; ++k) dot += lhs[k] * rhs[k];
      dst[j] = dot;
    }
  }
  return out;
}

std::vector<double> vecmat(std::span<const float> v, const Matrix& m) {
  if (v.size() != m.rows()) throw Error(ErrorCode::ShapeMismatch, "vecmat: widths differ");
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t k = 0; k < v.size(); ++k) {
    auto row = m.row(k);
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += static_cast<double>(v[k]) * row[j];
  }
  return out;
}

Matrix to_matrix(const FeatureMap& features) {
  Matrix out(features.pixels(), static_cast<std::size_t>(features.channels()));
  auto src = features.data();
  auto dst = out.data();
  std::copy(src.begin(), src.end(), dst.begin());
  return out;
}

FeatureMap to_feature_map(const Matrix& m, Shape2D shape) {
  if (m.rows() != shape.pixels()) {
    throw Error(ErrorCode::ShapeMismatch, "to_feature_map: row count does not match H*W");
  }
  std::vector<float> data(m.data().size());
  std::transform(m.data().begin(), m.data().end(), data.begin(),
                 [](double v) { return static_cast<float>(v); });
  return FeatureMap(shape.height, shape.width, static_cast<int>(m.cols()), std::move(data));
}

SoftMask to_mask(const ScoreMap& grid) {
  std::vector<float> data(grid.values.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = static_cast<float>(std::clamp(grid.values[i], 0.0, 1.0));
  }
  return SoftMask(grid.shape.height, grid.shape.width, std::move(data));
}

SoftMask mean_mask(std::span<const SoftMask> masks) {
  if (masks.empty()) throw Error(ErrorCode::EmptyInput, "mean_mask: no masks");
  const Shape2D shape = masks.front().shape();
  std::vector<double> acc(shape.pixels(), 0.0);
  for (const auto& m : masks) {
    if (m.shape() != shape) throw Error(ErrorCode::ShapeMismatch, "mean_mask: shapes differ");
    for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += m[p];
  }
  const double k = static_cast<double>(masks.size());
  std::vector<float> data(acc.size());
  for (std::size_t p = 0; p < acc.size(); ++p) data[p] = static_cast<float>(acc[p] / k);
  return SoftMask(shape.height, shape.width, std::move(data));
}

}  // namespace fssam

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fssam/tensor.hpp"

namespace fssam {

/// Guard added to cosine denominators.
inline constexpr double kDefaultEpsilon = 1e-8;

/// Mask-weighted global average pooling: sum_p m(p) f(p) / sum_p m(p).
/// Throws DegenerateMask when the mask has zero total weight.
Prototype masked_gap(const FeatureMap& features, const SoftMask& mask);

/// Per-pixel cosine similarity against a prototype, with `epsilon` added to
/// the product of norms.
ScoreMap cosine_map(const FeatureMap& features, const Prototype& proto,
                    double epsilon = kDefaultEpsilon);

/// Cosine similarity of every matrix row against `proto`.
std::vector<double> cosine_rows(const Matrix& rows, std::span<const double> proto,
                                double epsilon = kDefaultEpsilon);

/// (x - min) / (max - min). A constant input maps to all zeros.
std::vector<double> minmax_norm(std::span<const double> values);
ScoreMap minmax_norm(const ScoreMap& grid);

/// Same normalization applied independently to each row.
Matrix minmax_norm_rows(const Matrix& m);
/// Same normalization over every entry of the matrix at once.
Matrix minmax_norm_global(const Matrix& m);

/// Numerically stable row softmax (row max subtracted before exp).
Matrix row_softmax(const Matrix& scores);

/// a * b
Matrix matmul(const Matrix& a, const Matrix& b);
/// a * b^T
Matrix matmul_transposed(const Matrix& a, const Matrix& b);
/// prototype (as a row vector) * m
std::vector<double> vecmat(std::span<const float> v, const Matrix& m);

/// N x C view of a feature map, N = H * W.
Matrix to_matrix(const FeatureMap& features);
/// Inverse of to_matrix; values are rounded to storage precision.
FeatureMap to_feature_map(const Matrix& m, Shape2D shape);

/// Converts a [0, 1] score map to storage precision.
SoftMask to_mask(const ScoreMap& grid);

/// Elementwise arithmetic mean of equally shaped masks.
SoftMask mean_mask(std::span<const SoftMask> masks);

}  // namespace fssam

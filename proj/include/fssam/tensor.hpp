#pragma once

// Dense containers shared by every stage of the pipeline.
//
// Maps are stored at 32-bit precision (the on-disk precision); all reductions
// over them accumulate in double. Score matrices and projected features live
// in double.

#include <cstddef>
#include <span>
#include <vector>

namespace fssam {

struct Shape2D {
  int height = 0;
  int width = 0;

  std::size_t pixels() const noexcept {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  friend bool operator==(const Shape2D&, const Shape2D&) = default;
};

/// Dense H x W x C feature grid, row-major with channels innermost.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int height, int width, int channels);
  FeatureMap(int height, int width, int channels, std::vector<float> data);

  int height() const noexcept { return shape_.height; }
  int width() const noexcept { return shape_.width; }
  int channels() const noexcept { return channels_; }
  Shape2D shape() const noexcept { return shape_; }
  std::size_t pixels() const noexcept { return shape_.pixels(); }

  std::span<const float> pixel(std::size_t index) const noexcept {
    return {data_.data() + index * static_cast<std::size_t>(channels_),
            static_cast<std::size_t>(channels_)};
  }
  std::span<float> pixel(std::size_t index) noexcept {
    return {data_.data() + index * static_cast<std::size_t>(channels_),
            static_cast<std::size_t>(channels_)};
  }

  float& at(int y, int x, int c) noexcept {
    return data_[(static_cast<std::size_t>(y) * shape_.width + x) * channels_ + c];
  }
  float at(int y, int x, int c) const noexcept {
    return data_[(static_cast<std::size_t>(y) * shape_.width + x) * channels_ + c];
  }

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  Shape2D shape_;
  int channels_ = 0;
  std::vector<float> data_;
};

/// H x W grid with every value in [0, 1]. Holds binary masks and soft priors.
class SoftMask {
 public:
  SoftMask() = default;
  SoftMask(int height, int width, float fill = 0.0f);
  SoftMask(int height, int width, std::vector<float> data);

  int height() const noexcept { return shape_.height; }
  int width() const noexcept { return shape_.width; }
  Shape2D shape() const noexcept { return shape_; }
  std::size_t pixels() const noexcept { return shape_.pixels(); }

  float operator[](std::size_t index) const noexcept { return data_[index]; }
  /// Caller keeps the value in [0, 1].
  void set(std::size_t index, float value) noexcept { data_[index] = value; }

  std::span<const float> data() const noexcept { return data_; }

  double sum() const noexcept;
  bool is_binary() const noexcept;

  friend bool operator==(const SoftMask&, const SoftMask&) = default;

 private:
  Shape2D shape_;
  std::vector<float> data_;
};

/// Channel-space vector pooled from a masked region.
struct Prototype {
  std::vector<float> values;

  int channels() const noexcept { return static_cast<int>(values.size()); }
  friend bool operator==(const Prototype&, const Prototype&) = default;
};

/// Real-valued H x W map without the [0, 1] constraint (raw similarities).
struct ScoreMap {
  Shape2D shape;
  std::vector<double> values;
};

/// Row-major double matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace fssam

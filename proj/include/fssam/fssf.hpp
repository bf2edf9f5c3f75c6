#pragma once

// FSSF: little-endian binary container for feature maps and masks.
//
//   offset  size  field
//   0       4     magic "FSSF"
//   4       2     version (u16, currently 1)
//   6       2     kind (u16, 0 = feature map, 1 = mask)
//   8       4     height (u32)
//   12      4     width (u32)
//   16      4     channels (u32, 1 for masks)
//   20      4*H*W*C  payload, f32, row-major, channels innermost

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "fssam/tensor.hpp"

namespace fssam::fssf {

inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 20;

enum class Kind : std::uint16_t { FeatureMap = 0, Mask = 1 };

using Value = std::variant<FeatureMap, SoftMask>;

std::vector<std::uint8_t> encode(const FeatureMap& features);
std::vector<std::uint8_t> encode(const SoftMask& mask);

/// Throws BadMagic, UnsupportedVersion, UnsupportedKind, TruncatedPayload,
/// TrailingData, MaskRangeViolation or NonFinite.
Value decode(std::span<const std::uint8_t> bytes);

void write_file(const std::filesystem::path& path, const FeatureMap& features);
void write_file(const std::filesystem::path& path, const SoftMask& mask);
Value read_file(const std::filesystem::path& path);

/// read_file plus a kind check (throws UnsupportedKind on mismatch).
FeatureMap read_features(const std::filesystem::path& path);
SoftMask read_mask(const std::filesystem::path& path);

}  // namespace fssam::fssf

namespace fssam {

/// Binary PGM (P5, maxval 255) with values in [0, 1] linearly quantized.
std::vector<std::uint8_t> encode_pgm(const SoftMask& mask);
void write_pgm(const std::filesystem::path& path, const SoftMask& mask);

}  // namespace fssam

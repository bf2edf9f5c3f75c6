#include "fssam/fssf.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "fssam/error.hpp"

namespace fssam::fssf {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

constexpr char kMagic[4] = {'F', 'S', 'S', 'F'};

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::vector<std::uint8_t> encode_raw(Kind kind, int h, int w, int c, std::span<const float> data) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + data.size() * 4);
  for (char m : kMagic) out.push_back(static_cast<std::uint8_t>(m));
  put_u16(out, kVersion);
  put_u16(out, static_cast<std::uint16_t>(kind));
  put_u32(out, static_cast<std::uint32_t>(h));
  put_u32(out, static_cast<std::uint32_t>(w));
  put_u32(out, static_cast<std::uint32_t>(c));
  for (float v : data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

}  // namespace

std::vector<std::uint8_t> encode(const FeatureMap& features) {
  return encode_raw(Kind::FeatureMap, features.height(), features.width(), features.channels(),
                    features.data());
}

std::vector<std::uint8_t> encode(const SoftMask& mask) {
  return encode_raw(Kind::Mask, mask.height(), mask.width(), 1, mask.data());
}

Value decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::BadMagic, "missing FSSF magic");
  }
  if (bytes.size() < kHeaderSize) throw Error(ErrorCode::TruncatedPayload, "header is truncated");
  const std::uint8_t* p = bytes.data();
  const std::uint16_t version = get_u16(p + 4);
  if (version != kVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "version " + std::to_string(version));
  }
  const std::uint16_t kind = get_u16(p + 6);
  if (kind > 1) throw Error(ErrorCode::UnsupportedKind, "kind " + std::to_string(kind));
  const std::uint32_t h = get_u32(p + 8);
  const std::uint32_t w = get_u32(p + 12);
  const std::uint32_t c = get_u32(p + 16);
  if (h == 0 || w == 0 || c == 0 || h > INT32_MAX || w > INT32_MAX || c > INT32_MAX) {
    throw Error(ErrorCode::InvalidArgument, "dimensions must be positive");
  }
  if (kind == static_cast<std::uint16_t>(Kind::Mask) && c != 1) {
    throw Error(ErrorCode::UnsupportedKind, "mask files must have one channel");
  }
  const std::uint64_t plane = static_cast<std::uint64_t>(h) * w;
  if (plane > (UINT64_MAX - kHeaderSize) / 4 / c) {
    throw Error(ErrorCode::TruncatedPayload, "header implies an impossibly large payload");
  }
  const std::uint64_t count = plane * c;
  const std::uint64_t expected = kHeaderSize + count * 4;
  if (bytes.size() < expected) {
    throw Error(ErrorCode::TruncatedPayload, "payload holds " +
                                                 std::to_string(bytes.size() - kHeaderSize) +
                                                 " bytes, header implies " +
                                                 std::to_string(count * 4));
  }
  if (bytes.size() > expected) {
    throw Error(ErrorCode::TrailingData, std::to_string(bytes.size() - expected) +
                                             " bytes after the payload");
  }
  std::vector<float> data(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = std::bit_cast<float>(get_u32(p + kHeaderSize + 4 * i));
  }
  const int hi = static_cast<int>(h), wi = static_cast<int>(w), ci = static_cast<int>(c);
  if (kind == static_cast<std::uint16_t>(Kind::Mask)) return SoftMask(hi, wi, std::move(data));
  return FeatureMap(hi, wi, ci, std::move(data));
}

void write_file(const std::filesystem::path& path, const FeatureMap& features) {
  write_bytes(path, encode(features));
}

void write_file(const std::filesystem::path& path, const SoftMask& mask) {
  write_bytes(path, encode(mask));
}

Value read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

FeatureMap read_features(const std::filesystem::path& path) {
  Value v = read_file(path);
  if (auto* f = std::get_if<FeatureMap>(&v)) return std::move(*f);
  throw Error(ErrorCode::UnsupportedKind, path.string() + " holds a mask, expected a feature map");
}

SoftMask read_mask(const std::filesystem::path& path) {
  Value v = read_file(path);
  if (auto* m = std::get_if<SoftMask>(&v)) return std::move(*m);
  throw Error(ErrorCode::UnsupportedKind, path.string() + " holds a feature map, expected a mask");
}

}  // namespace fssam::fssf

namespace fssam {

std::vector<std::uint8_t> encode_pgm(const SoftMask& mask) {
  const std::string header = "P5\n" + std::to_string(mask.width()) + " " +
                             std::to_string(mask.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + mask.pixels());
  for (float v : mask.data()) out.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
  return out;
}

void write_pgm(const std::filesystem::path& path, const SoftMask& mask) {
  const auto bytes = encode_pgm(mask);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

}  // namespace fssam

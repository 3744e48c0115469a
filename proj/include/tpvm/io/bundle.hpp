#pragma once

// TPVM bundle: atom frames, modulation weights and an optional spatial mask.
//
// Binary layout, little-endian:
//   "TPVM"                   4 bytes
//   version                  u32 (= 1)
//   width, height, M, K      u32 each
//   fusion mode              u8 (0 = sum, 1 = mean)
//   mask present             u8 (0 or 1)
//   X                        N*M float64, frame-major (frame 0's N pixels first)
//   W                        M*K float64, column-major (viewer 0's M weights first)
//   mask (if present)        N*M float64, frame-major
//
// The header is 26 bytes, so a 1x1, M=1, K=1 bundle without mask is 42 bytes.

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

#include "tpvm/error.hpp"
#include "tpvm/fusion.hpp"
#include "tpvm/image.hpp"
#include "tpvm/io/netpbm.hpp"
#include "tpvm/nmf.hpp"
#include "tpvm/spatial_mask.hpp"

namespace tpvm::io {

inline constexpr std::array<char, 4> kBundleMagic{'T', 'P', 'V', 'M'};
inline constexpr std::uint32_t kBundleVersion = 1;
inline constexpr std::size_t kBundleHeaderBytes = 4 + 4 * 5 + 1 + 1;

// Not part of the binary layout; carried in memory and in the UI export.
struct BundleMetadata {
  std::optional<std::uint64_t> seed;
  std::optional<SolverConfig> solver;
};

struct Bundle {
  std::size_t width = 0;
  std::size_t height = 0;
  FusionMode mode = FusionMode::sum;
  Eigen::MatrixXd atoms;    // N x M
  Eigen::MatrixXd weights;  // M x K
  std::optional<SpatialMask> mask;
  BundleMetadata metadata;

  [[nodiscard]] std::size_t pixels() const noexcept { return width * height; }
  [[nodiscard]] std::size_t frames() const noexcept { return static_cast<std::size_t>(atoms.cols()); }
  [[nodiscard]] std::size_t viewers() const noexcept { return static_cast<std::size_t>(weights.cols()); }

  [[nodiscard]] FrameSet frame_set() const { return FrameSet(width, height, atoms); }

  [[nodiscard]] WeightVector viewer_weights(std::size_t k) const {
    if (k >= viewers()) {
      throw DimensionError("viewer " + std::to_string(k) + " out of range (K=" + std::to_string(viewers()) + ")");
    }
    const auto col = weights.col(static_cast<Eigen::Index>(k));
    return WeightVector(std::vector<double>(col.data(), col.data() + col.size()));
  }

  // Bundle view of a factorization (pins and history are solver state, not payload).
  static Bundle from(const Factorization& f, FusionMode mode = FusionMode::sum) {
    Bundle b;
    b.width = f.width;
    b.height = f.height;
    b.mode = mode;
    b.atoms = f.atoms;
    b.weights = f.weights;
    b.metadata.seed = f.seed;
    return b;
  }

  // Dimension and [0,1] checks; throws on the first violation.
  void validate() const {
    if (width == 0 || height == 0) throw DimensionError("bundle dimensions must be positive");
    if (static_cast<std::size_t>(atoms.rows()) != pixels() || atoms.cols() < 1) {
      throw DimensionError("bundle frames must be N x M");
    }
    if (weights.rows() != atoms.cols() || weights.cols() < 1) throw DimensionError("bundle weights must be M x K");
    (void)frame_set();
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
      if (!tpvm::detail::in_unit_interval(weights.data()[i])) throw InvariantError("bundle weight outside [0,1]");
    }
    if (mask && (mask->width() != width || mask->height() != height || mask->frames() != frames())) {
      throw DimensionError("bundle mask does not match the atom frames");
    }
  }
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

inline void put_matrix(std::string& out, const Eigen::MatrixXd& m) {
  // Eigen storage is column-major, which is exactly frame-major for X and
  // viewer-major for W.
  for (Eigen::Index i = 0; i < m.size(); ++i) put_f64(out, m.data()[i]);
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw IoError(IoError::Kind::truncated_payload, "bundle: truncated (needed " + std::to_string(n) +
                                                          " more bytes at offset " + std::to_string(pos_) + ")");
    }
  }

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }

  Eigen::MatrixXd matrix(std::size_t rows, std::size_t cols) {
    std::size_t count = 0;
    if (__builtin_mul_overflow(rows, cols, &count) || count > remaining() / 8) {
      need(remaining() + 1);
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < count; ++i) m.data()[i] = f64();
    return m;
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  [[nodiscard]] std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string encode_bundle(const Bundle& b) {
  b.validate();
  std::string out;
  out.reserve(kBundleHeaderBytes + 8 * (b.atoms.size() + b.weights.size() + (b.mask ? b.mask->matrix().size() : 0)));
  out.append(kBundleMagic.data(), kBundleMagic.size());
  detail::put_u32(out, kBundleVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(b.width));
  detail::put_u32(out, static_cast<std::uint32_t>(b.height));
  detail::put_u32(out, static_cast<std::uint32_t>(b.frames()));
  detail::put_u32(out, static_cast<std::uint32_t>(b.viewers()));
  out.push_back(static_cast<char>(b.mode == FusionMode::sum ? 0 : 1));
  out.push_back(static_cast<char>(b.mask ? 1 : 0));
  detail::put_matrix(out, b.atoms);
  detail::put_matrix(out, b.weights);
  if (b.mask) detail::put_matrix(out, b.mask->matrix());
  return out;
}

inline Bundle decode_bundle(std::string_view bytes) {
  detail::ByteReader in(bytes);
  if (bytes.size() < kBundleMagic.size() ||
      std::memcmp(bytes.data(), kBundleMagic.data(), kBundleMagic.size()) != 0) {
    throw IoError(IoError::Kind::bad_magic, "bundle: bad magic (expected \"TPVM\")");
  }
  in.take(kBundleMagic.size());
  const std::uint32_t version = in.u32();
  if (version != kBundleVersion) {
    throw IoError(IoError::Kind::version_mismatch,
                  "bundle: version " + std::to_string(version) + " (expected " + std::to_string(kBundleVersion) + ")");
  }
  Bundle b;
  b.width = in.u32();
  b.height = in.u32();
  const std::size_t frames = in.u32();
  const std::size_t viewers = in.u32();
  const std::uint8_t mode = in.u8();
  const std::uint8_t has_mask = in.u8();
  if (b.width == 0 || b.height == 0 || frames == 0 || viewers == 0) {
    throw IoError(IoError::Kind::malformed_header, "bundle: zero dimension in header");
  }
  if (mode > 1 || has_mask > 1) throw IoError(IoError::Kind::malformed_header, "bundle: bad flag byte");
  b.mode = mode == 0 ? FusionMode::sum : FusionMode::mean;
  b.atoms = in.matrix(b.pixels(), frames);
  b.weights = in.matrix(frames, viewers);
  if (has_mask) b.mask.emplace(b.width, b.height, in.matrix(b.pixels(), frames));
  if (in.remaining() != 0) {
    throw IoError(IoError::Kind::malformed_header,
                  "bundle: " + std::to_string(in.remaining()) + " trailing bytes after payload");
  }
  b.validate();
  return b;
}

inline void write_bundle(const Bundle& b, const std::filesystem::path& path) {
  detail::write_file(path, encode_bundle(b));
}

inline Bundle read_bundle(const std::filesystem::path& path) { return decode_bundle(detail::read_file(path)); }

}  // namespace tpvm::io

#pragma once

// Binary netpbm codec: P5 (graymap) and P6 (pixmap), maxval 1..65535.
// Samples map linearly to [0,1] as v / maxval; writing quantizes with
// round(v * maxval). Two-byte samples are big-endian.

#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tpvm/error.hpp"
#include "tpvm/image.hpp"

namespace tpvm::io {

struct PnmImage {
  std::vector<Image> channels;  // 1 for P5, 3 (R, G, B) for P6
  unsigned maxval = 255;
};

namespace detail {

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  // Next whitespace-delimited token, skipping '#' comments.
  std::string_view token() {
    for (;;) {
      while (pos_ < bytes_.size() && std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
      if (pos_ < bytes_.size() && bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
        continue;
      }
      break;
    }
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_])) && bytes_[pos_] != '#') {
      ++pos_;
    }
    return bytes_.substr(start, pos_ - start);
  }

  unsigned long number(const char* what) {
    const std::string_view tok = token();
    if (tok.empty() || tok.size() > 9) {
      throw IoError(IoError::Kind::malformed_header, std::string("netpbm: missing or oversized ") + what);
    }
    unsigned long value = 0;
    for (char c : tok) {
      if (c < '0' || c > '9') {
        throw IoError(IoError::Kind::malformed_header,
                      std::string("netpbm: ") + what + " is not a number: '" + std::string(tok) + "'");
      }
      value = value * 10 + static_cast<unsigned long>(c - '0');
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw IoError(IoError::Kind::malformed_header, "netpbm: no whitespace after maxval");
    }
    return pos_ + 1;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoError::Kind::open_failed, "cannot open '" + path.string() + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(IoError::Kind::write_failed, "cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(IoError::Kind::write_failed, "write to '" + path.string() + "' failed");
}

inline unsigned quantize(double v, unsigned maxval) {
  return static_cast<unsigned>(std::lround(v * static_cast<double>(maxval)));
}

}  // namespace detail

inline PnmImage decode_pnm(std::string_view bytes) {
  detail::HeaderReader header(bytes);
  const std::string_view magic = header.token();
  if (magic != "P5" && magic != "P6") {
    throw IoError(IoError::Kind::unsupported_format,
                  "netpbm: unsupported format '" + std::string(magic.substr(0, 8)) + "' (expected P5 or P6)");
  }
  const std::size_t channels = magic == "P5" ? 1 : 3;
  const unsigned long width = header.number("width");
  const unsigned long height = header.number("height");
  const unsigned long maxval = header.number("maxval");
  if (width == 0 || height == 0) throw IoError(IoError::Kind::malformed_header, "netpbm: zero image dimension");
  if (maxval == 0 || maxval > 65535) {
    throw IoError(IoError::Kind::malformed_header, "netpbm: maxval " + std::to_string(maxval) + " out of range");
  }
  const std::size_t start = header.raster_start();
  const std::size_t sample_bytes = maxval < 256 ? 1 : 2;
  const std::size_t pixels = static_cast<std::size_t>(width) * height;
  const std::size_t needed = pixels * channels * sample_bytes;
  if (bytes.size() - start < needed) {
    throw IoError(IoError::Kind::truncated_payload, "netpbm: raster has " + std::to_string(bytes.size() - start) +
                                                        " bytes, expected " + std::to_string(needed));
  }

  std::vector<std::vector<double>> planes(channels, std::vector<double>(pixels));
  const auto* raster = reinterpret_cast<const unsigned char*>(bytes.data() + start);
  const double scale = static_cast<double>(maxval);
  for (std::size_t p = 0; p < pixels; ++p) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t i = (p * channels + c) * sample_bytes;
      unsigned v = raster[i];
      if (sample_bytes == 2) v = (v << 8) | raster[i + 1];
      if (v > maxval) {
        throw IoError(IoError::Kind::malformed_header, "netpbm: sample " + std::to_string(v) + " exceeds maxval");
      }
      planes[c][p] = static_cast<double>(v) / scale;
    }
  }

  PnmImage out;
  out.maxval = static_cast<unsigned>(maxval);
  for (auto& plane : planes) out.channels.emplace_back(width, height, std::move(plane));
  return out;
}

// One channel encodes as P5, three as P6.
inline std::string encode_pnm(const std::vector<Image>& channels, unsigned maxval = 255) {
  if (channels.size() != 1 && channels.size() != 3) {
    throw DimensionError("netpbm: need 1 or 3 channels, got " + std::to_string(channels.size()));
  }
  if (maxval == 0 || maxval > 65535) throw InvariantError("netpbm: maxval must be in 1..65535");
  for (const auto& c : channels) {
    if (!c.same_shape(channels.front())) throw DimensionError("netpbm: channels differ in size");
  }
  const Image& first = channels.front();
  std::ostringstream out;
  out << (channels.size() == 1 ? "P5" : "P6") << '\n' << first.width() << ' ' << first.height() << '\n' << maxval << '\n';
  std::string bytes = out.str();
  const std::size_t sample_bytes = maxval < 256 ? 1 : 2;
  bytes.reserve(bytes.size() + first.size() * channels.size() * sample_bytes);
  for (std::size_t p = 0; p < first.size(); ++p) {
    for (const auto& c : channels) {
      const unsigned v = detail::quantize(c[p], maxval);
      if (sample_bytes == 2) bytes.push_back(static_cast<char>((v >> 8) & 0xFF));
      bytes.push_back(static_cast<char>(v & 0xFF));
    }
  }
  return bytes;
}

inline PnmImage read_pnm(const std::filesystem::path& path) { return decode_pnm(detail::read_file(path)); }

// Grayscale read. Pixmaps are rejected here; use read_pnm for channels.
inline Image read_image(const std::filesystem::path& path) {
  PnmImage img = read_pnm(path);
  if (img.channels.size() != 1) {
    throw IoError(IoError::Kind::unsupported_format,
                  "'" + path.string() + "' is a color pixmap; process its channels separately");
  }
  return std::move(img.channels.front());
}

inline void write_image(const Image& image, const std::filesystem::path& path, unsigned maxval = 255) {
  detail::write_file(path, encode_pnm({image}, maxval));
}

inline void write_channels(const std::vector<Image>& channels, const std::filesystem::path& path,
                           unsigned maxval = 255) {
  detail::write_file(path, encode_pnm(channels, maxval));
}

}  // namespace tpvm::io

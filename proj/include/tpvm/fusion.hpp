#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tpvm/error.hpp"
#include "tpvm/image.hpp"
#include "tpvm/spatial_mask.hpp"

namespace tpvm {

// How the visual system combines the weighted atom frames of one cycle.
// `sum` is Y = XW as written; `mean` divides by M (time-averaged luminance).
enum class FusionMode : std::uint8_t { sum = 0, mean = 1 };

inline std::string_view to_string(FusionMode mode) noexcept { return mode == FusionMode::sum ? "sum" : "mean"; }

inline FusionMode fusion_mode_from_string(std::string_view s) {
  if (s == "sum") return FusionMode::sum;
  if (s == "mean") return FusionMode::mean;
  throw InvariantError("unknown fusion mode '" + std::string(s) + "'");
}

// A perceived image plus the clamping that was needed to keep it in [0,1].
struct FusedImage {
  Image image;
  bool overflow = false;             // some pre-clamp value exceeded 1
  std::size_t overflow_pixels = 0;   // how many
};

// Pre-clamp fused intensities. Per pixel the frames are accumulated in order
// m = 0..M-1 starting from 0.0, so selecting a single frame with weight 1
// reproduces it bit-exactly.
inline std::vector<double> fuse_unclamped(const FrameSet& frames, const WeightVector& w,
                                          FusionMode mode = FusionMode::sum) {
  if (w.size() != frames.count()) {
    throw DimensionError("weight vector has " + std::to_string(w.size()) + " entries but there are " +
                         std::to_string(frames.count()) + " atom frames");
  }
  const auto& x = frames.matrix();
  std::vector<double> acc(frames.pixels(), 0.0);
  for (std::size_t m = 0; m < frames.count(); ++m) {
    const double wm = w[m];
    const auto col = x.col(static_cast<Eigen::Index>(m));
    for (std::size_t n = 0; n < acc.size(); ++n) {
      acc[n] += wm * col(static_cast<Eigen::Index>(n));
    }
  }
  if (mode == FusionMode::mean) {
    const auto count = static_cast<double>(frames.count());
    for (double& v : acc) v /= count;
  }
  return acc;
}

inline std::vector<double> fuse_unclamped(const FrameSet& frames, const SpatialMask& mask,
                                          FusionMode mode = FusionMode::sum) {
  if (mask.frames() != frames.count() || mask.width() != frames.width() || mask.height() != frames.height()) {
    throw DimensionError("mask is " + std::to_string(mask.width()) + "x" + std::to_string(mask.height()) + "x" +
                         std::to_string(mask.frames()) + " but atom frames are " + std::to_string(frames.width()) +
                         "x" + std::to_string(frames.height()) + "x" + std::to_string(frames.count()));
  }
  const auto& x = frames.matrix();
  const auto& wm = mask.matrix();
  std::vector<double> acc(frames.pixels(), 0.0);
  for (std::size_t m = 0; m < frames.count(); ++m) {
    const auto xcol = x.col(static_cast<Eigen::Index>(m));
    const auto wcol = wm.col(static_cast<Eigen::Index>(m));
    for (std::size_t n = 0; n < acc.size(); ++n) {
      const auto i = static_cast<Eigen::Index>(n);
      acc[n] += wcol(i) * xcol(i);
    }
  }
  if (mode == FusionMode::mean) {
    const auto count = static_cast<double>(frames.count());
    for (double& v : acc) v /= count;
  }
  return acc;
}

inline FusedImage clamp_fused(std::size_t width, std::size_t height, std::vector<double> values) {
  std::size_t over = 0;
  for (double& v : values) {
    if (v > 1.0) {
      ++over;
      v = 1.0;
    } else if (v < 0.0) {
      v = 0.0;
    }
  }
  return FusedImage{Image(width, height, std::move(values)), over > 0, over};
}

// What a viewer whose device applies weights `w` perceives.
inline FusedImage perceive(const FrameSet& frames, const WeightVector& w, FusionMode mode = FusionMode::sum) {
  return clamp_fused(frames.width(), frames.height(), fuse_unclamped(frames, w, mode));
}

// Unaided view: every frame fused with weight 1.
inline FusedImage normal_view(const FrameSet& frames, FusionMode mode = FusionMode::sum) {
  return perceive(frames, WeightVector::ones(frames.count()), mode);
}

// Fusion with weights that vary across the device surface.
inline FusedImage perceive_spatial(const FrameSet& frames, const SpatialMask& mask,
                                   FusionMode mode = FusionMode::sum) {
  return clamp_fused(frames.width(), frames.height(), fuse_unclamped(frames, mask, mode));
}

}  // namespace tpvm

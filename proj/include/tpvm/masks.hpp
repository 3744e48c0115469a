#pragma once

// Spatial modulation masks: per-pixel weight vectors on the viewing device.
// Pixel (x, y) has its center at integer coordinates (x, y); region tests use
// closed inequalities on those centers.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tpvm/error.hpp"
#include "tpvm/image.hpp"
#include "tpvm/spatial_mask.hpp"

namespace tpvm {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Axis-aligned rectangle [x0, x1] x [y0, y1], closed.
struct RectRegion {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  [[nodiscard]] bool contains(double x, double y) const noexcept { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

// Closed disk.
struct DiskRegion {
  Point center;
  double radius = 0.0;

  [[nodiscard]] bool contains(double x, double y) const noexcept {
    const double dx = x - center.x;
    const double dy = y - center.y;
    return dx * dx + dy * dy <= radius * radius;
  }
};

using Region = std::variant<RectRegion, DiskRegion>;

inline bool region_contains(const Region& region, double x, double y) {
  return std::visit([&](const auto& r) { return r.contains(x, y); }, region);
}

// Inner/outer partition: pixels whose center lies in `region` get w_inner,
// all others w_outer.
inline SpatialMask make_region_mask(std::size_t width, std::size_t height, const Region& region,
                                    const WeightVector& w_inner, const WeightVector& w_outer) {
  if (w_inner.size() != w_outer.size()) {
    throw DimensionError("inner and outer weight vectors differ in length (" + std::to_string(w_inner.size()) +
                         " vs " + std::to_string(w_outer.size()) + ")");
  }
  if (const auto* r = std::get_if<RectRegion>(&region); r && (r->x0 > r->x1 || r->y0 > r->y1)) {
    throw InvariantError("rectangle corners are not ordered");
  }
  if (const auto* d = std::get_if<DiskRegion>(&region); d && !(d->radius >= 0.0)) {
    throw InvariantError("disk radius must be non-negative");
  }
  const auto frames = static_cast<Eigen::Index>(w_inner.size());
  Eigen::MatrixXd weights(static_cast<Eigen::Index>(width * height), frames);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const auto& w = region_contains(region, static_cast<double>(x), static_cast<double>(y)) ? w_inner : w_outer;
      const auto row = static_cast<Eigen::Index>(y * width + x);
      for (Eigen::Index m = 0; m < frames; ++m) weights(row, m) = w[static_cast<std::size_t>(m)];
    }
  }
  return SpatialMask(width, height, std::move(weights));
}

enum class RingOrder : std::uint8_t {
  identity,  // ring j shows slice j: the center shows slice 1
  reversed,  // ring j shows slice M+1-j: the center shows the deepest slice
};

// Index (0-based) of the ring a distance falls into: the smallest j with
// d <= profile[j], or the last ring beyond the outermost threshold.
inline std::size_t ring_index(double distance, const std::vector<double>& profile) {
  for (std::size_t j = 0; j < profile.size(); ++j) {
    if (distance <= profile[j]) return j;
  }
  return profile.size() - 1;
}

// Funnel "dig-in" view through M stacked slices: concentric rings around
// `center`, each selecting exactly one slice.
inline SpatialMask make_concentric_mask(std::size_t width, std::size_t height, Point center, std::size_t frames,
                                        const std::vector<double>& profile, RingOrder order = RingOrder::identity) {
  if (frames == 0) throw InvariantError("need at least one slice");
  if (profile.size() != frames) {
    throw DimensionError("profile has " + std::to_string(profile.size()) + " radii, expected " +
                         std::to_string(frames));
  }
  for (std::size_t j = 0; j < profile.size(); ++j) {
    if (!std::isfinite(profile[j]) || (j > 0 && !(profile[j] > profile[j - 1]))) {
      throw InvariantError("ring radii must be finite and strictly ascending");
    }
  }
  Eigen::MatrixXd weights =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(width * height), static_cast<Eigen::Index>(frames));
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double d = std::hypot(static_cast<double>(x) - center.x, static_cast<double>(y) - center.y);
      std::size_t slice = ring_index(d, profile);
      if (order == RingOrder::reversed) slice = frames - 1 - slice;
      weights(static_cast<Eigen::Index>(y * width + x), static_cast<Eigen::Index>(slice)) = 1.0;
    }
  }
  return SpatialMask(width, height, std::move(weights));
}

// Same per-frame opacity at every pixel; alpha blending of registered layers.
inline SpatialMask alpha_blend_mask(std::size_t width, std::size_t height, const std::vector<double>& alphas) {
  for (double a : alphas) {
    if (!detail::in_unit_interval(a)) {
      throw InvariantError("alpha " + std::to_string(a) + " is outside [0,1]");
    }
  }
  return SpatialMask::uniform(width, height, WeightVector(alphas));
}

}  // namespace tpvm

#pragma once

// Normal-view / shale-view bifurcation with M = 2 atom frames:
//
//     (y0, y1) = (x1, x2) [[1, w1], [1, w2]]
//
// y0 is what unaided eyes see (both frames at full weight), y1 what a viewer
// with modulating glasses sees.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tpvm/error.hpp"
#include "tpvm/fusion.hpp"
#include "tpvm/image.hpp"
#include "tpvm/nmf.hpp"
#include "tpvm/random.hpp"

namespace tpvm {

// Pearson correlation of two pixel vectors; 0 when either one is constant.
inline double leakage_correlation(const Image& normal, const Image& secret) {
  if (!normal.same_shape(secret)) throw DimensionError("leakage: images differ in size");
  if (normal.size() < 2) throw DimensionError("leakage: need at least two pixels");
  const auto constant = [](const Image& img) {
    const auto px = img.pixels();
    return std::all_of(px.begin(), px.end(), [&](double v) { return v == px.front(); });
  };
  if (constant(normal) || constant(secret)) return 0.0;
  const auto n = static_cast<double>(normal.size());
  double mean_a = 0.0;
  double mean_b = 0.0;
  for (std::size_t i = 0; i < normal.size(); ++i) {
    mean_a += normal[i];
    mean_b += secret[i];
  }
  mean_a /= n;
  mean_b /= n;
  double saa = 0.0;
  double sbb = 0.0;
  double sab = 0.0;
  for (std::size_t i = 0; i < normal.size(); ++i) {
    const double a = normal[i] - mean_a;
    const double b = secret[i] - mean_b;
    saa += a * a;
    sbb += b * b;
    sab += a * b;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) return 0.0;
  const double r = sab / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

namespace detail {

// Single-pixel designs have no defined correlation; report 0 for them.
inline double leakage_or_zero(const Image& normal, const Image& secret) {
  return normal.size() < 2 ? 0.0 : leakage_correlation(normal, secret);
}

}  // namespace detail

struct BifurcationResult {
  Factorization factorization;      // M = 2; column 0 of W is the normal view
  Image normal_view_image;          // y0
  Image shale_view_image;           // what the modulated viewer sees
  double leakage = 0.0;             // correlation of normal view with the secret
  std::size_t feasibility_report = 0;  // pixels clamped while constructing the views
  std::vector<double> view_residuals;  // ||y_k - X w_k|| per view, when targets were given
};

// Covert display of `secret`: x1 = secret, x2 = n - secret with noise n drawn
// per pixel in [secret, 1], so x2 stays inside the display range without any
// clamping. The normal view is the noise image; glasses with weights (1, 0)
// see the secret.
inline BifurcationResult design_covert_noise(const Image& secret, std::uint64_t seed) {
  const std::size_t n = secret.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 2);
  UnitRng rng(seed);
  for (std::size_t p = 0; p < n; ++p) {
    const double y = secret[p];
    double d = rng.closed() * (1.0 - y);
    // Keep y + d <= 1 under rounding; the noise pixel is y + d as computed.
    while (y + d > 1.0) d = std::nextafter(d, 0.0);
    x(static_cast<Eigen::Index>(p), 0) = y;
    x(static_cast<Eigen::Index>(p), 1) = d;
  }

  Factorization f;
  f.width = secret.width();
  f.height = secret.height();
  f.atoms = std::move(x);
  f.weights.resize(2, 2);
  f.weights << 1.0, 1.0,
               1.0, 0.0;
  f.pin_mask = PinMask::Constant(2, 2, true);
  f.seed = seed;
  f.status = SolverStatus::converged;

  const FrameSet frames = f.frame_set();
  FusedImage normal = perceive(frames, f.viewer_weights(0), FusionMode::sum);
  FusedImage shale = perceive(frames, f.viewer_weights(1), FusionMode::sum);
  const double leak = detail::leakage_or_zero(normal.image, secret);
  const std::size_t clamped = normal.overflow_pixels + shale.overflow_pixels;
  return BifurcationResult{std::move(f), std::move(normal.image), std::move(shale.image), leak, clamped, {}};
}

struct DualViewOptions {
  bool pin_shale_weights = true;  // shale column fixed at (1, 0); otherwise optimized
  FusionMode mode = FusionMode::sum;
};

// Two-view design: unaided viewers see `default_view`, modulated viewers see
// `shale_view` (e.g. the default view plus annotations). Solves the M = 2
// factorization with the normal-view column of W pinned to (1, 1).
inline BifurcationResult design_dual_view(const Image& default_view, const Image& shale_view,
                                          const SolverConfig& cfg, const DualViewOptions& options = {}) {
  if (!default_view.same_shape(shale_view)) throw DimensionError("default and shale views differ in size");
  const TargetSet targets({default_view, shale_view});
  PinSpec pins(2, 2);
  pins.pin_normal_view(0);
  if (options.pin_shale_weights) pins.pin_column(1, WeightVector{1.0, 0.0});

  Factorization f = factorize(targets, 2, pins, cfg);

  const FrameSet frames = f.frame_set();
  FusedImage normal = perceive(frames, f.viewer_weights(0), options.mode);
  FusedImage shale = perceive(frames, f.viewer_weights(1), options.mode);
  const Eigen::MatrixXd residual = targets.matrix() - f.atoms * f.weights;
  std::vector<double> residuals{residual.col(0).norm(), residual.col(1).norm()};
  const double leak = detail::leakage_or_zero(normal.image, shale_view);
  const std::size_t clamped = normal.overflow_pixels + shale.overflow_pixels;
  return BifurcationResult{std::move(f),  std::move(normal.image), std::move(shale.image),
                           leak,          clamped,                 std::move(residuals)};
}

}  // namespace tpvm

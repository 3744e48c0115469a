#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "tpvm/error.hpp"
#include "tpvm/fusion.hpp"
#include "tpvm/image.hpp"
#include "tpvm/nmf.hpp"

namespace tpvm {

inline double rmse(const Image& reference, const Image& test) {
  if (!reference.same_shape(test)) throw DimensionError("rmse: images differ in size");
  double acc = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = reference[i] - test[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(reference.size()));
}

// Peak signal 1.0; +infinity for a perfect match.
inline double psnr_from_rmse(double rmse_value) {
  if (rmse_value <= 0.0) return std::numeric_limits<double>::infinity();
  return -20.0 * std::log10(rmse_value);
}

struct QualityReport {
  std::vector<double> per_target_rmse;
  std::vector<double> per_target_psnr_db;
  double frobenius_total = 0.0;
  std::vector<std::size_t> overflow_pixel_counts;
};

// Compares each target with what its viewer actually perceives (clamped
// fusion under `mode`). frobenius_total is the solver objective ||Y - XW||_F.
inline QualityReport quality_report(const TargetSet& targets, const Factorization& f,
                                    FusionMode mode = FusionMode::sum) {
  if (targets.pixels() != f.pixels() || targets.count() != f.viewers() || targets.width() != f.width ||
      targets.height() != f.height) {
    throw DimensionError("targets are " + std::to_string(targets.width()) + "x" + std::to_string(targets.height()) +
                         " with K=" + std::to_string(targets.count()) + " but the factorization is " +
                         std::to_string(f.width) + "x" + std::to_string(f.height) + " with K=" +
                         std::to_string(f.viewers()));
  }
  const FrameSet frames = f.frame_set();
  QualityReport report;
  for (std::size_t k = 0; k < targets.count(); ++k) {
    const FusedImage seen = perceive(frames, f.viewer_weights(k), mode);
    const double e = rmse(targets[k], seen.image);
    report.per_target_rmse.push_back(e);
    report.per_target_psnr_db.push_back(psnr_from_rmse(e));
    report.overflow_pixel_counts.push_back(seen.overflow_pixels);
  }
  report.frobenius_total = objective(targets, f);
  return report;
}

struct BandwidthReport {
  double weights_rate = 0.0;  // modulation weights sent per second
  double pixel_rate = 0.0;    // pixels redrawn per second with per-viewer rendering
  double ratio = 0.0;         // weights_rate / pixel_rate = M / N
};

inline BandwidthReport bandwidth_report(std::size_t pixels, std::size_t frames, std::size_t viewers,
                                        double views_per_second) {
  if (pixels == 0 || frames == 0 || viewers == 0 || !(views_per_second > 0.0)) {
    throw InvariantError("bandwidth inputs must all be positive");
  }
  const double per_second = static_cast<double>(viewers) * views_per_second;
  return BandwidthReport{static_cast<double>(frames) * per_second, static_cast<double>(pixels) * per_second,
                         static_cast<double>(frames) / static_cast<double>(pixels)};
}

}  // namespace tpvm

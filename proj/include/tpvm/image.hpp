#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tpvm/error.hpp"

namespace tpvm {

namespace detail {

inline bool in_unit_interval(double v) noexcept { return v >= 0.0 && v <= 1.0; }

inline void require_unit_interval(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!in_unit_interval(values[i])) {
      throw InvariantError(std::string(what) + " entry " + std::to_string(i) + " = " +
                           std::to_string(values[i]) + " is outside [0,1]");
    }
  }
}

}  // namespace detail

// Display refresh rate f_d, critical flicker-fusion rate f_v, and the number of
// atom frames fused into one percept, M = f_d / f_v (an exact positive integer).
class DisplayConfig {
 public:
  DisplayConfig(double refresh_rate_hz, double flicker_fusion_hz)
      : refresh_rate_hz_(refresh_rate_hz), flicker_fusion_hz_(flicker_fusion_hz) {
    if (!(refresh_rate_hz > 0.0) || !(flicker_fusion_hz > 0.0) || !std::isfinite(refresh_rate_hz) ||
        !std::isfinite(flicker_fusion_hz)) {
      throw InvariantError("display rates must be positive and finite");
    }
    const double ratio = refresh_rate_hz / flicker_fusion_hz;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || rounded * flicker_fusion_hz != refresh_rate_hz) {
      throw InvariantError("refresh rate " + std::to_string(refresh_rate_hz) +
                           " Hz is not a positive integer multiple of the fusion rate " +
                           std::to_string(flicker_fusion_hz) + " Hz");
    }
    frames_per_cycle_ = static_cast<std::size_t>(rounded);
  }

  [[nodiscard]] double refresh_rate_hz() const noexcept { return refresh_rate_hz_; }
  [[nodiscard]] double flicker_fusion_hz() const noexcept { return flicker_fusion_hz_; }
  [[nodiscard]] std::size_t frames_per_cycle() const noexcept { return frames_per_cycle_; }
  // Duration one atom frame stays on screen.
  [[nodiscard]] double frame_duration_s() const noexcept { return 1.0 / refresh_rate_hz_; }

 private:
  double refresh_rate_hz_;
  double flicker_fusion_hz_;
  std::size_t frames_per_cycle_ = 1;
};

// Grayscale image, row-major, intensities in [0,1].
class Image {
 public:
  Image(std::size_t width, std::size_t height, std::vector<double> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width == 0 || height == 0) {
      throw DimensionError("image dimensions must be positive");
    }
    if (data_.size() != width * height) {
      throw DimensionError("image data holds " + std::to_string(data_.size()) + " values, expected " +
                           std::to_string(width * height));
    }
    detail::require_unit_interval(data_, "image");
  }

  // Constant-valued image.
  static Image filled(std::size_t width, std::size_t height, double value) {
    return Image(width, height, std::vector<double>(width * height, value));
  }

  [[nodiscard]] std::size_t width() const noexcept { return width_; }
  [[nodiscard]] std::size_t height() const noexcept { return height_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] std::span<const double> pixels() const noexcept { return data_; }
  [[nodiscard]] double operator[](std::size_t i) const { return data_[i]; }
  [[nodiscard]] double at(std::size_t x, std::size_t y) const { return data_.at(y * width_ + x); }

  [[nodiscard]] bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  [[nodiscard]] Eigen::VectorXd as_vector() const {
    return Eigen::Map<const Eigen::VectorXd>(data_.data(), static_cast<Eigen::Index>(data_.size()));
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<double> data_;
};

// Per-viewer modulation weights, one per atom frame, each in [0,1].
class WeightVector {
 public:
  explicit WeightVector(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) {
      throw DimensionError("weight vector must not be empty");
    }
    detail::require_unit_interval(weights_, "weight");
  }
  WeightVector(std::initializer_list<double> weights) : WeightVector(std::vector<double>(weights)) {}

  static WeightVector ones(std::size_t frames) { return WeightVector(std::vector<double>(frames, 1.0)); }
  static WeightVector zeros(std::size_t frames) { return WeightVector(std::vector<double>(frames, 0.0)); }
  static WeightVector one_hot(std::size_t frames, std::size_t index) {
    std::vector<double> w(frames, 0.0);
    w.at(index) = 1.0;
    return WeightVector(std::move(w));
  }

  [[nodiscard]] std::size_t size() const noexcept { return weights_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return weights_[i]; }
  [[nodiscard]] std::span<const double> values() const noexcept { return weights_; }

  friend bool operator==(const WeightVector&, const WeightVector&) = default;

 private:
  std::vector<double> weights_;
};

// K same-sized target images, the columns of Y.
class TargetSet {
 public:
  explicit TargetSet(std::vector<Image> images) : images_(std::move(images)) {
    if (images_.empty()) {
      throw DimensionError("target set needs at least one image");
    }
    for (const auto& img : images_) {
      if (!img.same_shape(images_.front())) {
        throw DimensionError("target images differ in size");
      }
    }
  }

  [[nodiscard]] std::size_t count() const noexcept { return images_.size(); }
  [[nodiscard]] std::size_t width() const noexcept { return images_.front().width(); }
  [[nodiscard]] std::size_t height() const noexcept { return images_.front().height(); }
  [[nodiscard]] std::size_t pixels() const noexcept { return images_.front().size(); }
  [[nodiscard]] const Image& operator[](std::size_t k) const { return images_[k]; }
  [[nodiscard]] const std::vector<Image>& images() const noexcept { return images_; }

  // N x K matrix with one target per column.
  [[nodiscard]] Eigen::MatrixXd matrix() const {
    Eigen::MatrixXd y(static_cast<Eigen::Index>(pixels()), static_cast<Eigen::Index>(count()));
    for (std::size_t k = 0; k < count(); ++k) {
      y.col(static_cast<Eigen::Index>(k)) = images_[k].as_vector();
    }
    return y;
  }

 private:
  std::vector<Image> images_;
};

// M atom frames of a common size, stored as the N x M matrix X.
class FrameSet {
 public:
  FrameSet(std::size_t width, std::size_t height, Eigen::MatrixXd columns)
      : width_(width), height_(height), columns_(std::move(columns)) {
    if (width == 0 || height == 0) {
      throw DimensionError("frame dimensions must be positive");
    }
    if (static_cast<std::size_t>(columns_.rows()) != width * height || columns_.cols() < 1) {
      throw DimensionError("frame matrix must be N x M with N = width*height and M >= 1");
    }
    detail::require_unit_interval(std::span<const double>(columns_.data(), columns_.size()), "atom frame");
  }

  explicit FrameSet(const std::vector<Image>& frames) : FrameSet(stack(frames)) {}

  [[nodiscard]] std::size_t width() const noexcept { return width_; }
  [[nodiscard]] std::size_t height() const noexcept { return height_; }
  [[nodiscard]] std::size_t pixels() const noexcept { return width_ * height_; }
  [[nodiscard]] std::size_t count() const noexcept { return static_cast<std::size_t>(columns_.cols()); }
  [[nodiscard]] const Eigen::MatrixXd& matrix() const noexcept { return columns_; }

  [[nodiscard]] Image frame(std::size_t m) const {
    const auto col = columns_.col(static_cast<Eigen::Index>(m));
    return Image(width_, height_, std::vector<double>(col.data(), col.data() + col.size()));
  }

  friend bool operator==(const FrameSet& a, const FrameSet& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.columns_.rows() == b.columns_.rows() &&
           a.columns_.cols() == b.columns_.cols() && a.columns_ == b.columns_;
  }

 private:
  static FrameSet stack(const std::vector<Image>& frames) {
    if (frames.empty()) {
      throw DimensionError("need at least one atom frame");
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(frames.front().size()), static_cast<Eigen::Index>(frames.size()));
    for (std::size_t m = 0; m < frames.size(); ++m) {
      if (!frames[m].same_shape(frames.front())) {
        throw DimensionError("atom frames differ in size");
      }
      x.col(static_cast<Eigen::Index>(m)) = frames[m].as_vector();
    }
    return FrameSet(frames.front().width(), frames.front().height(), std::move(x));
  }

  std::size_t width_;
  std::size_t height_;
  Eigen::MatrixXd columns_;
};

}  // namespace tpvm

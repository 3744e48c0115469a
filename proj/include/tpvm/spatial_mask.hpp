#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tpvm/error.hpp"
#include "tpvm/image.hpp"

namespace tpvm {

// Per-pixel weight vectors across the surface of a viewing device: an N x M
// matrix whose row n holds the M frame weights applied at pixel n.
class SpatialMask {
 public:
  SpatialMask(std::size_t width, std::size_t height, Eigen::MatrixXd weights)
      : width_(width), height_(height), weights_(std::move(weights)) {
    if (width == 0 || height == 0) {
      throw DimensionError("mask dimensions must be positive");
    }
    if (static_cast<std::size_t>(weights_.rows()) != width * height || weights_.cols() < 1) {
      throw DimensionError("mask must be N x M with N = width*height and M >= 1");
    }
    detail::require_unit_interval(std::span<const double>(weights_.data(), weights_.size()), "mask");
  }

  // Same weight vector at every pixel.
  static SpatialMask uniform(std::size_t width, std::size_t height, const WeightVector& w) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(width * height), static_cast<Eigen::Index>(w.size()));
    for (std::size_t j = 0; j < w.size(); ++j) {
      m.col(static_cast<Eigen::Index>(j)).setConstant(w[j]);
    }
    return SpatialMask(width, height, std::move(m));
  }

  [[nodiscard]] std::size_t width() const noexcept { return width_; }
  [[nodiscard]] std::size_t height() const noexcept { return height_; }
  [[nodiscard]] std::size_t pixels() const noexcept { return width_ * height_; }
  [[nodiscard]] std::size_t frames() const noexcept { return static_cast<std::size_t>(weights_.cols()); }
  [[nodiscard]] const Eigen::MatrixXd& matrix() const noexcept { return weights_; }
  [[nodiscard]] double weight(std::size_t pixel, std::size_t frame) const {
    return weights_(static_cast<Eigen::Index>(pixel), static_cast<Eigen::Index>(frame));
  }

  [[nodiscard]] WeightVector at(std::size_t x, std::size_t y) const {
    const auto row = weights_.row(static_cast<Eigen::Index>(y * width_ + x));
    std::vector<double> w(static_cast<std::size_t>(row.size()));
    for (Eigen::Index j = 0; j < row.size(); ++j) w[static_cast<std::size_t>(j)] = row(j);
    return WeightVector(std::move(w));
  }

  friend bool operator==(const SpatialMask& a, const SpatialMask& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.weights_.rows() == b.weights_.rows() &&
           a.weights_.cols() == b.weights_.cols() && a.weights_ == b.weights_;
  }

 private:
  std::size_t width_;
  std::size_t height_;
  Eigen::MatrixXd weights_;
};

}  // namespace tpvm

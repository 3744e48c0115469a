// Three synthetic depth slices composited through a concentric mask: each
// ring around the center shows a different slice.
//
//   funnel_demo [outdir]

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "tpvm.hpp"

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : ".";
  std::filesystem::create_directories(dir);

  const std::size_t w = 128, h = 128, slices = 3;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(w * h), static_cast<Eigen::Index>(slices));
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t px = 0; px < w; ++px) {
      const auto n = static_cast<Eigen::Index>(y * w + px);
      const double u = static_cast<double>(px) / (w - 1);
      const double v = static_cast<double>(y) / (h - 1);
      x(n, 0) = 0.5 + 0.5 * std::sin(12.0 * u) * std::sin(12.0 * v);  // skin
      x(n, 1) = ((px / 16 + y / 16) % 2) ? 0.8 : 0.2;                   // muscle
      x(n, 2) = std::exp(-30.0 * ((u - 0.5) * (u - 0.5) + (v - 0.5) * (v - 0.5)));  // bone
    }
  }
  const tpvm::FrameSet frames(w, h, x);

  const tpvm::SpatialMask mask =
      tpvm::make_concentric_mask(w, h, {63.5, 63.5}, slices, {20.0, 40.0, 60.0}, tpvm::RingOrder::reversed);
  const tpvm::FusedImage funnel = tpvm::perceive_spatial(frames, mask);
  const tpvm::FusedImage blend = tpvm::perceive(frames, tpvm::WeightVector{0.2, 0.3, 0.5});

  tpvm::io::write_image(funnel.image, dir / "funnel.pgm");
  tpvm::io::write_image(blend.image, dir / "alpha_blend.pgm");
  tpvm::io::Bundle b;
  b.width = w;
  b.height = h;
  b.atoms = x;
  b.weights = Eigen::MatrixXd::Identity(slices, slices);
  b.mask = mask;
  tpvm::io::write_bundle(b, dir / "funnel.tpvm");

  std::printf("funnel view: %zu clamped pixels\n", funnel.overflow_pixels);
  std::printf("wrote %s\n", dir.string().c_str());
  return 0;
}

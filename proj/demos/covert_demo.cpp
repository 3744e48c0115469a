// Hides a synthetic secret (a bright ring on a dark ramp) behind noise and
// writes what each audience sees.
//
//   covert_demo [outdir]

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "tpvm.hpp"

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : ".";
  std::filesystem::create_directories(dir);

  const std::size_t w = 96, h = 64;
  std::vector<double> px(w * h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double r = std::hypot(static_cast<double>(x) - 48.0, static_cast<double>(y) - 32.0);
      px[y * w + x] = std::abs(r - 20.0) < 4.0 ? 0.9 : 0.3 * static_cast<double>(x) / (w - 1);
    }
  }
  const tpvm::Image secret(w, h, px);

  const tpvm::BifurcationResult r = tpvm::design_covert_noise(secret, 2024);
  const tpvm::FrameSet frames = r.factorization.frame_set();

  tpvm::io::write_image(secret, dir / "secret.pgm");
  tpvm::io::write_image(r.normal_view_image, dir / "normal_view.pgm");
  tpvm::io::write_image(tpvm::perceive(frames, tpvm::WeightVector{1.0, 0.0}).image, dir / "shale_view.pgm");
  tpvm::io::write_bundle(tpvm::io::Bundle::from(r.factorization), dir / "covert.tpvm");

  std::printf("leakage (normal view vs secret): %+.4f\n", r.leakage);
  std::printf("clamped pixels: %zu\n", r.feasibility_report);
  std::printf("wrote %s\n", dir.string().c_str());
  return 0;
}

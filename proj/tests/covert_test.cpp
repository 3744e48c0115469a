#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "oracles.hpp"
#include "tpvm/covert.hpp"
#include "tpvm/fusion.hpp"

using namespace tpvm;

namespace {

Image random_image(std::size_t w, std::size_t h, UnitRng& rng) {
  std::vector<double> px(w * h);
  for (double& v : px) v = rng.closed();
  return Image(w, h, std::move(px));
}

bool bit_equal(const Image& a, const Image& b) {
  if (!a.same_shape(b)) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

}  // namespace

TEST(CovertNoise, WeightMatrixSelectsFirstFrameForShaleView) {
  UnitRng rng(1);
  const BifurcationResult r = design_covert_noise(random_image(4, 4, rng), 9);
  Eigen::Matrix2d expected;
  expected << 1.0, 1.0, 1.0, 0.0;
  EXPECT_EQ(r.factorization.weights, Eigen::MatrixXd(expected));
}

// Seed 3 on a single 0.4 pixel draws noise 0.73525959377390748 (obtained by
// running the generator once); the rest is forced: x2 = n - 0.4.
TEST(CovertNoise, SinglePixelSeededDraw) {
  const BifurcationResult r = design_covert_noise(Image(1, 1, {0.4}), 3);
  EXPECT_DOUBLE_EQ(r.normal_view_image[0], 0.73525959377390748);
  EXPECT_NEAR(r.factorization.atoms(0, 1), 0.73525959377390748 - 0.4, 1e-15);
  EXPECT_EQ(r.factorization.atoms(0, 0), 0.4);
  EXPECT_EQ(r.shale_view_image[0], 0.4);
  EXPECT_EQ(r.feasibility_report, 0u);
}

TEST(CovertNoise, SaturatedSecretCannotBeHidden) {
  const Image ones = Image::filled(3, 2, 1.0);
  const BifurcationResult r = design_covert_noise(ones, 5);
  EXPECT_TRUE((r.factorization.atoms.col(1).array() == 0.0).all());
  EXPECT_EQ(r.normal_view_image, ones);
  EXPECT_EQ(r.feasibility_report, 0u);
}

TEST(CovertNoise, ExactViewsAndFeasibilityForManySeeds) {
  UnitRng rng(2);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Image secret = random_image(7, 5, rng);
    const BifurcationResult r = design_covert_noise(secret, seed);
    const FrameSet frames = r.factorization.frame_set();
    EXPECT_TRUE(bit_equal(perceive(frames, WeightVector{1.0, 0.0}).image, secret));
    EXPECT_TRUE(bit_equal(r.shale_view_image, secret));

    const std::vector<double> raw = fuse_unclamped(frames, WeightVector{1.0, 1.0});
    for (std::size_t p = 0; p < secret.size(); ++p) {
      EXPECT_EQ(std::bit_cast<std::uint64_t>(raw[p]), std::bit_cast<std::uint64_t>(r.normal_view_image[p]));
      EXPECT_GE(r.normal_view_image[p], secret[p]);
      EXPECT_LE(r.normal_view_image[p], 1.0);
    }
    EXPECT_TRUE(r.factorization.feasible());
    EXPECT_EQ(r.feasibility_report, 0u);
    EXPECT_GE(r.leakage, -1.0);
    EXPECT_LE(r.leakage, 1.0);
  }
}

TEST(CovertNoise, DifferentSeedsGiveDifferentNoise) {
  UnitRng rng(3);
  const Image secret = random_image(6, 6, rng);
  EXPECT_FALSE(design_covert_noise(secret, 1).normal_view_image == design_covert_noise(secret, 2).normal_view_image);
  EXPECT_EQ(design_covert_noise(secret, 1).normal_view_image, design_covert_noise(secret, 1).normal_view_image);
}

// ------------------------------------------------------------------- leakage

TEST(Leakage, SelfAndAntiCorrelation) {
  UnitRng rng(4);
  const Image s = random_image(5, 5, rng);
  std::vector<double> inv(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) inv[i] = 1.0 - s[i];
  EXPECT_NEAR(leakage_correlation(s, s), 1.0, 1e-12);
  EXPECT_NEAR(leakage_correlation(Image(5, 5, inv), s), -1.0, 1e-12);
}

TEST(Leakage, ConstantViewIsZero) {
  UnitRng rng(5);
  EXPECT_EQ(leakage_correlation(Image::filled(4, 4, 0.3), random_image(4, 4, rng)), 0.0);
}

TEST(Leakage, Errors) {
  EXPECT_THROW(leakage_correlation(Image::filled(2, 2, 0.1), Image::filled(4, 1, 0.1)), DimensionError);
  EXPECT_THROW(leakage_correlation(Image::filled(1, 1, 0.1), Image::filled(1, 1, 0.1)), DimensionError);
}

// ----------------------------------------------------------------- dual view

TEST(DualView, IdenticalViews) {
  UnitRng rng(6);
  const Image y = random_image(6, 4, rng);
  const BifurcationResult r = design_dual_view(y, y, SolverConfig{});
  EXPECT_LE(r.factorization.objective_history.back(), 1e-6);
  EXPECT_LE((r.factorization.atoms.col(0) - y.as_vector()).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE(r.factorization.atoms.col(1).cwiseAbs().maxCoeff(), 1e-6);
}

// y0 = 2 y1 with y1 <= 0.5: x1 = x2 = y1 under weights (1,1) and (1,0) is an
// exact solution, so the optimum is 0.
TEST(DualView, DoubledShaleHasExactSolution) {
  UnitRng rng(7);
  std::vector<double> shale(30), def(30);
  for (std::size_t i = 0; i < shale.size(); ++i) {
    shale[i] = 0.5 * rng.closed();
    def[i] = 2.0 * shale[i];
  }
  const Image y1(6, 5, shale);
  const Image y0(6, 5, def);
  Eigen::MatrixXd x_exact(30, 2);
  x_exact.col(0) = y1.as_vector();
  x_exact.col(1) = y1.as_vector();
  Eigen::MatrixXd y(30, 2);
  y.col(0) = y0.as_vector();
  y.col(1) = y1.as_vector();
  Eigen::Matrix2d w;
  w << 1, 1, 1, 0;
  ASSERT_LE(oracle::residual_by_loops(y, x_exact, w), 1e-15);

  const BifurcationResult r = design_dual_view(y0, y1, SolverConfig{});
  EXPECT_LE(r.factorization.objective_history.back() / y.norm(), 1e-3);
  ASSERT_EQ(r.view_residuals.size(), 2u);
  EXPECT_LE(r.view_residuals[0] / y0.as_vector().norm(), 1e-3);
  EXPECT_LE(r.view_residuals[1] / y1.as_vector().norm(), 1e-3);
}

// All-black default view vs. all-white shale view. Per pixel the residual is
// (x1 + x2)^2 + (x1 - 1)^2 over [0,1]^2; enumerating x1, x2 on a fine grid
// gives the single-pixel optimum, and the image residual is sqrt(N) times it.
TEST(DualView, IncompatiblePairReportsResidual) {
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a <= 200; ++a) {
    for (int b = 0; b <= 200; ++b) {
      const double x1 = a / 200.0;
      const double x2 = b / 200.0;
      best = std::min(best, std::sqrt((x1 + x2) * (x1 + x2) + (x1 - 1.0) * (x1 - 1.0)));
    }
  }
  const BifurcationResult r = design_dual_view(Image::filled(3, 3, 0.0), Image::filled(3, 3, 1.0), SolverConfig{});
  const double per_pixel = r.factorization.objective_history.back() / 3.0;
  EXPECT_GT(per_pixel, 0.0);
  EXPECT_GE(per_pixel, best - 1e-9);
  EXPECT_NEAR(per_pixel, best, 1e-4);
  EXPECT_TRUE(r.factorization.feasible());
}

TEST(DualView, NormalColumnStaysPinned) {
  UnitRng rng(8);
  const Image y0 = random_image(5, 5, rng);
  const Image y1 = random_image(5, 5, rng);
  for (bool pin_shale : {true, false}) {
    const BifurcationResult r = design_dual_view(y0, y1, SolverConfig{}, {.pin_shale_weights = pin_shale});
    EXPECT_EQ(r.factorization.weights(0, 0), 1.0);
    EXPECT_EQ(r.factorization.weights(1, 0), 1.0);
    if (pin_shale) {
      EXPECT_EQ(r.factorization.weights(0, 1), 1.0);
      EXPECT_EQ(r.factorization.weights(1, 1), 0.0);
    }
    const FrameSet frames = r.factorization.frame_set();
    const Image shale = perceive(frames, r.factorization.viewer_weights(1)).image;
    for (std::size_t i = 0; i < shale.size(); ++i) EXPECT_NEAR(shale[i], r.shale_view_image[i], 1e-12);
  }
}

TEST(DualView, RejectsSizeMismatch) {
  EXPECT_THROW(design_dual_view(Image::filled(2, 2, 0.1), Image::filled(3, 2, 0.1), SolverConfig{}), DimensionError);
}

#include <gtest/gtest.h>

#include <bit>
#include <cstdint>
#include <filesystem>
#include <string>

#include "oracles.hpp"
#include "tpvm/io/bundle.hpp"
#include "tpvm/masks.hpp"

using namespace tpvm;
using namespace tpvm::io;

namespace {

Bundle random_bundle(std::size_t w, std::size_t h, std::size_t m, std::size_t k, UnitRng& rng, bool with_mask) {
  Bundle b;
  b.width = w;
  b.height = h;
  b.mode = rng.closed() < 0.5 ? FusionMode::sum : FusionMode::mean;
  b.atoms = oracle::random_matrix(static_cast<Eigen::Index>(w * h), static_cast<Eigen::Index>(m), rng);
  b.weights = oracle::random_matrix(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k), rng);
  if (with_mask) {
    b.mask.emplace(w, h, oracle::random_matrix(static_cast<Eigen::Index>(w * h), static_cast<Eigen::Index>(m), rng));
  }
  return b;
}

bool bit_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a.data()[i]) != std::bit_cast<std::uint64_t>(b.data()[i])) return false;
  }
  return true;
}

IoError::Kind decode_error(const std::string& bytes) {
  try {
    decode_bundle(bytes);
  } catch (const IoError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an IoError";
  return IoError::Kind::open_failed;
}

}  // namespace

TEST(Bundle, SmallestBundleIs42Bytes) {
  Bundle b;
  b.width = 1;
  b.height = 1;
  b.atoms = Eigen::MatrixXd::Constant(1, 1, 0.5);
  b.weights = Eigen::MatrixXd::Ones(1, 1);
  const std::string bytes = encode_bundle(b);
  ASSERT_EQ(bytes.size(), 42u);
  EXPECT_EQ(bytes.substr(0, 4), "TPVM");
  EXPECT_EQ(bytes[4], 1);  // version, little-endian
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(bytes[24], 0);  // sum
  EXPECT_EQ(bytes[25], 0);  // no mask
  // 0.5 = 0x3FE0000000000000, little-endian: high byte last.
  EXPECT_EQ(static_cast<unsigned char>(bytes[33]), 0x3F);
  EXPECT_EQ(static_cast<unsigned char>(bytes[32]), 0xE0);
}

TEST(Bundle, LayoutIsFrameMajorThenViewerMajor) {
  Bundle b;
  b.width = 2;
  b.height = 1;
  b.atoms.resize(2, 2);
  b.atoms << 0.125, 0.25,
             0.375, 0.5;
  b.weights.resize(2, 1);
  b.weights << 0.75, 1.0;
  const std::string bytes = encode_bundle(b);
  const auto at = [&](std::size_t i) {
    std::uint64_t bits = 0;
    for (int j = 0; j < 8; ++j) bits |= std::uint64_t(static_cast<unsigned char>(bytes[26 + 8 * i + j])) << (8 * j);
    return std::bit_cast<double>(bits);
  };
  EXPECT_EQ(at(0), 0.125);  // frame 0, pixel 0
  EXPECT_EQ(at(1), 0.375);  // frame 0, pixel 1
  EXPECT_EQ(at(2), 0.25);   // frame 1, pixel 0
  EXPECT_EQ(at(4), 0.75);
  EXPECT_EQ(at(5), 1.0);
}

TEST(Bundle, RoundTripIsBitwiseIdentity) {
  UnitRng rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const Bundle b = random_bundle(1 + trial % 5, 1 + trial % 3, 1 + trial % 4, 1 + trial % 3, rng, trial % 2 == 0);
    const Bundle back = decode_bundle(encode_bundle(b));
    EXPECT_EQ(back.width, b.width);
    EXPECT_EQ(back.height, b.height);
    EXPECT_EQ(back.mode, b.mode);
    EXPECT_TRUE(bit_equal(back.atoms, b.atoms));
    EXPECT_TRUE(bit_equal(back.weights, b.weights));
    ASSERT_EQ(back.mask.has_value(), b.mask.has_value());
    if (b.mask) {
      EXPECT_TRUE(bit_equal(back.mask->matrix(), b.mask->matrix()));
    }
    EXPECT_EQ(encode_bundle(back), encode_bundle(b));
  }
}

TEST(Bundle, FileRoundTrip) {
  UnitRng rng(2);
  const Bundle b = random_bundle(4, 3, 2, 2, rng, true);
  const auto path = std::filesystem::temp_directory_path() / "tpvm_bundle_test.tpvm";
  write_bundle(b, path);
  EXPECT_EQ(std::filesystem::file_size(path), 26u + 8 * (12 * 2 + 2 * 2 + 12 * 2));
  EXPECT_EQ(encode_bundle(read_bundle(path)), encode_bundle(b));
  std::filesystem::remove(path);
}

TEST(Bundle, RejectsCorruption) {
  UnitRng rng(3);
  const std::string good = encode_bundle(random_bundle(2, 2, 2, 1, rng, false));

  std::string bad = good;
  bad[0] = 'X';
  EXPECT_EQ(decode_error(bad), IoError::Kind::bad_magic);
  EXPECT_EQ(decode_error("TP"), IoError::Kind::bad_magic);

  bad = good;
  bad[4] = 2;
  EXPECT_EQ(decode_error(bad), IoError::Kind::version_mismatch);

  EXPECT_EQ(decode_error(good.substr(0, good.size() - 3)), IoError::Kind::truncated_payload);
  EXPECT_EQ(decode_error(good.substr(0, 20)), IoError::Kind::truncated_payload);
  EXPECT_EQ(decode_error(good + "x"), IoError::Kind::malformed_header);

  bad = good;
  bad[24] = 7;
  EXPECT_EQ(decode_error(bad), IoError::Kind::malformed_header);

  bad = good;
  bad[8] = 0;  // width 0
  EXPECT_EQ(decode_error(bad), IoError::Kind::malformed_header);

  // Huge dimensions with a tiny payload must fail cleanly, not allocate.
  bad = good;
  bad[8] = bad[9] = bad[10] = bad[11] = static_cast<char>(0xFF);
  EXPECT_EQ(decode_error(bad), IoError::Kind::truncated_payload);
}

TEST(Bundle, RejectsOutOfRangePayload) {
  UnitRng rng(4);
  std::string bytes = encode_bundle(random_bundle(1, 1, 1, 1, rng, false));
  const auto bits = std::bit_cast<std::uint64_t>(1.5);
  for (int j = 0; j < 8; ++j) bytes[34 + j] = static_cast<char>((bits >> (8 * j)) & 0xFF);  // the weight
  EXPECT_THROW(decode_bundle(bytes), InvariantError);
}

TEST(Bundle, FromFactorization) {
  Factorization f;
  f.width = 2;
  f.height = 2;
  f.atoms = Eigen::MatrixXd::Constant(4, 3, 0.25);
  f.weights = Eigen::MatrixXd::Constant(3, 2, 0.5);
  f.seed = 77;
  const Bundle b = Bundle::from(f, FusionMode::mean);
  EXPECT_EQ(b.frames(), 3u);
  EXPECT_EQ(b.viewers(), 2u);
  EXPECT_EQ(b.mode, FusionMode::mean);
  EXPECT_EQ(b.metadata.seed, 77u);
  EXPECT_THROW(b.viewer_weights(2), DimensionError);
}

TEST(Bundle, MaskMustMatchFrames) {
  UnitRng rng(5);
  Bundle b = random_bundle(3, 3, 2, 1, rng, false);
  b.mask = alpha_blend_mask(3, 3, {1.0, 1.0, 1.0});
  EXPECT_THROW(encode_bundle(b), DimensionError);
}

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "tpvm/io/bundle.hpp"
#include "tpvm/io/netpbm.hpp"
#include "tpvm/random.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("tpvm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Runs the CLI with stdout and stderr captured; returns the exit status.
  int run(const std::string& args) {
    const std::string cmd = std::string(TPVM_CLI_PATH) + " " + args + " >" + path("stdout") + " 2>" + path("stderr");
    const int status = std::system(cmd.c_str());
    out_ = slurp(path("stdout"));
    err_ = slurp(path("stderr"));
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void write_random_pgm(const std::string& name, std::size_t w, std::size_t h, std::uint64_t seed) {
    tpvm::UnitRng rng(seed);
    std::vector<double> px(w * h);
    for (double& v : px) v = static_cast<double>(std::lround(rng.closed() * 255.0)) / 255.0;
    tpvm::io::write_image(tpvm::Image(w, h, px), path(name));
  }

  fs::path dir_;
  std::string out_;
  std::string err_;
};

}  // namespace

TEST_F(Cli, SingleFrameFactorizeThenMetricsIsExact) {
  write_random_pgm("t.pgm", 9, 7, 1);
  ASSERT_EQ(run("factorize --targets " + path("t.pgm") + " --frames 1 --iters 3000 --tol 1e-12 --out " +
                path("b.tpvm")),
            0)
      << err_;
  ASSERT_EQ(run("metrics --bundle " + path("b.tpvm") + " --targets " + path("t.pgm")), 0) << err_;
  const json report = json::parse(out_);
  ASSERT_EQ(report["perTargetRmse"].size(), 1u);
  EXPECT_LE(report["perTargetRmse"][0].get<double>(), 1e-6);
  EXPECT_TRUE(err_.empty());
}

TEST_F(Cli, CovertThenPerceiveRevealsSecretByteExactly) {
  write_random_pgm("secret.pgm", 16, 12, 2);
  ASSERT_EQ(run("covert --secret " + path("secret.pgm") + " --seed 5 --out " + path("c.tpvm")), 0) << err_;
  ASSERT_EQ(run("perceive --bundle " + path("c.tpvm") + " --weights 1,0 --out " + path("seen.pgm")), 0) << err_;
  EXPECT_EQ(slurp(path("seen.pgm")), slurp(path("secret.pgm")));

  ASSERT_EQ(run("perceive --bundle " + path("c.tpvm") + " --viewer 0 --out " + path("normal.pgm")), 0);
  EXPECT_NE(slurp(path("normal.pgm")), slurp(path("secret.pgm")));
}

TEST_F(Cli, MetricsOnMismatchedTargetsIsUsageError) {
  write_random_pgm("a.pgm", 6, 6, 3);
  write_random_pgm("b.pgm", 5, 6, 4);
  ASSERT_EQ(run("covert --secret " + path("a.pgm") + " --out " + path("c.tpvm")), 0);
  EXPECT_EQ(run("metrics --bundle " + path("c.tpvm") + " --targets " + path("b.pgm")), 1);
  EXPECT_NE(err_.find("dimension"), std::string::npos) << err_;
  EXPECT_TRUE(out_.empty());
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("factorize --frames 2"), 1);
  EXPECT_EQ(run("perceive --bundle " + path("missing.tpvm") + " --viewer 0 --out " + path("x.pgm")), 2);
  write_random_pgm("a.pgm", 4, 4, 5);
  ASSERT_EQ(run("covert --secret " + path("a.pgm") + " --out " + path("c.tpvm")), 0);
  EXPECT_EQ(run("perceive --bundle " + path("c.tpvm") + " --weights 1,2 --out " + path("x.pgm")), 3);
  EXPECT_EQ(run("perceive --bundle " + path("c.tpvm") + " --viewer 5 --out " + path("x.pgm")), 1);
  EXPECT_EQ(run("perceive --bundle " + path("a.pgm") + " --viewer 0 --out " + path("x.pgm")), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, DirectoryTargetsAndPinnedNormalView) {
  fs::create_directories(path("targets"));
  write_random_pgm("targets/0.pgm", 6, 5, 6);
  write_random_pgm("targets/1.pgm", 6, 5, 7);
  ASSERT_EQ(run("factorize --targets " + path("targets") + " --frames 2 --pin-normal-view --seed 3 --out " +
                path("b.tpvm")),
            0)
      << err_;
  const auto b = tpvm::io::read_bundle(path("b.tpvm"));
  EXPECT_EQ(b.viewers(), 2u);
  EXPECT_EQ(b.weights(0, 0), 1.0);
  EXPECT_EQ(b.weights(1, 0), 1.0);
  EXPECT_EQ(json::parse(out_)["seed"], 3);
}

TEST_F(Cli, MaskThenPerceiveAndExport) {
  write_random_pgm("d.pgm", 9, 9, 8);
  write_random_pgm("s.pgm", 9, 9, 9);
  ASSERT_EQ(run("dual --default " + path("d.pgm") + " --shale " + path("s.pgm") + " --iters 50 --out " +
                path("b.tpvm")),
            0)
      << err_;
  ASSERT_EQ(run("mask region --bundle " + path("b.tpvm") + " --disk 4,4,2 --inner 1,0 --outer 0,1 --out " +
                path("m.tpvm")),
            0)
      << err_;
  ASSERT_EQ(run("perceive --bundle " + path("b.tpvm") + " --mask-from " + path("m.tpvm") + " --out " +
                path("seen.pgm")),
            0)
      << err_;
  const auto b = tpvm::io::read_bundle(path("m.tpvm"));
  const tpvm::Image seen = tpvm::io::read_image(path("seen.pgm"));
  const tpvm::Image frame0 = b.frame_set().frame(0);
  const tpvm::Image frame1 = b.frame_set().frame(1);
  EXPECT_NEAR(seen.at(4, 4), frame0.at(4, 4), 1.0 / 510);
  EXPECT_NEAR(seen.at(0, 0), frame1.at(0, 0), 1.0 / 510);

  EXPECT_EQ(run("mask concentric --bundle " + path("b.tpvm") + " --center 4,4 --profile 3,2 --out " +
                path("bad.tpvm")),
            3);
  ASSERT_EQ(run("export-ui --bundle " + path("m.tpvm") + " --out " + path("ui")), 0) << err_;
  const json doc = json::parse(slurp(path("ui/bundle.json")));
  EXPECT_EQ(doc["M"], 2);
  EXPECT_TRUE(doc.contains("masks"));
}

// tpvm: command-line front end for the temporal-psychovisual modulation library.
//
// Exit codes: 0 success, 1 usage or dimension error, 2 I/O error,
// 3 invariant or numeric failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tpvm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit : int { ok = 0, usage = 1, io_failure = 2, numeric = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_csv(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw UsageError(std::string("cannot parse ") + what + " '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError(std::string(what) + " is empty");
  return out;
}

std::vector<fs::path> expand_targets(const std::vector<std::string>& args) {
  std::vector<fs::path> out;
  for (const auto& a : args) {
    if (fs::is_directory(a)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(a)) {
        const auto ext = e.path().extension();
        if (e.is_regular_file() && (ext == ".pgm" || ext == ".PGM")) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      if (found.empty()) throw tpvm::IoError(tpvm::IoError::Kind::open_failed, "no .pgm files in " + a);
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.emplace_back(a);
    }
  }
  return out;
}

tpvm::TargetSet load_targets(const std::vector<std::string>& args) {
  std::vector<tpvm::Image> images;
  for (const auto& p : expand_targets(args)) images.push_back(tpvm::io::read_image(p));
  return tpvm::TargetSet(std::move(images));
}

tpvm::Factorization as_factorization(const tpvm::io::Bundle& b) {
  tpvm::Factorization f;
  f.width = b.width;
  f.height = b.height;
  f.atoms = b.atoms;
  f.weights = b.weights;
  f.seed = b.metadata.seed.value_or(0);
  return f;
}

json number_or_inf(double v) { return std::isinf(v) ? json("inf") : json(v); }

json design_summary(const tpvm::BifurcationResult& r) {
  return {{"leakage", r.leakage},
          {"clampedPixels", r.feasibility_report},
          {"viewResiduals", r.view_residuals}};
}

struct SolverFlags {
  std::uint64_t seed = 0;
  std::size_t iters = tpvm::SolverConfig{}.max_iterations;
  double tol = tpvm::SolverConfig{}.rel_tolerance;
  std::size_t restarts = 0;
  std::string init = "uniform";

  void attach(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Random seed");
    cmd->add_option("--iters", iters, "Iteration cap")->check(CLI::PositiveNumber);
    cmd->add_option("--tol", tol, "Relative objective decrease that counts as converged")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--restarts", restarts, "Extra random restarts; the best result is kept");
    cmd->add_option("--init", init, "Initialization")->check(CLI::IsMember({"uniform", "replicate"}));
  }

  [[nodiscard]] tpvm::SolverConfig config() const {
    tpvm::SolverConfig cfg;
    cfg.seed = seed;
    cfg.max_iterations = iters;
    cfg.rel_tolerance = tol;
    cfg.restarts = restarts;
    cfg.init_strategy =
        init == "replicate" ? tpvm::InitStrategy::replicate_targets : tpvm::InitStrategy::seeded_uniform;
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal psychovisual modulation: design and inspect multi-view frame sets"};
  app.require_subcommand(1);

  // factorize
  std::vector<std::string> targets;
  std::size_t frames = 0;
  std::string out;
  bool pin_normal = false;
  std::string mode_name = "sum";
  SolverFlags solver;
  auto* fact = app.add_subcommand("factorize", "Solve for atom frames and viewer weights");
  fact->add_option("--targets", targets, "Target PGM files or directories (sorted)")->required()->expected(1, -1);
  fact->add_option("--frames", frames, "Number of atom frames M")->required()->check(CLI::PositiveNumber);
  fact->add_option("--out", out, "Output bundle")->required();
  fact->add_flag("--pin-normal-view", pin_normal, "Hold the first target's weights at all ones");
  fact->add_option("--mode", mode_name, "Fusion mode recorded in the bundle")
      ->check(CLI::IsMember({"sum", "mean"}));
  solver.attach(fact);

  // covert
  std::string secret;
  std::uint64_t covert_seed = 0;
  auto* covert = app.add_subcommand("covert", "Hide a secret image behind noise");
  covert->add_option("--secret", secret, "Secret PGM")->required();
  covert->add_option("--seed", covert_seed, "Noise seed");
  covert->add_option("--out", out, "Output bundle")->required();

  // dual
  std::string default_view, shale_view;
  bool free_shale = false;
  auto* dual = app.add_subcommand("dual", "Two-view design: default view for everyone, shale view with glasses");
  dual->add_option("--default", default_view, "Default view PGM")->required();
  dual->add_option("--shale", shale_view, "Shale view PGM")->required();
  dual->add_option("--out", out, "Output bundle")->required();
  dual->add_flag("--free-shale-weights", free_shale, "Optimize the shale weights instead of fixing them at (1,0)");
  solver.attach(dual);

  // perceive
  std::string bundle_path, weights_csv, mask_from;
  std::size_t viewer = 0;
  auto* perceive = app.add_subcommand("perceive", "Render what a viewer sees");
  perceive->add_option("--bundle", bundle_path, "Input bundle")->required();
  auto* opt_viewer = perceive->add_option("--viewer", viewer, "Viewer index into the weight matrix");
  auto* opt_weights = perceive->add_option("--weights", weights_csv, "Comma-separated weight vector");
  auto* opt_mask = perceive->add_option("--mask-from", mask_from, "Bundle whose spatial mask to apply");
  opt_viewer->excludes(opt_weights)->excludes(opt_mask);
  opt_weights->excludes(opt_mask);
  perceive->add_option("--out", out, "Output PGM")->required();

  // mask
  auto* mask = app.add_subcommand("mask", "Attach a spatial modulation mask to a bundle");
  mask->require_subcommand(1);
  std::string rect_csv, disk_csv, inner_csv, outer_csv, center_csv, profile_csv, alphas_csv;
  bool reversed = false;
  auto* region = mask->add_subcommand("region", "Inner and outer weight vectors split by a rectangle or disk");
  auto* opt_rect = region->add_option("--rect", rect_csv, "x0,y0,x1,y1 (pixel centers, inclusive)");
  auto* opt_disk = region->add_option("--disk", disk_csv, "cx,cy,radius");
  opt_rect->excludes(opt_disk);
  region->add_option("--inner", inner_csv, "Weights inside the region")->required();
  region->add_option("--outer", outer_csv, "Weights outside the region")->required();
  auto* concentric = mask->add_subcommand("concentric", "One frame per ring around a center");
  concentric->add_option("--center", center_csv, "cx,cy")->required();
  concentric->add_option("--profile", profile_csv, "Ascending ring radii, one per frame")->required();
  concentric->add_flag("--reversed", reversed, "Innermost ring shows the last frame");
  auto* alpha = mask->add_subcommand("alpha", "Constant per-frame attenuation");
  alpha->add_option("--alphas", alphas_csv, "One alpha per frame")->required();
  for (auto* sub : {region, concentric, alpha}) {
    sub->add_option("--bundle", bundle_path, "Input bundle")->required();
    sub->add_option("--out", out, "Output bundle")->required();
  }

  // metrics
  auto* metrics = app.add_subcommand("metrics", "Per-target RMSE and PSNR as JSON");
  metrics->add_option("--bundle", bundle_path, "Input bundle")->required();
  metrics->add_option("--targets", targets, "Target PGM files or directories")->required()->expected(1, -1);

  // export-ui
  std::vector<std::string> golden_csv;
  auto* export_ui = app.add_subcommand("export-ui", "Write bundle.json for the browser explorer");
  export_ui->add_option("--bundle", bundle_path, "Input bundle")->required();
  export_ui->add_option("--out", out, "Output directory")->required();
  export_ui->add_option("--golden", golden_csv, "Extra golden weight vectors (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? Exit::ok : Exit::usage;
  }

  try {
    if (*fact) {
      const tpvm::TargetSet ts = load_targets(targets);
      std::optional<tpvm::PinSpec> pins;
      if (pin_normal) pins.emplace(frames, ts.count()).pin_normal_view(0);
      const tpvm::SolverConfig cfg = solver.config();
      const tpvm::Factorization f = tpvm::factorize(ts, frames, pins, cfg);
      auto b = tpvm::io::Bundle::from(f, tpvm::fusion_mode_from_string(mode_name));
      b.metadata.solver = cfg;
      tpvm::io::write_bundle(b, out);
      std::cout << json{{"objective", f.objective_history.back()},
                        {"iterations", f.iterations()},
                        {"status", tpvm::to_string(f.status)},
                        {"seed", f.seed}}
                       .dump()
                << "\n";
    } else if (*covert) {
      const auto r = tpvm::design_covert_noise(tpvm::io::read_image(secret), covert_seed);
      tpvm::io::write_bundle(tpvm::io::Bundle::from(r.factorization), out);
      std::cout << design_summary(r).dump() << "\n";
    } else if (*dual) {
      const auto cfg = solver.config();
      const auto r = tpvm::design_dual_view(tpvm::io::read_image(default_view), tpvm::io::read_image(shale_view),
                                            cfg, {.pin_shale_weights = !free_shale});
      auto b = tpvm::io::Bundle::from(r.factorization);
      b.metadata.solver = cfg;
      tpvm::io::write_bundle(b, out);
      std::cout << design_summary(r).dump() << "\n";
    } else if (*perceive) {
      const auto b = tpvm::io::read_bundle(bundle_path);
      const tpvm::FrameSet fs = b.frame_set();
      tpvm::FusedImage seen{tpvm::Image::filled(1, 1, 0.0), false, 0};
      if (*opt_mask) {
        const auto m = tpvm::io::read_bundle(mask_from);
        if (!m.mask) throw UsageError(mask_from + " carries no spatial mask");
        seen = tpvm::perceive_spatial(fs, *m.mask, b.mode);
      } else if (*opt_weights) {
        seen = tpvm::perceive(fs, tpvm::WeightVector(parse_csv(weights_csv, "--weights")), b.mode);
      } else {
        seen = tpvm::perceive(fs, b.viewer_weights(viewer), b.mode);
      }
      if (seen.overflow) std::cerr << "tpvm: " << seen.overflow_pixels << " pixels clamped to 1\n";
      tpvm::io::write_image(seen.image, out);
    } else if (*mask) {
      auto b = tpvm::io::read_bundle(bundle_path);
      if (*region) {
        tpvm::Region geom;
        if (!rect_csv.empty()) {
          const auto v = parse_csv(rect_csv, "--rect");
          if (v.size() != 4) throw UsageError("--rect needs x0,y0,x1,y1");
          geom = tpvm::RectRegion{v[0], v[1], v[2], v[3]};
        } else if (!disk_csv.empty()) {
          const auto v = parse_csv(disk_csv, "--disk");
          if (v.size() != 3) throw UsageError("--disk needs cx,cy,radius");
          geom = tpvm::DiskRegion{{v[0], v[1]}, v[2]};
        } else {
          throw UsageError("region needs --rect or --disk");
        }
        const tpvm::WeightVector inner(parse_csv(inner_csv, "--inner"));
        const tpvm::WeightVector outer(parse_csv(outer_csv, "--outer"));
        if (inner.size() != b.frames()) {
          throw tpvm::DimensionError("mask has " + std::to_string(inner.size()) + " weights but the bundle has M=" +
                                     std::to_string(b.frames()));
        }
        b.mask = tpvm::make_region_mask(b.width, b.height, geom, inner, outer);
      } else if (*concentric) {
        const auto c = parse_csv(center_csv, "--center");
        if (c.size() != 2) throw UsageError("--center needs cx,cy");
        b.mask = tpvm::make_concentric_mask(b.width, b.height, {c[0], c[1]}, b.frames(),
                                            parse_csv(profile_csv, "--profile"),
                                            reversed ? tpvm::RingOrder::reversed : tpvm::RingOrder::identity);
      } else {
        const auto a = parse_csv(alphas_csv, "--alphas");
        if (a.size() != b.frames()) {
          throw tpvm::DimensionError("got " + std::to_string(a.size()) + " alphas but the bundle has M=" +
                                     std::to_string(b.frames()));
        }
        b.mask = tpvm::alpha_blend_mask(b.width, b.height, a);
      }
      tpvm::io::write_bundle(b, out);
    } else if (*metrics) {
      const auto b = tpvm::io::read_bundle(bundle_path);
      const auto report = tpvm::quality_report(load_targets(targets), as_factorization(b), b.mode);
      json psnr = json::array();
      for (double p : report.per_target_psnr_db) psnr.push_back(number_or_inf(p));
      std::cout << json{{"perTargetRmse", report.per_target_rmse},
                        {"perTargetPsnrDb", psnr},
                        {"frobeniusTotal", report.frobenius_total},
                        {"overflowPixelCounts", report.overflow_pixel_counts}}
                       .dump(2)
                << "\n";
    } else if (*export_ui) {
      const auto b = tpvm::io::read_bundle(bundle_path);
      auto golden = tpvm::io::default_golden_weights(b);
      for (const auto& g : golden_csv) golden.emplace_back(parse_csv(g, "--golden"));
      std::error_code ec;
      fs::create_directories(out, ec);
      if (ec) throw tpvm::IoError(tpvm::IoError::Kind::write_failed, "cannot create " + out + ": " + ec.message());
      tpvm::io::export_ui_bundle(b, golden, fs::path(out) / "bundle.json");
    }
  } catch (const UsageError& e) {
    std::cerr << "tpvm: " << e.what() << "\n";
    return Exit::usage;
  } catch (const tpvm::DimensionError& e) {
    std::cerr << "tpvm: dimension error: " << e.what() << "\n";
    return Exit::usage;
  } catch (const tpvm::IoError& e) {
    std::cerr << "tpvm: " << e.what() << "\n";
    return Exit::io_failure;
  } catch (const tpvm::InvariantError& e) {
    std::cerr << "tpvm: invariant violated: " << e.what() << "\n";
    return Exit::numeric;
  } catch (const std::exception& e) {
    std::cerr << "tpvm: " << e.what() << "\n";
    return Exit::numeric;
  }
  return Exit::ok;
}

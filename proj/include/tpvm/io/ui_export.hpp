#pragma once

// JSON document consumed by the browser explorer:
//
//   { width, height, M, K, fusionMode: "sum" | "mean",
//     frames:  [[N numbers] x M],
//     weights: [[M numbers] x K],
//     masks?:  [[N numbers] x M],
//     golden:  [{ weights: [M numbers], fusedImage: [N numbers] }, ...],
//     metadata?: { seed, solver } }
//
// Golden entries are fused here with the library's own fusion rule so the
// client can check its renderer against them.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tpvm/fusion.hpp"
#include "tpvm/image.hpp"
#include "tpvm/io/bundle.hpp"
#include "tpvm/io/netpbm.hpp"

namespace tpvm::io {

// Normal view, all-zero, every viewer column of W, and every single frame.
inline std::vector<WeightVector> default_golden_weights(const Bundle& b) {
  const std::size_t frames = b.frames();
  std::vector<WeightVector> out{WeightVector::ones(frames), WeightVector::zeros(frames)};
  for (std::size_t k = 0; k < b.viewers(); ++k) out.push_back(b.viewer_weights(k));
  for (std::size_t m = 0; m < frames; ++m) out.push_back(WeightVector::one_hot(frames, m));
  return out;
}

inline nlohmann::json ui_document(const Bundle& b, const std::vector<WeightVector>& golden) {
  b.validate();
  using nlohmann::json;
  const auto columns = [](const Eigen::MatrixXd& m) {
    json arr = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const auto col = m.col(j);
      arr.push_back(std::vector<double>(col.data(), col.data() + col.size()));
    }
    return arr;
  };

  json doc;
  doc["width"] = b.width;
  doc["height"] = b.height;
  doc["M"] = b.frames();
  doc["K"] = b.viewers();
  doc["fusionMode"] = std::string(to_string(b.mode));
  doc["frames"] = columns(b.atoms);
  doc["weights"] = columns(b.weights);
  if (b.mask) doc["masks"] = columns(b.mask->matrix());

  const FrameSet frames = b.frame_set();
  json gold = json::array();
  for (const auto& w : golden) {
    const FusedImage fused = perceive(frames, w, b.mode);
    const auto px = fused.image.pixels();
    gold.push_back({{"weights", std::vector<double>(w.values().begin(), w.values().end())},
                    {"fusedImage", std::vector<double>(px.begin(), px.end())}});
  }
  doc["golden"] = std::move(gold);

  if (b.metadata.seed || b.metadata.solver) {
    json meta = json::object();
    if (b.metadata.seed) meta["seed"] = *b.metadata.seed;
    if (const auto& s = b.metadata.solver) {
      meta["solver"] = {{"maxIterations", s->max_iterations},
                        {"relTolerance", s->rel_tolerance},
                        {"seed", s->seed},
                        {"restarts", s->restarts},
                        {"initialStep", s->initial_step},
                        {"backtrackFactor", s->backtrack_factor},
                        {"initStrategy",
                         s->init_strategy == InitStrategy::seeded_uniform ? "seeded-uniform" : "replicate-targets"}};
    }
    doc["metadata"] = std::move(meta);
  }
  return doc;
}

inline nlohmann::json export_ui_bundle(const Bundle& b, const std::vector<WeightVector>& golden,
                                       const std::filesystem::path& path) {
  nlohmann::json doc = ui_document(b, golden);
  detail::write_file(path, doc.dump());
  return doc;
}

}  // namespace tpvm::io

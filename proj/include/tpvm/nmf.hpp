#pragma once

// Box-constrained non-negative matrix factorization
//
//     minimize ||Y - XW||_F   subject to  0 <= X <= 1,  0 <= W <= 1
//
// solved by alternating projected gradient descent with backtracking line
// search. Y is N x K (one target image per column), X is N x M (one atom frame
// per column) and W is M x K (one viewer's modulation weights per column).
// Entries of W may be pinned to fixed values, e.g. an all-ones column that
// forces one target to be the unaided normal view.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tpvm/error.hpp"
#include "tpvm/image.hpp"
#include "tpvm/random.hpp"

namespace tpvm {

using PinMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

enum class InitStrategy : std::uint8_t { seeded_uniform, replicate_targets };

struct SolverConfig {
  std::size_t max_iterations = 500;
  double rel_tolerance = 1e-6;
  std::uint64_t seed = 0;
  std::size_t restarts = 0;
  double initial_step = 1.0;      // multiple of 1/L, L the half-step Lipschitz constant
  double backtrack_factor = 0.5;
  InitStrategy init_strategy = InitStrategy::seeded_uniform;

  void validate() const {
    if (max_iterations == 0) throw InvariantError("max_iterations must be positive");
    if (!(rel_tolerance > 0.0)) throw InvariantError("rel_tolerance must be positive");
    if (!(initial_step > 0.0) || !std::isfinite(initial_step)) throw InvariantError("initial_step must be positive");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
      throw InvariantError("backtrack_factor must lie strictly inside (0,1)");
    }
  }
};

// Which W entries are held fixed, and at what values.
struct PinSpec {
  PinMask mask;
  Eigen::MatrixXd values;

  PinSpec(std::size_t frames, std::size_t viewers)
      : mask(PinMask::Constant(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(viewers), false)),
        values(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(viewers))) {}

  PinSpec& pin(std::size_t frame, std::size_t viewer, double value) {
    if (frame >= static_cast<std::size_t>(mask.rows()) || viewer >= static_cast<std::size_t>(mask.cols())) {
      throw DimensionError("pin index out of range");
    }
    if (!detail::in_unit_interval(value)) throw InvariantError("pinned weight must lie in [0,1]");
    mask(static_cast<Eigen::Index>(frame), static_cast<Eigen::Index>(viewer)) = true;
    values(static_cast<Eigen::Index>(frame), static_cast<Eigen::Index>(viewer)) = value;
    return *this;
  }

  PinSpec& pin_column(std::size_t viewer, const WeightVector& w) {
    if (w.size() != static_cast<std::size_t>(mask.rows())) {
      throw DimensionError("pinned column has " + std::to_string(w.size()) + " weights, expected " +
                           std::to_string(mask.rows()));
    }
    for (std::size_t m = 0; m < w.size(); ++m) pin(m, viewer, w[m]);
    return *this;
  }

  // Viewer `viewer` is the unaided eye: all frames at weight 1.
  PinSpec& pin_normal_view(std::size_t viewer) {
    return pin_column(viewer, WeightVector::ones(static_cast<std::size_t>(mask.rows())));
  }

  [[nodiscard]] bool any() const { return mask.any(); }
};

enum class SolverStatus : std::uint8_t { initialized, running, converged, stalled, max_iterations };

inline const char* to_string(SolverStatus s) noexcept {
  switch (s) {
    case SolverStatus::initialized: return "initialized";
    case SolverStatus::running: return "running";
    case SolverStatus::converged: return "converged";
    case SolverStatus::stalled: return "stalled";
    case SolverStatus::max_iterations: return "max_iterations";
  }
  return "unknown";
}

struct Factorization {
  std::size_t width = 0;
  std::size_t height = 0;
  Eigen::MatrixXd atoms;    // X, N x M
  Eigen::MatrixXd weights;  // W, M x K
  PinMask pin_mask;         // M x K, true = held fixed
  std::vector<double> objective_history;  // ||Y - XW||_F after init, then per accepted iteration
  SolverStatus status = SolverStatus::initialized;
  std::uint64_t seed = 0;   // seed of the run that produced this result

  [[nodiscard]] std::size_t pixels() const noexcept { return static_cast<std::size_t>(atoms.rows()); }
  [[nodiscard]] std::size_t frames() const noexcept { return static_cast<std::size_t>(atoms.cols()); }
  [[nodiscard]] std::size_t viewers() const noexcept { return static_cast<std::size_t>(weights.cols()); }
  [[nodiscard]] std::size_t iterations() const noexcept {
    return objective_history.empty() ? 0 : objective_history.size() - 1;
  }

  [[nodiscard]] FrameSet frame_set() const { return FrameSet(width, height, atoms); }

  [[nodiscard]] WeightVector viewer_weights(std::size_t k) const {
    const auto col = weights.col(static_cast<Eigen::Index>(k));
    return WeightVector(std::vector<double>(col.data(), col.data() + col.size()));
  }

  [[nodiscard]] bool feasible() const {
    return atoms.size() > 0 && weights.size() > 0 && atoms.minCoeff() >= 0.0 && atoms.maxCoeff() <= 1.0 &&
           weights.minCoeff() >= 0.0 && weights.maxCoeff() <= 1.0;
  }
};

// ---------------------------------------------------------------------------
// Objective and gradients

inline void check_shapes(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, const Eigen::MatrixXd& w) {
  if (y.rows() != x.rows() || x.cols() != w.rows() || w.cols() != y.cols()) {
    throw DimensionError("shape mismatch: Y is " + std::to_string(y.rows()) + "x" + std::to_string(y.cols()) +
                         ", X is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) + ", W is " +
                         std::to_string(w.rows()) + "x" + std::to_string(w.cols()));
  }
}

inline double objective(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, const Eigen::MatrixXd& w) {
  check_shapes(y, x, w);
  return (y - x * w).norm();
}

inline double objective(const TargetSet& targets, const Factorization& f) {
  return objective(targets.matrix(), f.atoms, f.weights);
}

// d/dX ||Y - XW||_F^2
inline Eigen::MatrixXd gradient_atoms(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, const Eigen::MatrixXd& w) {
  check_shapes(y, x, w);
  return 2.0 * (x * w - y) * w.transpose();
}

// d/dW ||Y - XW||_F^2
inline Eigen::MatrixXd gradient_weights(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x,
                                        const Eigen::MatrixXd& w) {
  check_shapes(y, x, w);
  return 2.0 * x.transpose() * (x * w - y);
}

// ---------------------------------------------------------------------------
// Initialization

namespace detail {

inline void validate_pins(const std::optional<PinSpec>& pins, std::size_t frames, std::size_t viewers) {
  if (!pins) return;
  if (static_cast<std::size_t>(pins->mask.rows()) != frames || static_cast<std::size_t>(pins->mask.cols()) != viewers ||
      pins->values.rows() != pins->mask.rows() || pins->values.cols() != pins->mask.cols()) {
    throw DimensionError("pin specification must be " + std::to_string(frames) + "x" + std::to_string(viewers));
  }
  for (Eigen::Index j = 0; j < pins->mask.cols(); ++j) {
    for (Eigen::Index i = 0; i < pins->mask.rows(); ++i) {
      if (pins->mask(i, j) && !in_unit_interval(pins->values(i, j))) {
        throw InvariantError("pinned weight must lie in [0,1]");
      }
    }
  }
}

inline void fill_uniform(Eigen::MatrixXd& m, UnitRng& rng, Eigen::Index first_col = 0) {
  for (Eigen::Index j = first_col; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.closed();
  }
}

// Largest eigenvalue of a small symmetric PSD matrix.
inline double largest_eigenvalue(const Eigen::MatrixXd& gram) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace detail

inline Factorization init(const Eigen::MatrixXd& y, std::size_t width, std::size_t height, std::size_t frames,
                          const SolverConfig& cfg, const std::optional<PinSpec>& pins = std::nullopt) {
  if (frames == 0) throw InvariantError("need at least one atom frame");
  const auto n = y.rows();
  const auto k = y.cols();
  const auto m = static_cast<Eigen::Index>(frames);
  detail::validate_pins(pins, frames, static_cast<std::size_t>(k));

  Factorization f;
  f.width = width;
  f.height = height;
  f.seed = cfg.seed;
  f.atoms.resize(n, m);
  f.weights.resize(m, k);
  UnitRng rng(cfg.seed);

  switch (cfg.init_strategy) {
    case InitStrategy::seeded_uniform:
      detail::fill_uniform(f.atoms, rng);
      detail::fill_uniform(f.weights, rng);
      break;
    case InitStrategy::replicate_targets:
      if (m < k) {
        throw InvariantError("replicate-targets initialization needs M >= K (M=" + std::to_string(m) +
                             ", K=" + std::to_string(k) + ")");
      }
      f.atoms.leftCols(k) = y;
      detail::fill_uniform(f.atoms, rng, k);
      f.weights.setZero();
      f.weights.topRows(k).setIdentity();
      break;
  }

  if (pins) {
    f.pin_mask = pins->mask;
    f.weights = f.pin_mask.select(pins->values, f.weights);
  } else {
    f.pin_mask = PinMask::Constant(m, k, false);
  }
  f.objective_history = {objective(y, f.atoms, f.weights)};
  return f;
}

inline Factorization init(const TargetSet& targets, std::size_t frames, const SolverConfig& cfg,
                          const std::optional<PinSpec>& pins = std::nullopt) {
  return init(targets.matrix(), targets.width(), targets.height(), frames, cfg, pins);
}

// ---------------------------------------------------------------------------
// One alternating pass

namespace detail {

// Projected gradient half-step with backtracking. The first trial step is
// initial_step / L with L = 2*lambda_max(gram), the Lipschitz constant of the
// gradient; it shrinks by backtrack_factor until the objective does not
// increase or the step falls below 1e-12 of its starting value. `project`
// maps a trial point onto the feasible set. Returns false when the search is
// exhausted; `current` and `value` are then left untouched.
template <class Evaluate, class Project>
bool line_search(Eigen::MatrixXd& current, double& value, const Eigen::MatrixXd& gradient, double lipschitz,
                 const SolverConfig& cfg, Evaluate&& evaluate, Project&& project) {
  if (!(lipschitz > 0.0) || gradient.isZero(0.0)) {
    return true;  // stationary: nothing to move, the objective is unchanged
  }
  const double first = cfg.initial_step / lipschitz;
  const double smallest = 1e-12 * first;
  for (double t = first; t >= smallest; t *= cfg.backtrack_factor) {
    Eigen::MatrixXd trial = project(current - t * gradient);
    const double trial_value = evaluate(trial);
    if (trial_value <= value) {
      current = std::move(trial);
      value = trial_value;
      return true;
    }
  }
  return false;
}

}  // namespace detail

namespace detail {

inline Eigen::MatrixXd clamp01(const Eigen::MatrixXd& m) { return m.cwiseMax(0.0).cwiseMin(1.0); }

inline double current_objective(const Eigen::MatrixXd& y, const Factorization& f) {
  return f.objective_history.empty() ? objective(y, f.atoms, f.weights) : f.objective_history.back();
}

}  // namespace detail

// Projected gradient step on X with W fixed. `value` carries the objective in
// and out. Returns false if the line search found no non-increasing step.
inline bool half_step_atoms(const Eigen::MatrixXd& y, Factorization& f, double& value, const SolverConfig& cfg) {
  const Eigen::MatrixXd grad = gradient_atoms(y, f.atoms, f.weights);
  const double lipschitz = 2.0 * detail::largest_eigenvalue(f.weights * f.weights.transpose());
  return detail::line_search(
      f.atoms, value, grad, lipschitz, cfg, [&](const Eigen::MatrixXd& x) { return (y - x * f.weights).norm(); },
      detail::clamp01);
}

// Projected gradient step on W with X fixed; pinned entries are copied back
// after projection so they never change.
inline bool half_step_weights(const Eigen::MatrixXd& y, Factorization& f, double& value, const SolverConfig& cfg) {
  const Eigen::MatrixXd grad = gradient_weights(y, f.atoms, f.weights);
  const double lipschitz = 2.0 * detail::largest_eigenvalue(f.atoms.transpose() * f.atoms);
  const Eigen::MatrixXd pinned = f.weights;
  const PinMask& mask = f.pin_mask;
  return detail::line_search(
      f.weights, value, grad, lipschitz, cfg, [&](const Eigen::MatrixXd& w) { return (y - f.atoms * w).norm(); },
      [&](const Eigen::MatrixXd& w) -> Eigen::MatrixXd { return mask.select(pinned, detail::clamp01(w)); });
}

// One X half-step followed by one W half-step; the new objective is appended
// to objective_history. When neither half-step can avoid increasing the
// objective the input comes back unchanged with status `stalled`.
inline Factorization step(const Eigen::MatrixXd& y, Factorization f, const SolverConfig& cfg) {
  check_shapes(y, f.atoms, f.weights);
  double value = detail::current_objective(y, f);
  const bool x_ok = half_step_atoms(y, f, value, cfg);
  const bool w_ok = half_step_weights(y, f, value, cfg);
  if (!x_ok && !w_ok) {
    f.status = SolverStatus::stalled;
    return f;
  }
  f.objective_history.push_back(value);
  f.status = SolverStatus::running;
  return f;
}

inline Factorization step(const TargetSet& targets, Factorization f, const SolverConfig& cfg) {
  return step(targets.matrix(), std::move(f), cfg);
}

// ---------------------------------------------------------------------------
// Full solve

// Called after every accepted iteration with the current iterate and its
// 1-based iteration number.
using IterationObserver = std::function<void(const Factorization&, std::size_t)>;

namespace detail {

inline Factorization solve_once(const Eigen::MatrixXd& y, std::size_t width, std::size_t height, std::size_t frames,
                                const std::optional<PinSpec>& pins, const SolverConfig& cfg,
                                const IterationObserver& observer) {
  Factorization f = init(y, width, height, frames, cfg, pins);
  if (f.objective_history.back() == 0.0) {
    f.status = SolverStatus::converged;
    return f;
  }
  f.status = SolverStatus::max_iterations;
  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    const double before = f.objective_history.back();
    f = step(y, std::move(f), cfg);
    if (f.status == SolverStatus::stalled) break;
    if (observer) observer(f, it);
    const double after = f.objective_history.back();
    if (after == 0.0 || (before - after) < cfg.rel_tolerance * before) {
      f.status = SolverStatus::converged;
      break;
    }
    f.status = SolverStatus::max_iterations;
  }
  return f;
}

}  // namespace detail

// Runs init, then alternating passes until the relative objective decrease
// drops below rel_tolerance or max_iterations is reached. With restarts > 0
// the solve is repeated from derived seeds and the lowest objective wins
// (earliest run on ties).
inline Factorization factorize(const Eigen::MatrixXd& y, std::size_t width, std::size_t height, std::size_t frames,
                               const std::optional<PinSpec>& pins, const SolverConfig& cfg,
                               const IterationObserver& observer = {}) {
  cfg.validate();
  if (frames == 0) throw InvariantError("need at least one atom frame");
  if (static_cast<std::size_t>(y.rows()) != width * height || y.cols() < 1) {
    throw DimensionError("target matrix must be N x K with N = width*height");
  }
  detail::validate_pins(pins, frames, static_cast<std::size_t>(y.cols()));

  std::optional<Factorization> best;
  for (std::size_t r = 0; r <= cfg.restarts; ++r) {
    SolverConfig run = cfg;
    run.seed = r == 0 ? cfg.seed : splitmix64(cfg.seed + r);
    Factorization f = detail::solve_once(y, width, height, frames, pins, run, observer);
    if (!best || f.objective_history.back() < best->objective_history.back()) best = std::move(f);
  }
  return std::move(*best);
}

inline Factorization factorize(const TargetSet& targets, std::size_t frames, const std::optional<PinSpec>& pins,
                               const SolverConfig& cfg, const IterationObserver& observer = {}) {
  return factorize(targets.matrix(), targets.width(), targets.height(), frames, pins, cfg, observer);
}

}  // namespace tpvm

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hgc/linalg.hpp"
#include "hgc/schemes.hpp"

namespace hgc {

// Least-squares regression split into K equal contiguous row blocks. The
// partial gradient of block k is X_k^T (X_k beta - y_k).
struct SyntheticTask {
  Matrix features;  // N x d
  Vector labels;    // N
  int datasets = 1;
  double learning_rate = 0.0;
  int iterations = 0;
  std::uint64_t seed = 0;

  int samples() const { return static_cast<int>(features.rows()); }
  int dimension() const { return static_cast<int>(features.cols()); }

  std::map<int, GradientVector> partial_gradients(const Vector& beta) const;
  GradientVector full_gradient(const Vector& beta) const;
  // 0.5 * ||X beta - y||^2 / N
  double loss(const Vector& beta) const;
};

// Gaussian features and a noisy linear target. Draws whose Gram matrix has a
// condition number above 1e8 are rejected and redrawn. The step size is
// 0.05 / lambda_max(X^T X).
SyntheticTask make_task(int samples, int dimension, int datasets, int iterations,
                        std::uint64_t seed);

struct StragglerPolicy {
  enum class Mode { kNone, kRandom, kAdversarialCycle, kFixed };
  Mode mode = Mode::kNone;
  Tolerance tolerance;       // random mode: stragglers dropped per iteration
  std::uint64_t seed = 0;    // random mode
  StragglerPattern pattern;  // fixed mode

  static StragglerPolicy none() { return {}; }
  static StragglerPolicy random(Tolerance t, std::uint64_t seed) {
    return {Mode::kRandom, t, seed, {}};
  }
  static StragglerPolicy adversarial_cycle() { return {Mode::kAdversarialCycle, {}, 0, {}}; }
  static StragglerPolicy fixed(StragglerPattern p) { return {Mode::kFixed, {}, 0, std::move(p)}; }
};

std::string policy_name(StragglerPolicy::Mode mode);
StragglerPolicy::Mode parse_policy_mode(const std::string& name);

// Pattern number `index` among those that drop exactly s_e edges and s_w
// workers under every surviving edge; indices wrap around.
StragglerPattern tolerated_pattern(const Topology& topology, const Tolerance& tolerance,
                                   std::uint64_t index);

// Pattern used at `iteration` (0-based). Adversarial cycling walks the
// scheme's own tolerance.
StragglerPattern pattern_at(const StragglerPolicy& policy, const Scheme& scheme, int iteration);

struct TrainingResult {
  std::vector<Vector> parameters;  // beta_0 .. beta_T
  std::vector<double> losses;      // loss at beta_0 .. beta_T
  std::vector<double> residuals;   // per iteration: ||decoded - full|| / ||full||
};

TrainingResult run_training(const SyntheticTask& task, const Scheme& scheme,
                            const StragglerPolicy& policy);

// Plain gradient descent on the whole data set.
TrainingResult run_centralized(const SyntheticTask& task);

// max_t ||a_t - b_t|| / ||b_t||
double trajectory_gap(const TrainingResult& a, const TrainingResult& b);

// Columns: iteration, loss, residual (empty for the initial point).
void write_trajectory_csv(const TrainingResult& result, std::ostream& out);

}  // namespace hgc

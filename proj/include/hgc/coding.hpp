#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hgc/linalg.hpp"
#include "hgc/topology.hpp"

namespace hgc {

using GradientVector = Vector;

// Residual (infinity norm) above which a decoding system is declared singular.
inline constexpr double kDecodeTolerance = 1e-8;
// Relative error above which a verified pattern counts as a failure.
inline constexpr double kRecoveryTolerance = 1e-9;
// Reseeded construction attempts before giving up.
inline constexpr int kConstructionAttempts = 8;

// Data placement for a two-layer code. Sub-datasets are labelled 1..K.
struct AllocationPlan {
  Topology topology;
  Tolerance tolerance;
  int datasets = 0;                          // K
  std::vector<int> edge_loads;               // n_i
  int worker_load = 0;                       // D
  std::vector<std::vector<int>> edge_sets;   // ordered sub-datasets held by edge i
  std::vector<std::vector<std::vector<int>>> worker_sets;  // [i][j] ordered sub-datasets

  const std::vector<int>& edge_set(int edge) const {
    return edge_sets.at(static_cast<std::size_t>(edge - 1));
  }
  const std::vector<int>& worker_set(int edge, int worker) const {
    return worker_sets.at(static_cast<std::size_t>(edge - 1)).at(static_cast<std::size_t>(worker - 1));
  }
  // Position of sub-dataset `dataset` inside edge_set(edge), or -1.
  int position_in_edge(int edge, int dataset) const;
};

// Cyclic two-layer allocation: edge i takes the next n_i = K(s_e+1)m_i/sum(m)
// sub-datasets modulo K, worker j of edge i takes D = n_i(s_w+1)/m_i
// consecutive entries of edge i's list starting at (j-1)D, modulo n_i.
AllocationPlan allocate(const Topology& topology, const Tolerance& tolerance, int datasets);

// Two-layer code: B (n x K) between master and edges, and per edge a
// m_i x n_i matrix Dbar^i between the edge and its workers. The full
// m_i x K matrix D^i equals Dbar^i on the columns held by edge i and is zero
// elsewhere. Values are immutable after construction.
class CodingScheme {
 public:
  enum class SupportCheck { kEnforce, kSkip };

  // Validates dimensions, finiteness and (unless skipped) that the zero
  // pattern of every matrix matches the allocation exactly.
  static CodingScheme from_matrices(AllocationPlan plan, Matrix first_layer,
                                    std::vector<Matrix> edge_codes, std::uint64_t seed,
                                    int attempt = 0,
                                    SupportCheck check = SupportCheck::kEnforce);

  const AllocationPlan& plan() const { return plan_; }
  const Topology& topology() const { return plan_.topology; }
  const Tolerance& tolerance() const { return plan_.tolerance; }
  const Matrix& first_layer() const { return first_layer_; }
  const Matrix& edge_code(int edge) const { return edge_codes_.at(static_cast<std::size_t>(edge - 1)); }
  const Matrix& worker_code(int edge) const { return worker_codes_.at(static_cast<std::size_t>(edge - 1)); }
  std::uint64_t seed() const { return seed_; }
  int attempt() const { return attempt_; }

  // (k, D^i[j][k] * B[i][k]) for every k held by worker (i, j), in worker_set order.
  std::vector<std::pair<int, double>> worker_coefficients(int edge, int worker) const;

 private:
  CodingScheme() = default;

  AllocationPlan plan_;
  Matrix first_layer_;
  std::vector<Matrix> edge_codes_;
  std::vector<Matrix> worker_codes_;
  std::uint64_t seed_ = 0;
  int attempt_ = 0;
};

// Builds coefficients on the allocation supports from a seeded generator and
// checks both span conditions (exhaustively up to 10^4 subsets per matrix,
// otherwise on 10^3 sampled subsets). Same plan and seed give bit-identical
// matrices.
CodingScheme build_scheme(const AllocationPlan& plan, std::uint64_t seed);

GradientVector worker_encode(const CodingScheme& scheme, int edge, int worker,
                             const std::map<int, GradientVector>& partials);

// Decoding row vectors; throw DecodeSingularError when the all-ones row is
// not reproduced within kDecodeTolerance.
Vector edge_decoding_vector(const CodingScheme& scheme, int edge, std::span<const int> fastest);
Vector master_decoding_vector(const CodingScheme& scheme, std::span<const int> fastest);

GradientVector edge_decode(const CodingScheme& scheme, int edge,
                           const std::map<int, GradientVector>& received,
                           std::span<const int> fastest);
GradientVector master_decode(const CodingScheme& scheme,
                             const std::map<int, GradientVector>& received,
                             std::span<const int> fastest);

struct VerifyMode {
  enum class Kind { kExhaustive, kSampled };
  Kind kind = Kind::kExhaustive;
  std::int64_t count = 0;
  std::uint64_t seed = 0;

  static VerifyMode exhaustive(std::uint64_t seed = 0) { return {Kind::kExhaustive, 0, seed}; }
  static VerifyMode sampled(std::int64_t count, std::uint64_t seed) {
    return {Kind::kSampled, count, seed};
  }
};

struct PatternResult {
  std::vector<int> edges;                 // surviving edges F
  std::vector<std::vector<int>> workers;  // surviving workers F_i for every edge
  double relative_error = 0.0;
  bool passed = false;
  std::string error;
};

struct VerificationReport {
  std::int64_t total = 0;
  std::int64_t passed = 0;
  double worst_relative_error = 0.0;
  std::vector<PatternResult> patterns;

  bool all_passed() const { return total > 0 && passed == total; }
};

// Number of (F, F_1..F_n) straggler patterns, saturating.
std::uint64_t pattern_count(const Topology& topology, const Tolerance& tolerance);

VerificationReport verify_decodability(const CodingScheme& scheme, const VerifyMode& mode);

}  // namespace hgc

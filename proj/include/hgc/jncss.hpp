#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hgc/runtime.hpp"
#include "hgc/topology.hpp"

namespace hgc {

// Deterministic cost proxies: B(i,j) for every worker and A(i) for every edge.
struct ProxyCosts {
  std::vector<std::vector<double>> worker;  // c D + 1/gamma + 2 tau/(1-p) + tau_i/(1-p_i)
  std::vector<double> edge;                 // tau_i/(1-p_i)
};

ProxyCosts proxy_costs(const Topology& topology, const SystemProfile& profiles, int load);

struct SkippedCandidate {
  Tolerance tolerance;
  std::string reason;
};

struct Selection {
  Tolerance tolerance;
  int load = 0;                            // D at the chosen tolerance
  std::vector<int> edges;                  // e_i in {0, 1}
  std::vector<std::vector<int>> workers;   // w(i,j) in {0, 1}
  double objective = 0.0;                  // proxy runtime (ms)
  std::vector<SkippedCandidate> skipped;
  std::int64_t evaluations = 0;

  int selected_edges() const;
  int selected_workers(int edge) const;
};

// Throws ValidationError unless the 0/1 vectors respect the selection
// counts for the stored tolerance.
void check_selection(const Topology& topology, const Selection& selection);

// Why a tolerance cannot be used with K sub-datasets, or an empty string.
std::string candidate_rejection(const Topology& topology, const Tolerance& tolerance, int datasets);

// Sweeps every tolerance, evaluates the proxy runtime with nested order
// statistics and returns the minimizer. Ties go to the smaller tolerance,
// then to the smaller node index.
Selection solve(const Topology& topology, const SystemProfile& profiles, int datasets);

// Exhaustive search over tolerances, edge subsets and worker subsets.
// Guarded at 10^7 candidates.
Selection brute_force_solve(const Topology& topology, const SystemProfile& profiles, int datasets);

inline constexpr std::uint64_t kBruteForceLimit = 10'000'000;

// Coefficient sqrt((r-1)/(n(n-r+1))) + sqrt((n-r)/(n r)).
double order_stat_factor(int n, int r);

// Bound on |E[X_(r)] - u_r| where u_r is the r-th smallest mean.
double order_stat_gap_bound(int n, int r, const std::vector<double>& means,
                            const std::vector<double>& variances);

// Monte-Carlo moments of the per-edge and per-worker completion times at a
// fixed tolerance and load.
struct GapBoundInputs {
  std::vector<double> edge_means;
  std::vector<double> edge_variances;
  std::vector<std::vector<double>> worker_means;
  std::vector<std::vector<double>> worker_variances;
  double total_mean = 0.0;
  double total_variance = 0.0;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
};

GapBoundInputs estimate_gap_inputs(const Topology& topology, const SystemProfile& profiles,
                                   const Tolerance& tolerance, int load, std::int64_t trials,
                                   std::uint64_t seed);

struct GapBound {
  double edge_term = 0.0;
  std::vector<double> worker_terms;
  double bound = 0.0;
};

// f(n, n - s_e) * edge spread + max_i f(m_i, m_i - s_w) * worker spread of edge i.
GapBound runtime_gap_bound(const Selection& selection, const GapBoundInputs& inputs);

}  // namespace hgc

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hgc/rng.hpp"
#include "hgc/topology.hpp"

namespace hgc {

// All times are milliseconds.
struct WorkerProfile {
  double compute_ms = 0.0;   // c: deterministic compute time per sub-dataset
  double jitter_rate = 1.0;  // gamma: rate (1/ms) of the exponential compute jitter
  double link_ms = 0.0;      // tau: one transmission to the edge node
  double failure = 0.0;      // p: per-transmission failure probability

  void validate() const;
};

struct EdgeProfile {
  double link_ms = 0.0;  // one transmission to the master
  double failure = 0.0;

  void validate() const;
};

struct SystemProfile {
  std::vector<EdgeProfile> edges;
  std::vector<std::vector<WorkerProfile>> workers;

  const EdgeProfile& edge(int i) const { return edges.at(static_cast<std::size_t>(i - 1)); }
  const WorkerProfile& worker(int i, int j) const {
    return workers.at(static_cast<std::size_t>(i - 1)).at(static_cast<std::size_t>(j - 1));
  }
  void validate(const Topology& topology) const;

  static SystemProfile uniform(const Topology& topology, const EdgeProfile& edge,
                               const WorkerProfile& worker);
};

struct WorkerSample {
  std::int64_t edge_download_transmissions = 0;
  std::int64_t download_transmissions = 0;
  std::int64_t upload_transmissions = 0;
  double edge_download_ms = 0.0;
  double download_ms = 0.0;
  double compute_ms = 0.0;
  double upload_ms = 0.0;
  double total_ms = 0.0;
};

// Edge download, worker download, c*D plus exponential jitter, worker upload.
// Draws come from `rng` in that order.
WorkerSample sample_worker_total(const WorkerProfile& worker, const EdgeProfile& edge, int load,
                                 RandomStream& rng);

double expected_link_ms(double link_ms, double failure);
double expected_worker_total(const WorkerProfile& worker, const EdgeProfile& edge, int load);

// Random streams of one simulated iteration: one per node, keyed by trial.
struct TrialStreams {
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;

  RandomStream edge(int i) const { return RandomStream(seed, trial, static_cast<std::uint64_t>(i)); }
  RandomStream worker(int i, int j) const {
    return RandomStream(seed, trial,
                        (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(j));
  }
};

struct IterationSample {
  std::vector<std::vector<double>> worker_totals;  // T^(i,j)_tol
  std::vector<double> edge_uploads;                // T^i_com,u
  std::vector<double> edge_totals;                 // T^i_tol
  double total_ms = 0.0;                           // T_tol
  std::vector<int> fastest_edges;                  // F, ascending
  std::vector<std::vector<int>> fastest_workers;   // F_i for every edge, ascending
};

// k-th smallest (1-based) with ties broken by position.
double kth_smallest(std::span<const double> values, int k);
// Indices (1-based, ascending) of the k smallest values, ties by position.
std::vector<int> k_fastest(std::span<const double> values, int k);

// Applies the nested order statistics to given worker totals and edge uploads.
IterationSample evaluate_iteration(const Topology& topology, const Tolerance& tolerance,
                                   std::vector<std::vector<double>> worker_totals,
                                   std::vector<double> edge_uploads);

// One iteration of the two-layer system. Each edge downloads the model once
// (shared by its workers) and uploads once; worker totals include the edge
// download.
IterationSample sample_iteration(const Topology& topology, const SystemProfile& profiles,
                                 const Tolerance& tolerance, int load, const TrialStreams& streams);

// Flat master-worker system routed through the edge links: every worker
// result crosses its edge link separately, and the master waits for the
// `responders`-th fastest worker.
double sample_flat_iteration(const Topology& topology, const SystemProfile& profiles,
                             int responders, int load, const TrialStreams& streams);

// Fully homogeneous system.
struct HomogeneousParams {
  double compute_ms = 0.0;   // c
  double jitter_rate = 1.0;  // gamma
  double worker_link_ms = 0.0;  // tau_1
  double edge_link_ms = 0.0;    // tau_2
  double worker_failure = 0.0;  // p_1
  double edge_failure = 0.0;    // p_2
  int edges = 1;                // n
  int workers = 1;              // m
  int datasets = 1;             // K

  void validate() const;
  Topology topology() const { return Topology::uniform(edges, workers); }
  SystemProfile profiles() const;
};

struct EndpointChoice {
  Tolerance tolerance;
  double expected_ms = 0.0;
};

// Computation-dominated approximation:
// cK(s_e+1)(s_w+1)/(nm) + 2 tau_1 + 2 tau_2 + ln((n-s_e)(m-s_w)) / gamma.
double case1_expected(const HomogeneousParams& params, const Tolerance& tolerance);
// Smallest of the four corner values; ties go to the lexicographically
// smaller tolerance.
EndpointChoice case1_optimal(const HomogeneousParams& params);
// C_1 = min{cK, cK/m + ln m/gamma, cK/n + ln n/gamma, cK/(nm) + ln(nm)/gamma}.
double case1_threshold(const HomogeneousParams& params);

// Communication-dominated approximation with s_w = 0:
// cK(s_e+1)/(nm) + 2 tau_1 + tau_2 - (2 tau_2 / ln p_2) ln(n - s_e).
double case2_expected(const HomogeneousParams& params, int edge_stragglers);
// s_e = 0 when cK/m >= cK/(nm) - (2 tau_2 / ln p_2) ln n, else s_e = n - 1.
EndpointChoice case2_optimal(const HomogeneousParams& params);

}  // namespace hgc

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "hgc/runtime.hpp"
#include "hgc/schemes.hpp"

namespace hgc {

struct ExperimentConfig {
  Topology topology;
  SystemProfile profiles;
  std::vector<int> datasets{40};  // K sweep
  std::vector<SchemeSpec> schemes;
  std::int64_t trials = 10000;
  std::uint64_t seed = 1;
  int threads = 1;

  void validate() const;
};

struct SampleStats {
  double mean = 0.0;
  double stddev = 0.0;
  double standard_error = 0.0;
  double median = 0.0;
  double p95 = 0.0;
};

SampleStats summarize(const std::vector<double>& samples);

struct SchemeResult {
  std::string scheme;
  int datasets = 0;
  Tolerance tolerance;
  int flat_stragglers = 0;
  int load = 0;
  int master_comm_load = 0;
  SampleStats stats;
  std::vector<double> samples;
  std::string error;  // build failure; other fields are then unset

  bool ok() const { return error.empty(); }
};

struct ExperimentReport {
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<SchemeResult> results;  // scheme-major, then K in sweep order

  const SchemeResult& find(const std::string& scheme, int datasets) const;
};

// Every trial t of every scheme and K uses the node streams keyed by
// (seed, t), so schemes are compared on common random numbers and the result
// does not depend on the number of threads.
ExperimentReport run(const ExperimentConfig& config);

// gain = 1 - mean_row / mean_col; significant when the mean difference
// exceeds twice the combined standard error.
struct Comparison {
  std::vector<std::string> ranking;  // fastest first
  std::vector<std::string> schemes;  // matrix order
  std::vector<std::vector<double>> gain;
  std::vector<std::vector<bool>> significant;
};

Comparison compare_table(const ExperimentReport& report, int datasets);

// Typed node classes of the four-edge, ten-worker heterogeneous testbed.
// `heavy_compute` selects the slower per-dataset compute times.
ExperimentConfig testbed_preset(bool heavy_compute = false);
SystemProfile testbed_profiles(bool heavy_compute = false);

nlohmann::json experiment_to_json(const ExperimentReport& report);
nlohmann::json comparison_to_json(const Comparison& comparison);
nlohmann::json iteration_to_json(const IterationSample& sample);
// One line per (scheme, K, trial).
void write_samples_jsonl(const ExperimentReport& report, std::ostream& out);
// Columns: scheme, K, trial, T_tol_ms.
void write_samples_csv(const ExperimentReport& report, std::ostream& out);

}  // namespace hgc

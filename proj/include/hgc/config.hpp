#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hgc/coding.hpp"
#include "hgc/runtime.hpp"
#include "hgc/schemes.hpp"
#include "hgc/sim.hpp"
#include "hgc/traindemo.hpp"

namespace hgc {

struct TrainingSettings {
  int samples = 360;
  int dimension = 6;
  int iterations = 200;
  SchemeKind scheme = SchemeKind::kHgc;
  StragglerPolicy policy = StragglerPolicy::adversarial_cycle();
  std::uint64_t task_seed = 7;
};

struct OrderStatisticQuery {
  int rank = 1;
  std::vector<double> means;
  std::vector<double> variances;
};

struct BoundsSettings {
  std::vector<OrderStatisticQuery> order_statistics;
  // Runtime gap query: tolerance plus per-edge and per-worker moments.
  std::optional<Tolerance> gap_tolerance;
  GapBoundInputs gap_inputs;
};

// One document drives every subcommand.
struct Config {
  Topology topology;
  Tolerance tolerance;
  int datasets = 0;
  std::uint64_t seed = 1;
  SystemProfile profiles;

  std::vector<int> sweep;
  std::vector<SchemeSpec> schemes;
  std::int64_t trials = 10000;
  int threads = 1;
  std::int64_t gap_trials = 100000;

  VerifyMode verify = VerifyMode::exhaustive();
  TrainingSettings training;
  std::optional<BoundsSettings> bounds;

  ExperimentConfig experiment() const;
  void validate() const;
};

// Names accepted by preset(): "example-1", "paper-sec6", "paper-sec6-cifar".
std::vector<std::string> preset_names();
Config preset(const std::string& name);

// Fields absent from the document keep their defaults, or the values of the
// preset named by its "preset" field. Errors name the offending JSON path.
Config parse_config(const nlohmann::json& doc);
Config load_config(const std::string& path);
nlohmann::json config_to_json(const Config& config);

}  // namespace hgc

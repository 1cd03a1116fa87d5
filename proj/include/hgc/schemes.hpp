#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hgc/coding.hpp"
#include "hgc/jncss.hpp"
#include "hgc/runtime.hpp"
#include "hgc/topology.hpp"

namespace hgc {

enum class SchemeKind { kUncoded, kGreedy, kCgcWorker, kCgcEdge, kStandardGc, kHgc, kHgcJncss };

inline constexpr SchemeKind kAllSchemeKinds[] = {
    SchemeKind::kUncoded, SchemeKind::kGreedy, SchemeKind::kCgcWorker, SchemeKind::kCgcEdge,
    SchemeKind::kStandardGc, SchemeKind::kHgc, SchemeKind::kHgcJncss};

// "Uncoded", "Greedy", "CGC-W", "CGC-E", "StandardGC", "HGC", "HGC-JNCSS".
std::string scheme_name(SchemeKind kind);
// Throws UnknownKindError.
SchemeKind parse_scheme_kind(const std::string& name);
// Every kind except Greedy recovers the exact full gradient.
bool recovers_full_gradient(SchemeKind kind);

// Requested scheme. `tolerance` is the hierarchical straggler budget; CGC-W
// reads only its worker part, CGC-E only its edge part, StandardGC maps it
// to a flat worker count, and HGC-JNCSS ignores it.
struct SchemeSpec {
  SchemeKind kind = SchemeKind::kHgc;
  Tolerance tolerance;
};

// Surviving nodes of one iteration: edges F and, for every edge, workers F_i.
struct StragglerPattern {
  std::vector<int> edges;
  std::vector<std::vector<int>> workers;

  // Everyone responds.
  static StragglerPattern none(const Topology& topology);
};

struct BuildOptions {
  // Construct encoding coefficients; runtime simulation does not need them.
  bool with_code = true;
  std::uint64_t code_seed = 0;
};

class Scheme {
 public:
  SchemeKind kind() const { return kind_; }
  std::string name() const { return scheme_name(kind_); }
  const Topology& topology() const { return topology_; }
  int datasets() const { return datasets_; }
  // Straggler budget in hierarchical terms.
  const Tolerance& tolerance() const { return tolerance_; }
  // Workers the flat code survives (StandardGC only, otherwise 0).
  int flat_stragglers() const { return flat_stragglers_; }
  int load() const { return plan_.worker_load; }
  const AllocationPlan& plan() const { return plan_; }
  const std::optional<CodingScheme>& code() const { return code_; }
  const std::optional<Selection>& selection() const { return selection_; }

  // Workers edge i waits for, and edges the master waits for. StandardGC
  // reports the number of workers the master waits for as master_wait().
  int edge_wait(int edge) const;
  int master_wait() const;
  // Results received by the master per iteration.
  int master_comm_load() const;

  // Straggling pattern is accepted when every edge in F keeps at least
  // edge_wait workers and F has at least master_wait edges (Greedy accepts
  // anything non-empty).
  bool tolerates(const StragglerPattern& pattern) const;

  // Gradient assembled by the master from per-dataset partial gradients
  // (keys 1..K). Throws ValidationError when the pattern is not tolerated.
  GradientVector aggregate(const std::map<int, GradientVector>& partials,
                           const StragglerPattern& pattern) const;

  // Iteration time of one simulated trial.
  double sample(const SystemProfile& profiles, const TrialStreams& streams) const;

 private:
  friend Scheme build(const SchemeSpec&, const Topology&, const SystemProfile*, int,
                      const BuildOptions&);
  Scheme() = default;

  SchemeKind kind_ = SchemeKind::kHgc;
  Topology topology_;
  int datasets_ = 0;
  Tolerance tolerance_;
  int flat_stragglers_ = 0;
  AllocationPlan plan_;
  std::optional<CodingScheme> code_;
  std::optional<Selection> selection_;
};

// `profiles` is required for HGC-JNCSS only.
Scheme build(const SchemeSpec& spec, const Topology& topology, const SystemProfile* profiles,
             int datasets, const BuildOptions& options = {});

// M single-worker edges: the flat master-worker system.
Topology flattened(const Topology& topology);

}  // namespace hgc

#include "hgc/schemes.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "hgc/error.hpp"
#include "hgc/tradeoff.hpp"

namespace hgc {

namespace {

void check_pattern_shape(const Topology& topology, const StragglerPattern& pattern) {
  if (static_cast<int>(pattern.workers.size()) != topology.edges()) {
    throw ValidationError("straggler pattern: one worker list per edge is required");
  }
  std::set<int> seen;
  for (int i : pattern.edges) {
    if (i < 1 || i > topology.edges() || !seen.insert(i).second) {
      throw ValidationError("straggler pattern: bad or repeated edge index " + std::to_string(i));
    }
  }
  for (int i = 1; i <= topology.edges(); ++i) {
    std::set<int> w;
    for (int j : pattern.workers[static_cast<std::size_t>(i - 1)]) {
      if (j < 1 || j > topology.workers(i) || !w.insert(j).second) {
        throw ValidationError("straggler pattern: bad or repeated worker index " +
                              std::to_string(j) + " at edge " + std::to_string(i));
      }
    }
  }
}

GradientVector plain_sum(const AllocationPlan& plan, int edge, int worker,
                         const std::map<int, GradientVector>& partials) {
  GradientVector out;
  for (int k : plan.worker_set(edge, worker)) {
    auto it = partials.find(k);
    if (it == partials.end()) {
      throw MissingPartialError("aggregate: missing partial gradient " + std::to_string(k), {k});
    }
    if (out.size() == 0) out = GradientVector::Zero(it->second.size());
    out += it->second;
  }
  return out;
}

std::vector<int> prefix(const std::vector<int>& v, int count) {
  return std::vector<int>(v.begin(), v.begin() + std::min<std::ptrdiff_t>(count, static_cast<std::ptrdiff_t>(v.size())));
}

}  // namespace

std::string scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::kUncoded: return "Uncoded";
    case SchemeKind::kGreedy: return "Greedy";
    case SchemeKind::kCgcWorker: return "CGC-W";
    case SchemeKind::kCgcEdge: return "CGC-E";
    case SchemeKind::kStandardGc: return "StandardGC";
    case SchemeKind::kHgc: return "HGC";
    case SchemeKind::kHgcJncss: return "HGC-JNCSS";
  }
  return "?";
}

SchemeKind parse_scheme_kind(const std::string& name) {
  for (SchemeKind k : kAllSchemeKinds) {
    if (scheme_name(k) == name) return k;
  }
  throw UnknownKindError("unknown scheme kind '" + name + "'");
}

bool recovers_full_gradient(SchemeKind kind) { return kind != SchemeKind::kGreedy; }

StragglerPattern StragglerPattern::none(const Topology& topology) {
  StragglerPattern p;
  for (int i = 1; i <= topology.edges(); ++i) {
    p.edges.push_back(i);
    std::vector<int> w(static_cast<std::size_t>(topology.workers(i)));
    for (int j = 1; j <= topology.workers(i); ++j) w[static_cast<std::size_t>(j - 1)] = j;
    p.workers.push_back(std::move(w));
  }
  return p;
}

Topology flattened(const Topology& topology) {
  return Topology{std::vector<int>(static_cast<std::size_t>(topology.total_workers()), 1)};
}

int Scheme::edge_wait(int edge) const {
  return topology_.workers(edge) - tolerance_.worker_stragglers;
}

int Scheme::master_wait() const {
  if (kind_ == SchemeKind::kStandardGc) return topology_.total_workers() - flat_stragglers_;
  return topology_.edges() - tolerance_.edge_stragglers;
}

int Scheme::master_comm_load() const {
  switch (kind_) {
    case SchemeKind::kUncoded:
    case SchemeKind::kCgcWorker:
      return topology_.edges();
    case SchemeKind::kStandardGc:
      return topology_.total_workers() - flat_stragglers_;
    default:
      return topology_.edges() - tolerance_.edge_stragglers;
  }
}

bool Scheme::tolerates(const StragglerPattern& pattern) const {
  check_pattern_shape(topology_, pattern);
  if (kind_ == SchemeKind::kGreedy) return !pattern.edges.empty();
  if (kind_ == SchemeKind::kStandardGc) {
    int survivors = 0;
    for (int i : pattern.edges) survivors += static_cast<int>(pattern.workers[static_cast<std::size_t>(i - 1)].size());
    return survivors >= master_wait();
  }
  if (static_cast<int>(pattern.edges.size()) < master_wait()) return false;
  for (int i : prefix(pattern.edges, master_wait())) {
    if (static_cast<int>(pattern.workers[static_cast<std::size_t>(i - 1)].size()) < edge_wait(i)) return false;
  }
  return true;
}

GradientVector Scheme::aggregate(const std::map<int, GradientVector>& partials,
                                 const StragglerPattern& pattern) const {
  if (!tolerates(pattern)) {
    throw ValidationError(name() + ": straggler pattern exceeds the tolerated budget");
  }
  if (kind_ == SchemeKind::kUncoded || kind_ == SchemeKind::kGreedy) {
    GradientVector total;
    for (int i : prefix(pattern.edges, master_wait())) {
      for (int j : prefix(pattern.workers[static_cast<std::size_t>(i - 1)], edge_wait(i))) {
        GradientVector g = plain_sum(plan_, i, j, partials);
        if (total.size() == 0) total = GradientVector::Zero(g.size());
        total += g;
      }
    }
    if (total.size() == 0) {
      total = GradientVector::Zero(partials.empty() ? 0 : partials.begin()->second.size());
    }
    return total;
  }
  if (!code_) throw ValidationError(name() + ": built without coding coefficients");

  if (kind_ == SchemeKind::kStandardGc) {
    std::vector<int> flat;
    for (int i : pattern.edges) {
      for (int j : pattern.workers[static_cast<std::size_t>(i - 1)]) {
        flat.push_back(topology_.flat_index(i, j) + 1);
      }
    }
    flat = prefix(flat, master_wait());
    std::sort(flat.begin(), flat.end());
    std::map<int, GradientVector> received;
    const int one[] = {1};
    for (int e : flat) {
      std::map<int, GradientVector> from_worker{{1, worker_encode(*code_, e, 1, partials)}};
      received[e] = edge_decode(*code_, e, from_worker, one);
    }
    return master_decode(*code_, received, flat);
  }

  std::vector<int> fastest = prefix(pattern.edges, master_wait());
  std::sort(fastest.begin(), fastest.end());
  std::map<int, GradientVector> received;
  for (int i : fastest) {
    std::vector<int> workers = prefix(pattern.workers[static_cast<std::size_t>(i - 1)], edge_wait(i));
    std::sort(workers.begin(), workers.end());
    std::map<int, GradientVector> results;
    for (int j : workers) results[j] = worker_encode(*code_, i, j, partials);
    received[i] = edge_decode(*code_, i, results, workers);
  }
  return master_decode(*code_, received, fastest);
}

double Scheme::sample(const SystemProfile& profiles, const TrialStreams& streams) const {
  if (kind_ == SchemeKind::kStandardGc) {
    return sample_flat_iteration(topology_, profiles, master_wait(), load(), streams);
  }
  return sample_iteration(topology_, profiles, tolerance_, load(), streams).total_ms;
}

Scheme build(const SchemeSpec& spec, const Topology& topology, const SystemProfile* profiles,
             int datasets, const BuildOptions& options) {
  topology.validate();
  if (datasets < 1) throw ValidationError("K must be >= 1");
  Scheme s;
  s.kind_ = spec.kind;
  s.topology_ = topology;
  s.datasets_ = datasets;

  switch (spec.kind) {
    case SchemeKind::kUncoded:
      s.tolerance_ = Tolerance{0, 0};
      break;
    case SchemeKind::kGreedy:
    case SchemeKind::kHgc:
    case SchemeKind::kStandardGc:
      s.tolerance_ = spec.tolerance;
      break;
    case SchemeKind::kCgcWorker:
      s.tolerance_ = Tolerance{0, spec.tolerance.worker_stragglers};
      break;
    case SchemeKind::kCgcEdge:
      s.tolerance_ = Tolerance{spec.tolerance.edge_stragglers, 0};
      break;
    case SchemeKind::kHgcJncss:
      if (profiles == nullptr) throw ValidationError("HGC-JNCSS needs node profiles");
      s.selection_ = solve(topology, *profiles, datasets);
      s.tolerance_ = s.selection_->tolerance;
      break;
  }
  validate_tolerance(topology, s.tolerance_);

  if (spec.kind == SchemeKind::kUncoded || spec.kind == SchemeKind::kGreedy) {
    s.plan_ = allocate(topology, Tolerance{0, 0}, datasets);
  } else if (spec.kind == SchemeKind::kStandardGc) {
    s.flat_stragglers_ = flat_straggler_count(topology, s.tolerance_);
    s.plan_ = allocate(flattened(topology), Tolerance{s.flat_stragglers_, 0}, datasets);
  } else {
    s.plan_ = allocate(topology, s.tolerance_, datasets);
  }
  if (options.with_code && spec.kind != SchemeKind::kUncoded && spec.kind != SchemeKind::kGreedy) {
    s.code_ = build_scheme(s.plan_, options.code_seed);
  }
  return s;
}

}  // namespace hgc

#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "hgc/error.hpp"

namespace hgc {

// Master -> n edge nodes -> m_i workers per edge. Edge and worker indices
// in the public API are 1-based.
struct Topology {
  std::vector<int> workers_per_edge;

  static Topology uniform(int edges, int workers) {
    return Topology{std::vector<int>(static_cast<std::size_t>(edges), workers)};
  }

  int edges() const { return static_cast<int>(workers_per_edge.size()); }
  int workers(int edge) const { return workers_per_edge.at(static_cast<std::size_t>(edge - 1)); }
  int total_workers() const {
    return std::accumulate(workers_per_edge.begin(), workers_per_edge.end(), 0);
  }
  int min_workers() const;

  // Position of worker (i, j) in a flat, edge-major enumeration (0-based).
  int flat_index(int edge, int worker) const;

  void validate() const;

  bool operator==(const Topology&) const = default;
};

// Number of edge stragglers s_e and per-edge worker stragglers s_w to survive.
struct Tolerance {
  int edge_stragglers = 0;
  int worker_stragglers = 0;

  bool operator==(const Tolerance&) const = default;
  auto operator<=>(const Tolerance&) const = default;
};

// Throws ValidationError unless 0 <= s_e < n and 0 <= s_w < min_i m_i.
void validate_tolerance(const Topology& topology, const Tolerance& tolerance);

std::string to_string(const Tolerance& tolerance);

}  // namespace hgc

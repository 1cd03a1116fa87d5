#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "hgc/topology.hpp"

namespace hgc {

using Rational = boost::rational<std::int64_t>;

// Normalized per-worker load D/K. `numerator`/`denominator` keep the form
// the bound is naturally written in (e.g. 6/9); value() is the reduced ratio.
struct LoadBound {
  std::int64_t numerator = 0;
  std::int64_t denominator = 1;

  Rational value() const { return Rational(numerator, denominator); }
  double to_double() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
  std::string to_string() const;
};

bool operator<(const LoadBound& a, const LoadBound& b);
bool operator==(const LoadBound& a, const LoadBound& b);

// Multi-layer tree: every node of layer i-1 has `fanouts[i]` children and
// must tolerate `tolerances[i]` stragglers among them.
struct LayerSpec {
  std::vector<int> fanouts;
  std::vector<int> tolerances;

  int layers() const { return static_cast<int>(fanouts.size()); }
  std::int64_t total_workers() const;
  void validate() const;
};

// (s_e + 1)(s_w + 1) / sum_i m_i.
LoadBound hgc_min_load(const Topology& topology, const Tolerance& tolerance);

// Load of a single-layer code that has to treat every worker below a
// straggling edge as a straggler: (max_{|S|=s_e} sum_S m_i + (n - s_e) s_w + 1) / sum_i m_i.
LoadBound conventional_min_load(const Topology& topology, const Tolerance& tolerance);

// prod_i (s_i + 1) / W.
LoadBound multilayer_min_load(const LayerSpec& layers);

// Largest number of individual workers a flat code must survive when s_e
// edges and s_w workers under each remaining edge straggle.
int flat_straggler_count(const Topology& topology, const Tolerance& tolerance);

struct Feasibility {
  bool feasible = false;
  std::string diagnostic;
  // Surviving edge set with the least worker mass, and its normalized coverage
  // sum_{i in F} m_i (s_e + 1) / sum_i m_i.
  std::vector<int> worst_surviving_edges;
  Rational worst_coverage{0};
};

Feasibility check_feasibility(const Topology& topology, const Tolerance& tolerance);

}  // namespace hgc

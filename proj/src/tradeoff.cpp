#include "hgc/tradeoff.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>

namespace hgc {

std::string LoadBound::to_string() const {
  std::ostringstream os;
  os << numerator << "/" << denominator;
  return os.str();
}

bool operator<(const LoadBound& a, const LoadBound& b) { return a.value() < b.value(); }
bool operator==(const LoadBound& a, const LoadBound& b) { return a.value() == b.value(); }

std::int64_t LayerSpec::total_workers() const {
  std::int64_t w = 1;
  for (int f : fanouts) w *= f;
  return w;
}

void LayerSpec::validate() const {
  if (fanouts.empty()) throw ValidationError("layers: at least one layer is required");
  if (fanouts.size() != tolerances.size()) {
    throw ValidationError("layers: fanouts and tolerances differ in length");
  }
  for (std::size_t i = 0; i < fanouts.size(); ++i) {
    if (fanouts[i] < 1 || tolerances[i] < 0 || tolerances[i] >= fanouts[i]) {
      std::ostringstream os;
      os << "layers: layer " << i + 1 << " needs 0 <= s < fanout, got s=" << tolerances[i]
         << " fanout=" << fanouts[i];
      throw ValidationError(os.str());
    }
  }
}

LoadBound hgc_min_load(const Topology& topology, const Tolerance& tolerance) {
  validate_tolerance(topology, tolerance);
  return LoadBound{static_cast<std::int64_t>(tolerance.edge_stragglers + 1) *
                       (tolerance.worker_stragglers + 1),
                   topology.total_workers()};
}

int flat_straggler_count(const Topology& topology, const Tolerance& tolerance) {
  validate_tolerance(topology, tolerance);
  std::vector<int> m = topology.workers_per_edge;
  std::sort(m.begin(), m.end(), std::greater<>());
  const int s_e = tolerance.edge_stragglers;
  const int largest = std::accumulate(m.begin(), m.begin() + s_e, 0);
  return largest + (topology.edges() - s_e) * tolerance.worker_stragglers;
}

LoadBound conventional_min_load(const Topology& topology, const Tolerance& tolerance) {
  return LoadBound{flat_straggler_count(topology, tolerance) + 1, topology.total_workers()};
}

LoadBound multilayer_min_load(const LayerSpec& layers) {
  layers.validate();
  std::int64_t num = 1;
  for (int s : layers.tolerances) num *= s + 1;
  return LoadBound{num, layers.total_workers()};
}

Feasibility check_feasibility(const Topology& topology, const Tolerance& tolerance) {
  Feasibility out;
  try {
    validate_tolerance(topology, tolerance);
  } catch (const ValidationError& e) {
    out.diagnostic = e.what();
    return out;
  }
  const int n = topology.edges();
  const int survivors = n - tolerance.edge_stragglers;
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 1);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return topology.workers(a) < topology.workers(b); });
  order.resize(static_cast<std::size_t>(survivors));
  std::sort(order.begin(), order.end());
  std::int64_t mass = 0;
  for (int i : order) mass += topology.workers(i);
  out.worst_surviving_edges = order;
  out.worst_coverage =
      Rational(mass * (tolerance.edge_stragglers + 1), topology.total_workers());
  out.feasible = out.worst_coverage >= Rational(1);
  std::ostringstream os;
  os << "worst surviving edge set {";
  for (std::size_t k = 0; k < order.size(); ++k) os << (k ? "," : "") << order[k];
  os << "} covers " << out.worst_coverage.numerator() << "/"
     << out.worst_coverage.denominator() << (out.feasible ? " >= 1" : " < 1 of the data");
  out.diagnostic = os.str();
  return out;
}

}  // namespace hgc

#include "hgc/topology.hpp"

#include <algorithm>
#include <sstream>

namespace hgc {

int Topology::min_workers() const {
  if (workers_per_edge.empty()) return 0;
  return *std::min_element(workers_per_edge.begin(), workers_per_edge.end());
}

int Topology::flat_index(int edge, int worker) const {
  int offset = 0;
  for (int i = 1; i < edge; ++i) offset += workers(i);
  return offset + worker - 1;
}

void Topology::validate() const {
  if (workers_per_edge.empty()) {
    throw ValidationError("topology: at least one edge node is required");
  }
  for (std::size_t i = 0; i < workers_per_edge.size(); ++i) {
    if (workers_per_edge[i] < 1) {
      std::ostringstream os;
      os << "topology: edge " << i + 1 << " has " << workers_per_edge[i]
         << " workers, need at least 1";
      throw ValidationError(os.str());
    }
  }
}

void validate_tolerance(const Topology& topology, const Tolerance& tolerance) {
  topology.validate();
  if (tolerance.edge_stragglers < 0 || tolerance.edge_stragglers >= topology.edges()) {
    std::ostringstream os;
    os << "tolerance: s_e=" << tolerance.edge_stragglers << " outside [0, " << topology.edges()
       << ")";
    throw ValidationError(os.str());
  }
  if (tolerance.worker_stragglers < 0 || tolerance.worker_stragglers >= topology.min_workers()) {
    std::ostringstream os;
    os << "tolerance: s_w=" << tolerance.worker_stragglers << " outside [0, "
       << topology.min_workers() << ")";
    throw ValidationError(os.str());
  }
}

std::string to_string(const Tolerance& tolerance) {
  std::ostringstream os;
  os << "(" << tolerance.edge_stragglers << ", " << tolerance.worker_stragglers << ")";
  return os.str();
}

}  // namespace hgc

#include "hgc/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace hgc {

namespace {

void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p < 1.0)) {
    std::ostringstream os;
    os << what << ": failure probability " << p << " outside [0, 1)";
    throw ValidationError(os.str());
  }
}

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || std::isnan(v)) {
    std::ostringstream os;
    os << what << " must be >= 0, got " << v;
    throw ValidationError(os.str());
  }
}

std::vector<int> order_by_value(std::span<const double> values) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return values[static_cast<std::size_t>(a)] < values[static_cast<std::size_t>(b)];
  });
  return order;
}

}  // namespace

void WorkerProfile::validate() const {
  require_nonnegative(compute_ms, "worker compute time");
  if (!(jitter_rate > 0.0)) throw ValidationError("worker jitter rate must be > 0");
  require_nonnegative(link_ms, "worker link delay");
  require_probability(failure, "worker link");
}

void EdgeProfile::validate() const {
  require_nonnegative(link_ms, "edge link delay");
  require_probability(failure, "edge link");
}

void SystemProfile::validate(const Topology& topology) const {
  topology.validate();
  if (static_cast<int>(edges.size()) != topology.edges() ||
      static_cast<int>(workers.size()) != topology.edges()) {
    throw ValidationError("profiles: one profile per edge node is required");
  }
  for (int i = 1; i <= topology.edges(); ++i) {
    edge(i).validate();
    if (static_cast<int>(workers[static_cast<std::size_t>(i - 1)].size()) != topology.workers(i)) {
      std::ostringstream os;
      os << "profiles: edge " << i << " needs " << topology.workers(i) << " worker profiles";
      throw ValidationError(os.str());
    }
    for (const auto& w : workers[static_cast<std::size_t>(i - 1)]) w.validate();
  }
}

SystemProfile SystemProfile::uniform(const Topology& topology, const EdgeProfile& edge,
                                     const WorkerProfile& worker) {
  SystemProfile out;
  for (int i = 1; i <= topology.edges(); ++i) {
    out.edges.push_back(edge);
    out.workers.emplace_back(static_cast<std::size_t>(topology.workers(i)), worker);
  }
  return out;
}

WorkerSample sample_worker_total(const WorkerProfile& worker, const EdgeProfile& edge, int load,
                                 RandomStream& rng) {
  WorkerSample s;
  s.edge_download_transmissions = rng.geometric(edge.failure);
  s.download_transmissions = rng.geometric(worker.failure);
  const double jitter = rng.exponential(worker.jitter_rate);
  s.upload_transmissions = rng.geometric(worker.failure);
  s.edge_download_ms = static_cast<double>(s.edge_download_transmissions) * edge.link_ms;
  s.download_ms = static_cast<double>(s.download_transmissions) * worker.link_ms;
  s.compute_ms = worker.compute_ms * load + jitter;
  s.upload_ms = static_cast<double>(s.upload_transmissions) * worker.link_ms;
  s.total_ms = s.edge_download_ms + s.download_ms + s.compute_ms + s.upload_ms;
  return s;
}

double expected_link_ms(double link_ms, double failure) { return link_ms / (1.0 - failure); }

double expected_worker_total(const WorkerProfile& worker, const EdgeProfile& edge, int load) {
  return expected_link_ms(edge.link_ms, edge.failure) +
         2.0 * expected_link_ms(worker.link_ms, worker.failure) + worker.compute_ms * load +
         1.0 / worker.jitter_rate;
}

double kth_smallest(std::span<const double> values, int k) {
  if (k < 1 || k > static_cast<int>(values.size())) {
    throw ValidationError("kth_smallest: k out of range");
  }
  std::vector<double> copy(values.begin(), values.end());
  std::nth_element(copy.begin(), copy.begin() + (k - 1), copy.end());
  return copy[static_cast<std::size_t>(k - 1)];
}

std::vector<int> k_fastest(std::span<const double> values, int k) {
  auto order = order_by_value(values);
  order.resize(static_cast<std::size_t>(k));
  for (int& v : order) ++v;
  std::sort(order.begin(), order.end());
  return order;
}

IterationSample evaluate_iteration(const Topology& topology, const Tolerance& tolerance,
                                   std::vector<std::vector<double>> worker_totals,
                                   std::vector<double> edge_uploads) {
  validate_tolerance(topology, tolerance);
  IterationSample s;
  const int n = topology.edges();
  for (int i = 1; i <= n; ++i) {
    const auto& times = worker_totals.at(static_cast<std::size_t>(i - 1));
    const int wait = topology.workers(i) - tolerance.worker_stragglers;
    s.edge_totals.push_back(edge_uploads.at(static_cast<std::size_t>(i - 1)) +
                            kth_smallest(times, wait));
    s.fastest_workers.push_back(k_fastest(times, wait));
  }
  const int wait = n - tolerance.edge_stragglers;
  s.total_ms = kth_smallest(s.edge_totals, wait);
  s.fastest_edges = k_fastest(s.edge_totals, wait);
  s.worker_totals = std::move(worker_totals);
  s.edge_uploads = std::move(edge_uploads);
  return s;
}

IterationSample sample_iteration(const Topology& topology, const SystemProfile& profiles,
                                 const Tolerance& tolerance, int load,
                                 const TrialStreams& streams) {
  const int n = topology.edges();
  std::vector<std::vector<double>> totals(static_cast<std::size_t>(n));
  std::vector<double> uploads(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    const EdgeProfile& edge = profiles.edge(i);
    RandomStream edge_rng = streams.edge(i);
    const double download = static_cast<double>(edge_rng.geometric(edge.failure)) * edge.link_ms;
    uploads[static_cast<std::size_t>(i - 1)] =
        static_cast<double>(edge_rng.geometric(edge.failure)) * edge.link_ms;
    auto& row = totals[static_cast<std::size_t>(i - 1)];
    row.reserve(static_cast<std::size_t>(topology.workers(i)));
    for (int j = 1; j <= topology.workers(i); ++j) {
      const WorkerProfile& w = profiles.worker(i, j);
      RandomStream rng = streams.worker(i, j);
      const double down = static_cast<double>(rng.geometric(w.failure)) * w.link_ms;
      const double compute = w.compute_ms * load + rng.exponential(w.jitter_rate);
      const double up = static_cast<double>(rng.geometric(w.failure)) * w.link_ms;
      row.push_back(download + down + compute + up);
    }
  }
  return evaluate_iteration(topology, tolerance, std::move(totals), std::move(uploads));
}

double sample_flat_iteration(const Topology& topology, const SystemProfile& profiles,
                             int responders, int load, const TrialStreams& streams) {
  std::vector<double> totals;
  totals.reserve(static_cast<std::size_t>(topology.total_workers()));
  for (int i = 1; i <= topology.edges(); ++i) {
    const EdgeProfile& edge = profiles.edge(i);
    RandomStream edge_rng = streams.edge(i);
    const double download = static_cast<double>(edge_rng.geometric(edge.failure)) * edge.link_ms;
    for (int j = 1; j <= topology.workers(i); ++j) {
      const WorkerProfile& w = profiles.worker(i, j);
      RandomStream rng = streams.worker(i, j);
      const double down = static_cast<double>(rng.geometric(w.failure)) * w.link_ms;
      const double compute = w.compute_ms * load + rng.exponential(w.jitter_rate);
      const double up = static_cast<double>(rng.geometric(w.failure)) * w.link_ms;
      // The relay over the edge link is drawn from the worker's own stream
      // because each result is forwarded separately.
      const double relay = static_cast<double>(rng.geometric(edge.failure)) * edge.link_ms;
      totals.push_back(download + down + compute + up + relay);
    }
  }
  return kth_smallest(totals, responders);
}

void HomogeneousParams::validate() const {
  if (edges < 1 || workers < 1 || datasets < 1) {
    throw ValidationError("homogeneous: n, m and K must be positive");
  }
  WorkerProfile{compute_ms, jitter_rate, worker_link_ms, worker_failure}.validate();
  EdgeProfile{edge_link_ms, edge_failure}.validate();
}

SystemProfile HomogeneousParams::profiles() const {
  return SystemProfile::uniform(topology(), EdgeProfile{edge_link_ms, edge_failure},
                                WorkerProfile{compute_ms, jitter_rate, worker_link_ms,
                                              worker_failure});
}

double case1_expected(const HomogeneousParams& p, const Tolerance& tolerance) {
  p.validate();
  validate_tolerance(p.topology(), tolerance);
  const double n = p.edges;
  const double m = p.workers;
  const double load = p.compute_ms * p.datasets * (tolerance.edge_stragglers + 1) *
                      (tolerance.worker_stragglers + 1) / (n * m);
  const double waited = (n - tolerance.edge_stragglers) * (m - tolerance.worker_stragglers);
  return load + 2.0 * p.worker_link_ms + 2.0 * p.edge_link_ms + std::log(waited) / p.jitter_rate;
}

double case1_threshold(const HomogeneousParams& p) {
  p.validate();
  const double ck = p.compute_ms * p.datasets;
  const double n = p.edges;
  const double m = p.workers;
  const double g = p.jitter_rate;
  return std::min({ck, ck / m + std::log(m) / g, ck / n + std::log(n) / g,
                   ck / (n * m) + std::log(n * m) / g});
}

EndpointChoice case1_optimal(const HomogeneousParams& p) {
  p.validate();
  const Tolerance corners[] = {{0, 0}, {0, p.workers - 1}, {p.edges - 1, 0}, {p.edges - 1, p.workers - 1}};
  EndpointChoice best{corners[0], case1_expected(p, corners[0])};
  for (const auto& t : corners) {
    const double v = case1_expected(p, t);
    if (v < best.expected_ms) best = {t, v};
  }
  return best;
}

double case2_expected(const HomogeneousParams& p, int edge_stragglers) {
  p.validate();
  validate_tolerance(p.topology(), Tolerance{edge_stragglers, 0});
  if (!(p.edge_failure > 0.0)) {
    throw DomainError("case2_expected: edge failure probability must be > 0 (ln p_2 undefined)");
  }
  const double n = p.edges;
  const double m = p.workers;
  return p.compute_ms * p.datasets * (edge_stragglers + 1) / (n * m) + 2.0 * p.worker_link_ms +
         p.edge_link_ms -
         (2.0 * p.edge_link_ms / std::log(p.edge_failure)) * std::log(n - edge_stragglers);
}

EndpointChoice case2_optimal(const HomogeneousParams& p) {
  const double none = case2_expected(p, 0);
  const double all = case2_expected(p, p.edges - 1);
  // Equivalent to cK/m >= cK/(nm) - (2 tau_2 / ln p_2) ln n.
  if (none <= all) return {Tolerance{0, 0}, none};
  return {Tolerance{p.edges - 1, 0}, all};
}

}  // namespace hgc

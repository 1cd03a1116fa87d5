#include "hgc/jncss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "hgc/coding.hpp"
#include "hgc/combinatorics.hpp"
#include "hgc/error.hpp"

namespace hgc {

namespace {

// Indices (0-based) sorted by value, ties by position.
std::vector<int> ranked(const std::vector<double>& values) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return values[static_cast<std::size_t>(a)] < values[static_cast<std::size_t>(b)];
  });
  return order;
}

int load_for(const Topology& topology, const Tolerance& tolerance, int datasets) {
  const std::int64_t num = static_cast<std::int64_t>(datasets) * (tolerance.edge_stragglers + 1) *
                           (tolerance.worker_stragglers + 1);
  return static_cast<int>(num / topology.total_workers());
}

}  // namespace

ProxyCosts proxy_costs(const Topology& topology, const SystemProfile& profiles, int load) {
  if (load < 1) throw ValidationError("proxy_costs: load must be >= 1");
  ProxyCosts costs;
  for (int i = 1; i <= topology.edges(); ++i) {
    const EdgeProfile& e = profiles.edge(i);
    const double edge_link = expected_link_ms(e.link_ms, e.failure);
    costs.edge.push_back(edge_link);
    std::vector<double> row;
    for (int j = 1; j <= topology.workers(i); ++j) {
      const WorkerProfile& w = profiles.worker(i, j);
      row.push_back(w.compute_ms * load + 1.0 / w.jitter_rate +
                    2.0 * expected_link_ms(w.link_ms, w.failure) + edge_link);
    }
    costs.worker.push_back(std::move(row));
  }
  return costs;
}

int Selection::selected_edges() const { return std::accumulate(edges.begin(), edges.end(), 0); }

int Selection::selected_workers(int edge) const {
  const auto& row = workers.at(static_cast<std::size_t>(edge - 1));
  return std::accumulate(row.begin(), row.end(), 0);
}

void check_selection(const Topology& topology, const Selection& selection) {
  validate_tolerance(topology, selection.tolerance);
  const int n = topology.edges();
  if (static_cast<int>(selection.edges.size()) != n ||
      static_cast<int>(selection.workers.size()) != n) {
    throw ValidationError("selection: vector sizes do not match the topology");
  }
  for (int v : selection.edges) {
    if (v != 0 && v != 1) throw ValidationError("selection: edge indicators must be 0 or 1");
  }
  if (selection.selected_edges() != n - selection.tolerance.edge_stragglers) {
    throw ValidationError("selection: wrong number of selected edges");
  }
  for (int i = 1; i <= n; ++i) {
    const auto& row = selection.workers[static_cast<std::size_t>(i - 1)];
    if (static_cast<int>(row.size()) != topology.workers(i)) {
      throw ValidationError("selection: worker vector size does not match edge");
    }
    for (int v : row) {
      if (v != 0 && v != 1) throw ValidationError("selection: worker indicators must be 0 or 1");
    }
    const int want = selection.edges[static_cast<std::size_t>(i - 1)] *
                     (topology.workers(i) - selection.tolerance.worker_stragglers);
    if (selection.selected_workers(i) != want) {
      std::ostringstream os;
      os << "selection: edge " << i << " selects " << selection.selected_workers(i)
         << " workers, expected " << want;
      throw ValidationError(os.str());
    }
  }
}

std::string candidate_rejection(const Topology& topology, const Tolerance& tolerance, int datasets) {
  const std::int64_t num = static_cast<std::int64_t>(datasets) * (tolerance.edge_stragglers + 1) *
                           (tolerance.worker_stragglers + 1);
  if (num % topology.total_workers() != 0) {
    std::ostringstream os;
    os << "load K(s_e+1)(s_w+1)/sum(m) = " << num << "/" << topology.total_workers()
       << " is not an integer";
    return os.str();
  }
  try {
    allocate(topology, tolerance, datasets);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

Selection solve(const Topology& topology, const SystemProfile& profiles, int datasets) {
  topology.validate();
  profiles.validate(topology);
  const int n = topology.edges();
  Selection best;
  std::vector<SkippedCandidate> skipped;
  std::int64_t evaluations = 0;
  bool found = false;

  for (int se = 0; se < n; ++se) {
    for (int sw = 0; sw < topology.min_workers(); ++sw) {
      const Tolerance tol{se, sw};
      if (auto reason = candidate_rejection(topology, tol, datasets); !reason.empty()) {
        skipped.push_back({tol, std::move(reason)});
        continue;
      }
      const int load = load_for(topology, tol, datasets);
      const ProxyCosts costs = proxy_costs(topology, profiles, load);
      evaluations += topology.total_workers() + n;

      std::vector<double> edge_values(static_cast<std::size_t>(n));
      std::vector<std::vector<int>> worker_order(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        const auto& row = costs.worker[static_cast<std::size_t>(i)];
        worker_order[static_cast<std::size_t>(i)] = ranked(row);
        const int k = topology.workers(i + 1) - sw;
        evaluations += static_cast<std::int64_t>(row.size()) * static_cast<std::int64_t>(row.size());
        edge_values[static_cast<std::size_t>(i)] =
            costs.edge[static_cast<std::size_t>(i)] +
            row[static_cast<std::size_t>(worker_order[static_cast<std::size_t>(i)][static_cast<std::size_t>(k - 1)])];
      }
      const auto edge_order = ranked(edge_values);
      evaluations += static_cast<std::int64_t>(n) * n;
      const double value = edge_values[static_cast<std::size_t>(edge_order[static_cast<std::size_t>(n - se - 1)])];
      if (found && !(value < best.objective)) continue;

      found = true;
      best.tolerance = tol;
      best.load = load;
      best.objective = value;
      best.edges.assign(static_cast<std::size_t>(n), 0);
      best.workers.clear();
      for (int i = 1; i <= n; ++i) {
        best.workers.emplace_back(static_cast<std::size_t>(topology.workers(i)), 0);
      }
      for (int r = 0; r < n - se; ++r) {
        const int i = edge_order[static_cast<std::size_t>(r)];
        best.edges[static_cast<std::size_t>(i)] = 1;
        for (int q = 0; q < topology.workers(i + 1) - sw; ++q) {
          best.workers[static_cast<std::size_t>(i)]
                      [static_cast<std::size_t>(worker_order[static_cast<std::size_t>(i)][static_cast<std::size_t>(q)])] = 1;
        }
      }
    }
  }
  if (!found) {
    throw NoFeasibleToleranceError("no tolerance admits an integral allocation for K = " +
                                   std::to_string(datasets));
  }
  best.skipped = std::move(skipped);
  best.evaluations = evaluations;
  return best;
}

Selection brute_force_solve(const Topology& topology, const SystemProfile& profiles, int datasets) {
  topology.validate();
  profiles.validate(topology);
  const int n = topology.edges();

  std::uint64_t candidates = 0;
  for (int se = 0; se < n; ++se) {
    for (int sw = 0; sw < topology.min_workers(); ++sw) {
      for_each_combination(n, n - se, [&](const std::vector<int>& chosen) {
        std::uint64_t product = 1;
        for (int i : chosen) product = saturating_mul(product, binomial(topology.workers(i), topology.workers(i) - sw));
        candidates = std::min<std::uint64_t>(candidates + product, std::numeric_limits<std::uint64_t>::max() - 1);
      });
    }
  }
  if (candidates > kBruteForceLimit) {
    throw TooLargeError("brute_force_solve: " + std::to_string(candidates) +
                        " candidates exceed the limit of " + std::to_string(kBruteForceLimit));
  }

  Selection best;
  bool found = false;
  std::int64_t evaluations = 0;
  for (int se = 0; se < n; ++se) {
    for (int sw = 0; sw < topology.min_workers(); ++sw) {
      const Tolerance tol{se, sw};
      if (auto reason = candidate_rejection(topology, tol, datasets); !reason.empty()) {
        best.skipped.push_back({tol, std::move(reason)});
        continue;
      }
      const int load = load_for(topology, tol, datasets);
      const ProxyCosts costs = proxy_costs(topology, profiles, load);
      // Every worker subset of every edge, with its largest cost.
      std::vector<std::vector<std::vector<int>>> subsets(static_cast<std::size_t>(n));
      std::vector<std::vector<double>> subset_cost(static_cast<std::size_t>(n));
      for (int i = 1; i <= n; ++i) {
        const auto& row = costs.worker[static_cast<std::size_t>(i - 1)];
        for_each_combination(topology.workers(i), topology.workers(i) - sw, [&](const std::vector<int>& c) {
          double worst = -std::numeric_limits<double>::infinity();
          for (int j : c) worst = std::max(worst, row[static_cast<std::size_t>(j - 1)]);
          subsets[static_cast<std::size_t>(i - 1)].push_back(c);
          subset_cost[static_cast<std::size_t>(i - 1)].push_back(worst);
        });
      }
      for_each_combination(n, n - se, [&](const std::vector<int>& chosen) {
        std::vector<std::size_t> pick(chosen.size(), 0);
        while (true) {
          double value = -std::numeric_limits<double>::infinity();
          for (std::size_t q = 0; q < chosen.size(); ++q) {
            const auto i = static_cast<std::size_t>(chosen[q] - 1);
            value = std::max(value, costs.edge[i] + subset_cost[i][pick[q]]);
          }
          ++evaluations;
          if (!found || value < best.objective) {
            found = true;
            best.tolerance = tol;
            best.load = load;
            best.objective = value;
            best.edges.assign(static_cast<std::size_t>(n), 0);
            best.workers.clear();
            for (int i = 1; i <= n; ++i) {
              best.workers.emplace_back(static_cast<std::size_t>(topology.workers(i)), 0);
            }
            for (std::size_t q = 0; q < chosen.size(); ++q) {
              const auto i = static_cast<std::size_t>(chosen[q] - 1);
              best.edges[i] = 1;
              for (int j : subsets[i][pick[q]]) best.workers[i][static_cast<std::size_t>(j - 1)] = 1;
            }
          }
          std::size_t q = 0;
          while (q < chosen.size()) {
            const auto i = static_cast<std::size_t>(chosen[q] - 1);
            if (++pick[q] < subsets[i].size()) break;
            pick[q] = 0;
            ++q;
          }
          if (q == chosen.size()) break;
        }
      });
    }
  }
  if (!found) {
    throw NoFeasibleToleranceError("no tolerance admits an integral allocation for K = " +
                                   std::to_string(datasets));
  }
  best.evaluations = evaluations;
  return best;
}

double order_stat_factor(int n, int r) {
  if (n < 1 || r < 1 || r > n) {
    throw DomainError("order statistic rank " + std::to_string(r) + " outside [1, " +
                      std::to_string(n) + "]");
  }
  const double nn = n;
  const double rr = r;
  return std::sqrt((rr - 1.0) / (nn * (nn - rr + 1.0))) + std::sqrt((nn - rr) / (nn * rr));
}

double order_stat_gap_bound(int n, int r, const std::vector<double>& means,
                            const std::vector<double>& variances) {
  const double factor = order_stat_factor(n, r);
  if (static_cast<int>(means.size()) != n || static_cast<int>(variances.size()) != n) {
    throw ValidationError("order_stat_gap_bound: expected " + std::to_string(n) + " moments");
  }
  double variance_sum = 0.0;
  for (double v : variances) {
    if (!(v >= 0.0)) throw DomainError("order_stat_gap_bound: variances must be >= 0");
    variance_sum += v;
  }
  const double mean = std::accumulate(means.begin(), means.end(), 0.0) / n;
  double spread = 0.0;
  for (double u : means) spread += (u - mean) * (u - mean);
  const double mean_variance = variance_sum / (static_cast<double>(n) * n);
  double radicand = variance_sum + spread - n * mean_variance;
  if (radicand < 0.0) {
    if (radicand < -1e-12) {
      throw NumericalError("order_stat_gap_bound: negative radicand " + std::to_string(radicand));
    }
    radicand = 0.0;
  }
  return factor * std::sqrt(radicand);
}

GapBoundInputs estimate_gap_inputs(const Topology& topology, const SystemProfile& profiles,
                                   const Tolerance& tolerance, int load, std::int64_t trials,
                                   std::uint64_t seed) {
  profiles.validate(topology);
  validate_tolerance(topology, tolerance);
  if (trials < 2) throw ValidationError("estimate_gap_inputs: at least 2 trials are required");
  const int n = topology.edges();

  // Shifted sums around the first sample keep the variance well conditioned.
  struct Accumulator {
    double shift = 0.0, sum = 0.0, sum_sq = 0.0;
    void add(double x, bool first) {
      if (first) shift = x;
      const double d = x - shift;
      sum += d;
      sum_sq += d * d;
    }
    double mean(double count) const { return shift + sum / count; }
    double variance(double count) const {
      return std::max(0.0, (sum_sq - sum * sum / count) / (count - 1.0));
    }
  };
  std::vector<Accumulator> edges(static_cast<std::size_t>(n));
  std::vector<std::vector<Accumulator>> workers(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) workers[static_cast<std::size_t>(i - 1)].resize(static_cast<std::size_t>(topology.workers(i)));
  Accumulator total;

  for (std::int64_t t = 0; t < trials; ++t) {
    const auto s = sample_iteration(topology, profiles, tolerance, load,
                                    TrialStreams{seed, static_cast<std::uint64_t>(t)});
    const bool first = t == 0;
    total.add(s.total_ms, first);
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
      edges[i].add(s.edge_totals[i], first);
      for (std::size_t j = 0; j < workers[i].size(); ++j) workers[i][j].add(s.worker_totals[i][j], first);
    }
  }

  const double count = static_cast<double>(trials);
  GapBoundInputs out;
  out.trials = trials;
  out.seed = seed;
  out.total_mean = total.mean(count);
  out.total_variance = total.variance(count);
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
    out.edge_means.push_back(edges[i].mean(count));
    out.edge_variances.push_back(edges[i].variance(count));
    std::vector<double> means, variances;
    for (const auto& w : workers[i]) {
      means.push_back(w.mean(count));
      variances.push_back(w.variance(count));
    }
    out.worker_means.push_back(std::move(means));
    out.worker_variances.push_back(std::move(variances));
  }
  return out;
}

GapBound runtime_gap_bound(const Selection& selection, const GapBoundInputs& inputs) {
  const int n = static_cast<int>(selection.edges.size());
  if (static_cast<int>(inputs.edge_means.size()) != n ||
      static_cast<int>(inputs.worker_means.size()) != n) {
    throw ValidationError("runtime_gap_bound: moments do not match the selection");
  }
  GapBound out;
  out.edge_term = order_stat_gap_bound(n, n - selection.tolerance.edge_stragglers,
                                       inputs.edge_means, inputs.edge_variances);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const int m = static_cast<int>(selection.workers[static_cast<std::size_t>(i)].size());
    const double term = order_stat_gap_bound(m, m - selection.tolerance.worker_stragglers,
                                             inputs.worker_means[static_cast<std::size_t>(i)],
                                             inputs.worker_variances[static_cast<std::size_t>(i)]);
    out.worker_terms.push_back(term);
    worst = std::max(worst, term);
  }
  out.bound = out.edge_term + worst;
  return out;
}

}  // namespace hgc

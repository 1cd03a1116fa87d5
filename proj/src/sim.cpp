#include "hgc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <thread>

#include "hgc/error.hpp"

namespace hgc {

namespace {

nlohmann::json tolerance_json(const Tolerance& t) {
  return {{"s_e", t.edge_stragglers}, {"s_w", t.worker_stragglers}};
}

// Linear interpolation between closest ranks.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

void ExperimentConfig::validate() const {
  profiles.validate(topology);
  if (trials < 1) throw ValidationError("experiment: trials must be >= 1");
  if (threads < 1) throw ValidationError("experiment: threads must be >= 1");
  if (datasets.empty()) throw ValidationError("experiment: K sweep is empty");
  for (int k : datasets) {
    if (k < 1) throw ValidationError("experiment: K must be >= 1");
  }
  if (schemes.empty()) throw ValidationError("experiment: no schemes");
  for (const auto& s : schemes) {
    if (s.kind != SchemeKind::kHgcJncss) {
      Tolerance t = s.tolerance;
      if (s.kind == SchemeKind::kUncoded) t = {0, 0};
      if (s.kind == SchemeKind::kCgcWorker) t.edge_stragglers = 0;
      if (s.kind == SchemeKind::kCgcEdge) t.worker_stragglers = 0;
      validate_tolerance(topology, t);
    }
  }
}

SampleStats summarize(const std::vector<double>& samples) {
  SampleStats s;
  if (samples.empty()) return s;
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double x : samples) sum += x;
  s.mean = sum / n;
  double sq = 0.0;
  for (double x : samples) sq += (x - s.mean) * (x - s.mean);
  s.stddev = samples.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
  s.standard_error = s.stddev / std::sqrt(n);
  std::vector<double> sorted(samples);
  std::sort(sorted.begin(), sorted.end());
  s.median = quantile(sorted, 0.5);
  s.p95 = quantile(sorted, 0.95);
  return s;
}

const SchemeResult& ExperimentReport::find(const std::string& scheme, int datasets) const {
  for (const auto& r : results) {
    if (r.scheme == scheme && r.datasets == datasets) return r;
  }
  throw ValidationError("report has no entry for " + scheme + " at K = " + std::to_string(datasets));
}

ExperimentReport run(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report;
  report.trials = config.trials;
  report.seed = config.seed;
  for (const auto& spec : config.schemes) {
    for (int k : config.datasets) {
      SchemeResult r;
      r.scheme = scheme_name(spec.kind);
      r.datasets = k;
      try {
        const Scheme scheme = build(spec, config.topology, &config.profiles, k,
                                    BuildOptions{.with_code = false});
        r.tolerance = scheme.tolerance();
        r.flat_stragglers = scheme.flat_stragglers();
        r.load = scheme.load();
        r.master_comm_load = scheme.master_comm_load();
        r.samples.assign(static_cast<std::size_t>(config.trials), 0.0);
        const auto work = [&](std::int64_t begin, std::int64_t end) {
          for (std::int64_t t = begin; t < end; ++t) {
            r.samples[static_cast<std::size_t>(t)] =
                scheme.sample(config.profiles, TrialStreams{config.seed, static_cast<std::uint64_t>(t)});
          }
        };
        const std::int64_t workers = std::min<std::int64_t>(config.threads, config.trials);
        if (workers <= 1) {
          work(0, config.trials);
        } else {
          std::vector<std::thread> pool;
          const std::int64_t chunk = (config.trials + workers - 1) / workers;
          for (std::int64_t w = 0; w < workers; ++w) {
            pool.emplace_back(work, w * chunk, std::min(config.trials, (w + 1) * chunk));
          }
          for (auto& t : pool) t.join();
        }
        r.stats = summarize(r.samples);
      } catch (const Error& e) {
        r.error = e.what();
      }
      report.results.push_back(std::move(r));
    }
  }
  return report;
}

Comparison compare_table(const ExperimentReport& report, int datasets) {
  std::vector<const SchemeResult*> rows;
  for (const auto& r : report.results) {
    if (r.datasets == datasets && r.ok()) rows.push_back(&r);
  }
  Comparison c;
  for (const auto* r : rows) c.schemes.push_back(r->scheme);
  auto ranked = rows;
  std::stable_sort(ranked.begin(), ranked.end(), [](const SchemeResult* a, const SchemeResult* b) {
    return a->stats.mean < b->stats.mean;
  });
  for (const auto* r : ranked) c.ranking.push_back(r->scheme);
  for (const auto* a : rows) {
    std::vector<double> gains;
    std::vector<bool> flags;
    for (const auto* b : rows) {
      gains.push_back(1.0 - a->stats.mean / b->stats.mean);
      const double se = std::hypot(a->stats.standard_error, b->stats.standard_error);
      flags.push_back(std::abs(a->stats.mean - b->stats.mean) > 2.0 * se);
    }
    c.gain.push_back(std::move(gains));
    c.significant.push_back(std::move(flags));
  }
  return c;
}

SystemProfile testbed_profiles(bool heavy_compute) {
  const double strong = heavy_compute ? 100.0 : 10.0;
  const double weak = heavy_compute ? 500.0 : 50.0;
  const Topology topology = Topology::uniform(4, 10);
  SystemProfile p;
  p.edges = {EdgeProfile{50.0, 0.1}, EdgeProfile{100.0, 0.1}, EdgeProfile{100.0, 0.1},
             EdgeProfile{500.0, 0.2}};
  std::vector<WorkerProfile> group;
  for (int j = 1; j <= 5; ++j) group.push_back(WorkerProfile{strong, 0.1, 50.0, 0.1});
  for (int j = 6; j <= 7; ++j) group.push_back(WorkerProfile{strong, 0.1, 100.0, 0.5});
  for (int j = 8; j <= 9; ++j) group.push_back(WorkerProfile{weak, 0.01, 50.0, 0.1});
  group.push_back(WorkerProfile{weak, 0.01, 100.0, 0.5});
  p.workers.assign(static_cast<std::size_t>(topology.edges()), group);
  return p;
}

ExperimentConfig testbed_preset(bool heavy_compute) {
  ExperimentConfig c;
  c.topology = Topology::uniform(4, 10);
  c.profiles = testbed_profiles(heavy_compute);
  c.datasets = {40};
  const Tolerance fixed{1, 2};
  for (SchemeKind k : kAllSchemeKinds) c.schemes.push_back(SchemeSpec{k, fixed});
  c.trials = 10000;
  c.seed = 1;
  return c;
}

nlohmann::json experiment_to_json(const ExperimentReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.results) {
    nlohmann::json row{{"scheme", r.scheme}, {"K", r.datasets}};
    if (!r.ok()) {
      row["error"] = r.error;
    } else {
      row["tolerance"] = tolerance_json(r.tolerance);
      if (r.scheme == scheme_name(SchemeKind::kStandardGc)) row["flat_stragglers"] = r.flat_stragglers;
      row["load_D"] = r.load;
      row["master_comm_load"] = r.master_comm_load;
      row["samples"] = r.samples.size();
      row["mean_ms"] = r.stats.mean;
      row["stddev_ms"] = r.stats.stddev;
      row["standard_error_ms"] = r.stats.standard_error;
      row["median_ms"] = r.stats.median;
      row["p95_ms"] = r.stats.p95;
    }
    rows.push_back(std::move(row));
  }
  return {{"format", "hgc-experiment"},
          {"version", 1},
          {"trials", report.trials},
          {"seed", report.seed},
          {"notes",
           {"gain(A, B) = 1 - mean_A / mean_B",
            "decoding time at the edge nodes and the master is not modelled"}},
          {"results", std::move(rows)}};
}

nlohmann::json comparison_to_json(const Comparison& c) {
  nlohmann::json gain = nlohmann::json::array();
  for (std::size_t a = 0; a < c.schemes.size(); ++a) {
    for (std::size_t b = 0; b < c.schemes.size(); ++b) {
      if (a == b) continue;
      gain.push_back({{"scheme", c.schemes[a]},
                      {"baseline", c.schemes[b]},
                      {"gain", c.gain[a][b]},
                      {"significant", static_cast<bool>(c.significant[a][b])}});
    }
  }
  return {{"ranking", c.ranking}, {"gains", std::move(gain)}};
}

nlohmann::json iteration_to_json(const IterationSample& s) {
  return {{"worker_totals_ms", s.worker_totals}, {"edge_uploads_ms", s.edge_uploads},
          {"edge_totals_ms", s.edge_totals},     {"total_ms", s.total_ms},
          {"fastest_edges", s.fastest_edges},    {"fastest_workers", s.fastest_workers}};
}

void write_samples_jsonl(const ExperimentReport& report, std::ostream& out) {
  for (const auto& r : report.results) {
    for (std::size_t t = 0; t < r.samples.size(); ++t) {
      out << nlohmann::json{{"scheme", r.scheme}, {"K", r.datasets}, {"trial", t},
                            {"T_tol_ms", r.samples[t]}}.dump()
          << '\n';
    }
  }
}

void write_samples_csv(const ExperimentReport& report, std::ostream& out) {
  out << "scheme,K,trial,T_tol_ms\n";
  for (const auto& r : report.results) {
    for (std::size_t t = 0; t < r.samples.size(); ++t) {
      // Same shortest round-trip formatting as the JSON outputs.
      out << r.scheme << ',' << r.datasets << ',' << t << ',' << nlohmann::json(r.samples[t]).dump()
          << '\n';
    }
  }
}

}  // namespace hgc

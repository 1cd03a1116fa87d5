#include "hgc/coding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include "hgc/combinatorics.hpp"
#include "hgc/rng.hpp"
#include "hgc/tradeoff.hpp"

namespace hgc {

namespace {

constexpr std::uint64_t kExhaustiveSpanLimit = 10'000;
constexpr int kSampledSpanChecks = 1'000;

bool allocation_divides(const Topology& topology, const Tolerance& tolerance,
                        std::int64_t datasets, int* offending_edge) {
  const std::int64_t total = topology.total_workers();
  for (int i = 1; i <= topology.edges(); ++i) {
    const std::int64_t mass = datasets * (tolerance.edge_stragglers + 1) * topology.workers(i);
    if (mass % total != 0 ||
        ((mass / total) * (tolerance.worker_stragglers + 1)) % topology.workers(i) != 0) {
      if (offending_edge) *offending_edge = i;
      return false;
    }
  }
  return true;
}

std::vector<int> random_subset(int n, int k, RandomStream& rng) {
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 1);
  for (int t = 0; t < k; ++t) {
    const auto pick = t + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - t)));
    std::swap(all[static_cast<std::size_t>(t)], all[static_cast<std::size_t>(pick)]);
  }
  all.resize(static_cast<std::size_t>(k));
  std::sort(all.begin(), all.end());
  return all;
}

Matrix select_rows(const Matrix& m, std::span<const int> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r] - 1);
  return out;
}

// Worst span residual of the all-ones row over (k = rows - stragglers)-subsets.
double worst_span_residual(const Matrix& code, int stragglers, RandomStream& rng) {
  const int rows = static_cast<int>(code.rows());
  const int keep = rows - stragglers;
  double worst = 0.0;
  auto check = [&](const std::vector<int>& subset) {
    worst = std::max(worst, solve_for_ones(select_rows(code, subset)).residual);
  };
  if (binomial(rows, keep) <= kExhaustiveSpanLimit) {
    for_each_combination(rows, keep, check);
  } else {
    for (int t = 0; t < kSampledSpanChecks; ++t) check(random_subset(rows, keep, rng));
  }
  return worst;
}

struct LayerFailure {};

// One layer of the code: `holders[c]` lists the (0-based) rows that hold
// column c, with exactly stragglers + 1 holders per column. Every row is a
// combination of the columns of a generic rows x (rows - stragglers)
// generator G: column c equals lambda_c * G * v_c with v_c spanning the null
// space of G restricted to the non-holders. Any rows - stragglers rows of G
// are invertible, so their row span equals the span of the coefficient
// matrix, which contains the all-ones row by the choice of lambda_c.
Matrix layered_code(int rows, int stragglers, const std::vector<std::vector<int>>& holders,
                    RandomStream& rng) {
  const int width = rows - stragglers;
  Matrix generator(rows, width);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < width; ++c) generator(r, c) = rng.uniform(0.25, 1.75);
  Vector combiner(width);
  for (int c = 0; c < width; ++c) combiner(c) = rng.uniform(0.25, 1.75);

  const auto cols = static_cast<Eigen::Index>(holders.size());
  Matrix code = Matrix::Zero(rows, cols);
  std::map<std::vector<int>, Vector> cache;
  for (Eigen::Index c = 0; c < cols; ++c) {
    const auto& held = holders[static_cast<std::size_t>(c)];
    auto it = cache.find(held);
    if (it == cache.end()) {
      std::vector<int> others;
      for (int r = 0; r < rows; ++r)
        if (!std::binary_search(held.begin(), held.end(), r)) others.push_back(r);
      Matrix restricted(static_cast<Eigen::Index>(others.size()), width);
      for (std::size_t t = 0; t < others.size(); ++t)
        restricted.row(static_cast<Eigen::Index>(t)) = generator.row(others[t]);
      const Vector v = null_vector(restricted, width);
      const double denom = combiner.dot(v);
      if (std::abs(denom) < 1e-9) throw LayerFailure{};
      Vector column = Vector::Zero(rows);
      for (int r : held) {
        column(r) = generator.row(r).dot(v) / denom;
        if (std::abs(column(r)) < 1e-9) throw LayerFailure{};
      }
      it = cache.emplace(held, std::move(column)).first;
    }
    code.col(c) = it->second;
  }
  return code;
}

std::vector<std::vector<int>> dataset_holders(const AllocationPlan& plan) {
  std::vector<std::vector<int>> holders(static_cast<std::size_t>(plan.datasets));
  for (int i = 0; i < plan.topology.edges(); ++i)
    for (int k : plan.edge_sets[static_cast<std::size_t>(i)])
      holders[static_cast<std::size_t>(k - 1)].push_back(i);
  return holders;
}

std::vector<std::vector<int>> position_holders(const AllocationPlan& plan, int edge) {
  const int width = plan.edge_loads[static_cast<std::size_t>(edge - 1)];
  std::vector<std::vector<int>> holders(static_cast<std::size_t>(width));
  for (int j = 1; j <= plan.topology.workers(edge); ++j)
    for (int k : plan.worker_set(edge, j))
      holders[static_cast<std::size_t>(plan.position_in_edge(edge, k))].push_back(j - 1);
  return holders;
}

void check_subset(std::span<const int> subset, int universe, int expected, const char* what) {
  std::ostringstream os;
  if (static_cast<int>(subset.size()) != expected) {
    os << what << ": expected " << expected << " indices, got " << subset.size();
    throw ValidationError(os.str());
  }
  std::vector<int> sorted(subset.begin(), subset.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() ||
      (!sorted.empty() && (sorted.front() < 1 || sorted.back() > universe))) {
    os << what << ": indices must be distinct and within [1, " << universe << "]";
    throw ValidationError(os.str());
  }
}

GradientVector combine(const Vector& coefficients, const std::map<int, GradientVector>& received,
                       std::span<const int> fastest, const char* what) {
  std::optional<GradientVector> acc;
  for (std::size_t t = 0; t < fastest.size(); ++t) {
    auto it = received.find(fastest[t]);
    if (it == received.end()) {
      std::ostringstream os;
      os << what << ": no result received from " << fastest[t];
      throw ValidationError(os.str());
    }
    if (!acc) {
      acc = GradientVector::Zero(it->second.size());
    } else if (acc->size() != it->second.size()) {
      throw ValidationError(std::string(what) + ": results differ in dimension");
    }
    *acc += coefficients(static_cast<Eigen::Index>(t)) * it->second;
  }
  return acc.value_or(GradientVector());
}

}  // namespace

int AllocationPlan::position_in_edge(int edge, int dataset) const {
  const auto& set = edge_set(edge);
  auto it = std::find(set.begin(), set.end(), dataset);
  return it == set.end() ? -1 : static_cast<int>(it - set.begin());
}

AllocationPlan allocate(const Topology& topology, const Tolerance& tolerance, int datasets) {
  validate_tolerance(topology, tolerance);
  if (datasets < 1) throw ValidationError("allocate: K must be positive");

  const Feasibility feasibility = check_feasibility(topology, tolerance);
  if (!feasibility.feasible) {
    throw InfeasibleToleranceError("allocate: infeasible tolerance " + to_string(tolerance) +
                                   ": " + feasibility.diagnostic);
  }
  const int total = topology.total_workers();
  for (int i = 1; i <= topology.edges(); ++i) {
    if ((tolerance.edge_stragglers + 1) * topology.workers(i) > total) {
      std::ostringstream os;
      os << "allocate: edge " << i << " would hold " << tolerance.edge_stragglers + 1 << "*"
         << topology.workers(i) << "/" << total << " > 1 copies of the dataset";
      throw DegenerateError(os.str());
    }
  }
  int offending = 0;
  if (!allocation_divides(topology, tolerance, datasets, &offending)) {
    std::int64_t suggestion = datasets + 1;
    // K = sum(m) always divides, so the search is bounded by one period.
    while (!allocation_divides(topology, tolerance, suggestion, nullptr)) ++suggestion;
    std::ostringstream os;
    os << "allocate: K=" << datasets << " does not split evenly at edge " << offending
       << "; smallest K' >= K that works is " << suggestion;
    throw DivisibilityError(os.str(), offending, suggestion);
  }

  AllocationPlan plan;
  plan.topology = topology;
  plan.tolerance = tolerance;
  plan.datasets = datasets;
  plan.worker_load = static_cast<int>(static_cast<std::int64_t>(datasets) *
                                      (tolerance.edge_stragglers + 1) *
                                      (tolerance.worker_stragglers + 1) / total);
  int offset = 0;
  for (int i = 1; i <= topology.edges(); ++i) {
    const int load = static_cast<int>(static_cast<std::int64_t>(datasets) *
                                      (tolerance.edge_stragglers + 1) * topology.workers(i) /
                                      total);
    plan.edge_loads.push_back(load);
    std::vector<int> set(static_cast<std::size_t>(load));
    for (int t = 0; t < load; ++t) set[static_cast<std::size_t>(t)] = (offset + t) % datasets + 1;
    offset += load;

    std::vector<std::vector<int>> workers;
    for (int j = 1; j <= topology.workers(i); ++j) {
      std::vector<int> own(static_cast<std::size_t>(plan.worker_load));
      for (int t = 0; t < plan.worker_load; ++t)
        own[static_cast<std::size_t>(t)] =
            set[static_cast<std::size_t>(((j - 1) * plan.worker_load + t) % load)];
      workers.push_back(std::move(own));
    }
    plan.edge_sets.push_back(std::move(set));
    plan.worker_sets.push_back(std::move(workers));
  }
  return plan;
}

CodingScheme CodingScheme::from_matrices(AllocationPlan plan, Matrix first_layer,
                                         std::vector<Matrix> edge_codes, std::uint64_t seed,
                                         int attempt, SupportCheck check) {
  const int n = plan.topology.edges();
  const int k = plan.datasets;
  if (first_layer.rows() != n || first_layer.cols() != k) {
    throw ValidationError("scheme: first-layer matrix must be n x K");
  }
  if (static_cast<int>(edge_codes.size()) != n) {
    throw ValidationError("scheme: need one edge code per edge node");
  }
  if (!first_layer.allFinite()) throw ValidationError("scheme: non-finite first-layer entry");
  const bool enforce = check == SupportCheck::kEnforce;
  for (int i = 1; i <= n; ++i) {
    const auto& set = plan.edge_set(i);
    for (int col = 1; col <= k; ++col) {
      const bool held = std::find(set.begin(), set.end(), col) != set.end();
      if (enforce && held != (first_layer(i - 1, col - 1) != 0.0)) {
        std::ostringstream os;
        os << "scheme: B[" << i << "][" << col << "] violates the allocation support";
        throw ValidationError(os.str());
      }
    }
  }

  CodingScheme scheme;
  for (int i = 1; i <= n; ++i) {
    const Matrix& dbar = edge_codes[static_cast<std::size_t>(i - 1)];
    const int m = plan.topology.workers(i);
    const int width = plan.edge_loads[static_cast<std::size_t>(i - 1)];
    if (dbar.rows() != m || dbar.cols() != width) {
      std::ostringstream os;
      os << "scheme: edge code " << i << " must be " << m << " x " << width;
      throw ValidationError(os.str());
    }
    if (!dbar.allFinite()) throw ValidationError("scheme: non-finite edge-code entry");
    Matrix full = Matrix::Zero(m, k);
    for (int j = 1; j <= m; ++j) {
      const auto& own = plan.worker_set(i, j);
      for (int p = 0; p < width; ++p) {
        const int dataset = plan.edge_set(i)[static_cast<std::size_t>(p)];
        const bool held = std::find(own.begin(), own.end(), dataset) != own.end();
        if (enforce && held != (dbar(j - 1, p) != 0.0)) {
          std::ostringstream os;
          os << "scheme: Dbar^" << i << "[" << j << "][" << p + 1
             << "] violates the allocation support";
          throw ValidationError(os.str());
        }
        full(j - 1, dataset - 1) = dbar(j - 1, p);
      }
    }
    scheme.worker_codes_.push_back(std::move(full));
  }
  scheme.plan_ = std::move(plan);
  scheme.first_layer_ = std::move(first_layer);
  scheme.edge_codes_ = std::move(edge_codes);
  scheme.seed_ = seed;
  scheme.attempt_ = attempt;
  return scheme;
}

std::vector<std::pair<int, double>> CodingScheme::worker_coefficients(int edge, int worker) const {
  std::vector<std::pair<int, double>> out;
  const Matrix& full = worker_code(edge);
  for (int k : plan_.worker_set(edge, worker)) {
    out.emplace_back(k, full(worker - 1, k - 1) * first_layer_(edge - 1, k - 1));
  }
  return out;
}

CodingScheme build_scheme(const AllocationPlan& plan, std::uint64_t seed) {
  const int n = plan.topology.edges();
  const auto dataset_owners = dataset_holders(plan);
  double last_residual = 0.0;
  for (int attempt = 0; attempt < kConstructionAttempts; ++attempt) {
    try {
      RandomStream first_rng(seed, static_cast<std::uint64_t>(attempt), 0);
      Matrix first = layered_code(n, plan.tolerance.edge_stragglers, dataset_owners, first_rng);
      std::vector<Matrix> edge_codes;
      for (int i = 1; i <= n; ++i) {
        RandomStream rng(seed, static_cast<std::uint64_t>(attempt), static_cast<std::uint64_t>(i));
        edge_codes.push_back(layered_code(plan.topology.workers(i),
                                          plan.tolerance.worker_stragglers,
                                          position_holders(plan, i), rng));
      }
      RandomStream check_rng(seed, static_cast<std::uint64_t>(attempt), 1'000'003);
      last_residual = worst_span_residual(first, plan.tolerance.edge_stragglers, check_rng);
      for (const auto& code : edge_codes) {
        last_residual = std::max(
            last_residual, worst_span_residual(code, plan.tolerance.worker_stragglers, check_rng));
      }
      if (last_residual <= kDecodeTolerance) {
        return CodingScheme::from_matrices(plan, std::move(first), std::move(edge_codes), seed,
                                           attempt);
      }
    } catch (const LayerFailure&) {
      // Degenerate draw; reseed.
    }
  }
  std::ostringstream os;
  os << "build_scheme: span conditions still violated after " << kConstructionAttempts
     << " attempts (worst residual " << last_residual << ")";
  throw ConstructionError(os.str());
}

GradientVector worker_encode(const CodingScheme& scheme, int edge, int worker,
                             const std::map<int, GradientVector>& partials) {
  if (edge < 1 || edge > scheme.topology().edges() || worker < 1 ||
      worker > scheme.topology().workers(edge)) {
    throw ValidationError("worker_encode: no such worker");
  }
  const auto coefficients = scheme.worker_coefficients(edge, worker);
  std::vector<int> missing;
  for (const auto& [k, coef] : coefficients)
    if (!partials.contains(k)) missing.push_back(k);
  if (!missing.empty()) {
    std::ostringstream os;
    os << "worker_encode: worker (" << edge << "," << worker << ") is missing partials for {";
    for (std::size_t t = 0; t < missing.size(); ++t) os << (t ? "," : "") << missing[t];
    os << "}";
    throw MissingPartialError(os.str(), std::move(missing));
  }
  const auto dim = partials.at(coefficients.front().first).size();
  GradientVector out = GradientVector::Zero(dim);
  for (const auto& [k, coef] : coefficients) {
    const auto& g = partials.at(k);
    if (g.size() != dim) throw ValidationError("worker_encode: partials differ in dimension");
    out += coef * g;
  }
  return out;
}

Vector edge_decoding_vector(const CodingScheme& scheme, int edge, std::span<const int> fastest) {
  if (edge < 1 || edge > scheme.topology().edges()) {
    throw ValidationError("edge_decode: no such edge");
  }
  const int m = scheme.topology().workers(edge);
  check_subset(fastest, m, m - scheme.tolerance().worker_stragglers, "edge_decode");
  const auto solution = solve_for_ones(select_rows(scheme.edge_code(edge), fastest));
  if (!(solution.residual <= kDecodeTolerance)) {
    std::ostringstream os;
    os << "edge_decode: edge " << edge << " cannot decode from the given workers (residual "
       << solution.residual << ")";
    throw DecodeSingularError(os.str(), solution.residual);
  }
  return solution.coefficients;
}

Vector master_decoding_vector(const CodingScheme& scheme, std::span<const int> fastest) {
  const int n = scheme.topology().edges();
  check_subset(fastest, n, n - scheme.tolerance().edge_stragglers, "master_decode");
  const auto solution = solve_for_ones(select_rows(scheme.first_layer(), fastest));
  if (!(solution.residual <= kDecodeTolerance)) {
    std::ostringstream os;
    os << "master_decode: cannot decode from the given edges (residual " << solution.residual
       << ")";
    throw DecodeSingularError(os.str(), solution.residual);
  }
  return solution.coefficients;
}

GradientVector edge_decode(const CodingScheme& scheme, int edge,
                           const std::map<int, GradientVector>& received,
                           std::span<const int> fastest) {
  return combine(edge_decoding_vector(scheme, edge, fastest), received, fastest, "edge_decode");
}

GradientVector master_decode(const CodingScheme& scheme,
                             const std::map<int, GradientVector>& received,
                             std::span<const int> fastest) {
  return combine(master_decoding_vector(scheme, fastest), received, fastest, "master_decode");
}

std::uint64_t pattern_count(const Topology& topology, const Tolerance& tolerance) {
  std::uint64_t count = binomial(topology.edges(), topology.edges() - tolerance.edge_stragglers);
  for (int m : topology.workers_per_edge)
    count = saturating_mul(count, binomial(m, m - tolerance.worker_stragglers));
  return count;
}

VerificationReport verify_decodability(const CodingScheme& scheme, const VerifyMode& mode) {
  const Topology& topology = scheme.topology();
  const Tolerance& tolerance = scheme.tolerance();
  const int n = topology.edges();
  const int keep_edges = n - tolerance.edge_stragglers;
  constexpr int kDim = 3;

  std::map<std::pair<int, std::vector<int>>, std::optional<Vector>> edge_cache;
  std::map<std::vector<int>, std::optional<Vector>> master_cache;
  std::string last_error;

  auto cached_edge = [&](int edge, const std::vector<int>& fastest) -> const std::optional<Vector>& {
    auto key = std::make_pair(edge, fastest);
    auto it = edge_cache.find(key);
    if (it == edge_cache.end()) {
      std::optional<Vector> v;
      try {
        v = edge_decoding_vector(scheme, edge, fastest);
      } catch (const DecodeSingularError& e) {
        last_error = e.what();
      }
      it = edge_cache.emplace(std::move(key), std::move(v)).first;
    }
    return it->second;
  };
  auto cached_master = [&](const std::vector<int>& fastest) -> const std::optional<Vector>& {
    auto it = master_cache.find(fastest);
    if (it == master_cache.end()) {
      std::optional<Vector> v;
      try {
        v = master_decoding_vector(scheme, fastest);
      } catch (const DecodeSingularError& e) {
        last_error = e.what();
      }
      it = master_cache.emplace(fastest, std::move(v)).first;
    }
    return it->second;
  };

  VerificationReport report;
  auto run_pattern = [&](std::vector<int> edges, std::vector<std::vector<int>> workers) {
    PatternResult result;
    RandomStream rng(mode.seed ^ scheme.seed(), 0xC0DE, static_cast<std::uint64_t>(report.total));
    std::map<int, GradientVector> partials;
    GradientVector expected = GradientVector::Zero(kDim);
    for (int k = 1; k <= scheme.plan().datasets; ++k) {
      GradientVector g(kDim);
      for (int d = 0; d < kDim; ++d) g(d) = rng.uniform();
      expected += g;
      partials.emplace(k, std::move(g));
    }
    bool decodable = true;
    std::map<int, GradientVector> edge_results;
    for (int i : edges) {
      const auto& fastest = workers[static_cast<std::size_t>(i - 1)];
      const auto& c = cached_edge(i, fastest);
      if (!c) {
        decodable = false;
        result.error = last_error;
        break;
      }
      GradientVector acc = GradientVector::Zero(kDim);
      for (std::size_t t = 0; t < fastest.size(); ++t)
        acc += (*c)(static_cast<Eigen::Index>(t)) * worker_encode(scheme, i, fastest[t], partials);
      edge_results.emplace(i, std::move(acc));
    }
    if (decodable) {
      const auto& a = cached_master(edges);
      if (!a) {
        decodable = false;
        result.error = last_error;
      } else {
        GradientVector decoded = GradientVector::Zero(kDim);
        for (std::size_t t = 0; t < edges.size(); ++t)
          decoded += (*a)(static_cast<Eigen::Index>(t)) * edge_results.at(edges[t]);
        result.relative_error = (decoded - expected).norm() / expected.norm();
        result.passed = result.relative_error <= kRecoveryTolerance;
        if (!result.passed) result.error = "recovered gradient differs from the full sum";
      }
    }
    if (!decodable) result.relative_error = std::numeric_limits<double>::infinity();
    result.edges = std::move(edges);
    result.workers = std::move(workers);
    report.worst_relative_error = std::max(report.worst_relative_error, result.relative_error);
    report.passed += result.passed ? 1 : 0;
    ++report.total;
    report.patterns.push_back(std::move(result));
  };

  if (mode.kind == VerifyMode::Kind::kExhaustive) {
    std::vector<std::vector<std::vector<int>>> per_edge;
    for (int i = 1; i <= n; ++i) {
      const int m = topology.workers(i);
      per_edge.push_back(all_combinations(m, m - tolerance.worker_stragglers));
    }
    for_each_combination(n, keep_edges, [&](const std::vector<int>& edges) {
      std::vector<std::size_t> odometer(static_cast<std::size_t>(n), 0);
      while (true) {
        std::vector<std::vector<int>> workers;
        for (int i = 0; i < n; ++i)
          workers.push_back(per_edge[static_cast<std::size_t>(i)][odometer[static_cast<std::size_t>(i)]]);
        run_pattern(edges, std::move(workers));
        int pos = n - 1;
        while (pos >= 0) {
          auto& digit = odometer[static_cast<std::size_t>(pos)];
          if (++digit < per_edge[static_cast<std::size_t>(pos)].size()) break;
          digit = 0;
          --pos;
        }
        if (pos < 0) break;
      }
    });
  } else {
    RandomStream rng(mode.seed, 0x5A3D1ED);
    for (std::int64_t t = 0; t < mode.count; ++t) {
      auto edges = random_subset(n, keep_edges, rng);
      std::vector<std::vector<int>> workers;
      for (int i = 1; i <= n; ++i) {
        const int m = topology.workers(i);
        workers.push_back(random_subset(m, m - tolerance.worker_stragglers, rng));
      }
      run_pattern(std::move(edges), std::move(workers));
    }
  }
  return report;
}

}  // namespace hgc

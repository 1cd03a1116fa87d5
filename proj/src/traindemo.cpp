#include "hgc/traindemo.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "hgc/combinatorics.hpp"
#include "hgc/error.hpp"
#include "hgc/rng.hpp"

namespace hgc {

namespace {

constexpr double kStepFraction = 0.05;

// k-th (0-based) k-subset of {1..n} in lexicographic order.
std::vector<int> unrank_combination(int n, int k, std::uint64_t rank) {
  std::vector<int> out;
  int next = 1;
  for (int slot = 0; slot < k; ++slot) {
    while (true) {
      const std::uint64_t with = binomial(n - next, k - slot - 1);
      if (rank < with) break;
      rank -= with;
      ++next;
    }
    out.push_back(next++);
  }
  return out;
}

std::string describe(const StragglerPattern& p) {
  std::ostringstream os;
  os << "edges {";
  for (std::size_t t = 0; t < p.edges.size(); ++t) os << (t ? "," : "") << p.edges[t];
  os << "} workers {";
  for (std::size_t i = 0; i < p.workers.size(); ++i) {
    os << (i ? ";" : "");
    for (std::size_t t = 0; t < p.workers[i].size(); ++t) os << (t ? "," : "") << p.workers[i][t];
  }
  os << "}";
  return os.str();
}

}  // namespace

std::map<int, GradientVector> SyntheticTask::partial_gradients(const Vector& beta) const {
  std::map<int, GradientVector> out;
  const int rows = samples() / datasets;
  for (int k = 1; k <= datasets; ++k) {
    const auto x = features.middleRows((k - 1) * rows, rows);
    const auto y = labels.segment((k - 1) * rows, rows);
    out[k] = x.transpose() * (x * beta - y);
  }
  return out;
}

GradientVector SyntheticTask::full_gradient(const Vector& beta) const {
  return features.transpose() * (features * beta - labels);
}

double SyntheticTask::loss(const Vector& beta) const {
  return 0.5 * (features * beta - labels).squaredNorm() / samples();
}

SyntheticTask make_task(int samples, int dimension, int datasets, int iterations,
                        std::uint64_t seed) {
  if (samples < 1 || dimension < 1 || datasets < 1 || iterations < 0) {
    throw ValidationError("task: sizes must be positive");
  }
  if (samples % datasets != 0) {
    throw ValidationError("task: N = " + std::to_string(samples) +
                          " is not divisible by K = " + std::to_string(datasets));
  }
  for (std::uint64_t attempt = 0; attempt < 16; ++attempt) {
    RandomStream rng(seed, 0x7461736bULL, attempt);
    SyntheticTask task;
    task.datasets = datasets;
    task.iterations = iterations;
    task.seed = seed;
    task.features.resize(samples, dimension);
    for (int r = 0; r < samples; ++r)
      for (int c = 0; c < dimension; ++c) task.features(r, c) = rng.normal();
    Vector truth(dimension);
    for (int c = 0; c < dimension; ++c) truth(c) = rng.normal();
    task.labels = task.features * truth;
    for (int r = 0; r < samples; ++r) task.labels(r) += 0.1 * rng.normal();

    const Eigen::SelfAdjointEigenSolver<Matrix> eig(task.features.transpose() * task.features);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > 1e8) continue;
    task.learning_rate = kStepFraction / hi;
    return task;
  }
  throw NumericalError("task: could not draw a well-conditioned feature matrix");
}

std::string policy_name(StragglerPolicy::Mode mode) {
  switch (mode) {
    case StragglerPolicy::Mode::kNone: return "none";
    case StragglerPolicy::Mode::kRandom: return "random";
    case StragglerPolicy::Mode::kAdversarialCycle: return "adversarial-cycle";
    case StragglerPolicy::Mode::kFixed: return "fixed";
  }
  return "?";
}

StragglerPolicy::Mode parse_policy_mode(const std::string& name) {
  for (auto m : {StragglerPolicy::Mode::kNone, StragglerPolicy::Mode::kRandom,
                 StragglerPolicy::Mode::kAdversarialCycle, StragglerPolicy::Mode::kFixed}) {
    if (policy_name(m) == name) return m;
  }
  throw UnknownKindError("unknown straggler policy '" + name + "'");
}

StragglerPattern tolerated_pattern(const Topology& topology, const Tolerance& tolerance,
                                   std::uint64_t index) {
  validate_tolerance(topology, tolerance);
  const int n = topology.edges();
  const int keep = n - tolerance.edge_stragglers;
  auto block_size = [&](const std::vector<int>& edges) {
    std::uint64_t size = 1;
    for (int i : edges) {
      const int m = topology.workers(i);
      size = saturating_mul(size, binomial(m, m - tolerance.worker_stragglers));
    }
    return size;
  };
  std::uint64_t total = 0;
  for_each_combination(n, keep, [&](const std::vector<int>& edges) {
    total = std::max(total, total + block_size(edges));
  });
  index %= total;

  // Patterns are grouped by surviving edge set, in lexicographic order.
  std::vector<int> edges = first_combination(keep);
  while (index >= block_size(edges)) {
    index -= block_size(edges);
    next_combination(edges, n);
  }
  StragglerPattern p;
  p.edges = edges;
  p.workers = StragglerPattern::none(topology).workers;
  for (int i : p.edges) {
    const int m = topology.workers(i);
    const int stay = m - tolerance.worker_stragglers;
    const std::uint64_t choices = binomial(m, stay);
    p.workers[static_cast<std::size_t>(i - 1)] = unrank_combination(m, stay, index % choices);
    index /= choices;
  }
  return p;
}

StragglerPattern pattern_at(const StragglerPolicy& policy, const Scheme& scheme, int iteration) {
  const Topology& topology = scheme.topology();
  switch (policy.mode) {
    case StragglerPolicy::Mode::kNone:
      return StragglerPattern::none(topology);
    case StragglerPolicy::Mode::kFixed:
      return policy.pattern;
    case StragglerPolicy::Mode::kAdversarialCycle:
      return tolerated_pattern(topology, scheme.tolerance(), static_cast<std::uint64_t>(iteration));
    case StragglerPolicy::Mode::kRandom: {
      validate_tolerance(topology, policy.tolerance);
      RandomStream rng(policy.seed, 0x64726f70ULL, static_cast<std::uint64_t>(iteration));
      std::vector<int> edges(static_cast<std::size_t>(topology.edges()));
      for (int i = 1; i <= topology.edges(); ++i) edges[static_cast<std::size_t>(i - 1)] = i;
      std::shuffle(edges.begin(), edges.end(), rng);
      edges.resize(edges.size() - static_cast<std::size_t>(policy.tolerance.edge_stragglers));
      std::sort(edges.begin(), edges.end());
      StragglerPattern p;
      p.edges = edges;
      p.workers = StragglerPattern::none(topology).workers;
      for (int i : edges) {
        auto& w = p.workers[static_cast<std::size_t>(i - 1)];
        std::shuffle(w.begin(), w.end(), rng);
        w.resize(w.size() - static_cast<std::size_t>(policy.tolerance.worker_stragglers));
        std::sort(w.begin(), w.end());
      }
      return p;
    }
  }
  return StragglerPattern::none(topology);
}

TrainingResult run_training(const SyntheticTask& task, const Scheme& scheme,
                            const StragglerPolicy& policy) {
  if (scheme.datasets() != task.datasets) {
    throw ValidationError("training: scheme is built for K = " + std::to_string(scheme.datasets()) +
                          " but the task has K = " + std::to_string(task.datasets));
  }
  TrainingResult out;
  Vector beta = Vector::Zero(task.dimension());
  out.parameters.push_back(beta);
  out.losses.push_back(task.loss(beta));
  for (int t = 0; t < task.iterations; ++t) {
    const auto partials = task.partial_gradients(beta);
    const GradientVector full = task.full_gradient(beta);
    const StragglerPattern pattern = pattern_at(policy, scheme, t);
    GradientVector decoded;
    const std::string where = "iteration " + std::to_string(t) + ", pattern " + describe(pattern) + ": ";
    try {
      decoded = scheme.aggregate(partials, pattern);
    } catch (const DecodeSingularError& e) {
      throw DecodeSingularError(where + e.what(), e.residual());
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
    const double norm = full.norm();
    out.residuals.push_back(norm > 0.0 ? (decoded - full).norm() / norm : (decoded - full).norm());
    beta -= task.learning_rate * decoded;
    out.parameters.push_back(beta);
    out.losses.push_back(task.loss(beta));
  }
  return out;
}

TrainingResult run_centralized(const SyntheticTask& task) {
  TrainingResult out;
  Vector beta = Vector::Zero(task.dimension());
  out.parameters.push_back(beta);
  out.losses.push_back(task.loss(beta));
  for (int t = 0; t < task.iterations; ++t) {
    beta -= task.learning_rate * task.full_gradient(beta);
    out.residuals.push_back(0.0);
    out.parameters.push_back(beta);
    out.losses.push_back(task.loss(beta));
  }
  return out;
}

double trajectory_gap(const TrainingResult& a, const TrainingResult& b) {
  if (a.parameters.size() != b.parameters.size()) {
    throw ValidationError("trajectory_gap: trajectories differ in length");
  }
  double worst = 0.0;
  for (std::size_t t = 0; t < a.parameters.size(); ++t) {
    const double diff = (a.parameters[t] - b.parameters[t]).norm();
    const double scale = b.parameters[t].norm();
    worst = std::max(worst, scale > 0.0 ? diff / scale : diff);
  }
  return worst;
}

void write_trajectory_csv(const TrainingResult& result, std::ostream& out) {
  out << "iteration,loss,residual\n";
  for (std::size_t t = 0; t < result.losses.size(); ++t) {
    out << t << ',' << nlohmann::json(result.losses[t]).dump() << ',';
    if (t > 0) out << nlohmann::json(result.residuals[t - 1]).dump();
    out << '\n';
  }
}

}  // namespace hgc

#include <gtest/gtest.h>

#include "hgc/combinatorics.hpp"
#include "hgc/schemes.hpp"
#include "hgc/tradeoff.hpp"

namespace hgc {
namespace {

std::map<int, GradientVector> random_partials(int k, int dim, std::uint64_t seed) {
  RandomStream rng(seed);
  std::map<int, GradientVector> out;
  for (int i = 1; i <= k; ++i) {
    GradientVector g(dim);
    for (int d = 0; d < dim; ++d) g(d) = rng.uniform(-1, 1);
    out[i] = g;
  }
  return out;
}

GradientVector full_sum(const std::map<int, GradientVector>& partials) {
  GradientVector total = GradientVector::Zero(partials.begin()->second.size());
  for (const auto& [k, g] : partials) total += g;
  return total;
}

// Every pattern with exactly the tolerated number of hierarchical stragglers.
template <typename Fn>
void for_each_tolerated(const Topology& t, const Tolerance& tol, Fn&& fn) {
  for_each_combination(t.edges(), t.edges() - tol.edge_stragglers, [&](const std::vector<int>& edges) {
    std::vector<std::vector<std::vector<int>>> options;
    for (int i : edges) options.push_back(all_combinations(t.workers(i), t.workers(i) - tol.worker_stragglers));
    std::vector<std::size_t> pick(edges.size(), 0);
    while (true) {
      StragglerPattern p;
      p.edges = edges;
      p.workers.resize(static_cast<std::size_t>(t.edges()));
      for (std::size_t q = 0; q < edges.size(); ++q) p.workers[edges[q] - 1] = options[q][pick[q]];
      fn(p);
      std::size_t q = 0;
      while (q < edges.size() && ++pick[q] == options[q].size()) pick[q++] = 0;
      if (q == edges.size()) break;
    }
  });
}

TEST(SchemeKinds, NamesRoundTrip) {
  for (SchemeKind k : kAllSchemeKinds) EXPECT_EQ(parse_scheme_kind(scheme_name(k)), k);
  EXPECT_EQ(scheme_name(SchemeKind::kCgcWorker), "CGC-W");
  EXPECT_THROW(parse_scheme_kind("hgc"), UnknownKindError);
  EXPECT_FALSE(recovers_full_gradient(SchemeKind::kGreedy));
  EXPECT_TRUE(recovers_full_gradient(SchemeKind::kStandardGc));
}

TEST(Schemes, LoadsAndWaits) {
  const Topology t = Topology::uniform(3, 3);
  const Tolerance tol{1, 1};
  auto make = [&](SchemeKind k) { return build({k, tol}, t, nullptr, 9); };
  const Scheme uncoded = make(SchemeKind::kUncoded);
  EXPECT_EQ(uncoded.load(), 1);
  EXPECT_EQ(uncoded.tolerance(), (Tolerance{0, 0}));
  EXPECT_EQ(uncoded.master_comm_load(), 3);
  const Scheme greedy = make(SchemeKind::kGreedy);
  EXPECT_EQ(greedy.load(), 1);
  EXPECT_EQ(greedy.master_wait(), 2);
  EXPECT_EQ(greedy.edge_wait(1), 2);
  const Scheme cgcw = make(SchemeKind::kCgcWorker);
  EXPECT_EQ(cgcw.tolerance(), (Tolerance{0, 1}));
  EXPECT_EQ(cgcw.load(), 2);
  EXPECT_EQ(cgcw.master_comm_load(), 3);
  const Scheme cgce = make(SchemeKind::kCgcEdge);
  EXPECT_EQ(cgce.tolerance(), (Tolerance{1, 0}));
  EXPECT_EQ(cgce.load(), 2);
  EXPECT_EQ(cgce.master_comm_load(), 2);
  const Scheme hgc = make(SchemeKind::kHgc);
  EXPECT_EQ(hgc.load(), 4);
  EXPECT_EQ(hgc.master_comm_load(), 2);
  const Scheme flat = make(SchemeKind::kStandardGc);
  // One whole edge plus one worker under each of the other two.
  EXPECT_EQ(flat.flat_stragglers(), 5);
  EXPECT_EQ(flat.load(), 6);
  EXPECT_EQ(flat.master_wait(), 4);
  EXPECT_EQ(flat.master_comm_load(), 4);
  EXPECT_EQ(static_cast<std::int64_t>(hgc.load()) * 9, hgc_min_load(t, tol).numerator * 9);
  EXPECT_EQ(conventional_min_load(t, tol).numerator, flat.load());
}

TEST(Schemes, JncssNeedsProfiles) {
  const Topology t = Topology::uniform(2, 2);
  EXPECT_THROW(build({SchemeKind::kHgcJncss, {}}, t, nullptr, 4), ValidationError);
  const SystemProfile p = SystemProfile::uniform(t, {10, 0.1}, {1, 0.1, 1, 0.1});
  const Scheme s = build({SchemeKind::kHgcJncss, {}}, t, &p, 4);
  ASSERT_TRUE(s.selection().has_value());
  EXPECT_EQ(s.tolerance(), solve(t, p, 4).tolerance);
  EXPECT_EQ(s.load(), s.selection()->load);
}

TEST(Schemes, RejectsBadRequests) {
  const Topology t = Topology::uniform(3, 3);
  EXPECT_THROW(build({SchemeKind::kHgc, {3, 0}}, t, nullptr, 9), ValidationError);
  EXPECT_THROW(build({SchemeKind::kHgc, {1, 1}}, t, nullptr, 10), DivisibilityError);
  EXPECT_THROW(build({SchemeKind::kHgc, {1, 1}}, t, nullptr, 0), ValidationError);
  // CGC-E ignores the worker budget, so an out-of-range s_w is harmless.
  EXPECT_NO_THROW(build({SchemeKind::kCgcEdge, {1, 2}}, t, nullptr, 9));
}

TEST(Schemes, FlattenedTopology) {
  EXPECT_EQ(flattened(Topology{{2, 3}}).workers_per_edge, (std::vector<int>{1, 1, 1, 1, 1}));
}

class FullGradient : public ::testing::TestWithParam<SchemeKind> {};

TEST_P(FullGradient, RecoveredUnderEveryToleratedPattern) {
  for (const Topology& t : {Topology::uniform(3, 2), Topology{{2, 4, 2}}}) {
    const int k = t.total_workers();
    const Scheme s = build({GetParam(), {1, 1}}, t, nullptr, k, BuildOptions{true, 5});
    const auto partials = random_partials(k, 3, 17);
    const GradientVector expected = full_sum(partials);
    int patterns = 0;
    if (GetParam() == SchemeKind::kStandardGc) {
      const int survivors = s.master_wait();
      for_each_combination(t.total_workers(), survivors, [&](const std::vector<int>& flat) {
        StragglerPattern p;
        p.workers.resize(static_cast<std::size_t>(t.edges()));
        for (int f : flat) {
          int i = 1, j = f;
          while (j > t.workers(i)) j -= t.workers(i++);
          if (p.edges.empty() || p.edges.back() != i) p.edges.push_back(i);
          p.workers[i - 1].push_back(j);
        }
        EXPECT_TRUE(s.aggregate(partials, p).isApprox(expected, 1e-9));
        ++patterns;
      });
      EXPECT_EQ(patterns, static_cast<int>(binomial(t.total_workers(), survivors)));
    } else {
      for_each_tolerated(t, s.tolerance(), [&](const StragglerPattern& p) {
        EXPECT_TRUE(s.aggregate(partials, p).isApprox(expected, 1e-9));
        ++patterns;
      });
      std::uint64_t expected_patterns = 0;
      for_each_combination(t.edges(), t.edges() - s.tolerance().edge_stragglers, [&](const std::vector<int>& f) {
        std::uint64_t product = 1;
        for (int i : f) product *= binomial(t.workers(i), t.workers(i) - s.tolerance().worker_stragglers);
        expected_patterns += product;
      });
      EXPECT_EQ(static_cast<std::uint64_t>(patterns), expected_patterns);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Kinds, FullGradient,
                         ::testing::Values(SchemeKind::kUncoded, SchemeKind::kCgcWorker,
                                           SchemeKind::kCgcEdge, SchemeKind::kStandardGc,
                                           SchemeKind::kHgc),
                         [](const auto& info) {
                           std::string name = scheme_name(info.param);
                           std::erase(name, '-');
                           return name;
                         });

TEST(Schemes, ArrivalOrderPicksTheFirstResponders) {
  const Topology t = Topology::uniform(3, 2);
  const Scheme s = build({SchemeKind::kHgc, {1, 1}}, t, nullptr, 6);
  const auto partials = random_partials(6, 2, 3);
  StragglerPattern p = StragglerPattern::none(t);
  p.edges = {3, 1, 2};
  p.workers[2] = {2, 1};
  EXPECT_TRUE(s.aggregate(partials, p).isApprox(full_sum(partials), 1e-9));
}

TEST(Schemes, GreedySumsWhatArrives) {
  const Topology t = Topology::uniform(3, 3);
  const Scheme s = build({SchemeKind::kGreedy, {1, 1}}, t, nullptr, 9);
  const auto partials = random_partials(9, 2, 8);
  StragglerPattern p;
  p.edges = {3, 1};
  p.workers = {{2, 3}, {}, {1, 2}};
  GradientVector expected = GradientVector::Zero(2);
  for (int i : {1, 3})
    for (int j : p.workers[i - 1])
      for (int k : s.plan().worker_set(i, j)) expected += partials.at(k);
  EXPECT_TRUE(s.aggregate(partials, p).isApprox(expected, 1e-12));
  EXPECT_FALSE(s.aggregate(partials, p).isApprox(full_sum(partials), 1e-6));
  EXPECT_TRUE(s.tolerates(StragglerPattern{{2}, {{}, {1}, {}}}));
}

TEST(Schemes, UncodedMatchesTheDirectSum) {
  const Topology t{{2, 3}};
  const Scheme s = build({SchemeKind::kUncoded, {}}, t, nullptr, 10);
  const auto partials = random_partials(10, 4, 1);
  EXPECT_TRUE(s.aggregate(partials, StragglerPattern::none(t)).isApprox(full_sum(partials), 1e-12));
  StragglerPattern missing = StragglerPattern::none(t);
  missing.workers[1].pop_back();
  EXPECT_FALSE(s.tolerates(missing));
}

TEST(Schemes, PatternsBeyondTheBudgetAreRejected) {
  const Topology t = Topology::uniform(3, 3);
  const Scheme s = build({SchemeKind::kHgc, {1, 1}}, t, nullptr, 9);
  const auto partials = random_partials(9, 1, 2);
  StragglerPattern too_few_edges{{1}, {{1, 2}, {}, {}}};
  EXPECT_FALSE(s.tolerates(too_few_edges));
  EXPECT_THROW(s.aggregate(partials, too_few_edges), ValidationError);
  StragglerPattern too_few_workers{{1, 2}, {{1, 2}, {3}, {}}};
  EXPECT_FALSE(s.tolerates(too_few_workers));
  StragglerPattern repeated{{1, 1}, {{1, 2}, {}, {}}};
  EXPECT_THROW(s.tolerates(repeated), ValidationError);
  StragglerPattern out_of_range{{1, 2}, {{1, 4}, {1, 2}, {}}};
  EXPECT_THROW(s.tolerates(out_of_range), ValidationError);
}

TEST(Schemes, MissingPartialsAndMissingCode) {
  const Topology t = Topology::uniform(3, 3);
  auto partials = random_partials(9, 1, 2);
  partials.erase(5);
  EXPECT_THROW(build({SchemeKind::kHgc, {1, 1}}, t, nullptr, 9).aggregate(partials, StragglerPattern::none(t)),
               MissingPartialError);
  EXPECT_THROW(build({SchemeKind::kUncoded, {}}, t, nullptr, 9).aggregate(partials, StragglerPattern::none(t)),
               MissingPartialError);
  const Scheme bare = build({SchemeKind::kHgc, {1, 1}}, t, nullptr, 9, BuildOptions{false, 0});
  EXPECT_FALSE(bare.code().has_value());
  EXPECT_THROW(bare.aggregate(random_partials(9, 1, 2), StragglerPattern::none(t)), ValidationError);
}

TEST(Schemes, SamplingRoutes) {
  const Topology t = Topology::uniform(3, 3);
  const SystemProfile p = SystemProfile::uniform(t, {20, 0.2}, {2, 0.1, 5, 0.1});
  const TrialStreams streams{4, 9};
  const Scheme hgc = build({SchemeKind::kHgc, {1, 1}}, t, nullptr, 9, BuildOptions{false, 0});
  EXPECT_EQ(hgc.sample(p, streams), sample_iteration(t, p, {1, 1}, 4, streams).total_ms);
  const Scheme flat = build({SchemeKind::kStandardGc, {1, 1}}, t, nullptr, 9, BuildOptions{false, 0});
  EXPECT_EQ(flat.sample(p, streams), sample_flat_iteration(t, p, 4, 6, streams));
  const Scheme uncoded = build({SchemeKind::kUncoded, {1, 1}}, t, nullptr, 9, BuildOptions{false, 0});
  EXPECT_EQ(uncoded.sample(p, streams), sample_iteration(t, p, {0, 0}, 1, streams).total_ms);
}

}  // namespace
}  // namespace hgc

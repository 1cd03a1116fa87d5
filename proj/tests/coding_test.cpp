#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <map>
#include <set>

#include "hgc/coding.hpp"
#include "hgc/combinatorics.hpp"
#include "hgc/rng.hpp"

namespace hgc {
namespace {

Matrix rows(std::initializer_list<std::initializer_list<double>> values) {
  Matrix m(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : values) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

// Hand-written coefficients for the three-edge, three-worker system with one
// straggler per layer and nine sub-datasets.
CodingScheme example_one_scheme() {
  AllocationPlan plan = allocate(Topology::uniform(3, 3), {1, 1}, 9);
  Matrix b = rows({{.5, .5, .5, 1, 1, 1, 0, 0, 0},
                   {.5, .5, .5, 0, 0, 0, 1, 1, 1},
                   {0, 0, 0, -1, -1, -1, 1, 1, 1}});
  Matrix dbar = rows({{.5, .5, 1, 1, 0, 0}, {.5, .5, 0, 0, 1, 1}, {0, 0, -1, -1, 1, 1}});
  return CodingScheme::from_matrices(std::move(plan), b, {dbar, dbar, dbar}, 0);
}

std::map<int, GradientVector> scalar_partials(int k, double (*value)(int)) {
  std::map<int, GradientVector> out;
  for (int i = 1; i <= k; ++i) out[i] = GradientVector::Constant(1, value(i));
  return out;
}

std::map<int, GradientVector> basis_partials(int k) {
  std::map<int, GradientVector> out;
  for (int i = 1; i <= k; ++i) out[i] = GradientVector::Unit(k, i - 1);
  return out;
}

Topology random_topology(RandomStream& rng) {
  Topology t;
  const int n = 1 + static_cast<int>(rng.below(4));
  for (int i = 0; i < n; ++i) t.workers_per_edge.push_back(1 + static_cast<int>(rng.below(5)));
  return t;
}

TEST(Allocate, ExampleOne) {
  const AllocationPlan plan = allocate(Topology::uniform(3, 3), {1, 1}, 9);
  EXPECT_EQ(plan.worker_load, 4);
  EXPECT_EQ(plan.edge_loads, (std::vector<int>{6, 6, 6}));
  EXPECT_EQ(plan.edge_set(1), (std::vector<int>{1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(plan.edge_set(2), (std::vector<int>{7, 8, 9, 1, 2, 3}));
  EXPECT_EQ(plan.edge_set(3), (std::vector<int>{4, 5, 6, 7, 8, 9}));
  EXPECT_EQ(plan.worker_set(1, 1), (std::vector<int>{1, 2, 3, 4}));
  EXPECT_EQ(plan.worker_set(1, 2), (std::vector<int>{5, 6, 1, 2}));
  EXPECT_EQ(plan.worker_set(1, 3), (std::vector<int>{3, 4, 5, 6}));
}

TEST(Allocate, NoRedundancy) {
  const AllocationPlan plan = allocate(Topology{{5}}, {0, 0}, 5);
  EXPECT_EQ(plan.edge_loads, std::vector<int>{5});
  EXPECT_EQ(plan.worker_load, 1);
  for (int j = 1; j <= 5; ++j) EXPECT_EQ(plan.worker_set(1, j), std::vector<int>{j});
}

TEST(Allocate, FullEdgeReplication) {
  const AllocationPlan plan = allocate(Topology::uniform(2, 2), {1, 0}, 4);
  EXPECT_EQ(plan.edge_loads, (std::vector<int>{4, 4}));
  EXPECT_EQ(plan.worker_load, 2);
  for (int k = 1; k <= 4; ++k) {
    EXPECT_GE(plan.position_in_edge(1, k), 0);
    EXPECT_GE(plan.position_in_edge(2, k), 0);
  }
}

TEST(Allocate, CoverageCountsOnRandomTopologies) {
  RandomStream rng(31);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Topology t = random_topology(rng);
    const Tolerance tol{static_cast<int>(rng.below(static_cast<std::uint64_t>(t.edges()))),
                        static_cast<int>(rng.below(static_cast<std::uint64_t>(t.min_workers())))};
    const int k = t.total_workers() * (1 + static_cast<int>(rng.below(3)));
    AllocationPlan plan;
    try {
      plan = allocate(t, tol, k);
    } catch (const ValidationError&) {
      continue;
    }
    ++checked;
    EXPECT_EQ(static_cast<std::int64_t>(plan.worker_load) * t.total_workers(),
              static_cast<std::int64_t>(k) * (tol.edge_stragglers + 1) * (tol.worker_stragglers + 1));
    int edge_total = 0;
    for (int n_i : plan.edge_loads) edge_total += n_i;
    EXPECT_EQ(edge_total, k * (tol.edge_stragglers + 1));
    std::map<int, int> edge_copies;
    for (int i = 1; i <= t.edges(); ++i) {
      const auto& set = plan.edge_set(i);
      EXPECT_EQ(std::set<int>(set.begin(), set.end()).size(), set.size());
      for (int d : set) ++edge_copies[d];
      std::map<int, int> worker_copies;
      for (int j = 1; j <= t.workers(i); ++j) {
        const auto& own = plan.worker_set(i, j);
        EXPECT_EQ(static_cast<int>(own.size()), plan.worker_load);
        EXPECT_EQ(std::set<int>(own.begin(), own.end()).size(), own.size());
        for (int d : own) ++worker_copies[d];
      }
      EXPECT_EQ(worker_copies.size(), set.size());
      for (const auto& [d, c] : worker_copies) EXPECT_EQ(c, tol.worker_stragglers + 1);
    }
    EXPECT_EQ(static_cast<int>(edge_copies.size()), k);
    for (const auto& [d, c] : edge_copies) EXPECT_EQ(c, tol.edge_stragglers + 1);
  }
  EXPECT_GT(checked, 80);
}

TEST(Allocate, DivisibilitySuggestsSmallestWorkingK) {
  try {
    allocate(Topology::uniform(3, 3), {1, 1}, 10);
    FAIL() << "expected DivisibilityError";
  } catch (const DivisibilityError& e) {
    // n_i = 2K/3 and D = 2 n_i / 3 force K to be a multiple of 9.
    EXPECT_EQ(e.suggested_datasets(), 18);
    EXPECT_GE(e.edge(), 1);
  }
}

TEST(Allocate, RejectsBadInputs) {
  EXPECT_THROW(allocate(Topology{{1, 100}}, {1, 0}, 101), InfeasibleToleranceError);
  EXPECT_THROW(allocate(Topology{{10, 1, 1, 1, 1, 1, 1, 1}}, {2, 0}, 17), DegenerateError);
  EXPECT_THROW(allocate(Topology::uniform(2, 2), {2, 0}, 4), ValidationError);
  EXPECT_THROW(allocate(Topology::uniform(2, 2), {0, 2}, 4), ValidationError);
  EXPECT_THROW(allocate(Topology::uniform(2, 2), {0, 0}, 0), ValidationError);
}

TEST(BuildScheme, SupportsMatchAllocation) {
  const AllocationPlan plan = allocate(Topology::uniform(3, 3), {1, 1}, 9);
  const CodingScheme s = build_scheme(plan, 17);
  for (int i = 1; i <= 3; ++i) {
    int nonzero = 0;
    for (int k = 1; k <= 9; ++k) {
      const bool held = plan.position_in_edge(i, k) >= 0;
      EXPECT_EQ(s.first_layer()(i - 1, k - 1) != 0.0, held);
      nonzero += held;
    }
    EXPECT_EQ(nonzero, 6);
    for (int j = 1; j <= 3; ++j) {
      const auto& own = plan.worker_set(i, j);
      int row_nonzero = 0;
      for (int k = 1; k <= 9; ++k) {
        const bool held = std::find(own.begin(), own.end(), k) != own.end();
        EXPECT_EQ(s.worker_code(i)(j - 1, k - 1) != 0.0, held);
        row_nonzero += held;
      }
      EXPECT_EQ(row_nonzero, 4);
    }
  }
}

TEST(BuildScheme, DeterministicForSeed) {
  const AllocationPlan plan = allocate(Topology{{2, 4, 2}}, {1, 1}, 8);
  const CodingScheme a = build_scheme(plan, 5);
  const CodingScheme b = build_scheme(plan, 5);
  const CodingScheme c = build_scheme(plan, 6);
  EXPECT_TRUE(a.first_layer() == b.first_layer());
  for (int i = 1; i <= 3; ++i) EXPECT_TRUE(a.edge_code(i) == b.edge_code(i));
  EXPECT_FALSE(a.first_layer() == c.first_layer());
}

TEST(BuildScheme, ScalarCase) {
  const CodingScheme s = build_scheme(allocate(Topology{{1}}, {0, 0}, 1), 3);
  const double x = s.first_layer()(0, 0);
  const double y = s.edge_code(1)(0, 0);
  EXPECT_NE(x, 0.0);
  EXPECT_NE(y, 0.0);
  const std::map<int, GradientVector> partials{{1, GradientVector::Constant(2, 3.0)}};
  const int one[] = {1};
  const GradientVector g = worker_encode(s, 1, 1, partials);
  EXPECT_NEAR(g(0), 3.0 * x * y, 1e-12);
  const GradientVector e = edge_decode(s, 1, {{1, g}}, one);
  const GradientVector full = master_decode(s, {{1, e}}, one);
  EXPECT_NEAR(full(0), 3.0, 1e-12);
  EXPECT_NEAR(master_decoding_vector(s, one)(0), 1.0 / x, 1e-12);
}

TEST(BuildScheme, RepeatedPatternsAcrossHeterogeneousTopologies) {
  const CodingScheme s = build_scheme(allocate(Topology{{2, 4, 2}}, {1, 1}, 16), 2);
  const VerificationReport r = verify_decodability(s, VerifyMode::exhaustive(1));
  EXPECT_TRUE(r.all_passed());
  EXPECT_EQ(r.total, static_cast<std::int64_t>(pattern_count(s.topology(), s.tolerance())));
}

TEST(FromMatrices, RejectsWrongSupportAndShape) {
  AllocationPlan plan = allocate(Topology::uniform(3, 3), {1, 1}, 9);
  Matrix b = example_one_scheme().first_layer();
  Matrix dbar = example_one_scheme().edge_code(1);
  Matrix off_support = b;
  off_support(0, 8) = 0.3;
  EXPECT_THROW(CodingScheme::from_matrices(plan, off_support, {dbar, dbar, dbar}, 0), ValidationError);
  EXPECT_THROW(CodingScheme::from_matrices(plan, b.leftCols(8), {dbar, dbar, dbar}, 0), ValidationError);
  EXPECT_THROW(CodingScheme::from_matrices(plan, b, {dbar, dbar}, 0), ValidationError);
  Matrix not_finite = b;
  not_finite(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(CodingScheme::from_matrices(plan, not_finite, {dbar, dbar, dbar}, 0), ValidationError);
}

TEST(ExampleOne, WorkerCombinationsMatchHandDerivation) {
  const CodingScheme s = example_one_scheme();
  const auto g = basis_partials(9);
  Vector g11(9), g12(9);
  g11 << .25, .25, .5, 1, 0, 0, 0, 0, 0;
  g12 << .25, .25, 0, 0, 1, 1, 0, 0, 0;
  EXPECT_TRUE(worker_encode(s, 1, 1, g).isApprox(g11, 1e-15));
  EXPECT_TRUE(worker_encode(s, 1, 2, g).isApprox(g12, 1e-15));
}

TEST(ExampleOne, EdgeDecodeGivesWeightedEdgeSum) {
  const CodingScheme s = example_one_scheme();
  const auto g = basis_partials(9);
  const int fastest[] = {1, 2};
  std::map<int, GradientVector> received{{1, worker_encode(s, 1, 1, g)}, {2, worker_encode(s, 1, 2, g)}};
  Vector g1(9);
  g1 << .5, .5, .5, 1, 1, 1, 0, 0, 0;
  EXPECT_TRUE(edge_decode(s, 1, received, fastest).isApprox(g1, 1e-12));
  const Vector c = edge_decoding_vector(s, 1, fastest);
  EXPECT_NEAR(c(0), 1.0, 1e-12);
  EXPECT_NEAR(c(1), 1.0, 1e-12);
}

TEST(ExampleOne, MasterAddsTwoFastestEdges) {
  const CodingScheme s = example_one_scheme();
  const int fastest[] = {1, 2};
  const Vector a = master_decoding_vector(s, fastest);
  EXPECT_NEAR(a(0), 1.0, 1e-12);
  EXPECT_NEAR(a(1), 1.0, 1e-12);
  const int other[] = {2, 3};
  const Vector a23 = master_decoding_vector(s, other);
  EXPECT_NEAR(a23(0), 2.0, 1e-12);
  EXPECT_NEAR(a23(1), -1.0, 1e-12);
}

TEST(ExampleOne, HandSchemePassesEveryPattern) {
  const VerificationReport r = verify_decodability(example_one_scheme(), VerifyMode::exhaustive(4));
  EXPECT_EQ(r.total, 81);
  EXPECT_EQ(r.passed, 81);
}

TEST(ExampleOne, GeneratedSchemePassesEveryPattern) {
  const CodingScheme s = build_scheme(allocate(Topology::uniform(3, 3), {1, 1}, 9), 1);
  const VerificationReport r = verify_decodability(s, VerifyMode::exhaustive(1));
  EXPECT_EQ(r.total, 81);
  EXPECT_TRUE(r.all_passed());
  EXPECT_LE(r.worst_relative_error, kRecoveryTolerance);
}

TEST(Encode, LinearCoefficientSum) {
  const CodingScheme s = build_scheme(allocate(Topology{{3, 3, 6}}, {1, 2}, 12), 8);
  const auto ones = scalar_partials(12, [](int) { return 1.0; });
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= s.topology().workers(i); ++j) {
      double expected = 0.0;
      for (int k : s.plan().worker_set(i, j)) expected += s.worker_code(i)(j - 1, k - 1) * s.first_layer()(i - 1, k - 1);
      EXPECT_NEAR(worker_encode(s, i, j, ones)(0), expected, 1e-12);
    }
  const auto zeros = scalar_partials(12, [](int) { return 0.0; });
  EXPECT_EQ(worker_encode(s, 2, 1, zeros)(0), 0.0);
}

TEST(Encode, MissingPartialsAreListed) {
  const CodingScheme s = example_one_scheme();
  std::map<int, GradientVector> partial{{1, GradientVector::Ones(2)}, {3, GradientVector::Ones(2)}};
  try {
    worker_encode(s, 1, 1, partial);
    FAIL() << "expected MissingPartialError";
  } catch (const MissingPartialError& e) {
    EXPECT_EQ(e.missing(), (std::vector<int>{2, 4}));
  }
  EXPECT_THROW(worker_encode(s, 4, 1, partial), ValidationError);
}

TEST(Decode, EdgeSumOracleWithUnitGradients) {
  const CodingScheme s = build_scheme(allocate(Topology{{4, 2, 2}}, {1, 1}, 8), 21);
  const auto ones = scalar_partials(8, [](int) { return 1.0; });
  for (int i = 1; i <= 3; ++i) {
    const int m = s.topology().workers(i);
    for_each_combination(m, m - 1, [&](const std::vector<int>& f) {
      std::map<int, GradientVector> received;
      for (int j : f) received[j] = worker_encode(s, i, j, ones);
      double expected = 0.0;
      for (int k : s.plan().edge_set(i)) expected += s.first_layer()(i - 1, k - 1);
      EXPECT_NEAR(edge_decode(s, i, received, f)(0), expected, 1e-9);
    });
  }
}

TEST(Decode, MasterRecoversTriangularSum) {
  const CodingScheme s = build_scheme(allocate(Topology::uniform(3, 2), {1, 0}, 6), 4);
  const auto g = scalar_partials(6, [](int k) { return static_cast<double>(k); });
  std::map<int, GradientVector> edge_results;
  for (int i = 1; i <= 3; ++i) {
    std::map<int, GradientVector> received;
    std::vector<int> all{1, 2};
    for (int j : all) received[j] = worker_encode(s, i, j, g);
    edge_results[i] = edge_decode(s, i, received, all);
  }
  for_each_combination(3, 2, [&](const std::vector<int>& f) {
    EXPECT_NEAR(master_decode(s, edge_results, f)(0), 21.0, 1e-9);
  });
}

TEST(Decode, NoStragglersZeroGradient) {
  const CodingScheme s = build_scheme(allocate(Topology::uniform(2, 2), {0, 0}, 4), 4);
  const auto zeros = scalar_partials(4, [](int) { return 0.0; });
  std::map<int, GradientVector> edges;
  const int both[] = {1, 2};
  for (int i = 1; i <= 2; ++i) {
    edges[i] = edge_decode(s, i, {{1, worker_encode(s, i, 1, zeros)}, {2, worker_encode(s, i, 2, zeros)}}, both);
  }
  EXPECT_EQ(master_decode(s, edges, both)(0), 0.0);
}

TEST(Decode, RejectsMalformedSubsets) {
  const CodingScheme s = example_one_scheme();
  const int too_few[] = {1};
  const int repeated[] = {1, 1};
  const int outside[] = {1, 4};
  EXPECT_THROW(master_decoding_vector(s, too_few), ValidationError);
  EXPECT_THROW(master_decoding_vector(s, repeated), ValidationError);
  EXPECT_THROW(master_decoding_vector(s, outside), ValidationError);
  EXPECT_THROW(edge_decoding_vector(s, 1, repeated), ValidationError);
}

TEST(Decode, ZeroedCoefficientIsDetected) {
  const CodingScheme good = build_scheme(allocate(Topology::uniform(3, 3), {1, 1}, 9), 1);
  Matrix b = good.first_layer();
  b(0, 0) = 0.0;
  std::vector<Matrix> codes;
  for (int i = 1; i <= 3; ++i) codes.push_back(good.edge_code(i));
  const CodingScheme bad = CodingScheme::from_matrices(good.plan(), b, codes, 1, 0,
                                                       CodingScheme::SupportCheck::kSkip);
  // Only edges 1 and 2 hold sub-dataset 1, so losing edge 2 leaves edge 1's
  // zero coefficient as the only route to it.
  const int fastest[] = {1, 3};
  EXPECT_THROW(master_decoding_vector(bad, fastest), DecodeSingularError);
  const VerificationReport r = verify_decodability(bad, VerifyMode::exhaustive(1));
  EXPECT_LT(r.passed, r.total);
  EXPECT_FALSE(r.all_passed());
}

TEST(Verify, PatternCounts) {
  EXPECT_EQ(pattern_count(Topology::uniform(3, 3), {1, 1}), 81u);
  EXPECT_EQ(pattern_count(Topology::uniform(2, 2), {1, 1}), 8u);
  EXPECT_EQ(pattern_count(Topology{{4, 2, 3}}, {0, 0}), 1u);
  const CodingScheme s = build_scheme(allocate(Topology::uniform(2, 2), {1, 1}, 4), 2);
  const VerificationReport r = verify_decodability(s, VerifyMode::exhaustive(2));
  EXPECT_EQ(r.total, 8);
  EXPECT_TRUE(r.all_passed());
  const CodingScheme none = build_scheme(allocate(Topology{{4, 2}}, {0, 0}, 6), 2);
  EXPECT_EQ(verify_decodability(none, VerifyMode::exhaustive(2)).total, 1);
}

TEST(Verify, SampledModeChecksRequestedCount) {
  const CodingScheme s = build_scheme(allocate(Topology::uniform(4, 5), {2, 2}, 20), 3);
  const VerificationReport r = verify_decodability(s, VerifyMode::sampled(200, 9));
  EXPECT_EQ(r.total, 200);
  EXPECT_TRUE(r.all_passed());
}

TEST(Verify, RandomTopologies) {
  RandomStream rng(77);
  int built = 0;
  for (int trial = 0; built < 30 && trial < 500; ++trial) {
    const Topology t = random_topology(rng);
    const Tolerance tol{static_cast<int>(rng.below(static_cast<std::uint64_t>(t.edges()))),
                        static_cast<int>(rng.below(static_cast<std::uint64_t>(t.min_workers())))};
    AllocationPlan plan;
    try {
      plan = allocate(t, tol, t.total_workers());
    } catch (const ValidationError&) {
      continue;
    }
    ++built;
    const VerificationReport r = verify_decodability(build_scheme(plan, static_cast<std::uint64_t>(trial)),
                                                     VerifyMode::exhaustive(3));
    EXPECT_TRUE(r.all_passed()) << "topology with " << t.edges() << " edges, tolerance " << to_string(tol);
  }
  EXPECT_EQ(built, 30);
}

}  // namespace
}  // namespace hgc

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "hgc/config.hpp"

namespace hgc {
namespace {

using nlohmann::json;

std::string error_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ValidationError& e) {
    return e.what();
  }
  ADD_FAILURE() << "accepted: " << doc.dump();
  return {};
}

TEST(Config, MinimalDocumentUsesDefaults) {
  const Config c = parse_config(json::parse(R"({"topology": {"edges": 2, "workers": 3},
                                                "tolerance": {"s_e": 1, "s_w": 1}, "K": 6})"));
  EXPECT_EQ(c.topology, Topology::uniform(2, 3));
  EXPECT_EQ(c.datasets, 6);
  EXPECT_EQ(c.sweep, std::vector<int>{6});
  EXPECT_EQ(c.schemes.size(), 7u);
  EXPECT_EQ(c.trials, 10000);
  EXPECT_EQ(c.seed, 1u);
  EXPECT_EQ(c.profiles.workers.size(), 2u);
  EXPECT_EQ(c.training.iterations, 200);
  EXPECT_EQ(c.verify.kind, VerifyMode::Kind::kExhaustive);
  EXPECT_FALSE(c.bounds.has_value());
}

TEST(Config, PresetsAndOverrides) {
  const Config example = preset("example-1");
  EXPECT_EQ(example.topology, Topology::uniform(3, 3));
  EXPECT_EQ(example.tolerance, (Tolerance{1, 1}));
  EXPECT_EQ(example.datasets, 9);
  const Config testbed = preset("paper-sec6");
  EXPECT_EQ(testbed.tolerance, (Tolerance{1, 2}));
  EXPECT_EQ(testbed.datasets, 40);
  EXPECT_EQ(testbed.verify.kind, VerifyMode::Kind::kSampled);
  EXPECT_GT(preset("paper-sec6-cifar").profiles.worker(1, 1).compute_ms, testbed.profiles.worker(1, 1).compute_ms);
  EXPECT_THROW(preset("nope"), ValidationError);

  const Config c = parse_config(json::parse(R"({"preset": "paper-sec6", "seed": 9,
                                                "experiment": {"trials": 50, "K_sweep": [40, 80]}})"));
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.trials, 50);
  EXPECT_EQ(c.sweep, (std::vector<int>{40, 80}));
  EXPECT_EQ(c.profiles.edge(4).link_ms, testbed.profiles.edge(4).link_ms);
}

TEST(Config, ProfileClassesAndCounts) {
  const Config c = parse_config(json::parse(R"({
    "tolerance": {"s_e": 0, "s_w": 1}, "K": 5,
    "profiles": {
      "edge_classes": {"near": {"link_ms": 10, "failure_probability": 0.1}},
      "worker_classes": {"fast": {"compute_ms_per_dataset": 2, "jitter_rate_per_ms": "inf",
                                  "link_ms": 5, "failure_probability": 0}},
      "edges": [
        {"class": "near", "workers": [{"class": "fast", "count": 2}]},
        {"link_ms": 40, "failure_probability": 0.3,
         "workers": ["fast", {"compute_ms_per_dataset": 7, "jitter_rate_per_ms": 0.5,
                              "link_ms": 1, "failure_probability": 0.2}, "fast"]}
      ]}})"));
  EXPECT_EQ(c.topology.workers_per_edge, (std::vector<int>{2, 3}));
  EXPECT_TRUE(std::isinf(c.profiles.worker(1, 2).jitter_rate));
  EXPECT_EQ(c.profiles.worker(2, 2).compute_ms, 7);
  EXPECT_EQ(c.profiles.edge(2).failure, 0.3);
  EXPECT_EQ(c.profiles.edge(1).link_ms, 10);
}

TEST(Config, SchemesTrainingAndBounds) {
  const Config c = parse_config(json::parse(R"({
    "topology": {"workers_per_edge": [3, 3, 3]}, "tolerance": {"s_e": 1, "s_w": 1}, "K": 9,
    "experiment": {"schemes": ["HGC", {"kind": "CGC-E", "s_e": 2}], "threads": 2},
    "verify": {"mode": "sampled", "count": 10},
    "training": {"scheme": "Greedy", "policy": {"mode": "random", "s_e": 1, "s_w": 0, "seed": 4}},
    "bounds": {"order_statistics": [{"rank": 2, "means": [1, 2, 3], "variances": [1, 1, 1]}]}})"));
  ASSERT_EQ(c.schemes.size(), 2u);
  EXPECT_EQ(c.schemes[1].kind, SchemeKind::kCgcEdge);
  EXPECT_EQ(c.schemes[1].tolerance, (Tolerance{2, 1}));
  EXPECT_EQ(c.threads, 2);
  EXPECT_EQ(c.verify.count, 10);
  EXPECT_EQ(c.training.scheme, SchemeKind::kGreedy);
  EXPECT_EQ(c.training.policy.mode, StragglerPolicy::Mode::kRandom);
  EXPECT_EQ(c.training.policy.seed, 4u);
  ASSERT_TRUE(c.bounds.has_value());
  EXPECT_EQ(c.bounds->order_statistics[0].rank, 2);
}

TEST(Config, SerializedFormParsesBack) {
  for (const auto& name : preset_names()) {
    Config c = preset(name);
    c.bounds = BoundsSettings{};
    c.bounds->gap_tolerance = Tolerance{0, 0};
    c.bounds->gap_inputs.edge_means = {1};
    c.bounds->gap_inputs.edge_variances = {0.5};
    c.bounds->gap_inputs.worker_means = {{1, 2}};
    c.bounds->gap_inputs.worker_variances = {{0, 1}};
    const json doc = config_to_json(c);
    EXPECT_EQ(config_to_json(parse_config(doc)).dump(), doc.dump()) << name;
  }
}

TEST(Config, ErrorsCarryTheFieldPath) {
  const json base = json::parse(R"({"topology": {"edges": 3, "workers": 3},
                                    "tolerance": {"s_e": 1, "s_w": 1}, "K": 9})");
  json doc = base;
  doc["experiment"] = {{"trails", 5}};
  EXPECT_NE(error_of(doc).find("/experiment/trails"), std::string::npos);
  doc = base;
  doc.erase("K");
  EXPECT_NE(error_of(doc).find("/K"), std::string::npos);
  doc = base;
  doc["tolerance"]["s_w"] = 3;
  EXPECT_NE(error_of(doc).find("/tolerance"), std::string::npos);
  doc = base;
  doc["K"] = -2;
  EXPECT_NE(error_of(doc).find("/K"), std::string::npos);
  doc = base;
  doc["experiment"] = {{"schemes", {"HGC", "Fancy"}}};
  EXPECT_NE(error_of(doc).find("/experiment/schemes/1"), std::string::npos);
  doc = base;
  doc["training"] = {{"policy", {{"mode", "random"}}}};
  EXPECT_NE(error_of(doc).find("/training/policy/s_e"), std::string::npos);
  doc = base;
  doc["verify"] = {{"mode", "some"}};
  EXPECT_NE(error_of(doc).find("/verify/mode"), std::string::npos);
  doc = base;
  doc["profiles"] = json::parse(R"({"edges": [{"link_ms": 1, "failure_probability": 1.0,
                                               "workers": ["missing"]}]})");
  EXPECT_NE(error_of(doc).find("/profiles/edges/0"), std::string::npos);
  doc = base;
  doc["profiles"] = json::parse(R"({"edges": [{"link_ms": 1, "failure_probability": 0.1,
                                               "workers": ["missing"]}]})");
  EXPECT_NE(error_of(doc).find("unknown worker class"), std::string::npos);
  doc = base;
  doc["profiles"] = json::parse(R"({"edges": [{"link_ms": 1, "failure_probability": 0.1, "workers": [
      {"compute_ms_per_dataset": 1, "jitter_rate_per_ms": 1, "link_ms": 1, "failure_probability": 0}]}]})");
  EXPECT_NE(error_of(doc).find("/profiles"), std::string::npos);
  doc = base;
  doc["bounds"] = json::parse(R"({"order_statistics": [{"rank": 1, "means": [1], "variances": [1, 2]}]})");
  EXPECT_NE(error_of(doc).find("/bounds/order_statistics/0"), std::string::npos);
  EXPECT_NE(error_of(json::parse(R"({"preset": "other"})")).find("/preset"), std::string::npos);
  EXPECT_NE(error_of(json::array()).find("expected an object"), std::string::npos);
}

TEST(Config, LoadingNamesTheFile) {
  const auto dir = std::filesystem::temp_directory_path() / "hgc_config_test";
  std::filesystem::create_directories(dir);
  const auto good = dir / "good.json";
  std::ofstream(good) << R"({"preset": "example-1", "K": 18})";
  EXPECT_EQ(load_config(good.string()).datasets, 18);
  const auto bad = dir / "bad.json";
  std::ofstream(bad) << R"({"preset": "example-1", "K": "nine"})";
  try {
    load_config(bad.string());
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(std::string(e.what()).rfind(bad.string() + ":/K", 0), 0u) << e.what();
  }
  const auto broken = dir / "broken.json";
  std::ofstream(broken) << "{";
  EXPECT_THROW(load_config(broken.string()), ValidationError);
  EXPECT_THROW(load_config((dir / "absent.json").string()), ValidationError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace hgc

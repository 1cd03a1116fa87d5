#include "hgc/scheme_io.hpp"

#include "hgc/json_util.hpp"

namespace hgc {

using nlohmann::json;
namespace ju = json_util;

json matrix_to_json(const Matrix& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"layout", "row-major"}, {"data", data}};
}

Matrix matrix_from_json(const json& doc, const std::string& path) {
  const auto rows = ju::as_int(ju::require(doc, "rows", path), path + "/rows");
  const auto cols = ju::as_int(ju::require(doc, "cols", path), path + "/cols");
  if (doc.contains("layout") && ju::as_string(doc["layout"], path + "/layout") != "row-major") {
    ju::fail(path + "/layout", "only row-major layout is supported");
  }
  if (rows < 0 || cols < 0) ju::fail(path, "negative dimension");
  const auto& data = ju::as_array(ju::require(doc, "data", path), path + "/data");
  if (static_cast<std::int64_t>(data.size()) != rows * cols) {
    ju::fail(path + "/data", "expected rows*cols entries");
  }
  Matrix m(rows, cols);
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t c = 0; c < cols; ++c) {
      const auto idx = static_cast<std::size_t>(r * cols + c);
      m(r, c) = ju::as_double(data[idx], path + "/data/" + std::to_string(idx));
    }
  return m;
}

json plan_to_json(const AllocationPlan& plan) {
  return json{{"topology", {{"workers_per_edge", plan.topology.workers_per_edge}}},
              {"tolerance",
               {{"s_e", plan.tolerance.edge_stragglers}, {"s_w", plan.tolerance.worker_stragglers}}},
              {"K", plan.datasets},
              {"edge_loads", plan.edge_loads},
              {"worker_load", plan.worker_load},
              {"edge_sets", plan.edge_sets},
              {"worker_sets", plan.worker_sets}};
}

json scheme_to_json(const CodingScheme& scheme) {
  json edge_codes = json::array();
  for (int i = 1; i <= scheme.topology().edges(); ++i)
    edge_codes.push_back(matrix_to_json(scheme.edge_code(i)));
  return json{{"format", "hgc-scheme"},
              {"version", 1},
              {"topology", {{"workers_per_edge", scheme.topology().workers_per_edge}}},
              {"tolerance",
               {{"s_e", scheme.tolerance().edge_stragglers},
                {"s_w", scheme.tolerance().worker_stragglers}}},
              {"K", scheme.plan().datasets},
              {"seed", scheme.seed()},
              {"attempt", scheme.attempt()},
              {"first_layer", matrix_to_json(scheme.first_layer())},
              {"edge_codes", edge_codes}};
}

CodingScheme scheme_from_json(const json& doc, const std::string& path) {
  if (!doc.is_object()) ju::fail(path.empty() ? "/" : path, "expected an object");
  if (doc.contains("format") && doc["format"] != "hgc-scheme") {
    ju::fail(path + "/format", "not an hgc-scheme document");
  }
  const auto& topo = ju::require(doc, "topology", path);
  Topology topology{ju::as_int_list(ju::require(topo, "workers_per_edge", path + "/topology"),
                                    path + "/topology/workers_per_edge")};
  const auto& tol = ju::require(doc, "tolerance", path);
  Tolerance tolerance{
      static_cast<int>(ju::as_int(ju::require(tol, "s_e", path + "/tolerance"), path + "/tolerance/s_e")),
      static_cast<int>(ju::as_int(ju::require(tol, "s_w", path + "/tolerance"), path + "/tolerance/s_w"))};
  const auto datasets = static_cast<int>(ju::as_int(ju::require(doc, "K", path), path + "/K"));
  const auto seed = ju::as_u64(ju::require(doc, "seed", path), path + "/seed");
  const int attempt = doc.contains("attempt")
                          ? static_cast<int>(ju::as_int(doc["attempt"], path + "/attempt"))
                          : 0;
  AllocationPlan plan = allocate(topology, tolerance, datasets);
  Matrix first = matrix_from_json(ju::require(doc, "first_layer", path), path + "/first_layer");
  const auto& codes = ju::as_array(ju::require(doc, "edge_codes", path), path + "/edge_codes");
  std::vector<Matrix> edge_codes;
  for (std::size_t i = 0; i < codes.size(); ++i)
    edge_codes.push_back(matrix_from_json(codes[i], path + "/edge_codes/" + std::to_string(i)));
  return CodingScheme::from_matrices(std::move(plan), std::move(first), std::move(edge_codes), seed,
                                     attempt);
}

json report_to_json(const VerificationReport& report, bool include_patterns) {
  json out{{"total", report.total},
           {"passed", report.passed},
           {"failed", report.total - report.passed},
           {"worst_relative_error", report.worst_relative_error},
           {"tolerance", kRecoveryTolerance}};
  if (include_patterns) {
    json patterns = json::array();
    for (const auto& p : report.patterns) {
      json entry{{"edges", p.edges},
                 {"workers", p.workers},
                 {"passed", p.passed},
                 {"relative_error", std::isfinite(p.relative_error) ? json(p.relative_error)
                                                                    : json(nullptr)}};
      if (!p.error.empty()) entry["error"] = p.error;
      patterns.push_back(std::move(entry));
    }
    out["patterns"] = std::move(patterns);
  }
  return out;
}

}  // namespace hgc

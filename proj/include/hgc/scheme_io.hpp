#pragma once

#include <string>

#include <json.hpp>

#include "hgc/coding.hpp"

namespace hgc {

// Scheme document: topology, tolerance, K, seed and every coefficient
// matrix as {"rows", "cols", "layout": "row-major", "data": [...]}.
// Doubles are written in shortest round-trip form, so export followed by
// import reproduces every coefficient bit for bit.
nlohmann::json scheme_to_json(const CodingScheme& scheme);

// Re-derives the allocation from the stored parameters and enforces the
// support structure. `path` prefixes error locations.
CodingScheme scheme_from_json(const nlohmann::json& doc, const std::string& path = "");

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& doc, const std::string& path);

nlohmann::json plan_to_json(const AllocationPlan& plan);
nlohmann::json report_to_json(const VerificationReport& report, bool include_patterns);

}  // namespace hgc

#include <gtest/gtest.h>

#include <cstring>

#include "hgc/scheme_io.hpp"

namespace hgc {
namespace {

using nlohmann::json;

bool bit_identical(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

CodingScheme sample_scheme() { return build_scheme(allocate(Topology{{2, 4, 2}}, {1, 1}, 8), 11); }

std::string expect_validation_error(const json& doc) {
  try {
    scheme_from_json(doc, "scheme.json");
  } catch (const ValidationError& e) {
    return e.what();
  }
  ADD_FAILURE() << "document was accepted";
  return {};
}

TEST(SchemeIo, RoundTripThroughTextIsBitIdentical) {
  const CodingScheme s = sample_scheme();
  const CodingScheme back = scheme_from_json(json::parse(scheme_to_json(s).dump()));
  EXPECT_TRUE(bit_identical(s.first_layer(), back.first_layer()));
  for (int i = 1; i <= 3; ++i) {
    EXPECT_TRUE(bit_identical(s.edge_code(i), back.edge_code(i)));
    EXPECT_TRUE(bit_identical(s.worker_code(i), back.worker_code(i)));
  }
  EXPECT_EQ(back.seed(), 11u);
  EXPECT_EQ(back.attempt(), s.attempt());
  EXPECT_EQ(back.topology(), s.topology());
  EXPECT_EQ(back.tolerance(), s.tolerance());
  EXPECT_EQ(scheme_to_json(back).dump(), scheme_to_json(s).dump());
}

TEST(SchemeIo, MatrixLayoutIsRowMajor) {
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const json doc = matrix_to_json(m);
  EXPECT_EQ(doc["data"], json({1.0, 2.0, 3.0, 4.0, 5.0, 6.0}));
  EXPECT_EQ(doc["rows"], 2);
  EXPECT_EQ(doc["cols"], 3);
  EXPECT_TRUE(matrix_from_json(doc, "") == m);
}

TEST(SchemeIo, AwkwardDoublesSurvive) {
  Matrix m(1, 4);
  m << 0.1 + 0.2, 1.0 / 3.0, -5e-300, 123456789.123456789;
  const Matrix back = matrix_from_json(json::parse(matrix_to_json(m).dump()), "");
  EXPECT_TRUE(bit_identical(m, back));
}

TEST(SchemeIo, RejectsSupportViolations) {
  json doc = scheme_to_json(sample_scheme());
  // Edge 1 holds sub-datasets 1..4 only.
  doc["first_layer"]["data"][7] = 0.5;
  EXPECT_NE(expect_validation_error(doc).find("support"), std::string::npos);
  doc = scheme_to_json(sample_scheme());
  doc["first_layer"]["data"][0] = 0.0;
  EXPECT_NE(expect_validation_error(doc).find("support"), std::string::npos);
}

TEST(SchemeIo, ErrorsNameTheField) {
  json doc = scheme_to_json(sample_scheme());
  doc.erase("K");
  EXPECT_NE(expect_validation_error(doc).find("scheme.json/K"), std::string::npos);

  doc = scheme_to_json(sample_scheme());
  doc["edge_codes"][1]["data"].erase(0);
  EXPECT_NE(expect_validation_error(doc).find("scheme.json/edge_codes/1/data"), std::string::npos);

  doc = scheme_to_json(sample_scheme());
  doc["first_layer"]["layout"] = "column-major";
  EXPECT_NE(expect_validation_error(doc).find("layout"), std::string::npos);

  doc = scheme_to_json(sample_scheme());
  doc["first_layer"]["data"][0] = "x";
  EXPECT_NE(expect_validation_error(doc).find("scheme.json/first_layer/data/0"), std::string::npos);

  doc = scheme_to_json(sample_scheme());
  doc["format"] = "other";
  EXPECT_NE(expect_validation_error(doc).find("format"), std::string::npos);

  doc = scheme_to_json(sample_scheme());
  doc["tolerance"]["s_w"] = 5;
  expect_validation_error(doc);

  expect_validation_error(json::array());
}

TEST(SchemeIo, PlanDocumentListsSets) {
  const json doc = plan_to_json(allocate(Topology::uniform(3, 3), {1, 1}, 9));
  EXPECT_EQ(doc["worker_load"], 4);
  EXPECT_EQ(doc["edge_loads"], json({6, 6, 6}));
  EXPECT_EQ(doc["edge_sets"][1], json({7, 8, 9, 1, 2, 3}));
  EXPECT_EQ(doc["worker_sets"][0][1], json({5, 6, 1, 2}));
}

TEST(SchemeIo, ReportDocument) {
  const VerificationReport r = verify_decodability(sample_scheme(), VerifyMode::exhaustive(1));
  const json brief = report_to_json(r, false);
  EXPECT_EQ(brief["total"], r.total);
  EXPECT_EQ(brief["failed"], 0);
  EXPECT_FALSE(brief.contains("patterns"));
  const json full = report_to_json(r, true);
  ASSERT_EQ(full["patterns"].size(), static_cast<std::size_t>(r.total));
  EXPECT_TRUE(full["patterns"][0]["passed"].get<bool>());
}

}  // namespace
}  // namespace hgc

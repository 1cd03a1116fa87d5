#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hgc/error.hpp"

namespace hgc::json_util {

using json = nlohmann::json;

// Errors carry the JSON-pointer style path of the offending field.
[[noreturn]] inline void fail(const std::string& path, const std::string& message) {
  throw ValidationError(path + ": " + message);
}

inline const json& require(const json& object, const std::string& key, const std::string& path) {
  if (!object.is_object()) fail(path, "expected an object");
  auto it = object.find(key);
  if (it == object.end()) fail(path + "/" + key, "missing required field");
  return *it;
}

inline double as_double(const json& value, const std::string& path) {
  if (!value.is_number()) fail(path, "expected a number");
  return value.get<double>();
}

inline std::int64_t as_int(const json& value, const std::string& path) {
  if (!value.is_number_integer()) fail(path, "expected an integer");
  return value.get<std::int64_t>();
}

inline std::uint64_t as_u64(const json& value, const std::string& path) {
  if (value.is_number_unsigned()) return value.get<std::uint64_t>();
  if (value.is_number_integer() && value.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(value.get<std::int64_t>());
  }
  fail(path, "expected a non-negative integer");
}

inline std::string as_string(const json& value, const std::string& path) {
  if (!value.is_string()) fail(path, "expected a string");
  return value.get<std::string>();
}

inline const json& as_array(const json& value, const std::string& path) {
  if (!value.is_array()) fail(path, "expected an array");
  return value;
}

inline std::vector<int> as_int_list(const json& value, const std::string& path) {
  std::vector<int> out;
  for (std::size_t i = 0; i < as_array(value, path).size(); ++i) {
    out.push_back(static_cast<int>(as_int(value[i], path + "/" + std::to_string(i))));
  }
  return out;
}

inline std::vector<double> as_double_list(const json& value, const std::string& path) {
  std::vector<double> out;
  for (std::size_t i = 0; i < as_array(value, path).size(); ++i) {
    out.push_back(as_double(value[i], path + "/" + std::to_string(i)));
  }
  return out;
}

}  // namespace hgc::json_util

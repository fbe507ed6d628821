#pragma once

// Path-tracking accessors for reading JSON documents. Every failure raises
// Error(kParse) prefixed with the JSON path of the offending value.

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "graspkit/error.hpp"
#include "graspkit/geometry.hpp"

namespace graspkit::jsonutil {

using json = nlohmann::ordered_json;

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorKind::kParse, path + ": " + msg);
}

inline std::string at(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

inline json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, std::string("invalid JSON: ") + e.what());
  }
}

inline const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path, std::string("missing field '") + key + "'");
  return *it;
}

inline double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

inline int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

inline bool boolean(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

inline std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

inline const json& array(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array");
  return v;
}

inline std::vector<double> numbers(const json& v, std::size_t n, const std::string& path) {
  if (!v.is_array() || v.size() != n) {
    fail(path, "expected an array of " + std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(number(v[i], at(path, i)));
  return out;
}

// Optional numeric member with a default.
inline double number_or(const json& obj, const char* key, double fallback,
                        const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return number(obj[key], path + "." + key);
}

inline int integer_or(const json& obj, const char* key, int fallback, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return integer(obj[key], path + "." + key);
}

inline AABox box_at(const json& v, const std::string& path) {
  const auto b = numbers(v, 4, path);
  try {
    return {b[0], b[1], b[2], b[3]};
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

inline OrientedRect rect_at(const json& v, const std::string& path) {
  const auto r = numbers(v, 5, path);
  try {
    return {r[0], r[1], r[2], r[3], r[4]};
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

inline json box_json(const AABox& b) { return {b.xmin(), b.ymin(), b.xmax(), b.ymax()}; }

inline json rect_json(const OrientedRect& r) {
  return {r.x(), r.y(), r.w(), r.h(), r.theta()};
}

}  // namespace graspkit::jsonutil

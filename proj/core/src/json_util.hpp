#pragma once

// Shared helpers for reading typed values out of JSON documents while collecting problems.

#include <string>
#include <vector>

#include <json.hpp>

#include "hmlab/point.hpp"

namespace hmlab::detail {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Reads fields of one JSON object; every problem is appended to `problems` with its path.
class Reader {
 public:
  Reader(const json& obj, std::string path, std::vector<std::string>& problems);

  bool ok() const { return ok_; }
  const std::string& path() const { return path_; }
  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const;
  const json* get(const std::string& key);
  void problem(const std::string& key, const std::string& msg);

  double number(const std::string& key, double fallback);
  double required_number(const std::string& key);
  long long integer(const std::string& key, long long fallback);
  bool boolean(const std::string& key, bool fallback);
  std::string string(const std::string& key, const std::string& fallback);
  std::string required_string(const std::string& key);
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback = {});
  // Point of dimension n (dim 0 when absent and not required).
  Point point(const std::string& key, int n, bool required = false);
  std::vector<Point> points(const std::string& key, int n);
  Box box(const std::string& key, int n, bool required = false);
  // Problems for every key outside `known`.
  void reject_unknown(const std::vector<std::string>& known);
  // Reader for the object at `key` (which must exist); shares the problem list.
  Reader child(const std::string& key) { return Reader(obj_.at(key), at(key), problems_); }
  std::vector<std::string>& problems() { return problems_; }

 private:
  const json& obj_;
  std::string path_;
  std::vector<std::string>& problems_;
  bool ok_ = true;
};

json to_json(const Point& p);
json to_json(const Box& b);

}  // namespace hmlab::detail

#include <optional>

namespace hmlab {
class BoundarySet;
}

namespace hmlab::detail {

// Builds the set described by `j`; returns nothing and records problems when it cannot.
std::optional<BoundarySet> boundary_from_json(const json& j, const std::string& path, const std::string& base_dir,
                                              std::vector<std::string>& problems);

// Line and column of a byte offset.
std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset);

json parse_document(const std::string& text, const std::string& what);

}  // namespace hmlab::detail

#include "json_util.hpp"

#include <algorithm>

namespace hmlab::detail {

Reader::Reader(const json& obj, std::string path, std::vector<std::string>& problems)
    : obj_(obj), path_(std::move(path)), problems_(problems) {
  if (!obj_.is_object()) {
    problems_.push_back((path_.empty() ? std::string("document") : path_) + ": expected an object");
    ok_ = false;
  }
}

bool Reader::has(const std::string& key) const { return obj_.is_object() && obj_.contains(key); }

const json* Reader::get(const std::string& key) {
  if (!has(key)) return nullptr;
  return &obj_.at(key);
}

void Reader::problem(const std::string& key, const std::string& msg) {
  problems_.push_back(at(key) + ": " + msg);
  ok_ = false;
}

double Reader::number(const std::string& key, double fallback) {
  const json* v = get(key);
  if (!v) return fallback;
  if (!v->is_number()) {
    problem(key, "expected a number");
    return fallback;
  }
  return v->get<double>();
}

double Reader::required_number(const std::string& key) {
  if (!has(key)) {
    problem(key, "missing");
    return 0.0;
  }
  return number(key, 0.0);
}

long long Reader::integer(const std::string& key, long long fallback) {
  const json* v = get(key);
  if (!v) return fallback;
  if (!v->is_number_integer()) {
    problem(key, "expected an integer");
    return fallback;
  }
  return v->get<long long>();
}

bool Reader::boolean(const std::string& key, bool fallback) {
  const json* v = get(key);
  if (!v) return fallback;
  if (!v->is_boolean()) {
    problem(key, "expected true or false");
    return fallback;
  }
  return v->get<bool>();
}

std::string Reader::string(const std::string& key, const std::string& fallback) {
  const json* v = get(key);
  if (!v) return fallback;
  if (!v->is_string()) {
    problem(key, "expected a string");
    return fallback;
  }
  return v->get<std::string>();
}

std::string Reader::required_string(const std::string& key) {
  if (!has(key)) {
    problem(key, "missing");
    return {};
  }
  return string(key, {});
}

std::vector<double> Reader::numbers(const std::string& key, const std::vector<double>& fallback) {
  const json* v = get(key);
  if (!v) return fallback;
  if (!v->is_array()) {
    problem(key, "expected an array of numbers");
    return fallback;
  }
  std::vector<double> out;
  for (const auto& x : *v) {
    if (!x.is_number()) {
      problem(key, "expected an array of numbers");
      return fallback;
    }
    out.push_back(x.get<double>());
  }
  return out;
}

namespace {

bool read_point(const json& v, int n, Point& p) {
  if (!v.is_array() || static_cast<int>(v.size()) != n) return false;
  p = Point(n);
  for (int i = 0; i < n; ++i) {
    if (!v[i].is_number()) return false;
    p[i] = v[i].get<double>();
  }
  return true;
}

}  // namespace

Point Reader::point(const std::string& key, int n, bool required) {
  const json* v = get(key);
  if (!v) {
    if (required) problem(key, "missing");
    return Point();
  }
  Point p;
  if (!read_point(*v, n, p)) {
    problem(key, "expected " + std::to_string(n) + " numbers");
    return Point();
  }
  return p;
}

std::vector<Point> Reader::points(const std::string& key, int n) {
  const json* v = get(key);
  if (!v) return {};
  std::vector<Point> out;
  if (!v->is_array()) {
    problem(key, "expected an array of points");
    return out;
  }
  for (std::size_t k = 0; k < v->size(); ++k) {
    Point p;
    if (!read_point((*v)[k], n, p)) {
      problem(key + "[" + std::to_string(k) + "]", "expected " + std::to_string(n) + " numbers");
      continue;
    }
    out.push_back(p);
  }
  return out;
}

Box Reader::box(const std::string& key, int n, bool required) {
  const json* v = get(key);
  if (!v) {
    if (required) problem(key, "missing");
    return Box{};
  }
  if (!v->is_object()) {
    problem(key, "expected {\"lo\": [...], \"hi\": [...]}");
    return Box{};
  }
  Reader r(*v, at(key), problems_);
  Box b{r.point("lo", n, true), r.point("hi", n, true)};
  r.reject_unknown({"lo", "hi"});
  if (!r.ok()) {
    ok_ = false;
    return Box{};
  }
  for (int i = 0; i < n; ++i)
    if (!(b.hi[i] > b.lo[i])) {
      problem(key, "hi must exceed lo on every axis");
      return Box{};
    }
  return b;
}

void Reader::reject_unknown(const std::vector<std::string>& known) {
  if (!obj_.is_object()) return;
  for (const auto& [k, v] : obj_.items()) {
    (void)v;
    if (std::find(known.begin(), known.end(), k) == known.end()) problem(k, "unknown field");
  }
}

json to_json(const Point& p) {
  json a = json::array();
  for (int i = 0; i < p.dim(); ++i) a.push_back(p[i]);
  return a;
}

json to_json(const Box& b) { return json{{"hi", to_json(b.hi)}, {"lo", to_json(b.lo)}}; }

}  // namespace hmlab::detail

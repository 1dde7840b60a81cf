#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <initializer_list>
#include <ostream>

namespace hmlab {

inline constexpr int kMaxDim = 4;

// Fixed-capacity point/vector in R^n, n <= kMaxDim. Value type, no allocation.
class Point {
 public:
  Point() = default;
  explicit Point(int dim) : dim_(dim) { assert(dim >= 0 && dim <= kMaxDim); }
  Point(std::initializer_list<double> xs) : dim_(static_cast<int>(xs.size())) {
    assert(dim_ <= kMaxDim);
    int i = 0;
    for (double x : xs) c_[i++] = x;
  }

  int dim() const { return dim_; }
  double& operator[](int i) { return c_[i]; }
  double operator[](int i) const { return c_[i]; }

  Point& operator+=(const Point& o) {
    for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Point& operator-=(const Point& o) {
    for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Point& operator*=(double s) {
    for (int i = 0; i < dim_; ++i) c_[i] *= s;
    return *this;
  }
  Point& operator/=(double s) {
    for (int i = 0; i < dim_; ++i) c_[i] /= s;
    return *this;
  }

  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }
  friend Point operator*(Point a, double s) { return a *= s; }
  friend Point operator*(double s, Point a) { return a *= s; }
  friend Point operator/(Point a, double s) { return a /= s; }
  friend Point operator-(Point a) { return a *= -1.0; }

  friend bool operator==(const Point& a, const Point& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i)
      if (a.c_[i] != b.c_[i]) return false;
    return true;
  }

  double dot(const Point& o) const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += c_[i] * o.c_[i];
    return s;
  }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }

  // Lexicographic order, used for deterministic tie-breaking.
  friend bool lex_less(const Point& a, const Point& b) {
    for (int i = 0; i < a.dim_; ++i) {
      if (a.c_[i] < b.c_[i]) return true;
      if (a.c_[i] > b.c_[i]) return false;
    }
    return false;
  }

  friend std::ostream& operator<<(std::ostream& os, const Point& p) {
    os << '(';
    for (int i = 0; i < p.dim_; ++i) os << (i ? ", " : "") << p.c_[i];
    return os << ')';
  }

 private:
  std::array<double, kMaxDim> c_{};
  int dim_ = 0;
};

inline double distance(const Point& a, const Point& b) { return (a - b).norm(); }
inline double distance2(const Point& a, const Point& b) { return (a - b).norm2(); }

inline Point zeros(int dim) { return Point(dim); }

inline Point unit(int dim, int axis) {
  Point p(dim);
  p[axis] = 1.0;
  return p;
}

// Axis-aligned box [lo, hi].
struct Box {
  Point lo;
  Point hi;

  int dim() const { return lo.dim(); }
  bool contains(const Point& p, double tol = 0.0) const {
    for (int i = 0; i < lo.dim(); ++i)
      if (p[i] < lo[i] - tol || p[i] > hi[i] + tol) return false;
    return true;
  }
  double volume() const {
    double v = 1.0;
    for (int i = 0; i < lo.dim(); ++i) v *= hi[i] - lo[i];
    return v;
  }
  Point center() const { return 0.5 * (lo + hi); }
};

}  // namespace hmlab

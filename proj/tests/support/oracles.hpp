#pragma once

// Independent reference values for the tests. Nothing here calls into the library's own
// oracles: each formula is evaluated from scratch.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "hmlab/solver.hpp"

namespace oracle {

// Harmonic measure of the segment |t| <= a on a line in R^3 for the weight 1/δ, seen from a point at
// longitudinal offset x and transverse distance r. Axisymmetric solutions reduce to harmonic
// functions of (t, r) in the half-plane r > 0, whose Poisson kernel is r / (π((t-s)² + r²)).
inline double line_segment_measure(double a, double x, double r) {
  return (std::atan((a - x) / r) + std::atan((a + x) / r)) / std::numbers::pi;
}

// Same quantity by composite Simpson integration of the half-plane Poisson kernel.
inline double line_segment_measure_quadrature(double a, double x, double r, int panels = 20000) {
  const double h = 2.0 * a / panels;
  auto k = [&](double s) { return r / (std::numbers::pi * ((x - s) * (x - s) + r * r)); };
  double sum = k(-a) + k(a);
  for (int i = 1; i < panels; ++i) sum += (i % 2 ? 4.0 : 2.0) * k(-a + i * h);
  return sum * h / 3.0;
}

// ∫_{B(0,R)} δ^{-1} for the x1-axis in R^3: slices at height t are discs of radius sqrt(R²-t²) and
// contribute 2π sqrt(R²-t²), so the integral is 2π · πR²/2 = π² R².
inline double line_unit_ball_measure(double radius) {
  const int panels = 200000;
  double sum = 0.0;
  const double h = 2.0 * radius / panels;
  for (int i = 0; i < panels; ++i) {
    const double t = -radius + (i + 0.5) * h;
    sum += 2.0 * std::numbers::pi * std::sqrt(radius * radius - t * t);
  }
  return sum * h;
}

// Dense Cholesky solve of a CSR system.
inline std::vector<double> dense_solve(const hmlab::CsrMatrix& a, const std::vector<double>& b) {
  const auto n = static_cast<Eigen::Index>(a.rows);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t r = 0; r < a.rows; ++r)
    for (std::size_t k = a.ptr[r]; k < a.ptr[r + 1]; ++k) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a.col[k])) = a.val[k];
  Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), n);
  Eigen::VectorXd x = m.llt().solve(rhs);
  return std::vector<double>(x.data(), x.data() + n);
}

}  // namespace oracle

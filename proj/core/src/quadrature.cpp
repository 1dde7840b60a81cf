#include "hmlab/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "hmlab/error.hpp"

namespace hmlab {
namespace {

// ∫∫_{[0,y]x[0,z]} (s² + t²)^{-1/2}, y, z >= 0.
double inv_radius_corner(double y, double z) {
  if (y <= 0.0 || z <= 0.0) return 0.0;
  return y * std::asinh(z / y) + z * std::asinh(y / z);
}

double signed_corner(double y, double z) {
  const double s = (y < 0 ? -1.0 : 1.0) * (z < 0 ? -1.0 : 1.0);
  return s * inv_radius_corner(std::abs(y), std::abs(z));
}

}  // namespace

double inv_radius_rect(double y0, double y1, double z0, double z1) {
  return signed_corner(y1, z1) - signed_corner(y0, z1) - signed_corner(y1, z0) +
         signed_corner(y0, z0);
}

bool has_closed_form_cell(const BoundarySet& gamma, double power) {
  if (power != -1.0) return false;
  const int n = gamma.ambient_dim();
  if (gamma.kind() == BoundaryKind::FlatPlane) return n - gamma.flat_dim() == 2;
  return gamma.kind() == BoundaryKind::PointSet && gamma.patch_count() == 1 && n == 2;
}

double cell_average_power(const BoundarySet& gamma, const Point& center, double side, double power,
                          int sub) {
  const int n = gamma.ambient_dim();
  if (has_closed_form_cell(gamma, power)) {
    const Point origin =
        gamma.kind() == BoundaryKind::PointSet ? gamma.patches()[0].center : Point(n);
    const int t0 = n - 2;
    const double hs = 0.5 * side;
    const double y = center[t0] - origin[t0];
    const double z = center[t0 + 1] - origin[t0 + 1];
    return inv_radius_rect(y - hs, y + hs, z - hs, z + hs) / (side * side);
  }
  int total = 1;
  for (int i = 0; i < n; ++i) total *= sub;
  double sum = 0.0;
  int used = 0;
  for (int k = 0; k < total; ++k) {
    Point p = center;
    int rem = k;
    for (int i = 0; i < n; ++i) {
      p[i] += ((rem % sub) + 0.5) * side / sub - 0.5 * side;
      rem /= sub;
    }
    const double dp = gamma.distance(p);
    if (dp <= 0.0) continue;
    sum += std::pow(dp, power);
    ++used;
  }
  if (used == 0) throw Error(ErrorCode::DistanceZero, "cell lies entirely on Γ");
  return sum / used;
}

void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  if (order < 1) throw Error(ErrorCode::InvalidArgument, "Gauss-Legendre order must be >= 1");
  nodes.assign(order, 0.0);
  weights.assign(order, 0.0);
  for (int i = 0; i < (order + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (order == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = -x;
    nodes[order - 1 - i] = x;
    weights[i] = weights[order - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

}  // namespace hmlab

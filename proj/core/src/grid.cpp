#include "hmlab/grid.hpp"

#include <algorithm>
#include <cmath>

#include "hmlab/error.hpp"

namespace hmlab {

std::size_t LatticeInfo::size() const {
  std::size_t s = 1;
  for (int a = 0; a < n; ++a) s *= static_cast<std::size_t>(dims[a]);
  return s;
}

Point LatticeInfo::node(std::size_t idx) const {
  Point p(n);
  for (int a = 0; a < n; ++a) {
    const auto l = static_cast<std::int64_t>(idx % static_cast<std::size_t>(dims[a]));
    idx /= static_cast<std::size_t>(dims[a]);
    p[a] = box.lo[a] + static_cast<double>(l) * h;
  }
  return p;
}

Lattice LatticeInfo::lattice(std::size_t idx) const {
  Lattice l{};
  for (int a = 0; a < n; ++a) {
    l[a] = static_cast<std::int64_t>(idx % static_cast<std::size_t>(dims[a]));
    idx /= static_cast<std::size_t>(dims[a]);
  }
  return l;
}

std::size_t LatticeInfo::index(const Lattice& l) const {
  std::size_t idx = 0;
  for (int a = 0; a < n; ++a) idx += static_cast<std::size_t>(l[a] * strides[a]);
  return idx;
}

int LatticeInfo::mirror_count(std::size_t idx) const {
  int k = 0;
  for (int a = 0; a < n; ++a) {
    const auto l = idx % static_cast<std::size_t>(dims[a]);
    idx /= static_cast<std::size_t>(dims[a]);
    if (mirror[a] && l == 0) ++k;
  }
  return k;
}

double LatticeInfo::volume_factor(std::size_t idx) const {
  return std::ldexp(1.0, -mirror_count(idx));
}

Box LatticeInfo::full_box() const {
  Box full = box;
  for (int a = 0; a < n; ++a)
    if (mirror[a]) full.lo[a] = 2.0 * box.lo[a] - box.hi[a];
  return full;
}

bool LatticeInfo::ball_range(const Point& c, double r, Lattice& lo, Lattice& hi) const {
  for (int a = 0; a < n; ++a) {
    lo[a] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil((c[a] - r - box.lo[a]) / h - 1e-9)));
    hi[a] = std::min<std::int64_t>(dims[a] - 1,
                                   static_cast<std::int64_t>(std::floor((c[a] + r - box.lo[a]) / h + 1e-9)));
    if (lo[a] > hi[a]) return false;
  }
  return true;
}

Grid::Grid(const BoundarySet& gamma, const GridSpec& spec) : gamma_(&gamma), spec_(spec) {
  const int n = gamma.ambient_dim();
  if (spec.box.dim() != n) throw Error(ErrorCode::DegenerateGrid, "box dimension differs from Γ");
  if (!(spec.h > 0.0)) throw Error(ErrorCode::DegenerateGrid, "h must be > 0");
  if (!(spec.kappa >= 1.0 && spec.kappa <= 4.0))
    throw Error(ErrorCode::InvalidArgument, "collar factor kappa must lie in [1, 4]");
  info_.n = n;
  info_.box = spec.box;
  info_.h = spec.h;
  info_.mirror = spec.mirror;
  std::int64_t stride = 1;
  for (int a = 0; a < n; ++a) {
    const double len = spec.box.hi[a] - spec.box.lo[a];
    if (!(len > 0.0)) throw Error(ErrorCode::DegenerateGrid, "box side has no length");
    const double cells = len / spec.h;
    const double rounded = std::round(cells);
    if (rounded < 2.0)
      throw Error(ErrorCode::DegenerateGrid, "h is too large for the box (fewer than 3 nodes on an axis)");
    if (std::abs(cells - rounded) > 1e-6 * std::max(1.0, cells))
      throw Error(ErrorCode::DegenerateGrid, "h does not divide the box side");
    info_.dims[a] = static_cast<std::int64_t>(rounded) + 1;
    info_.strides[a] = stride;
    stride *= info_.dims[a];
  }

  const Box full = info_.full_box();
  if (!gamma.intersects_box(full))
    throw Error(ErrorCode::GammaOutsideBox, "Γ does not meet the grid box");
  if (gamma.kind() != BoundaryKind::FlatPlane) {
    const double tol = 1e-9 * std::max(1.0, distance(full.lo, full.hi));
    for (const Patch& p : gamma.patches())
      if (!full.contains(p.center, tol))
        throw Error(ErrorCode::GammaOutsideBox, "a boundary patch lies outside the grid box");
  }

  const std::size_t total = info_.size();
  classes_.assign(total, NodeClass::Interior);
  const double collar = spec.kappa * spec.h;
  for (std::size_t idx = 0; idx < total; ++idx) {
    const Lattice l = info_.lattice(idx);
    if (gamma.distance(info_.node(idx)) < collar) {
      classes_[idx] = NodeClass::GammaCollar;
      ++collar_count_;
      continue;
    }
    for (int a = 0; a < n; ++a) {
      if (l[a] == info_.dims[a] - 1 || (l[a] == 0 && !spec.mirror[a])) {
        classes_[idx] = NodeClass::OuterBoundary;
        ++outer_count_;
        break;
      }
    }
  }
}

std::size_t Grid::nearest_node(const Point& p) const {
  Lattice l{};
  for (int a = 0; a < info_.n; ++a) {
    const double x = std::round((p[a] - info_.box.lo[a]) / info_.h);
    l[a] = std::clamp<std::int64_t>(static_cast<std::int64_t>(x), 0, info_.dims[a] - 1);
  }
  return info_.index(l);
}

Field make_field(const Grid& grid, double value) {
  Field f;
  f.info = grid.info();
  f.gamma_hash = grid.gamma().fingerprint();
  f.values.assign(grid.size(), value);
  return f;
}

double interpolate(const Field& field, const Point& p) {
  const LatticeInfo& info = field.info;
  const int n = info.n;
  Lattice base{};
  std::array<double, kMaxDim> frac{};
  for (int a = 0; a < n; ++a) {
    double x = p[a];
    if (info.mirror[a] && x < info.box.lo[a]) x = 2.0 * info.box.lo[a] - x;
    double s = (x - info.box.lo[a]) / info.h;
    s = std::clamp(s, 0.0, static_cast<double>(info.dims[a] - 1));
    auto b = static_cast<std::int64_t>(std::floor(s));
    if (b >= info.dims[a] - 1) b = info.dims[a] - 2;
    base[a] = b;
    frac[a] = s - static_cast<double>(b);
  }
  double sum = 0.0;
  for (int corner = 0; corner < (1 << n); ++corner) {
    Lattice l = base;
    double wgt = 1.0;
    for (int a = 0; a < n; ++a) {
      if (corner & (1 << a)) {
        l[a] += 1;
        wgt *= frac[a];
      } else {
        wgt *= 1.0 - frac[a];
      }
    }
    if (wgt != 0.0) sum += wgt * field.values[info.index(l)];
  }
  return sum;
}

}  // namespace hmlab

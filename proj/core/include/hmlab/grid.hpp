#pragma once

// Truncated lattice over a box with node classes, and scalar fields on it.

#include <array>
#include <cstdint>
#include <vector>

#include "hmlab/geometry.hpp"

namespace hmlab {

enum class NodeClass : std::uint8_t { Interior = 0, GammaCollar = 1, OuterBoundary = 2 };

using Lattice = std::array<std::int64_t, kMaxDim>;

struct GridSpec {
  Box box;
  double h = 0.0;
  double kappa = 1.0;
  // mirror[a]: the face x_a = box.lo[a] is a symmetry plane of the problem. Nodes on it stay
  // free and the grid represents the box reflected across it.
  std::array<bool, kMaxDim> mirror{};
};

// Geometry of a lattice, shared by grids and fields.
struct LatticeInfo {
  int n = 0;
  Lattice dims{};
  Lattice strides{};
  Box box;
  double h = 0.0;
  std::array<bool, kMaxDim> mirror{};

  std::size_t size() const;
  Point node(std::size_t idx) const;
  Lattice lattice(std::size_t idx) const;
  std::size_t index(const Lattice& l) const;
  // Number of mirror planes through the node; its dual cell is cut by 2^k.
  int mirror_count(std::size_t idx) const;
  double volume_factor(std::size_t idx) const;
  // Box the grid stands for once the mirror images are included.
  Box full_box() const;
  // Lattice range of nodes inside the closed ball B(c, r), clipped to the grid.
  bool ball_range(const Point& c, double r, Lattice& lo, Lattice& hi) const;
  // Calls f(idx) for every node with |node - c| <= r.
  template <class F>
  void for_each_in_ball(const Point& c, double r, F&& f) const;
};

class Grid {
 public:
  // Throws DegenerateGrid for h <= 0, a flat box or fewer than 3 nodes along an axis,
  // GammaOutsideBox if Γ misses the box or a bounded Γ leaves it.
  Grid(const BoundarySet& gamma, const GridSpec& spec);

  const BoundarySet& gamma() const { return *gamma_; }
  const GridSpec& spec() const { return spec_; }
  const LatticeInfo& info() const { return info_; }
  int dim() const { return info_.n; }
  double h() const { return info_.h; }
  std::size_t size() const { return classes_.size(); }
  Point node(std::size_t idx) const { return info_.node(idx); }

  NodeClass node_class(std::size_t idx) const { return classes_[idx]; }
  const std::vector<NodeClass>& classes() const { return classes_; }
  bool is_free(std::size_t idx) const { return classes_[idx] == NodeClass::Interior; }

  std::size_t collar_count() const { return collar_count_; }
  std::size_t outer_count() const { return outer_count_; }
  std::size_t free_count() const { return size() - collar_count_ - outer_count_; }
  double collar_fraction() const { return static_cast<double>(collar_count_) / size(); }

  std::size_t nearest_node(const Point& p) const;

 private:
  const BoundarySet* gamma_;
  GridSpec spec_;
  LatticeInfo info_;
  std::vector<NodeClass> classes_;
  std::size_t collar_count_ = 0;
  std::size_t outer_count_ = 0;
};

struct Field {
  LatticeInfo info;
  std::uint64_t gamma_hash = 0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

Field make_field(const Grid& grid, double value = 0.0);

// Multilinear interpolation of a field at p (clamped to the box; mirrors unfolded).
double interpolate(const Field& field, const Point& p);

template <class F>
void LatticeInfo::for_each_in_ball(const Point& c, double r, F&& f) const {
  Lattice lo{}, hi{};
  if (!ball_range(c, r, lo, hi)) return;
  const double r2 = r * r;
  Lattice l = lo;
  while (true) {
    double d2 = 0.0;
    for (int a = 0; a < n; ++a) {
      const double x = box.lo[a] + l[a] * h - c[a];
      d2 += x * x;
    }
    if (d2 <= r2) f(index(l));
    int a = 0;
    for (; a < n; ++a) {
      if (++l[a] <= hi[a]) break;
      l[a] = lo[a];
    }
    if (a == n) break;
  }
}

}  // namespace hmlab

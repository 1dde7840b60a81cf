#pragma once

// Dyadic Whitney cubes of Ω = R^n \ Γ, the partition of unity, the extension Eg,
// the discrete trace and the two seminorms.

#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "hmlab/geometry.hpp"
#include "hmlab/grid.hpp"

namespace hmlab {

class LinearSystem;

struct WhitneyCube {
  int level = 0;       // side 2^-level
  Lattice corner{};    // dyadic index of the lower corner
  double side = 0.0;
  Point center;
  Point xi;            // anchor on Γ (nearest patch centre)
  double delta = 0.0;  // dist(Q, Γ)
  bool collar_truncated = false;

  Box box() const;
};

class WhitneyDecomposition {
 public:
  WhitneyDecomposition(const BoundarySet& gamma, const Box& box, int level_min, int level_max);

  const BoundarySet& gamma() const { return *gamma_; }
  const Box& box() const { return box_; }
  int level_min() const { return level_min_; }
  int level_max() const { return level_max_; }

  // 20Q ⊂ Ω for the dyadic cube (level, corner).
  bool admissible(int level, const Lattice& corner) const;
  // Admissible, maximal within the level window and meeting the box.
  bool is_whitney(int level, const Lattice& corner) const;
  WhitneyCube make_cube(int level, const Lattice& corner) const;

  // The Whitney cube containing x, if x is covered (not in the collar, inside the box).
  std::optional<WhitneyCube> cube_containing(const Point& x) const;
  // Whitney cubes R with x in the interior of 2R.
  std::vector<WhitneyCube> cubes_near(const Point& x) const;

  // Enumerated cubes (filled by decompose()).
  const std::vector<WhitneyCube>& cubes() const { return cubes_; }
  const std::vector<std::vector<std::size_t>>& neighbors() const { return neighbors_; }
  // Volume of the part of the box left to the collar at level_max.
  double collar_volume() const { return collar_volume_; }

  void write_csv(std::ostream& os) const;

 private:
  friend WhitneyDecomposition decompose(const BoundarySet&, const Box&, int, int, std::size_t);
  void enumerate(std::size_t max_cubes);
  void enumerate_rec(int level, const Lattice& corner, std::size_t max_cubes);
  void build_neighbors();

  const BoundarySet* gamma_;
  Box box_;
  int level_min_, level_max_;
  std::vector<WhitneyCube> cubes_;
  std::vector<std::vector<std::size_t>> neighbors_;
  double collar_volume_ = 0.0;
};

// Enumerates the cubes, flags collar-truncated ones and builds the neighbour index.
WhitneyDecomposition decompose(const BoundarySet& gamma, const Box& box, int level_min, int level_max,
                               std::size_t max_cubes = 5'000'000);

// Level window that covers `box` with cubes no finer than needed for grid spacing h.
std::pair<int, int> default_levels(const Box& box, double h);

struct PartitionWeight {
  WhitneyCube cube;
  double phi = 0.0;
};

// φ_Q(x) for every cube with x in 2Q; throws OutsideCover in the collar or outside the box.
std::vector<PartitionWeight> partition_of_unity(const WhitneyDecomposition& w, const Point& x);

// Eg(x) = Σ φ_Q(x) y_Q with y_Q the σ-average of g over B_Q. Caches y_Q; thread-safe.
class Extension {
 public:
  Extension(const WhitneyDecomposition& w, std::span<const double> g);
  double operator()(const Point& x) const;
  // Empty outside the cover instead of throwing.
  std::optional<double> evaluate(const Point& x) const;
  double y(const WhitneyCube& q) const;

 private:
  const WhitneyDecomposition* w_;
  std::vector<double> g_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<int, Lattice>, double> cache_;
};

double extend(const WhitneyDecomposition& w, std::span<const double> g, const Point& x);

// Samples Eg on the grid; nodes outside the cover get NaN.
Field extension_field(const Grid& grid, const Extension& e);

struct TraceSamples {
  std::vector<double> values;       // per requested patch
  std::vector<double> limit_error;  // |avg(r_min) - avg(2 r_min)|
  std::vector<double> radius;       // radius actually used
  std::vector<std::size_t> patches;
};

// Ball averages of the finite node values of u around each patch at the smallest radius of the
// schedule that captures >= 8 nodes. Default schedule {8h, 4h, 2h}. Throws UnderResolved.
TraceSamples trace(const Field& u, const BoundarySet& gamma, std::span<const double> radii = {},
                   std::span<const std::size_t> patches = {});

// Σ_{i≠j} μ_i μ_j |g_i - g_j|² / |c_i - c_j|^{d+1} over pairs farther apart than the patch radius.
// Returns the squared seminorm.
double h_half_seminorm(std::span<const double> g, const BoundarySet& gamma);

// Σ_edges c_e (Δu)² with the conductances of `sys`; edges touching non-finite values are skipped.
// Returns the squared seminorm.
double w_seminorm(const Field& u, const LinearSystem& sys);

}  // namespace hmlab

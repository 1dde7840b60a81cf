#pragma once

// Boundary sets Γ ⊂ R^n of dimension d < n-1 and the distance/weight/measure
// primitives every other module is built on.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hmlab/kdtree.hpp"
#include "hmlab/point.hpp"

namespace hmlab {

enum class BoundaryKind { PointSet, Segment, PolyLine, LipschitzGraph, CantorSet, FlatPlane, Cloud };

std::string to_string(BoundaryKind kind);

// A patch approximates a piece of Γ: its σ-mass sits at `center`, spread over `radius`.
struct Patch {
  Point center;
  double weight = 0.0;
  double radius = 0.0;
};

// Immutable after construction; all queries are const and thread-safe.
class BoundarySet {
 public:
  // Finite set of points (d = 0), unit mass per point.
  static BoundarySet point_set(std::vector<Point> points);
  // Straight segment [a, b] (d = 1), split into `n_patches` equal patches.
  static BoundarySet segment(const Point& a, const Point& b, int n_patches);
  // Polygonal curve (d = 1) sampled at roughly `spacing`.
  static BoundarySet polyline(std::vector<Point> vertices, double spacing);
  // Curve t -> (t, amplitude * sin(frequency * t), 0, ...) for |t| <= extent (d = 1).
  static BoundarySet lipschitz_graph(int n, double amplitude, double frequency, double extent,
                                     double spacing);
  // Middle-thirds Cantor set on [0,1] x {0}^{n-1}, d = log 2 / log 3, patches at `level`.
  static BoundarySet cantor(int n, int level);
  // The d-plane R^d x {0}^{n-d}; patches cover [-extent, extent]^d on a lattice of `spacing`.
  static BoundarySet flat(int n, int d, double extent, double spacing);
  // Arbitrary patch cloud with a declared dimension; distances come from the cloud.
  static BoundarySet cloud(int n, double d, std::vector<Patch> patches);

  int ambient_dim() const { return n_; }
  double hausdorff_dim() const { return d_; }
  BoundaryKind kind() const { return kind_; }
  bool has_exact_distance() const;
  std::span<const Patch> patches() const { return patches_; }
  std::size_t patch_count() const { return patches_.size(); }
  double max_patch_radius() const { return max_radius_; }
  // Typical center-to-center distance between neighbouring patches.
  double patch_spacing() const { return spacing_; }
  // Nominal Ahlfors constant C0 of the construction.
  double ahlfors_constant() const { return c0_; }
  double total_measure() const;
  // Exponent d + 1 - n of the weight.
  double weight_exponent() const { return d_ + 1.0 - n_; }

  double distance(const Point& x) const;
  // Exact nearest point for analytic kinds, nearest patch center otherwise.
  Point nearest_point(const Point& x) const;
  // ∇δ: analytic where available, central differences at scale δ/8 otherwise.
  Point distance_gradient(const Point& x) const;
  std::size_t nearest_patch(const Point& x) const;
  void patches_in_ball(const Point& c, double r, std::vector<std::size_t>& out) const;
  // True if the closed box meets Γ.
  bool intersects_box(const Box& box) const;
  // dist(box, Γ); exact for point sets, flats and the Cantor set, a lower bound otherwise.
  double box_distance(const Box& box) const;
  // Stable hash of the construction parameters, used to tag fields.
  std::uint64_t fingerprint() const { return fingerprint_; }
  // Descriptor string for reports.
  const std::string& descriptor() const { return descriptor_; }

  // FlatPlane only: number of leading (longitudinal) coordinates.
  int flat_dim() const { return static_cast<int>(d_); }

 private:
  BoundarySet() = default;
  void finalize(double c0);
  double cloud_distance(const Point& x) const;

  int n_ = 0;
  double d_ = 0.0;
  BoundaryKind kind_ = BoundaryKind::PointSet;
  std::vector<Patch> patches_;
  std::vector<Point> vertices_;  // PointSet points, Segment endpoints, PolyLine vertices
  double amplitude_ = 0.0, frequency_ = 0.0;
  double max_radius_ = 0.0;
  double spacing_ = 0.0;
  double c0_ = 1.0;
  std::uint64_t fingerprint_ = 0;
  std::string descriptor_;
  std::shared_ptr<const KdTree> tree_;
};

// --- Operations --------------------------------------------------------------------------------

double distance(const BoundarySet& gamma, const Point& x);

// w(x) = δ(x)^{d+1-n}; throws DistanceZero on Γ.
double weight(const BoundarySet& gamma, const Point& x);

// D_α(x) = (∫_Γ |x-y|^{-d-α} dσ(y))^{-1/α}. Closed form for flat sets, patch quadrature otherwise.
double smoothed_distance(const BoundarySet& gamma, const Point& x, double alpha);
// Same quantity, always by patch quadrature (independent route for flat sets).
double smoothed_distance_quadrature(const BoundarySet& gamma, const Point& x, double alpha);

struct MeasureEstimate {
  double value = 0.0;
  bool under_resolved = false;
};

// σ(Γ ∩ B(x, r)) by summing the masses of patches centred in the ball.
MeasureEstimate surface_measure_ball(const BoundarySet& gamma, const Point& x, double r);

inline constexpr int kDefaultQuadratureLevel = -1;  // picks a per-dimension default

// m(B(x, r)) = ∫_B w by recursive subdivision towards Γ and the sphere.
double measure_ball(const BoundarySet& gamma, const Point& x, double r,
                    int quadrature_level = kDefaultQuadratureLevel);
// ∫_B δ^power; measure_ball is power = d + 1 - n.
double ball_integral(const BoundarySet& gamma, const Point& x, double r, double power,
                     int quadrature_level = kDefaultQuadratureLevel);

// Muckenhoupt A2 product (⨍_B w)(⨍_B w^{-1}).
double a2_product(const BoundarySet& gamma, const Point& x, double r,
                  int quadrature_level = kDefaultQuadratureLevel);

// Corkscrew constant ε from the packing argument with the set's C0, times 0.25.
double default_corkscrew_epsilon(const BoundarySet& gamma);

struct Corkscrew {
  Point point;
  double clearance = 0.0;  // δ(point)
  double epsilon = 0.0;    // configured constant the point was checked against
};

// A point A ∈ B(x0, r) with δ(A) >= ε r; throws NoCorkscrew otherwise.
Corkscrew corkscrew(const BoundarySet& gamma, const Point& x0, double r, double epsilon = -1.0);

struct ChainBall {
  Point center;
  double radius = 0.0;
};

struct HarnackChain {
  std::vector<ChainBall> balls;
  Point x1, x2;
  Point y1, y2;               // shifted segment endpoints
  double tube_clearance = 0;  // dist([y1, y2], Γ)
  double ball_clearance = 0;  // min over balls of δ(center) - 3 radius
  double epsilon_lambda = 0;  // min ball radius / r
  int n_lambda = 0;           // number of balls - 1
  double observed_c = 0;      // tube_clearance / (Λ^{-d/(n-d-1)} r)
};

// Tube constant c from the shifted-segment counting argument with the set's C0.
double default_chain_constant(const BoundarySet& gamma);

HarnackChain harnack_chain(const BoundarySet& gamma, const Point& x1, const Point& x2, double r,
                           double lambda, double c = -1.0);

// Lower bound on dist([a, b], Γ), exact for flat sets and point sets.
double segment_distance(const BoundarySet& gamma, const Point& a, const Point& b);

struct AhlforsReport {
  std::vector<Point> centers;
  std::vector<double> radii;
  std::vector<std::vector<double>> ratios;  // [center][radius]
  double exponent = 0.0;
  double c_lower = 0.0;
  double c_upper = 0.0;
  double budget_c0 = 0.0;
  // Least-squares slope of log(mean ratio) against log r, and whether the means are monotone.
  double drift_slope = 0.0;
  bool monotone_drift = false;
  bool pass = false;
};

// Samples σ(B(x, r)) / r^exponent over patch centres x and the given radii.
AhlforsReport ahlfors_check(const BoundarySet& gamma, int n_centers, std::span<const double> radii,
                            double budget_c0, double exponent = -1.0);

}  // namespace hmlab

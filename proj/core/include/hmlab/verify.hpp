#pragma once

// Estimate-verification harness: each check measures one family of inequalities on a concrete
// scenario over a refinement ladder and returns a self-contained EstimateReport.

#include <limits>
#include <string>
#include <vector>

#include "hmlab/fit.hpp"
#include "hmlab/potential.hpp"

namespace hmlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// One observed quantity, one value per ladder level (coarse to fine).
struct Quantity {
  std::string name;
  std::vector<double> values;
  double lower = -kInf;
  double upper = kInf;
  bool check_trend = true;  // successive values must stay within the report's stability factor
  bool gating = true;       // false: reported only

  bool within_budget() const;
  // Largest ratio of successive values (1 for a single level, inf when a sign flips or one is 0).
  double trend_ratio() const;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct EstimateReport {
  std::string id;
  std::string scenario;
  std::vector<double> h;  // ladder
  std::vector<Quantity> quantities;
  std::vector<Table> tables;
  std::vector<std::string> notes;
  double stability = 1.5;
  bool pass = false;

  Quantity& add(Quantity q);
  const Quantity* find(const std::string& name) const;
  // Recomputes `pass` from the stored quantities.
  bool evaluate();
  // Names of gating quantities that failed.
  std::vector<std::string> failures() const;
};

struct LadderSpec {
  GridSpec grid;  // box, κ and mirrors; h comes from `h`
  std::vector<double> h;
  CoefficientSpec coeffs;
  OuterSpec outer;
  SolveOptions solve;
};

// Largest amount by which a Dirichlet solution leaves the range of its pinned values.
double max_principle_violation(const Field& u, const Grid& grid);

// Patches grouped by the distance of their centres to x0: shells [edges[k], edges[k+1]).
// Patches beyond the last edge go to `rest` when it is non-empty.
Partition partition_by_shells(const BoundarySet& gamma, const Point& x0, const std::vector<double>& edges,
                              const std::vector<std::string>& names, const std::string& rest = "rest");

// --- measure and A2 --------------------------------------------------------------------------

struct MeasureSweep {
  std::vector<Point> near_centers;  // on Γ
  std::vector<Point> far_centers;   // δ >= 4 max radius
  std::vector<double> radii;        // >= 3 decades
  std::vector<int> quadrature_levels = {kDefaultQuadratureLevel};
  double exponent_tol = 0.1;
  double a2_budget = 100.0;
  // Optional reference ball and its exact measure.
  Point reference_center;
  double reference_radius = 0.0;
  double reference_measure = 0.0;
  double reference_tol = 0.01;
};

EstimateReport check_measure_and_a2(const BoundarySet& gamma, const MeasureSweep& sweep);

// --- Poincaré ---------------------------------------------------------------------------------

struct PoincareConfig {
  LadderSpec ladder;  // unmirrored; no solves are run
  Point center;       // on Γ
  double radius = 1.0;
  double cutoff = 0.25;  // fields are multiplied by min(1, δ / cutoff)
  int random_fields = 4;
  std::uint64_t seed = 7;
  double budget = 100.0;
};

EstimateReport check_poincare(const BoundarySet& gamma, const PoincareConfig& cfg);

// --- trace and extension ----------------------------------------------------------------------

struct TraceConfig {
  Box box;                     // grid and Whitney box
  std::vector<double> h;       // level_max follows default_levels for each h
  int traces = 10;
  std::uint64_t seed = 11;
  double ratio_budget = 1e3;
  double halving_lower = 0.35;  // e(h/2) / e(h) window
  double halving_upper = 0.65;
};

EstimateReport check_trace_extension(const BoundarySet& gamma, const TraceConfig& cfg);

// Lipschitz traces used by the trace check (k-th of a seeded family); constant for k < 0.
std::vector<double> lipschitz_trace(const BoundarySet& gamma, int k, std::uint64_t seed);

// --- interior regularity ----------------------------------------------------------------------

struct BallSpec {
  Point center;
  double radius = 0.0;
};

struct InteriorConfig {
  LadderSpec ladder;
  Point x0;                          // shells of the data set are measured from here
  double shell_lo = 0.0, shell_hi = 1.0;  // solution = ω^X of the patches with |p - x0| in [lo, hi)
  std::vector<BallSpec> balls;       // 3B ⊂ Ω
  double budget = 100.0;
  double oracle_tol = 0.10;          // flat line only
};

EstimateReport check_interior_regularity(const BoundarySet& gamma, const InteriorConfig& cfg);

// --- boundary regularity ----------------------------------------------------------------------

struct BoundaryRegularityConfig {
  LadderSpec ladder;
  Point x0;  // on Γ
  double radius = 1.0;
  double far_lo = 2.0, far_hi = 1e300;  // data set: patches with |p - x0| in [far_lo, far_hi)
  int scales = 4;
  double budget = 100.0;
};

EstimateReport check_boundary_regularity(const BoundarySet& gamma, const BoundaryRegularityConfig& cfg);

// --- Green function ---------------------------------------------------------------------------

struct GreenCheckConfig {
  LadderSpec near;                    // near field, lower bound and symmetry
  LadderSpec far;                     // single level on a large box for the far-field slope
  Point pole;
  Point direction;                    // unit ray from the pole
  std::vector<double> near_radii;     // in units of δ(pole), <= 1/2
  std::vector<double> far_radii;      // in units of δ(pole), spanning [1, 8]
  Point second_pole;                  // symmetry partner
  double slope_tol = 0.15;
  double symmetry_budget = 0.02;
  double lower_bound_budget = 100.0;  // ratio must lie in [1/budget, budget]
};

EstimateReport check_green(const BoundarySet& gamma, const GreenCheckConfig& cfg);

// --- harmonic measure -------------------------------------------------------------------------

struct HarmonicMeasureCheckConfig {
  LadderSpec ladder;
  Point x0;  // on Γ
  double radius = 0.5;
  double budget = 100.0;
  double oracle_tol = 0.05;  // flat Γ only
  // Sweeps skip nodes closer than this to the outer faces (<0: a quarter of the shortest side)
  // or closer to Γ than near_margin (<0: 4 times the coarsest h).
  double outer_margin = -1.0;
  double near_margin = -1.0;
};

EstimateReport check_harmonic_measure(const BoundarySet& gamma, const HarmonicMeasureCheckConfig& cfg);

// --- comparison -------------------------------------------------------------------------------

struct ComparisonConfig {
  LadderSpec ladder;
  Point x0;  // on Γ
  double radius = 1.0;
  double u_lo = 2.5, u_hi = 3.0;    // shells of the two data sets
  double v_lo = 3.25, v_hi = 3.75;
  double budget = 100.0;
  double degenerate_tol = 1e-14;
};

EstimateReport check_comparison(const BoundarySet& gamma, const ComparisonConfig& cfg);

// Normalized ratio window (min, max) of (u/v)(X) · v(X0)/u(X0) over free nodes of B(c, r).
// Throws DegeneratePair when v or u fails to exceed `tol` somewhere on the probe set.
std::pair<double, double> comparison_window(const Field& u, const Field& v, const Grid& grid, const Point& c,
                                            double r, const Point& x0, double tol = 1e-14);

}  // namespace hmlab

#pragma once

// Green functions by the regularized-pole construction, harmonic measure by Dirichlet solves
// with mollified indicators, and the flat-boundary Poisson oracle.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hmlab/solver.hpp"

namespace hmlab {

struct PoleSpec {
  Point y;
  double rho = -1.0;  // <= 0: δ(y)/100

  // Throws InvalidArgument unless δ(y) > 0 and 100ρ < δ(y).
  void validate(const BoundarySet& gamma) const;
};

struct GreenSample {
  PoleSpec pole;              // as used (ρ possibly raised)
  bool rho_raised = false;
  std::string warning;
  Field field;
  std::size_t ball_nodes = 0;  // nodes carrying the source, counted with mirror images
  double source_value = 0.0;   // 1 / ball_nodes
  SolveStats stats;
};

// Solves a(g, φ) = average of φ over B(y, ρ) with zero values on the collar and the outer box.
// Raises ρ to 2h with a warning when the ball would be unresolved; throws PoleUnresolved when
// the pole sits in the collar or no free node lies in the ball.
GreenSample green(const LinearSystem& sys, const PoleSpec& pole, const SolveOptions& opts = {});
// Same construction for A^T (identical assembly: only symmetric A is accepted).
GreenSample green_transpose(const LinearSystem& sys, const PoleSpec& pole, const SolveOptions& opts = {});

// Source vector of the regularized pole (per node, including mirror volume factors).
std::vector<double> pole_source(const Grid& grid, const PoleSpec& pole, std::size_t* ball_nodes = nullptr);

// Groups of boundary patches. group_of_patch[k] in [0, names.size()) or -1 (unassigned).
struct Partition {
  std::vector<std::string> names;
  std::vector<int> group_of_patch;

  std::size_t groups() const { return names.size(); }
  std::vector<std::size_t> members(int group) const;
};

// Assigns each patch to the first named box containing its centre; others to `rest` if given.
Partition partition_by_boxes(const BoundarySet& gamma,
                             const std::vector<std::pair<std::string, Box>>& boxes,
                             const std::string& rest = "");
Partition whole_partition(const BoundarySet& gamma, const std::string& name = "gamma");

// Kernel-smoothed indicator of the patches selected by `in_set`:
// g(p) = Σ_{q∈E} K(|p-q|) μ_q / Σ_q K(|p-q|) μ_q with a tent K of radius `width`.
// The smoothed indicators of a partition sum to 1 at every patch.
std::vector<double> mollified_indicator(const BoundarySet& gamma, const std::vector<bool>& in_set, double width);
std::vector<double> mollified_indicator(const BoundarySet& gamma, const Partition& part, int group, double width);

struct HarmonicMeasureRow {
  Partition partition;
  std::vector<Field> fields;  // ω^X(E_j) for every node X
  std::vector<SolveStats> stats;
  double mollification = 0.0;

  double at(int group, const Point& x) const { return interpolate(fields[group], x); }
  // 1 - Σ_j ω^X(E_j): mass lost to the outer boundary.
  double leakage(const Point& x) const;
};

// One Dirichlet solve per group. mollification <= 0 picks 2 patch spacings; values below that
// are rejected. Unassigned patches carry no data.
HarmonicMeasureRow harmonic_measure(const LinearSystem& sys, const Partition& partition, double mollification = -1.0,
                                    const OuterSpec& outer = {}, const SolveOptions& opts = {});

// ω^X(E) for flat Γ = R^d x {0}: the half-space Poisson kernel c_d t / (|x-y|² + t²)^{(d+1)/2}
// integrated over the box E ⊂ R^d. Closed forms for d = 1, 2; tensor Gauss quadrature otherwise.
double poisson_flat_oracle(int d, std::span<const double> longitudinal, double t, const Box& e);
// Same, reading X from Γ's coordinates. Throws NotFlat unless Γ is a flat plane or a segment
// (treated as its supporting line, E given in arclength from the first endpoint).
double poisson_flat_oracle(const BoundarySet& gamma, const Point& x, const Box& e);
// ∫ over R^d of the kernel by quadrature (normalization check).
double poisson_kernel_mass(int d, double t, double cutoff, int order = 64);

struct RepresentationReport {
  std::vector<Point> probes;
  std::vector<double> direct;       // u(x) from L u = f
  std::vector<double> represented;  // Σ_y g(x, y) f(y) h^n
  std::vector<double> rel_error;
  double max_rel_error = 0.0;
};

// Solves L u = f directly and compares with Σ_y g(y, x) f(y) h^n from one Green solve per probe
// (the pole is placed at the probe and symmetry of A is used).
RepresentationReport green_representation_check(const LinearSystem& sys,
                                                const std::function<double(const Point&)>& f,
                                                std::span<const Point> probes, const SolveOptions& opts = {});

// Smooth bump supported in B(c, r): exp(-1 / (1 - |x-c|²/r²)).
std::function<double(const Point&)> smooth_bump(const Point& c, double r);

}  // namespace hmlab

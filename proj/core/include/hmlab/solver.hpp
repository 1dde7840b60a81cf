#pragma once

// Edge-conductance discretization of -div(A∇u) on a Grid, Dirichlet pinning and
// Jacobi-preconditioned conjugate gradients.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hmlab/grid.hpp"

namespace hmlab {

enum class CoefficientKind { Identity, DiagonalOfDelta, SmoothedIdentity };

std::string to_string(CoefficientKind kind);
CoefficientKind parse_coefficient_kind(const std::string& name);

// A = w · diag(Â_1, ..., Â_n). Identity: Â = 1. DiagonalOfDelta: Â_k = 1 + amplitude sin(δ + k).
// SmoothedIdentity: Â = (D_α / δ)^{d+1-n}, i.e. A = D_α^{d+1-n} I.
struct CoefficientSpec {
  CoefficientKind kind = CoefficientKind::Identity;
  bool weighted = true;  // false: w ≡ 1 (plain Laplacian test mode)
  double alpha = 1.0;
  double amplitude = 0.25;
  bool symmetric = true;

  // Throws InvalidArgument for non-symmetric A or amplitude outside [0, 1).
  void validate() const;
  // Nominal C1 of the ellipticity window; 0 when only observed bounds are available.
  double ellipticity() const;
};

double directional_coefficient(const CoefficientSpec& spec, const BoundarySet& gamma, const Point& p,
                               int axis);

struct SolveOptions {
  double tol = 1e-10;
  std::int64_t max_iter = -1;  // -1: 20 sqrt(free) log(1/tol)
};

struct SolveStats {
  std::int64_t iterations = 0;
  double residual = 0.0;  // final relative residual
  double seconds = 0.0;
  std::size_t unknowns = 0;
  std::vector<double> history;
};

struct CsrMatrix {
  std::size_t rows = 0;
  std::vector<std::size_t> ptr;
  std::vector<std::size_t> col;
  std::vector<double> val;

  void multiply(std::span<const double> x, std::span<double> y) const;
};

std::vector<double> solve_cg(const CsrMatrix& a, std::span<const double> b, const SolveOptions& opts = {},
                             SolveStats* stats = nullptr);

class LinearSystem {
 public:
  const Grid& grid() const { return *grid_; }
  const CoefficientSpec& coefficients() const { return coeffs_; }

  // Conductance of the edge idx -> idx + stride[axis]; 0 when the edge does not exist.
  double conductance(std::size_t idx, int axis) const { return cond_[axis][pad_ + idx]; }
  double diagonal(std::size_t idx) const { return diag_[idx]; }
  std::size_t nnz() const;
  double min_directional() const { return min_dir_; }
  double max_directional() const { return max_dir_; }

  // Right-hand side (free nodes) and pinned values (pinned nodes), both indexed by node.
  std::vector<double>& rhs() { return rhs_; }
  const std::vector<double>& rhs() const { return rhs_; }
  std::vector<double>& pinned() { return pinned_; }
  const std::vector<double>& pinned() const { return pinned_; }

  // (L u)_i = Σ_{edges e ∋ i} c_e (u_i - u_j), every node.
  void apply(std::span<const double> u, std::span<double> out) const;
  // rhs_i - (L u)_i on free nodes, 0 on pinned nodes.
  std::vector<double> residual(std::span<const double> u, std::span<const double> rhs) const;
  // Σ_e c_e (u_i - u_j)²; with skip_nonfinite, edges touching NaN/inf are left out.
  double quadratic_form(std::span<const double> u, bool skip_nonfinite = false) const;
  // Matrix over free nodes; pinned neighbours are dropped. free_index maps rows to nodes.
  CsrMatrix to_csr(std::vector<std::size_t>* free_index = nullptr) const;

  // Padded-kernel access for the solver.
  std::size_t padding() const { return pad_; }
  void apply_padded(const double* u, double* out, bool free_only) const;

 private:
  friend LinearSystem assemble(const Grid& grid, const CoefficientSpec& coeffs);
  const Grid* grid_ = nullptr;
  CoefficientSpec coeffs_;
  std::size_t pad_ = 0;
  std::array<std::vector<double>, kMaxDim> cond_;
  std::vector<double> diag_;
  std::vector<double> rhs_;
  std::vector<double> pinned_;
  double min_dir_ = 1.0, max_dir_ = 1.0;
};

// Node dual-cell averages of the weight (1 in the unweighted test mode).
std::vector<double> node_weights(const Grid& grid, const CoefficientSpec& coeffs);

// Throws DegenerateGrid without free nodes, DisconnectedGrid if a free node cannot reach a pinned one.
LinearSystem assemble(const Grid& grid, const CoefficientSpec& coeffs);

// Solves with the system's own rhs/pinned vectors, or with the given ones.
Field solve_cg(const LinearSystem& sys, const SolveOptions& opts = {}, SolveStats* stats = nullptr);
Field solve_cg(const LinearSystem& sys, std::span<const double> rhs, std::span<const double> pinned,
               const SolveOptions& opts = {}, SolveStats* stats = nullptr);

double energy(const Field& u, const LinearSystem& sys);

enum class OuterKind { Extension, Zero, Nested, Custom };

std::string to_string(OuterKind kind);
OuterKind parse_outer_kind(const std::string& name);

struct OuterSpec {
  OuterKind kind = OuterKind::Extension;
  std::function<double(const Point&)> values;  // Custom
  double nested_h = 0.25;                      // Nested: coarse spacing
  double nested_scale = 8.0;                   // Nested: coarse box / fine box
};

struct DirichletResult {
  Field field;
  SolveStats stats;
  std::size_t outer_fallbacks = 0;  // outer nodes outside the Whitney cover, pinned to g
  double min_pinned = 0.0, max_pinned = 0.0;
};

// Collar nodes take g at the nearest patch, outer nodes follow `outer`, interior nodes are solved.
DirichletResult dirichlet_solve(const LinearSystem& sys, std::span<const double> g,
                                const OuterSpec& outer = {}, const SolveOptions& opts = {});
DirichletResult dirichlet_solve(const BoundarySet& gamma, std::span<const double> g, const GridSpec& spec,
                                const CoefficientSpec& coeffs, const OuterSpec& outer = {},
                                const SolveOptions& opts = {});

// Pinned values for the outer faces of `fine` from a coarse solve on a box `scale` times larger.
std::function<double(const Point&)> nested_outer_values(std::span<const double> g, const Grid& fine,
                                                        const CoefficientSpec& coeffs, double coarse_h,
                                                        double scale, const SolveOptions& opts);

}  // namespace hmlab

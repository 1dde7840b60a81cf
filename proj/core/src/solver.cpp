#include "hmlab/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "hmlab/error.hpp"
#include "hmlab/quadrature.hpp"
#include "hmlab/whitney.hpp"

namespace hmlab {

std::string to_string(CoefficientKind kind) {
  switch (kind) {
    case CoefficientKind::Identity: return "identity";
    case CoefficientKind::DiagonalOfDelta: return "diagonal_of_delta";
    case CoefficientKind::SmoothedIdentity: return "smoothed_identity";
  }
  return "unknown";
}

CoefficientKind parse_coefficient_kind(const std::string& name) {
  if (name == "identity" || name == "delta-power" || name == "delta_power") return CoefficientKind::Identity;
  if (name == "diagonal_of_delta" || name == "diagonal") return CoefficientKind::DiagonalOfDelta;
  if (name == "smoothed_identity" || name == "d_alpha" || name == "D_alpha") return CoefficientKind::SmoothedIdentity;
  throw Error(ErrorCode::InvalidArgument, "unknown coefficient kind '" + name + "'");
}

void CoefficientSpec::validate() const {
  if (!symmetric) throw Error(ErrorCode::InvalidArgument, "non-symmetric coefficients are not supported");
  if (!(amplitude >= 0.0 && amplitude < 1.0))
    throw Error(ErrorCode::InvalidArgument, "coefficient amplitude must lie in [0, 1)");
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be > 0");
}

double CoefficientSpec::ellipticity() const {
  switch (kind) {
    case CoefficientKind::Identity: return 1.0;
    case CoefficientKind::DiagonalOfDelta: return 1.0 / (1.0 - amplitude);
    case CoefficientKind::SmoothedIdentity: return 0.0;
  }
  return 0.0;
}

double directional_coefficient(const CoefficientSpec& spec, const BoundarySet& gamma, const Point& p,
                               int axis) {
  switch (spec.kind) {
    case CoefficientKind::Identity:
      return 1.0;
    case CoefficientKind::DiagonalOfDelta:
      return 1.0 + spec.amplitude * std::sin(gamma.distance(p) + axis);
    case CoefficientKind::SmoothedIdentity: {
      const double dp = gamma.distance(p);
      if (dp <= 0.0) throw Error(ErrorCode::DistanceZero, "D_alpha ratio requested on Γ");
      return std::pow(smoothed_distance(gamma, p, spec.alpha) / dp, gamma.weight_exponent());
    }
  }
  return 1.0;
}

// --- CSR --------------------------------------------------------------------------------------

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t k = ptr[i]; k < ptr[i + 1]; ++k) s += val[k] * x[col[k]];
    y[i] = s;
  }
}

namespace {

std::int64_t default_max_iter(std::size_t unknowns, double tol) {
  const double it = 20.0 * std::sqrt(static_cast<double>(std::max<std::size_t>(unknowns, 1))) *
                    std::log(1.0 / std::min(tol, 0.5));
  return std::max<std::int64_t>(100, static_cast<std::int64_t>(it));
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::vector<double> solve_cg(const CsrMatrix& a, std::span<const double> b, const SolveOptions& opts,
                             SolveStats* stats) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = a.rows;
  if (b.size() != n) throw Error(ErrorCode::InvalidArgument, "rhs size differs from the matrix");
  std::vector<double> inv_diag(n, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = a.ptr[i]; k < a.ptr[i + 1]; ++k)
      if (a.col[k] == i && a.val[k] > 0.0) inv_diag[i] = 1.0 / a.val[k];
  std::vector<double> x(n, 0.0), r(b.begin(), b.end()), z(n), p(n), q(n);
  const double bnorm = std::sqrt(dot(b.data(), b.data(), n));
  SolveStats local;
  local.unknowns = n;
  const std::int64_t max_iter = opts.max_iter > 0 ? opts.max_iter : default_max_iter(n, opts.tol);
  if (bnorm == 0.0) {
    if (stats) *stats = local;
    return x;
  }
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r.data(), z.data(), n);
  double rel = 1.0;
  std::int64_t it = 0;
  while (true) {
    rel = std::sqrt(dot(r.data(), r.data(), n)) / bnorm;
    local.history.push_back(rel);
    if (rel <= opts.tol) break;
    if (it >= max_iter)
      throw NoConvergenceError("CG stopped at relative residual " + std::to_string(rel), local.history);
    a.multiply(p, q);
    const double alpha = rz / dot(p.data(), q.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r.data(), z.data(), n);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    ++it;
  }
  local.iterations = it;
  local.residual = rel;
  local.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (stats) *stats = std::move(local);
  return x;
}

// --- assembly ---------------------------------------------------------------------------------

std::vector<double> node_weights(const Grid& grid, const CoefficientSpec& coeffs) {
  const std::size_t total = grid.size();
  std::vector<double> w(total, 1.0);
  if (!coeffs.weighted) return w;
  const BoundarySet& gamma = grid.gamma();
  const LatticeInfo& info = grid.info();
  const double p = gamma.weight_exponent();
  const double h = grid.h();
  if (gamma.kind() == BoundaryKind::FlatPlane) {
    // The weight only depends on the transverse coordinates, which own the largest strides.
    std::size_t block = 1;
    for (int a = 0; a < gamma.flat_dim(); ++a) block *= static_cast<std::size_t>(info.dims[a]);
    for (std::size_t t = 0; t < total / block; ++t) {
      const double v = cell_average_power(gamma, info.node(t * block), h, p);
      std::fill(w.begin() + static_cast<std::ptrdiff_t>(t * block),
                w.begin() + static_cast<std::ptrdiff_t>((t + 1) * block), v);
    }
    return w;
  }
  for (std::size_t i = 0; i < total; ++i) w[i] = cell_average_power(gamma, info.node(i), h, p);
  return w;
}

LinearSystem assemble(const Grid& grid, const CoefficientSpec& coeffs) {
  coeffs.validate();
  if (grid.free_count() == 0) throw Error(ErrorCode::DegenerateGrid, "grid has no free nodes");
  const LatticeInfo& info = grid.info();
  const BoundarySet& gamma = grid.gamma();
  const int n = info.n;
  const std::size_t total = grid.size();

  LinearSystem sys;
  sys.grid_ = &grid;
  sys.coeffs_ = coeffs;
  sys.pad_ = static_cast<std::size_t>(info.strides[n - 1]);
  sys.rhs_.assign(total, 0.0);
  sys.pinned_.assign(total, 0.0);
  sys.diag_.assign(total, 0.0);

  const std::vector<double> w = node_weights(grid, coeffs);
  const double scale = std::pow(grid.h(), n - 2);
  // Directional factors for flat sets under SmoothedIdentity are constant; compute once.
  double flat_ratio = 0.0;
  if (coeffs.kind == CoefficientKind::SmoothedIdentity && gamma.kind() == BoundaryKind::FlatPlane) {
    Point probe(n);
    probe[n - 1] = 1.0;
    flat_ratio = directional_coefficient(coeffs, gamma, probe, 0);
  }
  double min_dir = std::numeric_limits<double>::infinity();
  double max_dir = 0.0;

  for (int a = 0; a < n; ++a) {
    std::vector<double>& c = sys.cond_[a];
    c.assign(total + 2 * sys.pad_, 0.0);
    const auto s = static_cast<std::size_t>(info.strides[a]);
    for (std::size_t i = 0; i < total; ++i) {
      const Lattice l = info.lattice(i);
      if (l[a] == info.dims[a] - 1) continue;
      const std::size_t j = i + s;
      double dir = 1.0;
      if (coeffs.kind == CoefficientKind::SmoothedIdentity && gamma.kind() == BoundaryKind::FlatPlane) {
        dir = flat_ratio;
      } else if (coeffs.kind != CoefficientKind::Identity) {
        Point mid = 0.5 * (info.node(i) + info.node(j));
        for (int shift = 1; shift < n && gamma.distance(mid) <= 0.0; ++shift)
          mid[(a + shift) % n] += 0.5 * info.h;
        dir = directional_coefficient(coeffs, gamma, mid, a);
      }
      min_dir = std::min(min_dir, dir);
      max_dir = std::max(max_dir, dir);
      int k = 0;
      for (int b = 0; b < n; ++b)
        if (b != a && info.mirror[b] && l[b] == 0) ++k;
      const double ce = scale * std::sqrt(w[i] * w[j]) * dir * std::ldexp(1.0, -k);
      if (!(ce > 0.0) || !std::isfinite(ce))
        throw Error(ErrorCode::InvalidArgument, "non-positive or non-finite conductance");
      c[sys.pad_ + i] = ce;
      sys.diag_[i] += ce;
      sys.diag_[j] += ce;
    }
  }
  sys.min_dir_ = min_dir;
  sys.max_dir_ = max_dir;
  const double c1 = coeffs.ellipticity();
  if (c1 > 0.0 && (min_dir < 1.0 / c1 - 1e-12 || max_dir > c1 + 1e-12))
    throw Error(ErrorCode::InvalidArgument, "directional coefficients leave the ellipticity window");

  // Every free node must reach a pinned node through positive conductances.
  std::vector<std::uint8_t> seen(total, 0);
  std::vector<std::size_t> queue;
  for (std::size_t i = 0; i < total; ++i)
    if (!grid.is_free(i)) {
      seen[i] = 1;
      queue.push_back(i);
    }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::size_t i = queue[head];
    for (int a = 0; a < n; ++a) {
      const auto s = static_cast<std::size_t>(info.strides[a]);
      if (sys.cond_[a][sys.pad_ + i] > 0.0 && !seen[i + s]) {
        seen[i + s] = 1;
        queue.push_back(i + s);
      }
      if (i >= s && sys.cond_[a][sys.pad_ + i - s] > 0.0 && !seen[i - s]) {
        seen[i - s] = 1;
        queue.push_back(i - s);
      }
    }
  }
  if (queue.size() != total)
    throw Error(ErrorCode::DisconnectedGrid,
                std::to_string(total - queue.size()) + " free nodes have no path to a pinned node");
  return sys;
}

std::size_t LinearSystem::nnz() const {
  std::size_t edges = 0;
  for (int a = 0; a < grid_->dim(); ++a)
    for (double c : cond_[a])
      if (c > 0.0) ++edges;
  return grid_->size() + 2 * edges;
}

void LinearSystem::apply_padded(const double* u, double* out, bool free_only) const {
  const LatticeInfo& info = grid_->info();
  const int n = info.n;
  const auto total = static_cast<std::ptrdiff_t>(grid_->size());
  const auto& cls = grid_->classes();
  std::array<const double*, kMaxDim> c{};
  std::array<std::ptrdiff_t, kMaxDim> s{};
  for (int a = 0; a < n; ++a) {
    c[a] = cond_[a].data() + pad_;
    s[a] = static_cast<std::ptrdiff_t>(info.strides[a]);
  }
  for (std::ptrdiff_t i = 0; i < total; ++i) {
    if (free_only && cls[i] != NodeClass::Interior) {
      out[i] = 0.0;
      continue;
    }
    const double ui = u[i];
    double y = 0.0;
    for (int a = 0; a < n; ++a) {
      const double* ca = c[a];
      y += ca[i] * (ui - u[i + s[a]]);
      y += ca[i - s[a]] * (ui - u[i - s[a]]);
    }
    out[i] = y;
  }
}

void LinearSystem::apply(std::span<const double> u, std::span<double> out) const {
  const std::size_t total = grid_->size();
  std::vector<double> padded(total + 2 * pad_, 0.0);
  std::copy(u.begin(), u.end(), padded.begin() + static_cast<std::ptrdiff_t>(pad_));
  apply_padded(padded.data() + pad_, out.data(), false);
}

std::vector<double> LinearSystem::residual(std::span<const double> u, std::span<const double> rhs) const {
  std::vector<double> lu(grid_->size());
  apply(u, lu);
  std::vector<double> r(grid_->size(), 0.0);
  for (std::size_t i = 0; i < r.size(); ++i)
    if (grid_->is_free(i)) r[i] = rhs[i] - lu[i];
  return r;
}

double LinearSystem::quadratic_form(std::span<const double> u, bool skip_nonfinite) const {
  const LatticeInfo& info = grid_->info();
  double sum = 0.0;
  for (int a = 0; a < info.n; ++a) {
    const auto s = static_cast<std::size_t>(info.strides[a]);
    for (std::size_t i = 0; i < grid_->size(); ++i) {
      const double c = cond_[a][pad_ + i];
      if (c == 0.0) continue;
      const double du = u[i] - u[i + s];
      if (!std::isfinite(du)) {
        if (skip_nonfinite) continue;
      }
      sum += c * du * du;
    }
  }
  return sum;
}

CsrMatrix LinearSystem::to_csr(std::vector<std::size_t>* free_index) const {
  const LatticeInfo& info = grid_->info();
  const std::size_t total = grid_->size();
  std::vector<std::size_t> row_of(total, std::numeric_limits<std::size_t>::max());
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < total; ++i)
    if (grid_->is_free(i)) {
      row_of[i] = nodes.size();
      nodes.push_back(i);
    }
  CsrMatrix m;
  m.rows = nodes.size();
  m.ptr.push_back(0);
  for (std::size_t i : nodes) {
    std::vector<std::pair<std::size_t, double>> entries{{row_of[i], diag_[i]}};
    for (int a = 0; a < info.n; ++a) {
      const auto s = static_cast<std::size_t>(info.strides[a]);
      const double up = cond_[a][pad_ + i];
      if (up > 0.0 && grid_->is_free(i + s)) entries.emplace_back(row_of[i + s], -up);
      const double dn = i >= s ? cond_[a][pad_ + i - s] : 0.0;
      if (dn > 0.0 && grid_->is_free(i - s)) entries.emplace_back(row_of[i - s], -dn);
    }
    std::sort(entries.begin(), entries.end());
    for (const auto& [col, val] : entries) {
      m.col.push_back(col);
      m.val.push_back(val);
    }
    m.ptr.push_back(m.col.size());
  }
  if (free_index) *free_index = std::move(nodes);
  return m;
}

// --- CG on the grid ---------------------------------------------------------------------------

Field solve_cg(const LinearSystem& sys, const SolveOptions& opts, SolveStats* stats) {
  return solve_cg(sys, sys.rhs(), sys.pinned(), opts, stats);
}

Field solve_cg(const LinearSystem& sys, std::span<const double> rhs, std::span<const double> pinned,
               const SolveOptions& opts, SolveStats* stats) {
  const auto t0 = std::chrono::steady_clock::now();
  const Grid& grid = sys.grid();
  const std::size_t total = grid.size();
  if (rhs.size() != total || pinned.size() != total)
    throw Error(ErrorCode::InvalidArgument, "rhs/pinned vectors do not match the grid");
  const std::size_t pad = sys.padding();
  const std::size_t len = total + 2 * pad;

  std::vector<double> u(len, 0.0), r(len, 0.0), z(len, 0.0), p(len, 0.0), q(len, 0.0);
  double* U = u.data() + pad;
  double* R = r.data() + pad;
  double* Z = z.data() + pad;
  double* P = p.data() + pad;
  double* Q = q.data() + pad;
  std::vector<double> inv_diag(total, 0.0);

  // b_eff = rhs + pinned couplings = rhs - L(u with free entries 0).
  double pinned_sum = 0.0;
  std::size_t pinned_count = 0;
  for (std::size_t i = 0; i < total; ++i) {
    if (grid.is_free(i)) {
      inv_diag[i] = 1.0 / sys.diagonal(i);
    } else {
      U[i] = pinned[i];
      pinned_sum += pinned[i];
      ++pinned_count;
    }
  }
  sys.apply_padded(U, Q, true);
  double bnorm2 = 0.0;
  for (std::size_t i = 0; i < total; ++i)
    if (grid.is_free(i)) {
      const double b = rhs[i] - Q[i];
      bnorm2 += b * b;
    }
  const double bnorm = std::sqrt(bnorm2);

  SolveStats local;
  local.unknowns = grid.free_count();
  Field out = make_field(grid, 0.0);
  if (bnorm == 0.0) {
    for (std::size_t i = 0; i < total; ++i) out.values[i] = U[i];
    local.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (stats) *stats = std::move(local);
    return out;
  }

  // Start from the mean pinned value: constant data then has an exactly zero residual.
  const double start = pinned_count ? pinned_sum / static_cast<double>(pinned_count) : 0.0;
  for (std::size_t i = 0; i < total; ++i)
    if (grid.is_free(i)) U[i] = start;
  sys.apply_padded(U, Q, true);
  for (std::size_t i = 0; i < total; ++i) R[i] = grid.is_free(i) ? rhs[i] - Q[i] : 0.0;

  const std::int64_t max_iter = opts.max_iter > 0 ? opts.max_iter : default_max_iter(local.unknowns, opts.tol);
  for (std::size_t i = 0; i < total; ++i) Z[i] = inv_diag[i] * R[i];
  std::copy(Z, Z + total, P);
  double rz = dot(R, Z, total);
  std::int64_t it = 0;
  double rel = 0.0;
  while (true) {
    rel = std::sqrt(dot(R, R, total)) / bnorm;
    local.history.push_back(rel);
    if (rel <= opts.tol) break;
    if (it >= max_iter)
      throw NoConvergenceError("CG stopped at relative residual " + std::to_string(rel) + " after " +
                                   std::to_string(it) + " iterations",
                               local.history);
    sys.apply_padded(P, Q, true);
    const double alpha = rz / dot(P, Q, total);
    for (std::size_t i = 0; i < total; ++i) {
      U[i] += alpha * P[i];
      R[i] -= alpha * Q[i];
    }
    double rz_new = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
      Z[i] = inv_diag[i] * R[i];
      rz_new += R[i] * Z[i];
    }
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < total; ++i) P[i] = Z[i] + beta * P[i];
    ++it;
  }
  std::copy(U, U + total, out.values.begin());
  local.iterations = it;
  local.residual = rel;
  local.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (stats) *stats = std::move(local);
  return out;
}

double energy(const Field& u, const LinearSystem& sys) { return sys.quadratic_form(u.values); }

// --- Dirichlet problems -----------------------------------------------------------------------

std::string to_string(OuterKind kind) {
  switch (kind) {
    case OuterKind::Extension: return "extension";
    case OuterKind::Zero: return "zero";
    case OuterKind::Nested: return "nested";
    case OuterKind::Custom: return "custom";
  }
  return "unknown";
}

OuterKind parse_outer_kind(const std::string& name) {
  if (name == "extension") return OuterKind::Extension;
  if (name == "zero") return OuterKind::Zero;
  if (name == "nested") return OuterKind::Nested;
  throw Error(ErrorCode::InvalidArgument, "unknown outer condition '" + name + "'");
}

DirichletResult dirichlet_solve(const LinearSystem& sys, std::span<const double> g, const OuterSpec& outer,
                                const SolveOptions& opts) {
  const Grid& grid = sys.grid();
  const BoundarySet& gamma = grid.gamma();
  if (g.size() != gamma.patch_count())
    throw Error(ErrorCode::InvalidArgument, "trace samples do not match the patch count");
  for (double v : g)
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "trace samples must be finite");

  DirichletResult res;
  std::vector<double> pinned(grid.size(), 0.0);
  std::vector<double> rhs(grid.size(), 0.0);

  std::unique_ptr<WhitneyDecomposition> wd;
  std::unique_ptr<Extension> ext;
  std::function<double(const Point&)> outer_fn = outer.values;
  if (outer.kind == OuterKind::Extension) {
    const Box full = grid.info().full_box();
    const auto [lmin, lmax] = default_levels(full, grid.h());
    wd = std::make_unique<WhitneyDecomposition>(gamma, full, lmin, lmax);
    ext = std::make_unique<Extension>(*wd, g);
  } else if (outer.kind == OuterKind::Nested) {
    outer_fn = nested_outer_values(g, grid, sys.coefficients(), outer.nested_h, outer.nested_scale, opts);
  } else if (outer.kind == OuterKind::Custom && !outer_fn) {
    throw Error(ErrorCode::InvalidArgument, "custom outer condition without values");
  }

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const NodeClass c = grid.node_class(i);
    if (c == NodeClass::Interior) continue;
    const Point x = grid.node(i);
    double v = 0.0;
    if (c == NodeClass::GammaCollar) {
      v = g[gamma.nearest_patch(x)];
    } else if (outer.kind == OuterKind::Zero) {
      v = 0.0;
    } else if (ext) {
      const auto e = ext->evaluate(x);
      if (e) {
        v = *e;
      } else {
        v = g[gamma.nearest_patch(x)];
        ++res.outer_fallbacks;
      }
    } else {
      v = outer_fn(x);
    }
    pinned[i] = v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  res.min_pinned = lo;
  res.max_pinned = hi;
  res.field = solve_cg(sys, rhs, pinned, opts, &res.stats);
  return res;
}

DirichletResult dirichlet_solve(const BoundarySet& gamma, std::span<const double> g, const GridSpec& spec,
                                const CoefficientSpec& coeffs, const OuterSpec& outer, const SolveOptions& opts) {
  const Grid grid(gamma, spec);
  const LinearSystem sys = assemble(grid, coeffs);
  DirichletResult res = dirichlet_solve(sys, g, outer, opts);
  return res;
}

std::function<double(const Point&)> nested_outer_values(std::span<const double> g, const Grid& fine,
                                                        const CoefficientSpec& coeffs, double coarse_h,
                                                        double scale, const SolveOptions& opts) {
  if (!(coarse_h > 0.0) || !(scale > 1.0))
    throw Error(ErrorCode::InvalidArgument, "nested far field needs coarse_h > 0 and scale > 1");
  const GridSpec& fs = fine.spec();
  GridSpec cs = fs;
  cs.h = coarse_h;
  const int n = fine.dim();
  for (int a = 0; a < n; ++a) {
    const double len = fs.box.hi[a] - fs.box.lo[a];
    if (fs.mirror[a]) {
      cs.box.lo[a] = fs.box.lo[a];
      cs.box.hi[a] = fs.box.lo[a] + std::ceil(scale * len / coarse_h) * coarse_h;
    } else {
      const double mid = 0.5 * (fs.box.lo[a] + fs.box.hi[a]);
      const double half = std::ceil(0.5 * scale * len / coarse_h) * coarse_h;
      cs.box.lo[a] = mid - half;
      cs.box.hi[a] = mid + half;
    }
  }
  auto coarse = std::make_shared<Grid>(fine.gamma(), cs);
  const LinearSystem sys = assemble(*coarse, coeffs);
  OuterSpec ext;
  ext.kind = OuterKind::Extension;
  auto field = std::make_shared<Field>(dirichlet_solve(sys, g, ext, opts).field);
  return [field](const Point& x) { return interpolate(*field, x); };
}

}  // namespace hmlab

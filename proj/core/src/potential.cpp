#include "hmlab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hmlab/error.hpp"
#include "hmlab/quadrature.hpp"

namespace hmlab {

void PoleSpec::validate(const BoundarySet& gamma) const {
  const double dy = gamma.distance(y);
  if (!(dy > 0.0)) throw Error(ErrorCode::InvalidArgument, "pole lies on Γ");
  if (rho > 0.0 && !(100.0 * rho < dy))
    throw Error(ErrorCode::InvalidArgument, "pole radius must satisfy 100 rho < δ(y)");
}

std::vector<double> pole_source(const Grid& grid, const PoleSpec& pole, std::size_t* ball_nodes) {
  const LatticeInfo& info = grid.info();
  int m = 0;
  for (int a = 0; a < info.n; ++a) {
    if (!info.mirror[a]) continue;
    ++m;
    if (pole.y[a] != info.box.lo[a])
      throw Error(ErrorCode::InvalidArgument, "a pole off a mirror plane breaks the symmetry reduction");
  }
  std::vector<double> rhs(grid.size(), 0.0);
  std::vector<std::size_t> nodes;
  std::size_t full = 0;
  info.for_each_in_ball(pole.y, pole.rho, [&](std::size_t idx) {
    if (!grid.is_free(idx)) return;
    nodes.push_back(idx);
    full += std::size_t{1} << (m - info.mirror_count(idx));
  });
  if (nodes.empty()) throw Error(ErrorCode::PoleUnresolved, "B(y, rho) contains no free grid node");
  const double v = 1.0 / static_cast<double>(full);
  for (std::size_t idx : nodes) rhs[idx] = v * info.volume_factor(idx);
  if (ball_nodes) *ball_nodes = full;
  return rhs;
}

GreenSample green(const LinearSystem& sys, const PoleSpec& pole, const SolveOptions& opts) {
  const Grid& grid = sys.grid();
  const BoundarySet& gamma = grid.gamma();
  pole.validate(gamma);
  GreenSample out;
  out.pole = pole;
  const double dy = gamma.distance(pole.y);
  if (dy < grid.spec().kappa * grid.h())
    throw Error(ErrorCode::PoleUnresolved, "pole lies in the Γ-collar");
  if (out.pole.rho <= 0.0) out.pole.rho = dy / 100.0;
  if (out.pole.rho < 2.0 * grid.h()) {
    out.rho_raised = true;
    out.warning = "rho " + std::to_string(out.pole.rho) + " is below 2h; raised to " + std::to_string(2.0 * grid.h());
    out.pole.rho = 2.0 * grid.h();
  }
  const std::vector<double> rhs = pole_source(grid, out.pole, &out.ball_nodes);
  out.source_value = 1.0 / static_cast<double>(out.ball_nodes);
  const std::vector<double> zeros(grid.size(), 0.0);
  out.field = solve_cg(sys, rhs, zeros, opts, &out.stats);
  return out;
}

GreenSample green_transpose(const LinearSystem& sys, const PoleSpec& pole, const SolveOptions& opts) {
  // A^T = A for every accepted coefficient field, so the assembly is the same.
  sys.coefficients().validate();
  return green(sys, pole, opts);
}

std::vector<std::size_t> Partition::members(int group) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < group_of_patch.size(); ++k)
    if (group_of_patch[k] == group) out.push_back(k);
  return out;
}

Partition partition_by_boxes(const BoundarySet& gamma, const std::vector<std::pair<std::string, Box>>& boxes,
                             const std::string& rest) {
  Partition p;
  for (const auto& [name, box] : boxes) p.names.push_back(name);
  const int rest_id = rest.empty() ? -1 : static_cast<int>(p.names.size());
  if (!rest.empty()) p.names.push_back(rest);
  p.group_of_patch.assign(gamma.patch_count(), rest_id);
  for (std::size_t k = 0; k < gamma.patch_count(); ++k)
    for (std::size_t b = 0; b < boxes.size(); ++b)
      if (boxes[b].second.contains(gamma.patches()[k].center)) {
        p.group_of_patch[k] = static_cast<int>(b);
        break;
      }
  return p;
}

Partition whole_partition(const BoundarySet& gamma, const std::string& name) {
  Partition p;
  p.names = {name};
  p.group_of_patch.assign(gamma.patch_count(), 0);
  return p;
}

std::vector<double> mollified_indicator(const BoundarySet& gamma, const std::vector<bool>& in_set, double width) {
  if (in_set.size() != gamma.patch_count())
    throw Error(ErrorCode::InvalidArgument, "indicator does not match the patch count");
  if (!(width > 0.0)) throw Error(ErrorCode::InvalidArgument, "mollification width must be > 0");
  const auto patches = gamma.patches();
  std::vector<double> g(patches.size(), 0.0);
  std::vector<std::size_t> hits;
  for (std::size_t k = 0; k < patches.size(); ++k) {
    hits.clear();
    gamma.patches_in_ball(patches[k].center, width, hits);
    std::sort(hits.begin(), hits.end());
    double num = 0.0, den = 0.0;
    for (std::size_t q : hits) {
      const double kq = std::max(0.0, 1.0 - distance(patches[k].center, patches[q].center) / width) * patches[q].weight;
      den += kq;
      if (in_set[q]) num += kq;
    }
    g[k] = den > 0.0 ? num / den : (in_set[k] ? 1.0 : 0.0);
  }
  return g;
}

std::vector<double> mollified_indicator(const BoundarySet& gamma, const Partition& part, int group, double width) {
  std::vector<bool> in_set(gamma.patch_count(), false);
  for (std::size_t k = 0; k < in_set.size(); ++k) in_set[k] = part.group_of_patch[k] == group;
  return mollified_indicator(gamma, in_set, width);
}

double HarmonicMeasureRow::leakage(const Point& x) const {
  double s = 0.0;
  for (const Field& f : fields) s += interpolate(f, x);
  return 1.0 - s;
}

HarmonicMeasureRow harmonic_measure(const LinearSystem& sys, const Partition& partition, double mollification,
                                    const OuterSpec& outer, const SolveOptions& opts) {
  const BoundarySet& gamma = sys.grid().gamma();
  if (partition.group_of_patch.size() != gamma.patch_count())
    throw Error(ErrorCode::PartitionMismatch, "partition does not match the patch count");
  const double floor_width = 2.0 * gamma.patch_spacing();
  if (mollification <= 0.0) mollification = floor_width;
  if (mollification < floor_width * (1.0 - 1e-12))
    throw Error(ErrorCode::InvalidArgument, "mollification must be at least 2 patch spacings");
  HarmonicMeasureRow row;
  row.partition = partition;
  row.mollification = mollification;
  for (std::size_t j = 0; j < partition.groups(); ++j) {
    const std::vector<double> g = mollified_indicator(gamma, partition, static_cast<int>(j), mollification);
    DirichletResult res = dirichlet_solve(sys, g, outer, opts);
    row.fields.push_back(std::move(res.field));
    row.stats.push_back(std::move(res.stats));
  }
  return row;
}

// --- flat oracle ------------------------------------------------------------------------------

namespace {

double rect_corner(double u, double v, double t) {
  return std::atan(u * v / (t * std::sqrt(u * u + v * v + t * t))) / (2.0 * std::numbers::pi);
}

double kernel_const(int d) {
  return std::tgamma((d + 1.0) / 2.0) / std::pow(std::numbers::pi, (d + 1.0) / 2.0);
}

// ∫_E c_d t / (|x-y|² + t²)^{(d+1)/2} dy by tensor Gauss-Legendre in θ = atan((y - x)/t).
double kernel_quadrature(int d, std::span<const double> x, double t, const Box& e, int order) {
  std::vector<double> nodes, weights;
  gauss_legendre(order, nodes, weights);
  std::vector<double> th0(d), th1(d);
  for (int i = 0; i < d; ++i) {
    th0[i] = std::atan((e.lo[i] - x[i]) / t);
    th1[i] = std::atan((e.hi[i] - x[i]) / t);
  }
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(order);
  double sum = 0.0;
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t rem = k;
    double wgt = 1.0, r2 = 0.0, jac = 1.0;
    for (int i = 0; i < d; ++i) {
      const std::size_t q = rem % static_cast<std::size_t>(order);
      rem /= static_cast<std::size_t>(order);
      const double half = 0.5 * (th1[i] - th0[i]);
      const double th = th0[i] + half * (nodes[q] + 1.0);
      wgt *= weights[q] * half;
      const double y = t * std::tan(th);
      r2 += y * y;
      jac *= t / (std::cos(th) * std::cos(th));
    }
    sum += wgt * jac * kernel_const(d) * t / std::pow(r2 + t * t, (d + 1.0) / 2.0);
  }
  return sum;
}

}  // namespace

double poisson_flat_oracle(int d, std::span<const double> x, double t, const Box& e) {
  if (d < 0 || static_cast<int>(x.size()) < d || e.dim() < d)
    throw Error(ErrorCode::InvalidArgument, "oracle dimensions do not match");
  if (d == 0) return 1.0;
  if (t <= 0.0) {
    bool inside = true;
    for (int i = 0; i < d; ++i)
      if (!(x[i] > e.lo[i] && x[i] < e.hi[i])) inside = false;
    return inside ? 1.0 : 0.0;
  }
  if (d == 1)
    return (std::atan((e.hi[0] - x[0]) / t) - std::atan((e.lo[0] - x[0]) / t)) / std::numbers::pi;
  if (d == 2) {
    const double a1 = e.lo[0] - x[0], b1 = e.hi[0] - x[0];
    const double a2 = e.lo[1] - x[1], b2 = e.hi[1] - x[1];
    return rect_corner(b1, b2, t) - rect_corner(a1, b2, t) - rect_corner(b1, a2, t) + rect_corner(a1, a2, t);
  }
  return kernel_quadrature(d, x, t, e, 32);
}

double poisson_flat_oracle(const BoundarySet& gamma, const Point& x, const Box& e) {
  const int n = gamma.ambient_dim();
  if (gamma.kind() == BoundaryKind::FlatPlane) {
    const int d = gamma.flat_dim();
    std::vector<double> lon(d);
    double t2 = 0.0;
    for (int i = 0; i < n; ++i) {
      if (i < d) lon[i] = x[i];
      else t2 += x[i] * x[i];
    }
    return poisson_flat_oracle(d, lon, std::sqrt(t2), e);
  }
  if (gamma.kind() == BoundaryKind::Segment) {
    const Point a = gamma.patches().front().center;
    const Point b = gamma.patches().back().center;
    const Point u = (b - a) / distance(a, b);
    const Point first = a - (0.5 * gamma.patch_spacing()) * u;  // segment endpoint
    const double s = (x - first).dot(u);
    const double t = (x - first - s * u).norm();
    const double lon[1] = {s};
    return poisson_flat_oracle(1, lon, t, e);
  }
  throw Error(ErrorCode::NotFlat, "the Poisson oracle needs a flat plane or a line");
}

double poisson_kernel_mass(int d, double t, double cutoff, int order) {
  if (d == 0) return 1.0;
  Box e{Point(d), Point(d)};
  for (int i = 0; i < d; ++i) {
    e.lo[i] = -cutoff;
    e.hi[i] = cutoff;
  }
  const std::vector<double> x(d, 0.0);
  return kernel_quadrature(d, x, t, e, order);
}

// --- representation ---------------------------------------------------------------------------

std::function<double(const Point&)> smooth_bump(const Point& c, double r) {
  return [c, r](const Point& x) {
    const double s = distance2(x, c) / (r * r);
    return s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0;
  };
}

RepresentationReport green_representation_check(const LinearSystem& sys, const std::function<double(const Point&)>& f,
                                                std::span<const Point> probes, const SolveOptions& opts) {
  const Grid& grid = sys.grid();
  const LatticeInfo& info = grid.info();
  for (int a = 0; a < info.n; ++a)
    if (info.mirror[a]) throw Error(ErrorCode::InvalidArgument, "representation check needs an unmirrored grid");
  const double hn = std::pow(grid.h(), info.n);
  std::vector<double> fv(grid.size(), 0.0), rhs(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    fv[i] = f(grid.node(i));
    if (grid.is_free(i)) rhs[i] = fv[i] * hn;
  }
  const std::vector<double> zeros(grid.size(), 0.0);
  const Field u = solve_cg(sys, rhs, zeros, opts);

  RepresentationReport rep;
  for (const Point& x : probes) {
    const GreenSample gs = green(sys, PoleSpec{x, -1.0}, opts);
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) sum += gs.field.values[i] * fv[i] * hn;
    const double direct = interpolate(u, x);
    rep.probes.push_back(x);
    rep.direct.push_back(direct);
    rep.represented.push_back(sum);
    const double scale = std::max(std::abs(direct), std::abs(sum));
    const double err = scale > 0.0 ? std::abs(direct - sum) / scale : 0.0;
    rep.rel_error.push_back(err);
    rep.max_rel_error = std::max(rep.max_rel_error, err);
  }
  return rep;
}

}  // namespace hmlab

#include "hmlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "hmlab/error.hpp"
#include "hmlab/whitney.hpp"

namespace hmlab {

// --- report -----------------------------------------------------------------------------------

bool Quantity::within_budget() const {
  if (values.empty()) return false;
  for (double v : values)
    if (!(v >= lower && v <= upper)) return false;
  return true;
}

double Quantity::trend_ratio() const {
  double worst = 1.0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double a = values[i - 1], b = values[i];
    if (a == b) continue;
    if (a == 0.0 || b == 0.0 || (a < 0.0) != (b < 0.0) || !std::isfinite(a) || !std::isfinite(b)) return kInf;
    worst = std::max(worst, std::max(a / b, b / a));
  }
  return worst;
}

Quantity& EstimateReport::add(Quantity q) {
  quantities.push_back(std::move(q));
  return quantities.back();
}

const Quantity* EstimateReport::find(const std::string& name) const {
  for (const Quantity& q : quantities)
    if (q.name == name) return &q;
  return nullptr;
}

std::vector<std::string> EstimateReport::failures() const {
  std::vector<std::string> out;
  for (const Quantity& q : quantities) {
    if (!q.gating) continue;
    if (!q.within_budget()) out.push_back(q.name + " outside budget");
    else if (q.check_trend && q.trend_ratio() > stability) out.push_back(q.name + " diverges under refinement");
  }
  return out;
}

bool EstimateReport::evaluate() {
  pass = !quantities.empty() && failures().empty();
  return pass;
}

// --- shared machinery -------------------------------------------------------------------------

namespace {

struct Level {
  double h = 0.0;
  std::unique_ptr<Grid> grid;
  std::unique_ptr<LinearSystem> sys;
  std::vector<double> weights;
};

Level make_level(const BoundarySet& gamma, const LadderSpec& ladder, double h, bool with_system = true) {
  Level l;
  l.h = h;
  GridSpec spec = ladder.grid;
  spec.h = h;
  l.grid = std::make_unique<Grid>(gamma, spec);
  l.weights = node_weights(*l.grid, ladder.coeffs);
  if (with_system) l.sys = std::make_unique<LinearSystem>(assemble(*l.grid, ladder.coeffs));
  return l;
}

void require_ladder(const LadderSpec& ladder) {
  if (ladder.h.empty()) throw Error(ErrorCode::InvalidArgument, "empty refinement ladder");
}

int mirror_mask_size(const LatticeInfo& info) {
  int m = 0;
  for (int a = 0; a < info.n; ++a) m += info.mirror[a] ? 1 : 0;
  return m;
}

Point reflect(const LatticeInfo& info, const Point& c, unsigned mask) {
  Point r = c;
  int bit = 0;
  for (int a = 0; a < info.n; ++a) {
    if (!info.mirror[a]) continue;
    if (mask & (1u << bit)) r[a] = 2.0 * info.box.lo[a] - c[a];
    ++bit;
  }
  return r;
}

// Nodes of the full (unfolded) ball B(c, r) in the reduced grid, with the number of full-domain
// nodes each one stands for.
struct BallNodes {
  std::vector<std::size_t> idx;
  std::vector<double> mult;
};

BallNodes ball_nodes(const LatticeInfo& info, const Point& c, double r) {
  std::vector<std::pair<std::size_t, double>> hits;
  const unsigned combos = 1u << mirror_mask_size(info);
  for (unsigned s = 0; s < combos; ++s)
    info.for_each_in_ball(reflect(info, c, s), r,
                          [&](std::size_t i) { hits.emplace_back(i, info.volume_factor(i)); });
  std::sort(hits.begin(), hits.end());
  BallNodes b;
  for (const auto& [i, v] : hits) {
    if (!b.idx.empty() && b.idx.back() == i) {
      b.mult.back() += v;
    } else {
      b.idx.push_back(i);
      b.mult.push_back(v);
    }
  }
  return b;
}

int image_hits(const LatticeInfo& info, const Point& p, const Point& c, double r) {
  const unsigned combos = 1u << mirror_mask_size(info);
  int k = 0;
  for (unsigned s = 0; s < combos; ++s)
    if (distance2(p, reflect(info, c, s)) <= r * r) ++k;
  return k;
}

// ∫_B u^2 dm (or |u|^p with the given power) by node sums.
double ball_moment(const Level& l, const Field& u, const BallNodes& b, double power) {
  const double hn = std::pow(l.h, l.grid->dim());
  double s = 0.0;
  for (std::size_t k = 0; k < b.idx.size(); ++k)
    s += b.mult[k] * std::pow(std::abs(u[b.idx[k]]), power) * l.weights[b.idx[k]] * hn;
  return s;
}

double ball_mass(const Level& l, const BallNodes& b) {
  const double hn = std::pow(l.h, l.grid->dim());
  double s = 0.0;
  for (std::size_t k = 0; k < b.idx.size(); ++k) s += b.mult[k] * l.weights[b.idx[k]] * hn;
  return s;
}

// ∫_B |∇u|^2 dm from the edge conductances, edges counted by their midpoints.
double ball_energy(const Level& l, const Field& u, const Point& c, double r) {
  const LatticeInfo& info = l.grid->info();
  const BallNodes b = ball_nodes(info, c, r + l.h);
  double s = 0.0;
  for (std::size_t i : b.idx) {
    const Point p = info.node(i);
    for (int a = 0; a < info.n; ++a) {
      const double ce = l.sys->conductance(i, a);
      if (ce == 0.0) continue;
      const std::size_t j = i + static_cast<std::size_t>(info.strides[a]);
      const double du = u[i] - u[j];
      if (!std::isfinite(du)) continue;
      Point mid = p;
      mid[a] += 0.5 * l.h;
      const int k = image_hits(info, mid, c, r);
      if (k) s += k * ce * du * du;
    }
  }
  return s;
}

struct Range {
  double lo = kInf, hi = -kInf;
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double osc() const { return hi - lo; }
};

Range ball_range(const Field& u, const BallNodes& b, const Grid* free_only = nullptr) {
  Range r;
  for (std::size_t i : b.idx) {
    if (free_only && !free_only->is_free(i)) continue;
    if (std::isfinite(u[i])) r.add(u[i]);
  }
  return r;
}

Quantity quantity(std::string name, double lower, double upper, bool trend = true, bool gating = true) {
  Quantity q;
  q.name = std::move(name);
  q.lower = lower;
  q.upper = upper;
  q.check_trend = trend;
  q.gating = gating;
  return q;
}

Field solve_group(const Level& l, const LadderSpec& ladder, const BoundarySet& gamma, const Partition& part,
                  int group, double& violation) {
  const std::vector<double> g = mollified_indicator(gamma, part, group, 2.0 * gamma.patch_spacing());
  DirichletResult res = dirichlet_solve(*l.sys, g, ladder.outer, ladder.solve);
  violation = std::max(violation, max_principle_violation(res.field, *l.grid));
  return std::move(res.field);
}

bool is_flat_line(const BoundarySet& gamma) {
  return gamma.kind() == BoundaryKind::FlatPlane && gamma.flat_dim() == 1;
}

// ω^X of the patches with |p - x0| in [lo, hi) for the flat line along axis 0 (x0 on the line).
double flat_shell_oracle(const BoundarySet& gamma, const Point& x, const Point& x0, double lo, double hi) {
  const int n = gamma.ambient_dim();
  double t2 = 0.0;
  for (int i = 1; i < n; ++i) t2 += x[i] * x[i];
  const double t = std::sqrt(t2);
  const double lon[1] = {x[0]};
  auto interval = [&](double a, double b) {
    Box e{Point{a}, Point{b}};
    return poisson_flat_oracle(1, lon, t, e);
  };
  if (lo <= 0.0) return interval(x0[0] - hi, x0[0] + hi);
  return interval(x0[0] - hi, x0[0] - lo) + interval(x0[0] + lo, x0[0] + hi);
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed * 0x9e3779b97f4a7c15ULL + k + 0x632be59bd9b4e019ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

double max_principle_violation(const Field& u, const Grid& grid) {
  Range pinned;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (!grid.is_free(i)) pinned.add(u[i]);
  double v = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.is_free(i)) continue;
    v = std::max(v, pinned.lo - u[i]);
    v = std::max(v, u[i] - pinned.hi);
  }
  return v;
}

Partition partition_by_shells(const BoundarySet& gamma, const Point& x0, const std::vector<double>& edges,
                              const std::vector<std::string>& names, const std::string& rest) {
  if (edges.size() != names.size() + 1)
    throw Error(ErrorCode::InvalidArgument, "shell partition needs one more edge than names");
  Partition p;
  p.names = names;
  const int rest_id = rest.empty() ? -1 : static_cast<int>(names.size());
  if (!rest.empty()) p.names.push_back(rest);
  p.group_of_patch.assign(gamma.patch_count(), rest_id);
  for (std::size_t k = 0; k < gamma.patch_count(); ++k) {
    const double r = distance(gamma.patches()[k].center, x0);
    for (std::size_t j = 0; j < names.size(); ++j)
      if (r >= edges[j] && r < edges[j + 1]) {
        p.group_of_patch[k] = static_cast<int>(j);
        break;
      }
  }
  return p;
}

// --- measure and A2 --------------------------------------------------------------------------

EstimateReport check_measure_and_a2(const BoundarySet& gamma, const MeasureSweep& sweep) {
  EstimateReport rep;
  rep.id = "weighted_measure_and_a2";
  rep.scenario = gamma.descriptor();
  const double d = gamma.hausdorff_dim();
  const double n = gamma.ambient_dim();
  Quantity near_lo = quantity("near_exponent_min", d + 1 - sweep.exponent_tol, d + 1 + sweep.exponent_tol);
  Quantity near_hi = quantity("near_exponent_max", d + 1 - sweep.exponent_tol, d + 1 + sweep.exponent_tol);
  Quantity far_lo = quantity("far_exponent_min", n - sweep.exponent_tol, n + sweep.exponent_tol);
  Quantity far_hi = quantity("far_exponent_max", n - sweep.exponent_tol, n + sweep.exponent_tol);
  Quantity a2 = quantity("a2_max", 1.0 - 1e-9, sweep.a2_budget);
  Quantity ref = quantity("reference_measure_rel_error", 0.0, sweep.reference_tol, false);
  Table mt{"measure", {"quadrature_level", "far", "center", "r", "m"}, {}};
  Table at{"a2", {"quadrature_level", "far", "center", "r", "product"}, {}};

  for (int level : sweep.quadrature_levels) {
    rep.h.push_back(level);
    for (int far = 0; far < 2; ++far) {
      const auto& centers = far ? sweep.far_centers : sweep.near_centers;
      double lo = kInf, hi = -kInf, amax = 0.0;
      for (std::size_t c = 0; c < centers.size(); ++c) {
        std::vector<double> m;
        for (double r : sweep.radii) {
          m.push_back(measure_ball(gamma, centers[c], r, level));
          mt.rows.push_back({double(level), double(far), double(c), r, m.back()});
          const double p = a2_product(gamma, centers[c], r, level);
          at.rows.push_back({double(level), double(far), double(c), r, p});
          amax = std::max(amax, p);
        }
        const LinearFit f = fit_loglog(sweep.radii, m);
        lo = std::min(lo, f.slope);
        hi = std::max(hi, f.slope);
      }
      if (centers.empty()) continue;
      (far ? far_lo : near_lo).values.push_back(lo);
      (far ? far_hi : near_hi).values.push_back(hi);
      if (a2.values.size() < rep.h.size()) a2.values.push_back(amax);
      else a2.values.back() = std::max(a2.values.back(), amax);
    }
    if (sweep.reference_radius > 0.0) {
      const double m = measure_ball(gamma, sweep.reference_center, sweep.reference_radius, level);
      ref.values.push_back(std::abs(m - sweep.reference_measure) / sweep.reference_measure);
    }
  }
  for (Quantity* q : {&near_lo, &near_hi, &far_lo, &far_hi, &a2, &ref})
    if (!q->values.empty()) rep.add(std::move(*q));
  rep.tables = {std::move(mt), std::move(at)};
  rep.notes.push_back("ladder entries are quadrature levels");
  rep.evaluate();
  return rep;
}

// --- Poincaré ---------------------------------------------------------------------------------

EstimateReport check_poincare(const BoundarySet& gamma, const PoincareConfig& cfg) {
  require_ladder(cfg.ladder);
  for (int a = 0; a < gamma.ambient_dim(); ++a)
    if (cfg.ladder.grid.mirror[a]) throw Error(ErrorCode::InvalidArgument, "Poincaré check needs an unmirrored grid");
  EstimateReport rep;
  rep.id = "poincare_boundary";
  rep.scenario = gamma.descriptor();
  rep.h = cfg.ladder.h;
  const int n = gamma.ambient_dim();
  const double d = gamma.hausdorff_dim();
  const double r = cfg.radius;

  // Field families: tents, bumps and seeded smooth combinations, all cut off near Γ.
  std::vector<std::function<double(const Point&)>> psi;
  std::vector<std::string> labels;
  psi.push_back([](const Point&) { return 0.0; });
  labels.push_back("zero");
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int k = 0; k < 3; ++k) {
    Point c = cfg.center;
    for (int a = 0; a < n; ++a) c[a] += (k == 0 ? 0.0 : 0.25 * r * unit(rng) / std::sqrt(double(n)));
    psi.push_back([c, r](const Point& x) { return std::max(0.0, 1.0 - distance(x, c) / (0.75 * r)); });
    labels.push_back("tent");
    psi.push_back(smooth_bump(c, 0.75 * r));
    labels.push_back("bump");
  }
  for (int k = 0; k < cfg.random_fields; ++k) {
    std::array<Point, 3> freq;
    std::array<double, 3> amp{}, phase{};
    for (int j = 0; j < 3; ++j) {
      freq[j] = Point(n);
      for (int a = 0; a < n; ++a) freq[j][a] = 3.0 * unit(rng) / r;
      amp[j] = unit(rng);
      phase[j] = std::numbers::pi * unit(rng);
    }
    auto b = smooth_bump(cfg.center, r);
    psi.push_back([=](const Point& x) {
      double s = 0.0;
      for (int j = 0; j < 3; ++j) s += amp[j] * std::sin(freq[j].dot(x) + phase[j]);
      return s * b(x);
    });
    labels.push_back("random");
  }

  Quantity pq = quantity("poincare_ratio", 0.0, cfg.budget);
  Quantity sq = quantity("sobolev_ratio", 0.0, cfg.budget);
  Table t{"ratios", {"h", "field", "lhs_poincare", "rhs_poincare", "lhs_sobolev", "rhs_sobolev"}, {}};
  for (double h : cfg.ladder.h) {
    const Level l = make_level(gamma, cfg.ladder, h, false);
    const LatticeInfo& info = l.grid->info();
    const BallNodes b = ball_nodes(info, cfg.center, r);
    const double hn = std::pow(h, n);
    double pmax = 0.0, smax = 0.0;
    for (std::size_t f = 0; f < psi.size(); ++f) {
      auto u = [&](std::size_t i) {
        const Point x = info.node(i);
        const double dx = gamma.distance(x);
        return psi[f](x) * std::min(1.0, dx / cfg.cutoff);
      };
      double l1 = 0.0, count = 0.0, grad1 = 0.0, l2 = 0.0, grad2 = 0.0;
      for (std::size_t k = 0; k < b.idx.size(); ++k) {
        const std::size_t i = b.idx[k];
        const Lattice li = info.lattice(i);
        const double ui = u(i);
        double g2 = 0.0;
        for (int a = 0; a < n; ++a) {
          Lattice lp = li, lm = li;
          double span = 0.0;
          if (li[a] + 1 < info.dims[a]) {
            ++lp[a];
            span += h;
          }
          if (li[a] > 0) {
            --lm[a];
            span += h;
          }
          const double da = (u(info.index(lp)) - u(info.index(lm))) / span;
          g2 += da * da;
        }
        const double w = l.weights[i] * hn * b.mult[k];
        l1 += b.mult[k] * std::abs(ui);
        count += b.mult[k];
        grad1 += std::sqrt(g2) * w;
        l2 += ui * ui * w;
        grad2 += g2 * w;
      }
      const double lhs1 = l1 / count, rhs1 = std::pow(r, -d) * grad1;
      const double lhs2 = std::sqrt(std::pow(r, -d - 1) * l2);
      const double rhs2 = r * std::sqrt(std::pow(r, -d - 1) * grad2);
      const double p = lhs1 == 0.0 ? 0.0 : lhs1 / rhs1;
      const double s = lhs2 == 0.0 ? 0.0 : lhs2 / rhs2;
      pmax = std::max(pmax, p);
      smax = std::max(smax, s);
      t.rows.push_back({h, double(f), lhs1, rhs1, lhs2, rhs2});
    }
    pq.values.push_back(pmax);
    sq.values.push_back(smax);
  }
  rep.add(std::move(pq));
  rep.add(std::move(sq));
  rep.tables.push_back(std::move(t));
  std::string legend = "fields:";
  for (std::size_t f = 0; f < labels.size(); ++f) legend += " " + std::to_string(f) + "=" + labels[f];
  rep.notes.push_back(legend);
  rep.evaluate();
  return rep;
}

// --- trace and extension ----------------------------------------------------------------------

std::vector<double> lipschitz_trace(const BoundarySet& gamma, int k, std::uint64_t seed) {
  std::vector<double> g(gamma.patch_count(), 0.5);
  if (k < 0) return g;
  std::mt19937_64 rng(mix(seed, static_cast<std::uint64_t>(k)));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double a = 2.0 * u(rng) - 1.0;
  const double b = 0.5 * u(rng);
  const double c = 1.0 + 5.0 * u(rng);
  const double phi = 2.0 * std::numbers::pi * u(rng);
  const double e = u(rng) - 0.5;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Point& x = gamma.patches()[p].center;
    const double y = x.dim() > 1 ? x[1] : 0.0;
    g[p] = a * x[0] + b * std::sin(c * x[0] + phi) + e * y;
  }
  return g;
}

EstimateReport check_trace_extension(const BoundarySet& gamma, const TraceConfig& cfg) {
  if (cfg.h.empty()) throw Error(ErrorCode::InvalidArgument, "empty refinement ladder");
  EstimateReport rep;
  rep.id = "trace_of_extension";
  rep.scenario = gamma.descriptor();
  rep.h = cfg.h;
  const int traces = cfg.traces;
  std::vector<std::vector<double>> err(traces + 1), ratio(traces + 1);
  double range_violation = 0.0;
  Table t{"trace", {"h", "level_max", "trace", "l1_error", "w_norm", "h_norm"}, {}};

  for (double h : cfg.h) {
    GridSpec spec;
    spec.box = cfg.box;
    spec.h = h;
    const Grid grid(gamma, spec);
    const LinearSystem sys = assemble(grid, CoefficientSpec{});
    const auto [lmin, lmax] = default_levels(cfg.box, h);
    const WhitneyDecomposition wd(gamma, cfg.box, lmin, lmax);
    std::vector<std::vector<PartitionWeight>> pou(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      try {
        pou[i] = partition_of_unity(wd, grid.node(i));
      } catch (const Error&) {
      }
    }
    for (int k = -1; k < traces; ++k) {
      const std::vector<double> g = lipschitz_trace(gamma, k, cfg.seed);
      const auto [gmin, gmax] = std::minmax_element(g.begin(), g.end());
      const Extension e(wd, g);
      Field f = make_field(grid, std::numeric_limits<double>::quiet_NaN());
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (pou[i].empty()) continue;
        double v = 0.0;
        for (const PartitionWeight& pw : pou[i]) v += pw.phi * e.y(pw.cube);
        f.values[i] = v;
        range_violation = std::max({range_violation, *gmin - v, v - *gmax});
      }
      const TraceSamples ts = trace(f, gamma);
      double num = 0.0, den = 0.0;
      for (std::size_t j = 0; j < ts.patches.size(); ++j) {
        if (!std::isfinite(ts.values[j])) continue;
        const double mu = gamma.patches()[ts.patches[j]].weight;
        num += mu * std::abs(ts.values[j] - g[ts.patches[j]]);
        den += mu;
      }
      const double l1 = den > 0.0 ? num / den : kInf;
      const double wn = std::sqrt(w_seminorm(f, sys));
      const double hn = std::sqrt(h_half_seminorm(g, gamma));
      err[k + 1].push_back(l1);
      ratio[k + 1].push_back(hn > 0.0 ? wn / hn : 0.0);
      t.rows.push_back({h, double(lmax), double(k), l1, wn, hn});
    }
  }
  Quantity c = quantity("constant_trace_error", 0.0, 1e-12, false);
  c.values = err[0];
  rep.add(std::move(c));
  Quantity rv = quantity("extension_range_violation", 0.0, 1e-12, false);
  rv.values = {range_violation};
  rep.add(std::move(rv));
  for (int k = 0; k < traces; ++k) {
    Quantity e = quantity("l1_error[" + std::to_string(k) + "]", 0.0, kInf, false, false);
    e.values = err[k + 1];
    rep.add(std::move(e));
    if (err[k + 1].size() > 1) {
      Quantity hv = quantity("halving[" + std::to_string(k) + "]", cfg.halving_lower, cfg.halving_upper, false);
      for (std::size_t i = 1; i < err[k + 1].size(); ++i) hv.values.push_back(err[k + 1][i] / err[k + 1][i - 1]);
      rep.add(std::move(hv));
    }
    Quantity r = quantity("extension_ratio[" + std::to_string(k) + "]", 0.0, cfg.ratio_budget);
    r.values = ratio[k + 1];
    rep.add(std::move(r));
  }
  rep.tables.push_back(std::move(t));
  rep.notes.push_back("trace -1 is the constant 1/2");
  rep.evaluate();
  return rep;
}

// --- interior regularity ----------------------------------------------------------------------

EstimateReport check_interior_regularity(const BoundarySet& gamma, const InteriorConfig& cfg) {
  require_ladder(cfg.ladder);
  EstimateReport rep;
  rep.id = "interior_regularity";
  rep.scenario = gamma.descriptor();
  rep.h = cfg.ladder.h;
  for (const BallSpec& b : cfg.balls)
    if (!(gamma.distance(b.center) > 3.0 * b.radius))
      throw Error(ErrorCode::InvalidArgument, "interior balls need 3B inside Ω");
  const Partition part = partition_by_shells(gamma, cfg.x0, {cfg.shell_lo, cfg.shell_hi}, {"data"}, "");
  const bool oracle = is_flat_line(gamma);

  Quantity hq = quantity("harnack_quotient", 1.0, cfg.budget);
  Quantity mq = quantity("moser_ratio", 0.0, cfg.budget);
  Quantity cq = quantity("caccioppoli_ratio", 0.0, cfg.budget);
  Quantity aq = quantity("interior_alpha_min", 1e-12, kInf);
  Quantity oq = quantity("harnack_oracle_rel_error", 0.0, cfg.oracle_tol, false);
  Quantity mp = quantity("max_principle_violation", 0.0, 1e-9, false);
  Table t{"balls", {"h", "ball", "harnack", "moser", "caccioppoli", "alpha", "alpha_r2", "oracle_harnack"}, {}};
  for (double h : cfg.ladder.h) {
    const Level l = make_level(gamma, cfg.ladder, h);
    double viol = 0.0;
    const Field u = solve_group(l, cfg.ladder, gamma, part, 0, viol);
    double hmax = 0.0, mmax = 0.0, cmax = 0.0, amin = kInf, omax = 0.0;
    for (std::size_t bi = 0; bi < cfg.balls.size(); ++bi) {
      const BallSpec& B = cfg.balls[bi];
      const BallNodes b1 = ball_nodes(l.grid->info(), B.center, B.radius);
      const BallNodes b2 = ball_nodes(l.grid->info(), B.center, 2.0 * B.radius);
      const Range r1 = ball_range(u, b1);
      const double harnack = r1.lo > 0.0 ? r1.hi / r1.lo : kInf;
      const double avg2 = ball_moment(l, u, b2, 2.0) / ball_mass(l, b2);
      const double moser = avg2 > 0.0 ? r1.hi / std::sqrt(avg2) : 0.0;
      const double l2 = ball_moment(l, u, b2, 2.0);
      const double cacc = l2 > 0.0 ? B.radius * B.radius * ball_energy(l, u, B.center, B.radius) / l2 : 0.0;
      std::vector<double> s, osc;
      for (int j = 0; j < 3; ++j) {
        const double sj = B.radius / std::ldexp(1.0, j);
        if (sj < h) break;
        s.push_back(sj);
        osc.push_back(ball_range(u, ball_nodes(l.grid->info(), B.center, sj)).osc());
      }
      const LinearFit fit = fit_loglog(s, osc);
      double oracle_q = 0.0;
      if (oracle) {
        Range ro;
        for (std::size_t i : b1.idx)
          ro.add(flat_shell_oracle(gamma, l.grid->node(i), cfg.x0, cfg.shell_lo, cfg.shell_hi));
        oracle_q = ro.hi / ro.lo;
        omax = std::max(omax, std::abs(harnack - oracle_q) / oracle_q);
      }
      hmax = std::max(hmax, harnack);
      mmax = std::max(mmax, moser);
      cmax = std::max(cmax, cacc);
      if (s.size() >= 2) amin = std::min(amin, fit.slope);
      t.rows.push_back({h, double(bi), harnack, moser, cacc, fit.slope, fit.r2, oracle_q});
    }
    hq.values.push_back(hmax);
    mq.values.push_back(mmax);
    cq.values.push_back(cmax);
    if (std::isfinite(amin)) aq.values.push_back(amin);
    if (oracle) oq.values.push_back(omax);
    mp.values.push_back(viol);
  }
  for (Quantity* q : {&hq, &mq, &cq, &aq, &oq, &mp})
    if (!q->values.empty()) rep.add(std::move(*q));
  rep.tables.push_back(std::move(t));
  rep.evaluate();
  return rep;
}

// --- boundary regularity ----------------------------------------------------------------------

EstimateReport check_boundary_regularity(const BoundarySet& gamma, const BoundaryRegularityConfig& cfg) {
  require_ladder(cfg.ladder);
  EstimateReport rep;
  rep.id = "boundary_regularity";
  rep.scenario = gamma.descriptor();
  rep.h = cfg.ladder.h;
  const Partition part = partition_by_shells(gamma, cfg.x0, {cfg.far_lo, cfg.far_hi}, {"far"}, "");
  const double r = cfg.radius;

  Quantity aq = quantity("holder_alpha", 1e-12, kInf);
  Quantity rq = quantity("holder_r2", 0.9, 1.0 + 1e-12, false, false);
  Quantity mq = quantity("moser_ratio", 0.0, cfg.budget);
  Quantity cq = quantity("caccioppoli_ratio", 0.0, cfg.budget);
  Quantity eq = quantity("osc_contraction", 0.0, 1.0 - 1e-12);
  Quantity hb = quantity("harnack_inf_trace_one", 1.0 / cfg.budget, 1.0 + 1e-12);
  Quantity mp = quantity("max_principle_violation", 0.0, 1e-9, false);
  Table t{"oscillation", {"h", "s", "osc"}, {}};
  for (double h : cfg.ladder.h) {
    std::vector<double> s, osc;
    for (int j = 0; j < cfg.scales; ++j) {
      const double sj = r / std::ldexp(1.0, j);
      if (sj < 2.0 * h) break;
      s.push_back(sj);
    }
    if (s.size() < 3)
      throw Error(ErrorCode::UnderResolved, "fewer than 3 dyadic scales fit between 2h and the ball radius");
    const Level l = make_level(gamma, cfg.ladder, h);
    double viol = 0.0;
    const Field u = solve_group(l, cfg.ladder, gamma, part, 0, viol);
    for (double sj : s) {
      osc.push_back(ball_range(u, ball_nodes(l.grid->info(), cfg.x0, sj)).osc());
      t.rows.push_back({h, sj, osc.back()});
    }
    const LinearFit fit = fit_loglog(s, osc);
    aq.values.push_back(fit.slope);
    rq.values.push_back(fit.r2);
    if (!fit.conclusive) rep.notes.push_back("Hölder fit inconclusive at h=" + std::to_string(h));
    const BallNodes b1 = ball_nodes(l.grid->info(), cfg.x0, r);
    const BallNodes b2 = ball_nodes(l.grid->info(), cfg.x0, 2.0 * r);
    const BallNodes b4 = ball_nodes(l.grid->info(), cfg.x0, 4.0 * r);
    const Range r1 = ball_range(u, b1);
    const double avg2 = ball_moment(l, u, b2, 2.0) / ball_mass(l, b2);
    mq.values.push_back(avg2 > 0.0 ? r1.hi / std::sqrt(avg2) : 0.0);
    const double l2 = ball_moment(l, u, b2, 2.0);
    cq.values.push_back(l2 > 0.0 ? r * r * ball_energy(l, u, cfg.x0, r) / l2 : 0.0);
    const double o4 = ball_range(u, b4).osc();
    eq.values.push_back(o4 > 0.0 ? r1.osc() / o4 : 0.0);
    hb.values.push_back(1.0 - r1.hi);
    mp.values.push_back(viol);
  }
  for (Quantity* q : {&aq, &rq, &mq, &cq, &eq, &hb, &mp}) rep.add(std::move(*q));
  rep.tables.push_back(std::move(t));
  rep.evaluate();
  return rep;
}

// --- Green function ---------------------------------------------------------------------------

EstimateReport check_green(const BoundarySet& gamma, const GreenCheckConfig& cfg) {
  require_ladder(cfg.near);
  EstimateReport rep;
  rep.id = "green_function";
  rep.scenario = gamma.descriptor();
  rep.h = cfg.near.h;
  const int n = gamma.ambient_dim();
  const double d = gamma.hausdorff_dim();
  const double dy = gamma.distance(cfg.pole);
  const Point dir = cfg.direction / cfg.direction.norm();

  Quantity lb = quantity("lower_bound_ratio", 1.0 / cfg.lower_bound_budget, cfg.lower_bound_budget);
  Quantity neg = quantity("negative_part", 0.0, 1e-8, false);
  Quantity ns = quantity("near_slope", 2.0 - n - cfg.slope_tol, 2.0 - n + cfg.slope_tol, false);
  Quantity fs = quantity("far_slope", 1.0 - d - cfg.slope_tol, 1.0 - d + cfg.slope_tol, false);
  Quantity sy = quantity("symmetry_error", 0.0, cfg.symmetry_budget, false);
  Quantity free_space = quantity("free_space_ratio", 0.85, 1.15, false, false);
  Quantity decay = quantity("decay_alpha", 0.0, kInf, false, false);
  Quantity annular = quantity("annular_energy_slope", -kInf, kInf, false, false);
  Table near_t{"near_field", {"h", "rho", "dist", "g", "lower_bound_ratio"}, {}};
  Table far_t{"far_field", {"h", "dist", "g"}, {}};
  Table ann_t{"annular_energy", {"h", "s", "energy_outside"}, {}};
  Table dec_t{"decay", {"h", "delta_x", "g"}, {}};

  for (std::size_t li = 0; li < cfg.near.h.size(); ++li) {
    const double h = cfg.near.h[li];
    const Level l = make_level(gamma, cfg.near, h);
    const GreenSample gs = green(*l.sys, PoleSpec{cfg.pole, -1.0}, cfg.near.solve);
    if (gs.rho_raised) rep.notes.push_back(gs.warning);
    double gmin = 0.0, gmax = 0.0;
    for (double v : gs.field.values) {
      gmin = std::min(gmin, v);
      gmax = std::max(gmax, v);
    }
    neg.values.push_back(gmax > 0.0 ? -gmin / gmax : 0.0);
    std::vector<double> dist, vals;
    double lbmin = kInf;
    for (double f : cfg.near_radii) {
      const double s = f * dy;
      const Point x = cfg.pole + s * dir;
      const double g = interpolate(gs.field, x);
      const double ratio = g * measure_ball(gamma, cfg.pole, s) / (s * s);
      lbmin = std::min(lbmin, ratio);
      dist.push_back(s);
      vals.push_back(g);
      near_t.rows.push_back({h, gs.pole.rho, s, g, ratio});
    }
    lb.values.push_back(lbmin);
    if (li + 1 == cfg.near.h.size()) {
      ns.values.push_back(fit_loglog(dist, vals).slope);
      if (n == 3 && !dist.empty())
        free_space.values.push_back(vals.front() * weight(gamma, cfg.pole) * 4.0 * std::numbers::pi * dist.front());
      // Decay towards Γ below the pole.
      const Point foot = gamma.nearest_point(cfg.pole);
      const Point up = (cfg.pole - foot) / dy;
      std::vector<double> t, gv;
      for (double f = 0.5; f * dy >= 4.0 * h; f *= 0.5) {
        const double g = interpolate(gs.field, foot + (f * dy) * up);
        t.push_back(f * dy);
        gv.push_back(g);
        dec_t.rows.push_back({h, f * dy, g});
      }
      if (t.size() >= 2) decay.values.push_back(fit_loglog(t, gv).slope);
      // Energy outside B(y, s).
      const double total = energy(gs.field, *l.sys) * (1 << mirror_mask_size(l.grid->info()));
      std::vector<double> ss, ev;
      for (double f : {0.25, 0.5, 1.0}) {
        const double s = f * dy;
        const double e = total - ball_energy(l, gs.field, cfg.pole, s);
        ss.push_back(s);
        ev.push_back(e);
        ann_t.rows.push_back({h, s, e});
      }
      annular.values.push_back(fit_loglog(ss, ev).slope);
    }
    if (li == 0) {
      const GreenSample gx = green(*l.sys, PoleSpec{cfg.second_pole, -1.0}, cfg.near.solve);
      const double a = interpolate(gs.field, cfg.second_pole);
      const double b = interpolate(gx.field, cfg.pole);
      sy.values.push_back(std::abs(a - b) / a);
    }
  }

  if (!cfg.far.h.empty()) {
    const double h = cfg.far.h.back();
    const Level l = make_level(gamma, cfg.far, h);
    const GreenSample gs = green(*l.sys, PoleSpec{cfg.pole, -1.0}, cfg.far.solve);
    if (gs.rho_raised) rep.notes.push_back(gs.warning);
    std::vector<double> dist, vals;
    for (double f : cfg.far_radii) {
      const double s = f * dy;
      const double g = interpolate(gs.field, cfg.pole + s * dir);
      dist.push_back(s);
      vals.push_back(g);
      far_t.rows.push_back({h, s, g});
    }
    fs.values.push_back(fit_loglog(dist, vals).slope);
  }
  for (Quantity* q : {&lb, &neg, &ns, &fs, &sy, &free_space, &decay, &annular})
    if (!q->values.empty()) rep.add(std::move(*q));
  rep.tables = {std::move(near_t), std::move(far_t), std::move(ann_t), std::move(dec_t)};
  rep.evaluate();
  return rep;
}

// --- harmonic measure -------------------------------------------------------------------------

EstimateReport check_harmonic_measure(const BoundarySet& gamma, const HarmonicMeasureCheckConfig& cfg) {
  require_ladder(cfg.ladder);
  EstimateReport rep;
  rep.id = "harmonic_measure";
  rep.scenario = gamma.descriptor();
  rep.h = cfg.ladder.h;
  const double r = cfg.radius;
  const Partition part =
      partition_by_shells(gamma, cfg.x0, {0.0, 0.5 * r, r, 2.0 * r}, {"inner", "outer_half", "ring"}, "rest");
  const Partition whole = whole_partition(gamma);
  const Point x0c = corkscrew(gamma, cfg.x0, r).point;
  const bool oracle = is_flat_line(gamma);
  double outer_margin = cfg.outer_margin;
  if (outer_margin < 0.0) {
    outer_margin = kInf;
    for (int a = 0; a < gamma.ambient_dim(); ++a)
      outer_margin = std::min(outer_margin, 0.25 * (cfg.ladder.grid.box.hi[a] - cfg.ladder.grid.box.lo[a]));
  }
  const double near_margin =
      cfg.near_margin >= 0.0 ? cfg.near_margin : 4.0 * *std::max_element(cfg.ladder.h.begin(), cfg.ladder.h.end());
  auto in_sweep = [&](const Point& x) {
    const Box& b = cfg.ladder.grid.box;
    for (int a = 0; a < x.dim(); ++a) {
      if (b.hi[a] - x[a] < outer_margin) return false;
      if (!cfg.ladder.grid.mirror[a] && x[a] - b.lo[a] < outer_margin) return false;
    }
    return gamma.distance(x) >= near_margin;
  };

  Quantity full = quantity("full_measure_error", 0.0, 1e-8, false);
  Quantity nd = quantity("nondegeneracy_min", 1.0 / cfg.budget, 1.0 + 1e-9);
  Quantity db = quantity("doubling_max", 1.0 - 1e-9, cfg.budget);
  Quantity cp = quantity("change_of_pole_C", 1.0 - 1e-9, cfg.budget);
  Quantity oq = quantity("oracle_rel_error", 0.0, cfg.oracle_tol, false);
  Quantity lk = quantity("leakage_at_corkscrew", -kInf, kInf, false, false);
  Quantity mp = quantity("max_principle_violation", 0.0, 1e-9, false);
  Table t{"sweep", {"h", "x0", "x1", "x2", "omega_B", "omega_2B", "oracle_B"}, {}};

  for (double h : cfg.ladder.h) {
    const Level l = make_level(gamma, cfg.ladder, h);
    const Grid& grid = *l.grid;
    double viol = 0.0;
    std::vector<Field> f;
    for (int j = 0; j < 4; ++j) f.push_back(solve_group(l, cfg.ladder, gamma, part, j, viol));
    const Field one = solve_group(l, cfg.ladder, gamma, whole, 0, viol);
    double ferr = 0.0;
    for (double v : one.values) ferr = std::max(ferr, std::abs(v - 1.0));
    full.values.push_back(ferr);
    mp.values.push_back(viol);
    auto omega_b = [&](std::size_t i) { return f[0][i] + f[1][i]; };
    const double wb0 = interpolate(f[0], x0c) + interpolate(f[1], x0c);
    const double we0[2] = {interpolate(f[0], x0c), interpolate(f[1], x0c)};
    lk.values.push_back(1.0 - wb0 - interpolate(f[2], x0c) - interpolate(f[3], x0c));

    double ndmin = kInf, dbmax = 0.0, cpmin = kInf, cpmax = 0.0, omax = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!grid.is_free(i)) continue;
      const Point x = grid.node(i);
      // Distance to x0 in the unfolded domain is the distance of the nearest image.
      double dist = kInf;
      const unsigned combos = 1u << mirror_mask_size(grid.info());
      for (unsigned s = 0; s < combos; ++s) dist = std::min(dist, distance(x, reflect(grid.info(), cfg.x0, s)));
      const double wb = omega_b(i);
      if (dist < 0.5 * r) ndmin = std::min(ndmin, wb);
      const bool sweep = in_sweep(x);
      if (sweep && dist >= 4.0 * r && wb > 1e-12) dbmax = std::max(dbmax, (wb + f[2][i]) / wb);
      if (sweep && dist >= 2.0 * r && wb > 1e-12)
        for (int e = 0; e < 2; ++e) {
          const double q = f[e][i] / wb / we0[e];
          cpmin = std::min(cpmin, q);
          cpmax = std::max(cpmax, q);
        }
      if (oracle && dist <= 2.0 * r && gamma.distance(x) >= 0.5 * r) {
        const double o = flat_shell_oracle(gamma, x, cfg.x0, 0.0, r);
        if (o >= 0.05) omax = std::max(omax, std::abs(wb - o) / o);
        t.rows.push_back({h, x[0], x[1], x.dim() > 2 ? x[2] : 0.0, wb, wb + f[2][i], o});
      }
    }
    nd.values.push_back(ndmin);
    db.values.push_back(dbmax);
    cp.values.push_back(std::max(cpmax, 1.0 / cpmin));
    if (oracle && h == cfg.ladder.h.back()) oq.values.push_back(omax);
  }
  for (Quantity* q : {&full, &nd, &db, &cp, &oq, &lk, &mp})
    if (!q->values.empty()) rep.add(std::move(*q));
  rep.tables.push_back(std::move(t));
  rep.evaluate();
  return rep;
}

// --- comparison -------------------------------------------------------------------------------

std::pair<double, double> comparison_window(const Field& u, const Field& v, const Grid& grid, const Point& c,
                                            double r, const Point& x0, double tol) {
  const double u0 = interpolate(u, x0), v0 = interpolate(v, x0);
  if (!(u0 > tol) || !(v0 > tol)) throw Error(ErrorCode::DegeneratePair, "a solution vanishes at the reference point");
  const BallNodes b = ball_nodes(grid.info(), c, r);
  double lo = kInf, hi = -kInf;
  for (std::size_t i : b.idx) {
    if (!grid.is_free(i)) continue;
    if (!(v[i] > tol) || !(u[i] > tol)) throw Error(ErrorCode::DegeneratePair, "a solution vanishes on the probe set");
    const double q = (u[i] / v[i]) * (v0 / u0);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  if (lo > hi) throw Error(ErrorCode::DegeneratePair, "no free node in the comparison ball");
  return {lo, hi};
}

EstimateReport check_comparison(const BoundarySet& gamma, const ComparisonConfig& cfg) {
  require_ladder(cfg.ladder);
  if (!(cfg.u_hi <= cfg.v_lo || cfg.v_hi <= cfg.u_lo))
    throw Error(ErrorCode::InvalidArgument, "comparison data sets must be disjoint");
  EstimateReport rep;
  rep.id = "comparison_principle";
  rep.scenario = gamma.descriptor();
  rep.h = cfg.ladder.h;
  const Partition pu = partition_by_shells(gamma, cfg.x0, {cfg.u_lo, cfg.u_hi}, {"u"}, "");
  const Partition pv = partition_by_shells(gamma, cfg.x0, {cfg.v_lo, cfg.v_hi}, {"v"}, "");
  const Point x0c = corkscrew(gamma, cfg.x0, cfg.radius).point;

  Quantity cq = quantity("comparison_C", 1.0 - 1e-12, cfg.budget);
  Quantity slo = quantity("self_window_min", 1.0, 1.0, false);
  Quantity shi = quantity("self_window_max", 1.0, 1.0, false);
  Quantity mp = quantity("max_principle_violation", 0.0, 1e-9, false);
  Table t{"window", {"h", "min", "max"}, {}};
  for (double h : cfg.ladder.h) {
    const Level l = make_level(gamma, cfg.ladder, h);
    double viol = 0.0;
    const Field u = solve_group(l, cfg.ladder, gamma, pu, 0, viol);
    const Field v = solve_group(l, cfg.ladder, gamma, pv, 0, viol);
    const auto [lo, hi] = comparison_window(u, v, *l.grid, cfg.x0, cfg.radius, x0c, cfg.degenerate_tol);
    const auto [slo_v, shi_v] = comparison_window(u, u, *l.grid, cfg.x0, cfg.radius, x0c, cfg.degenerate_tol);
    cq.values.push_back(std::max(hi, 1.0 / lo));
    slo.values.push_back(slo_v);
    shi.values.push_back(shi_v);
    mp.values.push_back(viol);
    t.rows.push_back({h, lo, hi});
  }
  for (Quantity* q : {&cq, &slo, &shi, &mp}) rep.add(std::move(*q));
  rep.tables.push_back(std::move(t));
  rep.evaluate();
  return rep;
}

}  // namespace hmlab

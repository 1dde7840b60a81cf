#include "hmlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "hmlab/error.hpp"
#include "hmlab/quadrature.hpp"

namespace hmlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double unit_ball_volume(double d) {
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

Point closest_on_segment(const Point& x, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double len2 = ab.norm2();
  if (len2 == 0.0) return a;
  const double t = std::clamp((x - a).dot(ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

// Nearest point of the middle-thirds Cantor set C ⊂ [0,1] to t.
double cantor_nearest_1d(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double lo = 0.0, len = 1.0;
  for (int depth = 0; depth < 64; ++depth) {
    const double a = lo + len / 3.0;
    const double b = lo + 2.0 * len / 3.0;
    if (t <= a) {
      len /= 3.0;
    } else if (t >= b) {
      lo = b;
      len /= 3.0;
    } else {
      return (t - a <= b - t) ? a : b;
    }
  }
  return t;
}

double interval_gap(double lo, double hi, double v) {
  if (v < lo) return lo - v;
  if (v > hi) return v - hi;
  return 0.0;
}

// Distance between an interval [lo, hi] and the Cantor set.
double cantor_interval_distance(double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  const double c = cantor_nearest_1d(mid);
  if (std::abs(c - mid) <= 0.5 * (hi - lo)) return 0.0;
  return std::min(std::abs(cantor_nearest_1d(lo) - lo), std::abs(cantor_nearest_1d(hi) - hi));
}

bool segment_meets_box(const Point& a, const Point& b, const Box& box) {
  double t0 = 0.0, t1 = 1.0;
  for (int i = 0; i < a.dim(); ++i) {
    const double dir = b[i] - a[i];
    if (dir == 0.0) {
      if (a[i] < box.lo[i] || a[i] > box.hi[i]) return false;
      continue;
    }
    double ta = (box.lo[i] - a[i]) / dir;
    double tb = (box.hi[i] - a[i]) / dir;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

double point_box_distance(const Point& p, const Box& box) {
  double s = 0.0;
  for (int i = 0; i < p.dim(); ++i) {
    const double g = interval_gap(box.lo[i], box.hi[i], p[i]);
    s += g * g;
  }
  return std::sqrt(s);
}

double half_diagonal(const Box& box) { return 0.5 * distance(box.lo, box.hi); }

std::uint64_t fnv_mix(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

std::string to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::PointSet: return "point_set";
    case BoundaryKind::Segment: return "segment";
    case BoundaryKind::PolyLine: return "polyline";
    case BoundaryKind::LipschitzGraph: return "lipschitz_graph";
    case BoundaryKind::CantorSet: return "cantor";
    case BoundaryKind::FlatPlane: return "flat";
    case BoundaryKind::Cloud: return "cloud";
  }
  return "unknown";
}

// --- construction -------------------------------------------------------------------------------

namespace {

void check_dims(int n, double d) {
  if (n < 2 || n > kMaxDim)
    throw Error(ErrorCode::InvalidArgument, "ambient dimension must be in [2, " +
                                                std::to_string(kMaxDim) + "]");
  if (!(d >= 0.0) || !(d < n - 1.0))
    throw Error(ErrorCode::InvalidArgument, "hausdorff_dim must be < n-1 (got d=" +
                                                std::to_string(d) + ", n=" + std::to_string(n) + ")");
}

}  // namespace

BoundarySet BoundarySet::point_set(std::vector<Point> points) {
  if (points.empty()) throw Error(ErrorCode::InvalidArgument, "point set is empty");
  BoundarySet g;
  g.n_ = points.front().dim();
  g.d_ = 0.0;
  check_dims(g.n_, g.d_);
  g.kind_ = BoundaryKind::PointSet;
  double spacing = kInf;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].dim() != g.n_) throw Error(ErrorCode::InvalidArgument, "mixed point dimensions");
    g.patches_.push_back({points[i], 1.0, 0.0});
    for (std::size_t j = 0; j < i; ++j) spacing = std::min(spacing, hmlab::distance(points[i], points[j]));
  }
  g.vertices_ = std::move(points);
  g.spacing_ = std::isfinite(spacing) ? spacing : 0.0;
  g.descriptor_ = "point_set[" + std::to_string(g.vertices_.size()) + "]";
  g.finalize(static_cast<double>(g.vertices_.size()));
  return g;
}

BoundarySet BoundarySet::segment(const Point& a, const Point& b, int n_patches) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::InvalidArgument, "segment endpoints differ in dim");
  if (n_patches < 1) throw Error(ErrorCode::InvalidArgument, "segment needs at least one patch");
  const double len = hmlab::distance(a, b);
  if (len <= 0.0) throw Error(ErrorCode::InvalidArgument, "degenerate segment");
  BoundarySet g;
  g.n_ = a.dim();
  g.d_ = 1.0;
  check_dims(g.n_, g.d_);
  g.kind_ = BoundaryKind::Segment;
  g.vertices_ = {a, b};
  const double step = len / n_patches;
  for (int i = 0; i < n_patches; ++i) {
    const double t = (i + 0.5) / n_patches;
    g.patches_.push_back({a + t * (b - a), step, 0.5 * step});
  }
  g.spacing_ = step;
  std::ostringstream os;
  os << "segment" << a << "-" << b;
  g.descriptor_ = os.str();
  g.finalize(2.0);
  return g;
}

BoundarySet BoundarySet::polyline(std::vector<Point> vertices, double spacing) {
  if (vertices.size() < 2) throw Error(ErrorCode::InvalidArgument, "polyline needs >= 2 vertices");
  if (!(spacing > 0.0)) throw Error(ErrorCode::InvalidArgument, "polyline spacing must be > 0");
  BoundarySet g;
  g.n_ = vertices.front().dim();
  g.d_ = 1.0;
  check_dims(g.n_, g.d_);
  g.kind_ = BoundaryKind::PolyLine;
  for (std::size_t s = 0; s + 1 < vertices.size(); ++s) {
    const Point& a = vertices[s];
    const Point& b = vertices[s + 1];
    const double len = hmlab::distance(a, b);
    const int m = std::max(1, static_cast<int>(std::ceil(len / spacing)));
    for (int i = 0; i < m; ++i) {
      const double t = (i + 0.5) / m;
      g.patches_.push_back({a + t * (b - a), len / m, 0.5 * len / m});
    }
  }
  g.vertices_ = std::move(vertices);
  g.spacing_ = spacing;
  g.descriptor_ = "polyline[" + std::to_string(g.vertices_.size()) + "]";
  g.finalize(-1.0);
  return g;
}

BoundarySet BoundarySet::lipschitz_graph(int n, double amplitude, double frequency, double extent,
                                         double spacing) {
  if (!(extent > 0.0) || !(spacing > 0.0))
    throw Error(ErrorCode::InvalidArgument, "lipschitz_graph needs extent > 0 and spacing > 0");
  BoundarySet g;
  g.n_ = n;
  g.d_ = 1.0;
  check_dims(n, 1.0);
  g.kind_ = BoundaryKind::LipschitzGraph;
  g.amplitude_ = amplitude;
  g.frequency_ = frequency;
  const int m = std::max(1, static_cast<int>(std::ceil(2.0 * extent / spacing)));
  const double dt = 2.0 * extent / m;
  auto curve = [&](double t) {
    Point p(n);
    p[0] = t;
    p[1] = amplitude * std::sin(frequency * t);
    return p;
  };
  for (int i = 0; i < m; ++i) {
    const double t = -extent + (i + 0.5) * dt;
    const Point a = curve(t - 0.5 * dt);
    const Point b = curve(t + 0.5 * dt);
    const double slope = amplitude * frequency * std::cos(frequency * t);
    g.patches_.push_back({curve(t), dt * std::sqrt(1.0 + slope * slope), 0.5 * hmlab::distance(a, b)});
  }
  g.spacing_ = dt * std::sqrt(1.0 + amplitude * amplitude * frequency * frequency);
  std::ostringstream os;
  os << "lipschitz_graph(A=" << amplitude << ",k=" << frequency << ",L=" << extent << ")";
  g.descriptor_ = os.str();
  g.finalize(-1.0);
  return g;
}

BoundarySet BoundarySet::cantor(int n, int level) {
  if (level < 0 || level > 22) throw Error(ErrorCode::InvalidArgument, "cantor level must be in [0, 22]");
  BoundarySet g;
  g.n_ = n;
  g.d_ = std::log(2.0) / std::log(3.0);
  check_dims(n, g.d_);
  g.kind_ = BoundaryKind::CantorSet;
  const std::size_t count = std::size_t{1} << level;
  const double len = std::pow(3.0, -level);
  const double mass = std::ldexp(1.0, -level);
  g.patches_.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    double left = 0.0, scale = 1.0;
    for (int j = level - 1; j >= 0; --j) {
      scale /= 3.0;
      if ((i >> j) & 1u) left += 2.0 * scale;
    }
    Point c(n);
    c[0] = left + 0.5 * len;
    g.patches_.push_back({c, mass, 0.5 * len});
  }
  g.spacing_ = 2.0 * len;
  g.descriptor_ = "cantor(level=" + std::to_string(level) + ")";
  g.finalize(-1.0);
  return g;
}

BoundarySet BoundarySet::flat(int n, int d, double extent, double spacing) {
  if (!(extent > 0.0) || !(spacing > 0.0))
    throw Error(ErrorCode::InvalidArgument, "flat set needs extent > 0 and spacing > 0");
  BoundarySet g;
  g.n_ = n;
  g.d_ = d;
  check_dims(n, d);
  g.kind_ = BoundaryKind::FlatPlane;
  // Centers on the lattice s·Z^d through the origin, so grids with h = s see patches at nodes.
  const int half = std::max(1, static_cast<int>(std::lround(extent / spacing)));
  const double s = spacing;
  const std::size_t m = 2 * static_cast<std::size_t>(half) + 1;
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= m;
  if (total > 50'000'000) throw Error(ErrorCode::InvalidArgument, "flat set patch count too large");
  g.patches_.reserve(total);
  for (std::size_t k = 0; k < total; ++k) {
    Point c(n);
    std::size_t rem = k;
    for (int i = 0; i < d; ++i) {
      c[i] = (static_cast<double>(rem % m) - half) * s;
      rem /= m;
    }
    g.patches_.push_back({c, std::pow(s, d), 0.5 * s * std::sqrt(static_cast<double>(d))});
  }
  g.spacing_ = s;
  std::ostringstream os;
  os << "flat(n=" << n << ",d=" << d << ",extent=" << extent << ",spacing=" << s << ")";
  g.descriptor_ = os.str();
  const double omega = unit_ball_volume(d);
  g.finalize(std::max(omega, 1.0 / omega));
  return g;
}

BoundarySet BoundarySet::cloud(int n, double d, std::vector<Patch> patches) {
  if (patches.empty()) throw Error(ErrorCode::InvalidArgument, "patch cloud is empty");
  BoundarySet g;
  g.n_ = n;
  g.d_ = d;
  check_dims(n, d);
  g.kind_ = BoundaryKind::Cloud;
  for (const Patch& p : patches) {
    if (p.center.dim() != n) throw Error(ErrorCode::InvalidArgument, "patch dimension mismatch");
    if (!(p.weight >= 0.0) || !(p.radius >= 0.0))
      throw Error(ErrorCode::InvalidArgument, "patch weights and radii must be >= 0");
  }
  g.patches_ = std::move(patches);
  g.descriptor_ = "cloud[" + std::to_string(g.patches_.size()) + "]";
  // spacing: median nearest-neighbour distance estimated below, after the tree exists
  g.finalize(-2.0);
  return g;
}

void BoundarySet::finalize(double c0) {
  max_radius_ = 0.0;
  std::vector<Point> centers;
  centers.reserve(patches_.size());
  for (const Patch& p : patches_) {
    max_radius_ = std::max(max_radius_, p.radius);
    centers.push_back(p.center);
  }
  tree_ = std::make_shared<const KdTree>(centers);

  if (c0 == -2.0) {  // cloud: estimate spacing from nearest neighbours of a few patches
    std::vector<double> nn;
    const std::size_t stride = std::max<std::size_t>(1, patches_.size() / 64);
    for (std::size_t i = 0; i < patches_.size(); i += stride) {
      double best = kInf;
      for (std::size_t j = 0; j < patches_.size(); ++j)
        if (j != i) best = std::min(best, hmlab::distance(patches_[i].center, patches_[j].center));
      if (std::isfinite(best)) nn.push_back(best);
    }
    std::sort(nn.begin(), nn.end());
    spacing_ = nn.empty() ? 2.0 * max_radius_ : nn[nn.size() / 2];
    c0 = -1.0;
  }

  std::uint64_t h = 1469598103934665603ull;
  const int kind = static_cast<int>(kind_);
  h = fnv_mix(h, &kind, sizeof kind);
  h = fnv_mix(h, &n_, sizeof n_);
  h = fnv_mix(h, &d_, sizeof d_);
  for (const Patch& p : patches_) {
    for (int i = 0; i < n_; ++i) {
      const double v = p.center[i];
      h = fnv_mix(h, &v, sizeof v);
    }
    h = fnv_mix(h, &p.weight, sizeof p.weight);
  }
  fingerprint_ = h;

  if (c0 > 0.0) {
    c0_ = c0;
    return;
  }
  // Estimate C0 from the set itself over a window of radii between resolution and diameter.
  Point lo = patches_.front().center, hi = lo;
  for (const Patch& p : patches_)
    for (int i = 0; i < n_; ++i) {
      lo[i] = std::min(lo[i], p.center[i]);
      hi[i] = std::max(hi[i], p.center[i]);
    }
  const double diam = hmlab::distance(lo, hi);
  const double r_min = std::max(4.0 * spacing_, 1e-12);
  const double r_max = 0.5 * diam;
  c0_ = 1.0;
  if (!(r_max > r_min)) return;
  std::vector<double> radii;
  for (int k = 0; k < 8; ++k) radii.push_back(r_min * std::pow(r_max / r_min, k / 7.0));
  const AhlforsReport rep = ahlfors_check(*this, 16, radii, 1.0, d_);
  c0_ = std::max({1.0, rep.c_upper, 1.0 / std::max(rep.c_lower, 1e-300)});
}

bool BoundarySet::has_exact_distance() const {
  switch (kind_) {
    case BoundaryKind::PointSet:
    case BoundaryKind::Segment:
    case BoundaryKind::PolyLine:
    case BoundaryKind::CantorSet:
    case BoundaryKind::FlatPlane:
      return true;
    default:
      return false;
  }
}

double BoundarySet::total_measure() const {
  double s = 0.0;
  for (const Patch& p : patches_) s += p.weight;
  return s;
}

double BoundarySet::cloud_distance(const Point& x) const {
  const Patch& p = patches_[tree_->nearest(x)];
  return std::max(0.0, hmlab::distance(x, p.center) - p.radius);
}

double BoundarySet::distance(const Point& x) const {
  if (!has_exact_distance()) return cloud_distance(x);
  return hmlab::distance(x, nearest_point(x));
}

Point BoundarySet::nearest_point(const Point& x) const {
  switch (kind_) {
    case BoundaryKind::PointSet:
      return vertices_[tree_->nearest(x)];
    case BoundaryKind::Segment:
      return closest_on_segment(x, vertices_[0], vertices_[1]);
    case BoundaryKind::PolyLine: {
      Point best = vertices_.front();
      double best_d2 = kInf;
      for (std::size_t s = 0; s + 1 < vertices_.size(); ++s) {
        const Point c = closest_on_segment(x, vertices_[s], vertices_[s + 1]);
        const double d2 = distance2(x, c);
        if (d2 < best_d2) {
          best_d2 = d2;
          best = c;
        }
      }
      return best;
    }
    case BoundaryKind::CantorSet: {
      Point c(n_);
      c[0] = cantor_nearest_1d(x[0]);
      return c;
    }
    case BoundaryKind::FlatPlane: {
      Point c = x;
      for (int i = flat_dim(); i < n_; ++i) c[i] = 0.0;
      return c;
    }
    case BoundaryKind::LipschitzGraph:
    case BoundaryKind::Cloud:
      return patches_[tree_->nearest(x)].center;
  }
  return x;
}

Point BoundarySet::distance_gradient(const Point& x) const {
  if (has_exact_distance()) {
    Point v = x - nearest_point(x);
    const double len = v.norm();
    if (len == 0.0) throw Error(ErrorCode::DistanceZero, "gradient of δ requested on Γ");
    return v / len;
  }
  const double dx = distance(x);
  if (dx == 0.0) throw Error(ErrorCode::DistanceZero, "gradient of δ requested on Γ");
  const double step = dx / 8.0;
  Point grad(n_);
  for (int i = 0; i < n_; ++i) {
    Point a = x, b = x;
    a[i] += step;
    b[i] -= step;
    grad[i] = (distance(a) - distance(b)) / (2.0 * step);
  }
  return grad;
}

std::size_t BoundarySet::nearest_patch(const Point& x) const { return tree_->nearest(x); }

void BoundarySet::patches_in_ball(const Point& c, double r, std::vector<std::size_t>& out) const {
  tree_->within(c, r, out);
}

bool BoundarySet::intersects_box(const Box& box) const {
  switch (kind_) {
    case BoundaryKind::PointSet:
      for (const Point& p : vertices_)
        if (box.contains(p)) return true;
      return false;
    case BoundaryKind::Segment:
      return segment_meets_box(vertices_[0], vertices_[1], box);
    case BoundaryKind::PolyLine:
      for (std::size_t s = 0; s + 1 < vertices_.size(); ++s)
        if (segment_meets_box(vertices_[s], vertices_[s + 1], box)) return true;
      return false;
    case BoundaryKind::CantorSet:
      for (int i = 1; i < n_; ++i)
        if (box.lo[i] > 0.0 || box.hi[i] < 0.0) return false;
      return cantor_interval_distance(box.lo[0], box.hi[0]) == 0.0;
    case BoundaryKind::FlatPlane:
      for (int i = flat_dim(); i < n_; ++i)
        if (box.lo[i] > 0.0 || box.hi[i] < 0.0) return false;
      return true;
    case BoundaryKind::LipschitzGraph:
    case BoundaryKind::Cloud: {
      std::vector<std::size_t> hits;
      tree_->within(box.center(), half_diagonal(box) + max_radius_, hits);
      for (std::size_t k : hits)
        if (point_box_distance(patches_[k].center, box) <= patches_[k].radius) return true;
      return false;
    }
  }
  return true;
}

double BoundarySet::box_distance(const Box& box) const {
  switch (kind_) {
    case BoundaryKind::PointSet: {
      double best = kInf;
      for (const Point& p : vertices_) best = std::min(best, point_box_distance(p, box));
      return best;
    }
    case BoundaryKind::CantorSet: {
      double s = 0.0;
      const double g0 = cantor_interval_distance(box.lo[0], box.hi[0]);
      s += g0 * g0;
      for (int i = 1; i < n_; ++i) {
        const double g = interval_gap(box.lo[i], box.hi[i], 0.0);
        s += g * g;
      }
      return std::sqrt(s);
    }
    case BoundaryKind::FlatPlane: {
      double s = 0.0;
      for (int i = flat_dim(); i < n_; ++i) {
        const double g = interval_gap(box.lo[i], box.hi[i], 0.0);
        s += g * g;
      }
      return std::sqrt(s);
    }
    default:
      if (intersects_box(box)) return 0.0;
      return std::max(0.0, distance(box.center()) - half_diagonal(box));
  }
}

// --- operations ---------------------------------------------------------------------------------

double distance(const BoundarySet& gamma, const Point& x) { return gamma.distance(x); }

double weight(const BoundarySet& gamma, const Point& x) {
  const double dx = gamma.distance(x);
  if (dx <= 0.0) throw Error(ErrorCode::DistanceZero, "weight is infinite on Γ");
  return std::pow(dx, gamma.weight_exponent());
}

double smoothed_distance_quadrature(const BoundarySet& gamma, const Point& x, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be > 0");
  if (gamma.distance(x) <= 0.0) throw Error(ErrorCode::DistanceZero, "D_alpha undefined on Γ");
  const double expo = -(gamma.hausdorff_dim() + alpha);
  double s = 0.0;
  for (const Patch& p : gamma.patches()) s += p.weight * std::pow(distance(x, p.center), expo);
  return std::pow(s, -1.0 / alpha);
}

double smoothed_distance(const BoundarySet& gamma, const Point& x, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be > 0");
  const double t = gamma.distance(x);
  if (t <= 0.0) throw Error(ErrorCode::DistanceZero, "D_alpha undefined on Γ");
  if (gamma.kind() == BoundaryKind::FlatPlane) {
    // ∫_{R^d} (|z|² + t²)^{-(d+α)/2} dz = t^{-α} π^{d/2} Γ(α/2) / Γ((d+α)/2)
    const double d = gamma.hausdorff_dim();
    const double k = std::pow(std::numbers::pi, d / 2.0) * std::tgamma(alpha / 2.0) /
                     std::tgamma((d + alpha) / 2.0);
    return t * std::pow(k, -1.0 / alpha);
  }
  return smoothed_distance_quadrature(gamma, x, alpha);
}

MeasureEstimate surface_measure_ball(const BoundarySet& gamma, const Point& x, double r) {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be > 0");
  std::vector<std::size_t> hits;
  gamma.patches_in_ball(x, r, hits);
  MeasureEstimate est;
  for (std::size_t k : hits) est.value += gamma.patches()[k].weight;
  est.under_resolved = r < gamma.patch_spacing();
  return est;
}

namespace {

class BallIntegrator {
 public:
  BallIntegrator(const BoundarySet& gamma, const Point& x, double r, double power, int max_depth)
      : gamma_(gamma), x_(x), r_(r), power_(power), max_depth_(max_depth), n_(gamma.ambient_dim()) {
    closed_form_ = power == -1.0 &&
                   ((gamma.kind() == BoundaryKind::FlatPlane && n_ - gamma.flat_dim() == 2) ||
                    (gamma.kind() == BoundaryKind::PointSet && gamma.patch_count() == 1 && n_ == 2));
  }

  double run() const {
    Box cell{x_, x_};
    for (int i = 0; i < n_; ++i) {
      cell.lo[i] -= r_;
      cell.hi[i] += r_;
    }
    return integrate(cell, 0);
  }

 private:
  double integrate(const Box& cell, int depth) const {
    double dmin2 = 0.0, dmax2 = 0.0;
    for (int i = 0; i < n_; ++i) {
      const double g = interval_gap(cell.lo[i], cell.hi[i], x_[i]);
      dmin2 += g * g;
      const double far = std::max(std::abs(x_[i] - cell.lo[i]), std::abs(x_[i] - cell.hi[i]));
      dmax2 += far * far;
    }
    if (dmin2 >= r_ * r_) return 0.0;
    const bool inside = dmax2 <= r_ * r_;
    const double diam = distance(cell.lo, cell.hi);
    const bool singular = power_ < 0.0 && gamma_.distance(cell.center()) < 2.0 * diam;

    if (depth < max_depth_ && (!inside || singular)) {
      double sum = 0.0;
      const Point mid = cell.center();
      for (int child = 0; child < (1 << n_); ++child) {
        Box sub = cell;
        for (int i = 0; i < n_; ++i) {
          if (child & (1 << i)) sub.lo[i] = mid[i];
          else sub.hi[i] = mid[i];
        }
        sum += integrate(sub, depth + 1);
      }
      return sum;
    }
    if (inside && singular && closed_form_) return closed_form(cell);
    return subsample(cell, inside);
  }

  double closed_form(const Box& cell) const {
    const Point origin = gamma_.kind() == BoundaryKind::PointSet ? gamma_.patches()[0].center
                                                                 : Point(n_);
    const int t0 = n_ - 2;
    double longitudinal = 1.0;
    for (int i = 0; i < t0; ++i) longitudinal *= cell.hi[i] - cell.lo[i];
    return longitudinal * inv_radius_rect(cell.lo[t0] - origin[t0], cell.hi[t0] - origin[t0],
                                          cell.lo[t0 + 1] - origin[t0 + 1],
                                          cell.hi[t0 + 1] - origin[t0 + 1]);
  }

  double subsample(const Box& cell, bool inside) const {
    constexpr int kSub = 4;
    int total = 1;
    for (int i = 0; i < n_; ++i) total *= kSub;
    const double vol = cell.volume() / total;
    double sum = 0.0;
    for (int k = 0; k < total; ++k) {
      Point p(n_);
      int rem = k;
      for (int i = 0; i < n_; ++i) {
        p[i] = cell.lo[i] + (rem % kSub + 0.5) * (cell.hi[i] - cell.lo[i]) / kSub;
        rem /= kSub;
      }
      if (!inside && distance2(p, x_) > r_ * r_) continue;
      const double dp = gamma_.distance(p);
      if (dp <= 0.0) continue;  // measure-zero set, skipped
      sum += std::pow(dp, power_);
    }
    return sum * vol;
  }

  const BoundarySet& gamma_;
  Point x_;
  double r_, power_;
  int max_depth_;
  int n_;
  bool closed_form_ = false;
};

}  // namespace

double ball_integral(const BoundarySet& gamma, const Point& x, double r, double power,
                     int quadrature_level) {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be > 0");
  int level = quadrature_level;
  if (level < 0) level = gamma.ambient_dim() == 2 ? 11 : (gamma.ambient_dim() == 3 ? 7 : 4);
  return BallIntegrator(gamma, x, r, power, level).run();
}

double measure_ball(const BoundarySet& gamma, const Point& x, double r, int quadrature_level) {
  return ball_integral(gamma, x, r, gamma.weight_exponent(), quadrature_level);
}

double a2_product(const BoundarySet& gamma, const Point& x, double r, int quadrature_level) {
  const double w = ball_integral(gamma, x, r, gamma.weight_exponent(), quadrature_level);
  const double winv = ball_integral(gamma, x, r, -gamma.weight_exponent(), quadrature_level);
  const double vol = unit_ball_volume(gamma.ambient_dim()) * std::pow(r, gamma.ambient_dim());
  return (w / vol) * (winv / vol);
}

double default_corkscrew_epsilon(const BoundarySet& gamma) {
  // Packing: at least ((1-2ε)/(5ε))^n disjoint candidate balls, at most C0² ε^{-d} can meet Γ.
  const double n = gamma.ambient_dim();
  const double d = gamma.hausdorff_dim();
  const double c0 = gamma.ahlfors_constant();
  const double bound = std::min(0.125, std::pow(std::pow(0.15, n) / (c0 * c0), 1.0 / (n - d)));
  return 0.25 * bound;
}

Corkscrew corkscrew(const BoundarySet& gamma, const Point& x0, double r, double epsilon) {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be > 0");
  if (gamma.distance(x0) > gamma.max_patch_radius() + 1e-12 * std::max(1.0, x0.norm()))
    throw Error(ErrorCode::InvalidArgument, "corkscrew base point is not on Γ");
  if (epsilon <= 0.0) epsilon = default_corkscrew_epsilon(gamma);
  const int n = gamma.ambient_dim();
  constexpr int kSteps = 8;
  constexpr int kRotations = 4;

  Point best = x0;
  double best_clearance = -1.0;
  int total = 1;
  for (int i = 0; i < n; ++i) total *= 2 * kSteps + 1;
  for (int rot = 0; rot < kRotations; ++rot) {
    const double theta = rot * std::numbers::pi / (2.0 * kRotations);
    const double cs = std::cos(theta), sn = std::sin(theta);
    for (int k = 0; k < total; ++k) {
      Point u(n);
      int rem = k;
      for (int i = 0; i < n; ++i) {
        u[i] = static_cast<double>(rem % (2 * kSteps + 1) - kSteps) / kSteps;
        rem /= 2 * kSteps + 1;
      }
      if (u.norm2() > 1.0) continue;
      const double u0 = cs * u[0] - sn * u[1];
      const double u1 = sn * u[0] + cs * u[1];
      u[0] = u0;
      u[1] = u1;
      const Point cand = x0 + r * u;
      const double c = gamma.distance(cand);
      if (c > best_clearance || (c == best_clearance && lex_less(cand, best))) {
        best_clearance = c;
        best = cand;
      }
    }
  }
  if (best_clearance < epsilon * r)
    throw Error(ErrorCode::NoCorkscrew, "no candidate reaches clearance eps*r (eps=" +
                                            std::to_string(epsilon) + ")");
  return {best, best_clearance, epsilon};
}

double segment_distance(const BoundarySet& gamma, const Point& a, const Point& b) {
  switch (gamma.kind()) {
    case BoundaryKind::PointSet: {
      double best = kInf;
      for (const Patch& p : gamma.patches())
        best = std::min(best, distance(p.center, closest_on_segment(p.center, a, b)));
      return best;
    }
    case BoundaryKind::FlatPlane: {
      // transverse part is affine in t; minimise |p + t q| over [0, 1]
      Point p(gamma.ambient_dim()), q(gamma.ambient_dim());
      for (int i = gamma.flat_dim(); i < gamma.ambient_dim(); ++i) {
        p[i] = a[i];
        q[i] = b[i] - a[i];
      }
      const double qq = q.norm2();
      const double t = qq > 0.0 ? std::clamp(-p.dot(q) / qq, 0.0, 1.0) : 0.0;
      return (p + t * q).norm();
    }
    default: {
      const double len = distance(a, b);
      if (len == 0.0) return gamma.distance(a);
      const int samples = 2001;
      double m = kInf;
      for (int k = 0; k < samples; ++k) {
        const double t = static_cast<double>(k) / (samples - 1);
        m = std::min(m, gamma.distance(a + t * (b - a)));
      }
      return std::max(0.0, m - 0.5 * len / (samples - 1));
    }
  }
}

double default_chain_constant(const BoundarySet& gamma) {
  // Shifted segments: ~ (1/(12ε))^{n-1} disjoint tubes, each meeting Γ costs C0^{-1}(εr)^d of
  // the C0 (2+Λ)^d r^d available mass.
  const double n = gamma.ambient_dim();
  const double d = gamma.hausdorff_dim();
  const double c0 = gamma.ahlfors_constant();
  return 0.25 * std::pow(std::pow(1.0 / 12.0, n - 1.0) / (c0 * c0 * std::pow(3.0, d)),
                         1.0 / (n - 1.0 - d));
}

HarnackChain harnack_chain(const BoundarySet& gamma, const Point& x1, const Point& x2, double r,
                           double lambda, double c) {
  if (!(r > 0.0) || !(lambda >= 1.0))
    throw Error(ErrorCode::InvalidArgument, "harnack_chain needs r > 0 and lambda >= 1");
  const double tol = 1e-12 * std::max(1.0, r);
  if (gamma.distance(x1) < r - tol || gamma.distance(x2) < r - tol)
    throw Error(ErrorCode::InvalidArgument, "endpoints must satisfy δ(x_i) >= r");
  if (distance(x1, x2) > lambda * r + tol)
    throw Error(ErrorCode::InvalidArgument, "|x1 - x2| exceeds lambda * r");
  if (c <= 0.0) c = default_chain_constant(gamma);

  const int n = gamma.ambient_dim();
  const double d = gamma.hausdorff_dim();
  const double scale = std::pow(lambda, -d / (n - d - 1.0)) * r;
  const double target = c * scale;

  HarnackChain chain;
  chain.x1 = x1;
  chain.x2 = x2;
  if (distance(x1, x2) == 0.0) {
    chain.balls.push_back({x1, r / 3.0});
    chain.y1 = chain.y2 = x1;
    chain.tube_clearance = gamma.distance(x1);
    chain.ball_clearance = gamma.distance(x1) - r;
    chain.epsilon_lambda = 1.0 / 3.0;
    chain.n_lambda = 0;
    chain.observed_c = chain.tube_clearance / scale;
    return chain;
  }

  // Orthonormal basis of the hyperplane orthogonal to x2 - x1.
  const Point dir = (x2 - x1) / distance(x1, x2);
  std::vector<Point> basis;
  for (int axis = 0; axis < n && static_cast<int>(basis.size()) < n - 1; ++axis) {
    Point v = unit(n, axis);
    v -= v.dot(dir) * dir;
    for (const Point& b : basis) v -= v.dot(b) * b;
    if (v.norm() > 1e-8) basis.push_back(v / v.norm());
  }

  Point shift(n);
  double clearance = segment_distance(gamma, x1, x2);
  if (clearance < target) {
    constexpr int kSteps = 6;
    const double reach = r / 3.0;
    int total = 1;
    for (int i = 0; i < n - 1; ++i) total *= 2 * kSteps + 1;
    double best = -1.0;
    Point best_shift(n);
    for (int k = 0; k < total; ++k) {
      Point z(n);
      int rem = k;
      for (int i = 0; i < n - 1; ++i) {
        const double coef = static_cast<double>(rem % (2 * kSteps + 1) - kSteps) / kSteps;
        rem /= 2 * kSteps + 1;
        z += coef * reach * basis[i];
      }
      if (z.norm() >= reach * (1.0 - 1e-12)) {
        z *= (1.0 - 1e-3) * reach / z.norm();  // pull the rim candidates strictly inside
      }
      const double cl = segment_distance(gamma, x1 + z, x2 + z);
      if (cl > best || (cl == best && lex_less(z, best_shift))) {
        best = cl;
        best_shift = z;
      }
    }
    shift = best_shift;
    clearance = best;
  }
  if (clearance < target)
    throw Error(ErrorCode::ChainSearchFailed,
                "no shifted segment clears Γ by c*Lambda^{-d/(n-d-1)}*r = " + std::to_string(target));

  chain.y1 = x1 + shift;
  chain.y2 = x2 + shift;
  chain.tube_clearance = clearance;
  chain.observed_c = clearance / scale;
  const double rad = clearance / 4.0;
  const double len = distance(chain.y1, chain.y2);
  const int segments = std::max(1, static_cast<int>(std::ceil(len / rad)));
  chain.balls.push_back({x1, r / 3.0});
  for (int i = 0; i <= segments; ++i) {
    const double t = static_cast<double>(i) / segments;
    chain.balls.push_back({chain.y1 + t * (chain.y2 - chain.y1), rad});
  }
  chain.balls.push_back({x2, r / 3.0});
  chain.n_lambda = static_cast<int>(chain.balls.size()) - 1;
  chain.epsilon_lambda = std::min(rad, r / 3.0) / r;
  chain.ball_clearance = kInf;
  for (const ChainBall& b : chain.balls)
    chain.ball_clearance = std::min(chain.ball_clearance, gamma.distance(b.center) - 3.0 * b.radius);
  return chain;
}

AhlforsReport ahlfors_check(const BoundarySet& gamma, int n_centers, std::span<const double> radii,
                            double budget_c0, double exponent) {
  if (n_centers < 1 || radii.empty())
    throw Error(ErrorCode::InvalidArgument, "ahlfors_check needs centers and radii");
  for (double r : radii)
    if (!(r > 0.0) || r < gamma.patch_spacing())
      throw Error(ErrorCode::InvalidArgument, "radius below patch resolution");
  AhlforsReport rep;
  rep.exponent = exponent < 0.0 ? gamma.hausdorff_dim() : exponent;
  rep.budget_c0 = budget_c0;
  rep.radii.assign(radii.begin(), radii.end());
  const std::size_t count = gamma.patch_count();
  const std::size_t m = std::min<std::size_t>(count, static_cast<std::size_t>(n_centers));
  for (std::size_t i = 0; i < m; ++i)
    rep.centers.push_back(gamma.patches()[(2 * i + 1) * count / (2 * m)].center);

  rep.c_lower = kInf;
  rep.c_upper = 0.0;
  std::vector<double> mean_log(radii.size(), 0.0);
  for (const Point& x : rep.centers) {
    std::vector<double> row;
    for (std::size_t j = 0; j < radii.size(); ++j) {
      const double ratio =
          surface_measure_ball(gamma, x, radii[j]).value / std::pow(radii[j], rep.exponent);
      row.push_back(ratio);
      rep.c_lower = std::min(rep.c_lower, ratio);
      rep.c_upper = std::max(rep.c_upper, ratio);
      mean_log[j] += std::log(std::max(ratio, 1e-300)) / static_cast<double>(rep.centers.size());
    }
    rep.ratios.push_back(std::move(row));
  }
  if (radii.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double k = static_cast<double>(radii.size());
    for (std::size_t j = 0; j < radii.size(); ++j) {
      const double lx = std::log(radii[j]);
      sx += lx;
      sy += mean_log[j];
      sxx += lx * lx;
      sxy += lx * mean_log[j];
    }
    const double den = k * sxx - sx * sx;
    rep.drift_slope = den != 0.0 ? (k * sxy - sx * sy) / den : 0.0;
    // Monotone in r: sort radii order and check the means move one way.
    std::vector<std::size_t> idx(radii.size());
    for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = j;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return radii[a] < radii[b]; });
    bool up = true, down = true;
    for (std::size_t j = 1; j < idx.size(); ++j) {
      if (mean_log[idx[j]] < mean_log[idx[j - 1]]) up = false;
      if (mean_log[idx[j]] > mean_log[idx[j - 1]]) down = false;
    }
    rep.monotone_drift = up || down;
  }
  rep.pass = rep.c_lower > 0.0 && rep.c_upper / rep.c_lower <= budget_c0 * budget_c0;
  return rep;
}

}  // namespace hmlab

#include "hmlab/whitney.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hmlab/error.hpp"
#include "hmlab/kdtree.hpp"
#include "hmlab/solver.hpp"

namespace hmlab {
namespace {

std::int64_t floor_div2(std::int64_t v) { return v >= 0 ? v / 2 : -((-v + 1) / 2); }

double side_of(int level) { return std::ldexp(1.0, -level); }

Box cube_box(int n, int level, const Lattice& corner, double scale = 1.0) {
  const double s = side_of(level);
  Box b{Point(n), Point(n)};
  for (int a = 0; a < n; ++a) {
    const double c = (static_cast<double>(corner[a]) + 0.5) * s;
    b.lo[a] = c - 0.5 * scale * s;
    b.hi[a] = c + 0.5 * scale * s;
  }
  return b;
}

bool meets_interior(const Box& a, const Box& b) {
  for (int i = 0; i < a.dim(); ++i)
    if (!(a.lo[i] < b.hi[i] && a.hi[i] > b.lo[i])) return false;
  return true;
}

double clipped_volume(const Box& a, const Box& b) {
  double v = 1.0;
  for (int i = 0; i < a.dim(); ++i) v *= std::max(0.0, std::min(a.hi[i], b.hi[i]) - std::max(a.lo[i], b.lo[i]));
  return v;
}

double bump(double t) {
  if (std::abs(t) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - t * t));
}

}  // namespace

Box WhitneyCube::box() const {
  Box b{center, center};
  for (int a = 0; a < center.dim(); ++a) {
    b.lo[a] -= 0.5 * side;
    b.hi[a] += 0.5 * side;
  }
  return b;
}

WhitneyDecomposition::WhitneyDecomposition(const BoundarySet& gamma, const Box& box, int level_min,
                                           int level_max)
    : gamma_(&gamma), box_(box), level_min_(level_min), level_max_(level_max) {
  if (level_min > level_max) throw Error(ErrorCode::InvalidArgument, "empty Whitney level window");
  if (box.dim() != gamma.ambient_dim()) throw Error(ErrorCode::InvalidArgument, "box dimension differs from Γ");
  for (int a = 0; a < box.dim(); ++a)
    if (!(box.hi[a] > box.lo[a])) throw Error(ErrorCode::InvalidArgument, "degenerate Whitney box");
}

bool WhitneyDecomposition::admissible(int level, const Lattice& corner) const {
  return !gamma_->intersects_box(cube_box(gamma_->ambient_dim(), level, corner, 20.0));
}

bool WhitneyDecomposition::is_whitney(int level, const Lattice& corner) const {
  if (level < level_min_ || level > level_max_) return false;
  const int n = gamma_->ambient_dim();
  if (!meets_interior(cube_box(n, level, corner), box_)) return false;
  if (!admissible(level, corner)) return false;
  if (level == level_min_) return true;
  Lattice parent{};
  for (int a = 0; a < n; ++a) parent[a] = floor_div2(corner[a]);
  return !admissible(level - 1, parent);
}

WhitneyCube WhitneyDecomposition::make_cube(int level, const Lattice& corner) const {
  const int n = gamma_->ambient_dim();
  WhitneyCube q;
  q.level = level;
  q.corner = corner;
  q.side = side_of(level);
  const Box b = cube_box(n, level, corner);
  q.center = b.center();
  q.xi = gamma_->patches()[gamma_->nearest_patch(q.center)].center;
  q.delta = gamma_->box_distance(b);
  return q;
}

std::optional<WhitneyCube> WhitneyDecomposition::cube_containing(const Point& x) const {
  if (!box_.contains(x)) return std::nullopt;
  const int n = gamma_->ambient_dim();
  for (int level = level_min_; level <= level_max_; ++level) {
    const double s = side_of(level);
    Lattice corner{};
    for (int a = 0; a < n; ++a) corner[a] = static_cast<std::int64_t>(std::floor(x[a] / s));
    if (admissible(level, corner)) return make_cube(level, corner);
  }
  return std::nullopt;
}

std::vector<WhitneyCube> WhitneyDecomposition::cubes_near(const Point& x) const {
  std::vector<WhitneyCube> out;
  const auto home = cube_containing(x);
  if (!home) return out;
  const int n = gamma_->ambient_dim();
  const int lo = std::max(level_min_, home->level - 4);
  const int hi = std::min(level_max_, home->level + 4);
  for (int level = lo; level <= hi; ++level) {
    const double s = side_of(level);
    Lattice base{};
    for (int a = 0; a < n; ++a) base[a] = static_cast<std::int64_t>(std::floor(x[a] / s - 0.5)) - 1;
    int total = 1;
    for (int a = 0; a < n; ++a) total *= 3;
    for (int k = 0; k < total; ++k) {
      Lattice c = base;
      int rem = k;
      bool inside = true;
      for (int a = 0; a < n; ++a) {
        c[a] += rem % 3;
        rem /= 3;
        const double center = (static_cast<double>(c[a]) + 0.5) * s;
        if (!(std::abs(x[a] - center) < s)) inside = false;
      }
      if (inside && is_whitney(level, c)) out.push_back(make_cube(level, c));
    }
  }
  return out;
}

void WhitneyDecomposition::enumerate_rec(int level, const Lattice& corner, std::size_t max_cubes) {
  const int n = gamma_->ambient_dim();
  const Box b = cube_box(n, level, corner);
  if (!meets_interior(b, box_)) return;
  if (admissible(level, corner)) {
    if (cubes_.size() >= max_cubes)
      throw Error(ErrorCode::InvalidArgument, "Whitney decomposition exceeds the cube budget");
    cubes_.push_back(make_cube(level, corner));
    return;
  }
  if (level == level_max_) {
    collar_volume_ += clipped_volume(b, box_);
    return;
  }
  for (int child = 0; child < (1 << n); ++child) {
    Lattice c{};
    for (int a = 0; a < n; ++a) c[a] = 2 * corner[a] + ((child >> a) & 1);
    enumerate_rec(level + 1, c, max_cubes);
  }
}

void WhitneyDecomposition::enumerate(std::size_t max_cubes) {
  const int n = gamma_->ambient_dim();
  const double s = side_of(level_min_);
  Lattice lo{}, hi{};
  for (int a = 0; a < n; ++a) {
    lo[a] = static_cast<std::int64_t>(std::floor(box_.lo[a] / s));
    hi[a] = static_cast<std::int64_t>(std::ceil(box_.hi[a] / s)) - 1;
  }
  Lattice c = lo;
  while (true) {
    enumerate_rec(level_min_, c, max_cubes);
    int a = 0;
    for (; a < n; ++a) {
      if (++c[a] <= hi[a]) break;
      c[a] = lo[a];
    }
    if (a == n) break;
  }

  // Level-max cubes next to a non-admissible level-max cube border the collar.
  std::set<Lattice> finest;
  for (const WhitneyCube& q : cubes_)
    if (q.level == level_max_) finest.insert(q.corner);
  int total = 1;
  for (int a = 0; a < n; ++a) total *= 3;
  for (WhitneyCube& q : cubes_) {
    if (q.level != level_max_) continue;
    for (int k = 0; k < total && !q.collar_truncated; ++k) {
      Lattice c = q.corner;
      int rem = k;
      for (int a = 0; a < n; ++a) {
        c[a] += rem % 3 - 1;
        rem /= 3;
      }
      if (meets_interior(cube_box(n, level_max_, c), box_) && !admissible(level_max_, c))
        q.collar_truncated = true;
    }
  }
}

void WhitneyDecomposition::build_neighbors() {
  const int n = gamma_->ambient_dim();
  std::vector<Point> centers;
  centers.reserve(cubes_.size());
  for (const WhitneyCube& q : cubes_) centers.push_back(q.center);
  const KdTree tree(centers);
  std::vector<std::set<std::size_t>> sets(cubes_.size());
  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i < cubes_.size(); ++i) {
    hits.clear();
    // Each pair is found from its smaller cube, so the search radius stays local.
    tree.within(cubes_[i].center, std::sqrt(static_cast<double>(n)) * 2.0 * cubes_[i].side, hits);
    for (std::size_t j : hits) {
      if (j == i || cubes_[j].side > cubes_[i].side) continue;
      bool overlap = true;
      for (int a = 0; a < n; ++a)
        if (!(std::abs(cubes_[i].center[a] - cubes_[j].center[a]) < cubes_[i].side + cubes_[j].side))
          overlap = false;
      if (overlap) {
        sets[i].insert(j);
        sets[j].insert(i);
      }
    }
  }
  neighbors_.resize(cubes_.size());
  for (std::size_t i = 0; i < cubes_.size(); ++i) neighbors_[i].assign(sets[i].begin(), sets[i].end());
}

void WhitneyDecomposition::write_csv(std::ostream& os) const {
  const int n = gamma_->ambient_dim();
  os << "level";
  for (int a = 0; a < n; ++a) os << ",corner" << a;
  for (int a = 0; a < n; ++a) os << ",xi" << a;
  os << ",delta,collar_truncated\n";
  os.precision(17);
  for (const WhitneyCube& q : cubes_) {
    os << q.level;
    for (int a = 0; a < n; ++a) os << ',' << q.corner[a];
    for (int a = 0; a < n; ++a) os << ',' << q.xi[a];
    os << ',' << q.delta << ',' << (q.collar_truncated ? 1 : 0) << '\n';
  }
}

WhitneyDecomposition decompose(const BoundarySet& gamma, const Box& box, int level_min, int level_max,
                               std::size_t max_cubes) {
  WhitneyDecomposition w(gamma, box, level_min, level_max);
  w.enumerate(max_cubes);
  w.build_neighbors();
  return w;
}

std::pair<int, int> default_levels(const Box& box, double h) {
  double extent = 0.0;
  for (int a = 0; a < box.dim(); ++a)
    extent = std::max({extent, std::abs(box.lo[a]), std::abs(box.hi[a]), box.hi[a] - box.lo[a]});
  const int level_min = -static_cast<int>(std::ceil(std::log2(extent)));
  const int level_max = static_cast<int>(std::ceil(std::log2(1.0 / h))) + 5;
  return {level_min, level_max};
}

std::vector<PartitionWeight> partition_of_unity(const WhitneyDecomposition& w, const Point& x) {
  std::vector<WhitneyCube> near = w.cubes_near(x);
  if (near.empty()) throw Error(ErrorCode::OutsideCover, "point is in the collar or outside the box");
  std::vector<PartitionWeight> out;
  double total = 0.0;
  for (WhitneyCube& q : near) {
    double phi = 1.0;
    for (int a = 0; a < x.dim(); ++a) phi *= bump((x[a] - q.center[a]) / q.side);
    if (phi > 0.0) {
      out.push_back({std::move(q), phi});
      total += phi;
    }
  }
  for (PartitionWeight& pw : out) pw.phi /= total;
  return out;
}

Extension::Extension(const WhitneyDecomposition& w, std::span<const double> g)
    : w_(&w), g_(g.begin(), g.end()) {
  if (g_.size() != w.gamma().patch_count())
    throw Error(ErrorCode::InvalidArgument, "trace samples do not match the patch count");
  for (double v : g_)
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "trace samples must be finite");
}

double Extension::y(const WhitneyCube& q) const {
  const auto key = std::make_pair(q.level, q.corner);
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  std::vector<std::size_t> hits;
  w_->gamma().patches_in_ball(q.xi, q.delta, hits);
  double num = 0.0, den = 0.0;
  for (std::size_t k : hits) {
    const double mu = w_->gamma().patches()[k].weight;
    num += mu * g_[k];
    den += mu;
  }
  if (hits.empty() || !(den > 0.0)) throw Error(ErrorCode::EmptyBall, "B_Q contains no boundary patch");
  const double v = num / den;
  std::lock_guard lock(mu_);
  cache_.emplace(key, v);
  return v;
}

std::optional<double> Extension::evaluate(const Point& x) const {
  std::vector<WhitneyCube> near = w_->cubes_near(x);
  if (near.empty()) return std::nullopt;
  double num = 0.0, den = 0.0;
  for (const WhitneyCube& q : near) {
    double phi = 1.0;
    for (int a = 0; a < x.dim(); ++a) phi *= bump((x[a] - q.center[a]) / q.side);
    if (phi <= 0.0) continue;
    num += phi * y(q);
    den += phi;
  }
  return num / den;
}

double Extension::operator()(const Point& x) const {
  const auto v = evaluate(x);
  if (!v) throw Error(ErrorCode::OutsideCover, "point is in the collar or outside the box");
  return *v;
}

double extend(const WhitneyDecomposition& w, std::span<const double> g, const Point& x) {
  return Extension(w, g)(x);
}

Field extension_field(const Grid& grid, const Extension& e) {
  Field f = make_field(grid, 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto v = e.evaluate(grid.node(i));
    f.values[i] = v ? *v : std::numeric_limits<double>::quiet_NaN();
  }
  return f;
}

TraceSamples trace(const Field& u, const BoundarySet& gamma, std::span<const double> radii,
                   std::span<const std::size_t> patches) {
  for (int a = 0; a < u.info.n; ++a)
    if (u.info.mirror[a]) throw Error(ErrorCode::InvalidArgument, "trace needs an unmirrored field");
  const double h = u.info.h;
  std::vector<double> schedule(radii.begin(), radii.end());
  if (schedule.empty()) schedule = {8.0 * h, 4.0 * h, 2.0 * h};
  std::sort(schedule.begin(), schedule.end());
  std::vector<std::size_t> which(patches.begin(), patches.end());
  if (which.empty())
    for (std::size_t k = 0; k < gamma.patch_count(); ++k) which.push_back(k);

  auto average = [&](const Point& c, double r, std::size_t& count) {
    double sum = 0.0;
    count = 0;
    u.info.for_each_in_ball(c, r, [&](std::size_t idx) {
      const double v = u.values[idx];
      if (std::isfinite(v)) {
        sum += v;
        ++count;
      }
    });
    return count ? sum / static_cast<double>(count) : 0.0;
  };

  TraceSamples out;
  out.patches = which;
  for (std::size_t k : which) {
    const Point& c = gamma.patches()[k].center;
    bool done = false;
    for (double r : schedule) {
      std::size_t count = 0;
      const double v = average(c, r, count);
      if (count < 8) continue;
      std::size_t count2 = 0;
      const double v2 = average(c, 2.0 * r, count2);
      out.values.push_back(v);
      out.limit_error.push_back(std::abs(v - v2));
      out.radius.push_back(r);
      done = true;
      break;
    }
    if (!done)
      throw Error(ErrorCode::UnderResolved, "trace ball around patch " + std::to_string(k) +
                                                " covers fewer than 8 nodes");
  }
  return out;
}

double h_half_seminorm(std::span<const double> g, const BoundarySet& gamma) {
  const auto patches = gamma.patches();
  if (g.size() != patches.size())
    throw Error(ErrorCode::InvalidArgument, "trace samples do not match the patch count");
  if (patches.size() < 2) throw Error(ErrorCode::InvalidArgument, "seminorm needs at least 2 patches");
  const double expo = -(gamma.hausdorff_dim() + 1.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < patches.size(); ++i) {
    for (std::size_t j = i + 1; j < patches.size(); ++j) {
      const double diff = g[i] - g[j];
      if (diff == 0.0) continue;
      const double r = distance(patches[i].center, patches[j].center);
      if (r <= std::max(patches[i].radius, patches[j].radius)) continue;
      sum += patches[i].weight * patches[j].weight * diff * diff * std::pow(r, expo);
    }
  }
  return 2.0 * sum;
}

double w_seminorm(const Field& u, const LinearSystem& sys) { return sys.quadratic_form(u.values, true); }

}  // namespace hmlab

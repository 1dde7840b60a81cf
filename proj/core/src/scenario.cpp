#include "hmlab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "hmlab/error.hpp"
#include "json_util.hpp"

namespace hmlab {

using detail::json;
using detail::Reader;

namespace {

struct KindName {
  TaskKind kind;
  const char* name;
  const char* command;
};

constexpr KindName kKinds[] = {
    {TaskKind::Solve, "solve", "solve"},
    {TaskKind::Green, "green", "green"},
    {TaskKind::HarmonicMeasure, "hm", "hm"},
    {TaskKind::MonteCarlo, "mc", "mc"},
    {TaskKind::Whitney, "whitney", "whitney"},
    {TaskKind::GeomCheck, "geom-check", "geom-check"},
    {TaskKind::VerifyMeasure, "verify-measure", "verify"},
    {TaskKind::VerifyPoincare, "verify-poincare", "verify"},
    {TaskKind::VerifyTrace, "verify-trace", "verify"},
    {TaskKind::VerifyInterior, "verify-interior", "verify"},
    {TaskKind::VerifyBoundary, "verify-boundary", "verify"},
    {TaskKind::VerifyGreen, "verify-green", "verify"},
    {TaskKind::VerifyHarmonicMeasure, "verify-hm", "verify"},
    {TaskKind::VerifyComparison, "verify-comparison", "verify"},
    {TaskKind::VerifyRepresentation, "verify-representation", "verify"},
};

}  // namespace

std::string to_string(TaskKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k.name;
  return "unknown";
}

std::optional<TaskKind> parse_task_kind(const std::string& name) {
  for (const auto& k : kKinds)
    if (name == k.name) return k.kind;
  return std::nullopt;
}

const std::vector<std::string>& known_tasks() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& k : kKinds) v.push_back(k.name);
    return v;
  }();
  return names;
}

std::string command_of(TaskKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k.command;
  return "unknown";
}

bool is_verify(TaskKind kind) { return command_of(kind) == "verify"; }

Partition PartitionSpec::build(const BoundarySet& gamma) const {
  if (shells) return partition_by_shells(gamma, x0, edges, names, rest);
  return partition_by_boxes(gamma, boxes, rest);
}

std::vector<double> DataSpec::sample(const BoundarySet& gamma, std::uint64_t seed) const {
  switch (kind) {
    case Kind::Constant: return std::vector<double>(gamma.patch_count(), value);
    case Kind::Lipschitz: return lipschitz_trace(gamma, trace, seed);
    case Kind::Indicator: {
      std::vector<bool> in(gamma.patch_count());
      for (std::size_t p = 0; p < in.size(); ++p) in[p] = box.contains(gamma.patches()[p].center);
      if (width > 0.0) return mollified_indicator(gamma, in, width);
      std::vector<double> g(in.size());
      for (std::size_t p = 0; p < in.size(); ++p) g[p] = in[p] ? 1.0 : 0.0;
      return g;
    }
  }
  return {};
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

struct GridDefaults {
  GridSpec grid;
  double h = 0.0;
  std::vector<double> ladder;
  CoefficientSpec coeffs;
  OuterSpec outer;
  SolveOptions solve;
};

bool divides(double side, double h) {
  const double q = side / h;
  return std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, q);
}

void check_divides(Reader& r, const std::string& key, const Box& box, double h) {
  if (box.dim() == 0 || !(h > 0.0)) return;
  for (int a = 0; a < box.dim(); ++a)
    if (!divides(box.hi[a] - box.lo[a], h)) {
      std::ostringstream ss;
      ss << "h = " << h << " does not divide the box side along axis " << a;
      r.problem(key, ss.str());
      return;
    }
}

void check_spacings(Reader& r, const std::string& key, const GridDefaults& g) {
  std::set<double> hs(g.ladder.begin(), g.ladder.end());
  hs.insert(g.h);
  const std::size_t before = r.problems().size();
  for (double h : hs) {
    check_divides(r, key, g.grid.box, h);
    if (r.problems().size() != before) return;
  }
}

void read_grid(Reader& parent, const std::string& key, int n, GridDefaults& g, bool required,
               bool allow_outer = false) {
  if (!parent.has(key)) {
    if (required) parent.problem(key, "missing");
    return;
  }
  Reader r = parent.child(key);
  if (!r.ok()) return;
  if (allow_outer) r.reject_unknown({"box", "h", "ladder", "kappa", "mirror", "outer"});
  else r.reject_unknown({"box", "h", "ladder", "kappa", "mirror"});
  if (r.has("box") || required) {
    const Box b = r.box("box", n, true);
    if (b.dim() == n) g.grid.box = b;
  }
  const bool has_h = r.has("h"), has_ladder = r.has("ladder");
  if (has_h) g.h = r.number("h", g.h);
  if (has_ladder) g.ladder = r.numbers("ladder");
  if (has_ladder && !has_h && !g.ladder.empty()) g.h = g.ladder.front();
  if (has_h && !has_ladder) g.ladder = {g.h, 0.5 * g.h};
  if (required && !has_h && !has_ladder) r.problem("h", "missing");
  if (!(g.h > 0.0) && (has_h || required)) r.problem("h", "must be > 0");
  if (has_ladder) {
    if (g.ladder.empty()) r.problem("ladder", "must not be empty");
    for (std::size_t i = 0; i < g.ladder.size(); ++i) {
      if (!(g.ladder[i] > 0.0)) r.problem("ladder", "entries must be > 0");
      if (i > 0 && !(g.ladder[i] < g.ladder[i - 1])) r.problem("ladder", "entries must decrease");
    }
  }
  g.grid.kappa = r.number("kappa", g.grid.kappa);
  if (!(g.grid.kappa > 0.0)) r.problem("kappa", "must be > 0");
  if (const json* m = r.get("mirror")) {
    if (!m->is_array() || static_cast<int>(m->size()) != n) {
      r.problem("mirror", "expected " + std::to_string(n) + " booleans");
    } else {
      for (int a = 0; a < n; ++a) {
        if (!(*m)[a].is_boolean()) {
          r.problem("mirror", "expected booleans");
          break;
        }
        g.grid.mirror[a] = (*m)[a].get<bool>();
      }
    }
  }
}

void read_coefficients(Reader& parent, const std::string& key, CoefficientSpec& c) {
  if (!parent.has(key)) return;
  Reader r = parent.child(key);
  if (!r.ok()) return;
  r.reject_unknown({"kind", "weighted", "alpha", "amplitude"});
  if (r.has("kind")) {
    try {
      c.kind = parse_coefficient_kind(r.string("kind", "identity"));
    } catch (const Error&) {
      r.problem("kind", "unknown coefficient kind (known: identity, delta-power, diagonal_of_delta, smoothed_identity)");
    }
  }
  c.weighted = r.boolean("weighted", c.weighted);
  c.alpha = r.number("alpha", c.alpha);
  c.amplitude = r.number("amplitude", c.amplitude);
  if (!(c.alpha > 0.0)) r.problem("alpha", "must be > 0");
  if (!(c.amplitude >= 0.0 && c.amplitude < 1.0)) r.problem("amplitude", "must lie in [0, 1)");
}

void read_outer(Reader& parent, const std::string& key, OuterSpec& o) {
  if (!parent.has(key)) return;
  Reader r = parent.child(key);
  if (!r.ok()) return;
  r.reject_unknown({"kind", "nested_h", "nested_scale"});
  if (r.has("kind")) {
    try {
      o.kind = parse_outer_kind(r.string("kind", "extension"));
    } catch (const Error&) {
      r.problem("kind", "unknown outer condition (known: extension, zero, nested)");
    }
  }
  o.nested_h = r.number("nested_h", o.nested_h);
  o.nested_scale = r.number("nested_scale", o.nested_scale);
  if (!(o.nested_h > 0.0)) r.problem("nested_h", "must be > 0");
  if (!(o.nested_scale > 1.0)) r.problem("nested_scale", "must be > 1");
}

void read_solver(Reader& parent, const std::string& key, SolveOptions& s) {
  if (!parent.has(key)) return;
  Reader r = parent.child(key);
  if (!r.ok()) return;
  r.reject_unknown({"tol", "max_iter"});
  s.tol = r.number("tol", s.tol);
  s.max_iter = r.integer("max_iter", s.max_iter);
  if (!(s.tol > 0.0 && s.tol < 1.0)) r.problem("tol", "must lie in (0, 1)");
}

std::pair<double, double> read_range(Reader& r, const std::string& key, std::pair<double, double> fallback) {
  if (!r.has(key)) return fallback;
  const auto v = r.numbers(key);
  if (v.size() != 2 || !(v[0] < v[1])) {
    r.problem(key, "expected [lo, hi] with lo < hi");
    return fallback;
  }
  return {v[0], v[1]};
}

void read_partition(Reader& parent, const std::string& key, int n, PartitionSpec& p, bool required) {
  if (!parent.has(key)) {
    if (required) parent.problem(key, "missing");
    return;
  }
  Reader r = parent.child(key);
  if (!r.ok()) return;
  r.reject_unknown({"boxes", "shells", "rest"});
  p.rest = r.string("rest", "");
  if (r.has("shells")) {
    Reader s = r.child("shells");
    if (!s.ok()) return;
    s.reject_unknown({"x0", "edges", "names"});
    p.shells = true;
    p.x0 = s.point("x0", n, true);
    p.edges = s.numbers("edges");
    if (const json* names = s.get("names")) {
      if (names->is_array())
        for (const auto& x : *names)
          if (x.is_string()) p.names.push_back(x.get<std::string>());
    }
    if (p.edges.size() < 2) s.problem("edges", "need at least two edges");
    for (std::size_t i = 1; i < p.edges.size(); ++i)
      if (!(p.edges[i] > p.edges[i - 1])) s.problem("edges", "must increase");
    if (p.edges.size() >= 2 && p.names.size() != p.edges.size() - 1)
      s.problem("names", "need one name per shell");
  } else if (const json* boxes = r.get("boxes")) {
    if (!boxes->is_array() || boxes->empty()) {
      r.problem("boxes", "expected a non-empty array of {\"name\", \"box\"}");
      return;
    }
    for (std::size_t k = 0; k < boxes->size(); ++k) {
      Reader b((*boxes)[k], r.at("boxes[" + std::to_string(k) + "]"), r.problems());
      if (!b.ok()) continue;
      b.reject_unknown({"name", "box"});
      const std::string name = b.required_string("name");
      const Box box = b.box("box", n, true);
      p.boxes.emplace_back(name, box);
    }
  } else {
    r.problem("boxes", "partition needs \"boxes\" or \"shells\"");
  }
  std::set<std::string> seen;
  for (const auto& name : p.shells ? p.names : [&] {
         std::vector<std::string> v;
         for (const auto& b : p.boxes) v.push_back(b.first);
         return v;
       }()) {
    if (!seen.insert(name).second) r.problem("boxes", "duplicate group name '" + name + "'");
  }
  if (!p.rest.empty() && seen.count(p.rest)) r.problem("rest", "collides with a group name");
}

std::vector<double> positive_list(Reader& r, const std::string& key, bool required) {
  if (!r.has(key)) {
    if (required) r.problem(key, "missing");
    return {};
  }
  auto v = r.numbers(key);
  if (v.empty()) r.problem(key, "must not be empty");
  for (double x : v)
    if (!(x > 0.0)) {
      r.problem(key, "entries must be > 0");
      break;
    }
  return v;
}

void require_positive(Reader& r, const std::string& key, double v) {
  if (!(v > 0.0)) r.problem(key, "must be > 0");
}

bool safe_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) return false;
  return s != "." && s != "..";
}

// Keys every task may carry.
const std::vector<std::string> kCommonKeys = {"task", "name", "grid", "outer", "coefficients", "solver", "seed"};

std::vector<std::string> with_common(std::vector<std::string> keys) {
  keys.insert(keys.end(), kCommonKeys.begin(), kCommonKeys.end());
  return keys;
}

TaskParams read_params(Reader& r, TaskKind kind, int n, const GridDefaults& g) {
  switch (kind) {
    case TaskKind::Solve: {
      r.reject_unknown(with_common({"data", "slice"}));
      SolveTask t;
      if (r.has("data")) {
        Reader d = r.child("data");
        if (d.ok()) {
          d.reject_unknown({"kind", "value", "box", "width", "trace"});
          const std::string k = d.string("kind", "constant");
          if (k == "constant") {
            t.data.kind = DataSpec::Kind::Constant;
            t.data.value = d.number("value", 1.0);
          } else if (k == "indicator") {
            t.data.kind = DataSpec::Kind::Indicator;
            t.data.box = d.box("box", n, true);
            t.data.width = d.number("width", -1.0);
          } else if (k == "lipschitz") {
            t.data.kind = DataSpec::Kind::Lipschitz;
            t.data.trace = static_cast<int>(d.integer("trace", 0));
          } else {
            d.problem("kind", "unknown data kind '" + k + "' (known: constant, indicator, lipschitz)");
          }
        }
      }
      if (r.has("slice")) {
        Reader s = r.child("slice");
        if (s.ok()) {
          s.reject_unknown({"axis", "at"});
          t.slice_axis = static_cast<int>(s.integer("axis", -1));
          if (t.slice_axis < -1 || t.slice_axis >= n) s.problem("axis", "out of range");
          if (s.has("at")) t.slice_at = s.number("at", 0.0);
        }
      }
      return t;
    }
    case TaskKind::Green: {
      r.reject_unknown(with_common({"poles", "probes"}));
      GreenTask t;
      const json* poles = r.get("poles");
      if (!poles || !poles->is_array() || poles->empty()) {
        r.problem("poles", "expected a non-empty array of {\"y\", \"rho\"}");
      } else {
        for (std::size_t k = 0; k < poles->size(); ++k) {
          Reader p((*poles)[k], r.at("poles[" + std::to_string(k) + "]"), r.problems());
          if (!p.ok()) continue;
          p.reject_unknown({"y", "rho"});
          t.poles.push_back(PoleSpec{p.point("y", n, true), p.number("rho", -1.0)});
        }
      }
      t.probes = r.points("probes", n);
      return t;
    }
    case TaskKind::HarmonicMeasure: {
      r.reject_unknown(with_common({"groups", "mollification", "probes"}));
      HmTask t;
      read_partition(r, "groups", n, t.partition, true);
      t.mollification = r.number("mollification", -1.0);
      t.probes = r.points("probes", n);
      if (t.probes.empty()) r.problem("probes", "at least one probe is required");
      return t;
    }
    case TaskKind::MonteCarlo: {
      r.reject_unknown(with_common({"x0", "paths", "groups", "sde", "trajectories", "compare"}));
      McTask t;
      t.x0 = r.point("x0", n, true);
      const long long paths = r.integer("paths", 10'000);
      if (paths < 1) r.problem("paths", "must be >= 1");
      t.paths = static_cast<std::size_t>(std::max(1LL, paths));
      read_partition(r, "groups", n, t.partition, true);
      if (r.has("sde")) {
        Reader s = r.child("sde");
        if (s.ok()) {
          s.reject_unknown({"tau0", "beta", "eps_abs", "max_steps", "escape_radius"});
          t.sde.tau0 = s.number("tau0", t.sde.tau0);
          t.sde.beta = s.number("beta", t.sde.beta);
          t.sde.eps_abs = s.number("eps_abs", t.sde.eps_abs);
          t.sde.max_steps = s.integer("max_steps", t.sde.max_steps);
          t.sde.escape_radius = s.number("escape_radius", t.sde.escape_radius);
          try {
            t.sde.validate();
          } catch (const Error& e) {
            s.problem("beta", e.what());
          }
        }
      }
      const long long traj = r.integer("trajectories", 0);
      if (traj < 0 || traj > 100) r.problem("trajectories", "must lie in [0, 100]");
      t.trajectories = static_cast<std::size_t>(std::clamp(traj, 0LL, 100LL));
      t.compare = r.boolean("compare", false);
      return t;
    }
    case TaskKind::Whitney: {
      r.reject_unknown(with_common({"level_min", "level_max"}));
      WhitneyTask t;
      t.level_min = static_cast<int>(r.integer("level_min", -1));
      t.level_max = static_cast<int>(r.integer("level_max", -1));
      if ((t.level_min < 0) != (t.level_max < 0)) r.problem("level_max", "give both levels or neither");
      if (t.level_min >= 0 && t.level_max < t.level_min) r.problem("level_max", "must be >= level_min");
      return t;
    }
    case TaskKind::GeomCheck: {
      r.reject_unknown(with_common({"centers", "radii", "budget_c0", "corkscrew", "chain"}));
      GeomTask t;
      t.centers = static_cast<int>(r.integer("centers", 16));
      if (t.centers < 1) r.problem("centers", "must be >= 1");
      t.radii = positive_list(r, "radii", true);
      t.budget_c0 = r.number("budget_c0", -1.0);
      if (r.has("corkscrew")) {
        Reader c = r.child("corkscrew");
        if (c.ok()) {
          c.reject_unknown({"bases", "radius"});
          t.corkscrew_bases = c.points("bases", n);
          t.corkscrew_radius = c.number("radius", 1.0);
          require_positive(c, "radius", t.corkscrew_radius);
        }
      }
      if (r.has("chain")) {
        Reader c = r.child("chain");
        if (c.ok()) {
          c.reject_unknown({"x1", "x2", "r", "lambda"});
          t.chain = std::make_pair(c.point("x1", n, true), c.point("x2", n, true));
          t.chain_radius = c.number("r", 1.0);
          t.chain_lambda = c.number("lambda", 4.0);
          require_positive(c, "r", t.chain_radius);
          if (!(t.chain_lambda >= 1.0)) c.problem("lambda", "must be >= 1");
        }
      }
      return t;
    }
    case TaskKind::VerifyMeasure: {
      r.reject_unknown(with_common({"near_centers", "far_centers", "radii", "quadrature_levels", "exponent_tol",
                                    "a2_budget", "reference"}));
      MeasureSweep s;
      s.near_centers = r.points("near_centers", n);
      s.far_centers = r.points("far_centers", n);
      if (s.near_centers.empty() && s.far_centers.empty()) r.problem("near_centers", "need near or far centers");
      s.radii = positive_list(r, "radii", true);
      if (r.has("quadrature_levels")) {
        s.quadrature_levels.clear();
        for (double v : r.numbers("quadrature_levels")) s.quadrature_levels.push_back(static_cast<int>(v));
      }
      s.exponent_tol = r.number("exponent_tol", s.exponent_tol);
      s.a2_budget = r.number("a2_budget", s.a2_budget);
      if (r.has("reference")) {
        Reader f = r.child("reference");
        if (f.ok()) {
          f.reject_unknown({"center", "radius", "measure", "tol"});
          s.reference_center = f.point("center", n, true);
          s.reference_radius = f.required_number("radius");
          s.reference_measure = f.required_number("measure");
          s.reference_tol = f.number("tol", s.reference_tol);
          require_positive(f, "radius", s.reference_radius);
        }
      }
      return s;
    }
    case TaskKind::VerifyPoincare: {
      r.reject_unknown(with_common({"center", "radius", "cutoff", "random_fields", "budget"}));
      PoincareConfig c;
      c.center = r.point("center", n, true);
      c.radius = r.number("radius", c.radius);
      c.cutoff = r.number("cutoff", c.cutoff);
      c.random_fields = static_cast<int>(r.integer("random_fields", c.random_fields));
      c.budget = r.number("budget", c.budget);
      require_positive(r, "radius", c.radius);
      require_positive(r, "cutoff", c.cutoff);
      if (std::any_of(g.grid.mirror.begin(), g.grid.mirror.end(), [](bool m) { return m; }))
        r.problem("grid", "verify-poincare needs an unmirrored grid");
      return c;
    }
    case TaskKind::VerifyTrace: {
      r.reject_unknown(with_common({"traces", "ratio_budget", "halving"}));
      TraceConfig c;
      c.traces = static_cast<int>(r.integer("traces", c.traces));
      if (c.traces < 1) r.problem("traces", "must be >= 1");
      c.ratio_budget = r.number("ratio_budget", c.ratio_budget);
      std::tie(c.halving_lower, c.halving_upper) = read_range(r, "halving", {c.halving_lower, c.halving_upper});
      if (std::any_of(g.grid.mirror.begin(), g.grid.mirror.end(), [](bool m) { return m; }))
        r.problem("grid", "verify-trace needs an unmirrored grid");
      return c;
    }
    case TaskKind::VerifyInterior: {
      r.reject_unknown(with_common({"x0", "shell", "balls", "budget", "oracle_tol"}));
      InteriorConfig c;
      c.x0 = r.point("x0", n, true);
      std::tie(c.shell_lo, c.shell_hi) = read_range(r, "shell", {c.shell_lo, c.shell_hi});
      const json* balls = r.get("balls");
      if (!balls || !balls->is_array() || balls->empty()) {
        r.problem("balls", "expected a non-empty array of {\"center\", \"radius\"}");
      } else {
        for (std::size_t k = 0; k < balls->size(); ++k) {
          Reader b((*balls)[k], r.at("balls[" + std::to_string(k) + "]"), r.problems());
          if (!b.ok()) continue;
          b.reject_unknown({"center", "radius"});
          BallSpec s{b.point("center", n, true), b.required_number("radius")};
          require_positive(b, "radius", s.radius);
          c.balls.push_back(s);
        }
      }
      c.budget = r.number("budget", c.budget);
      c.oracle_tol = r.number("oracle_tol", c.oracle_tol);
      return c;
    }
    case TaskKind::VerifyBoundary: {
      r.reject_unknown(with_common({"x0", "radius", "far", "scales", "budget"}));
      BoundaryRegularityConfig c;
      c.x0 = r.point("x0", n, true);
      c.radius = r.number("radius", c.radius);
      require_positive(r, "radius", c.radius);
      if (r.has("far")) {
        const auto v = r.numbers("far");
        if (v.size() == 1) c.far_lo = v[0];
        else if (v.size() == 2 && v[0] < v[1]) std::tie(c.far_lo, c.far_hi) = std::make_pair(v[0], v[1]);
        else r.problem("far", "expected [lo] or [lo, hi]");
      }
      c.scales = static_cast<int>(r.integer("scales", c.scales));
      if (c.scales < 3) r.problem("scales", "must be >= 3");
      c.budget = r.number("budget", c.budget);
      return c;
    }
    case TaskKind::VerifyGreen: {
      r.reject_unknown(with_common({"pole", "direction", "near_radii", "far_radii", "second_pole", "slope_tol",
                                    "symmetry_budget", "lower_bound_budget", "far"}));
      GreenCheckConfig c;
      c.pole = r.point("pole", n, true);
      c.direction = r.point("direction", n, true);
      c.second_pole = r.point("second_pole", n, true);
      c.near_radii = positive_list(r, "near_radii", true);
      c.far_radii = positive_list(r, "far_radii", true);
      c.slope_tol = r.number("slope_tol", c.slope_tol);
      c.symmetry_budget = r.number("symmetry_budget", c.symmetry_budget);
      c.lower_bound_budget = r.number("lower_bound_budget", c.lower_bound_budget);
      if (c.direction.dim() == n && std::abs(c.direction.norm() - 1.0) > 1e-9)
        r.problem("direction", "must be a unit vector");
      for (double x : c.near_radii)
        if (x > 0.5) {
          r.problem("near_radii", "entries must be <= 1/2 (units of the pole distance)");
          break;
        }
      GridDefaults far = g;
      far.ladder.clear();
      read_grid(r, "far", n, far, false, true);
      if (r.has("far")) {
        Reader f = r.child("far");
        if (f.ok() && f.has("outer")) read_outer(f, "outer", far.outer);
      }
      c.far.grid = far.grid;
      c.far.h = {far.ladder.empty() ? far.h : far.ladder.front()};
      c.far.coeffs = far.coeffs;
      c.far.outer = far.outer;
      c.far.solve = far.solve;
      return c;
    }
    case TaskKind::VerifyHarmonicMeasure: {
      r.reject_unknown(with_common({"x0", "radius", "budget", "oracle_tol", "outer_margin", "near_margin"}));
      HarmonicMeasureCheckConfig c;
      c.x0 = r.point("x0", n, true);
      c.radius = r.number("radius", c.radius);
      require_positive(r, "radius", c.radius);
      c.budget = r.number("budget", c.budget);
      c.oracle_tol = r.number("oracle_tol", c.oracle_tol);
      c.outer_margin = r.number("outer_margin", c.outer_margin);
      c.near_margin = r.number("near_margin", c.near_margin);
      return c;
    }
    case TaskKind::VerifyComparison: {
      r.reject_unknown(with_common({"x0", "radius", "u", "v", "budget", "degenerate_tol"}));
      ComparisonConfig c;
      c.x0 = r.point("x0", n, true);
      c.radius = r.number("radius", c.radius);
      require_positive(r, "radius", c.radius);
      std::tie(c.u_lo, c.u_hi) = read_range(r, "u", {c.u_lo, c.u_hi});
      std::tie(c.v_lo, c.v_hi) = read_range(r, "v", {c.v_lo, c.v_hi});
      if (c.u_hi > c.v_lo && c.v_hi > c.u_lo) r.problem("v", "the shells of u and v must be disjoint");
      c.budget = r.number("budget", c.budget);
      c.degenerate_tol = r.number("degenerate_tol", c.degenerate_tol);
      return c;
    }
    case TaskKind::VerifyRepresentation: {
      r.reject_unknown(with_common({"probes", "bump", "tol"}));
      RepresentationTask t;
      t.probes = r.points("probes", n);
      if (t.probes.empty()) r.problem("probes", "at least one probe is required");
      if (r.has("bump")) {
        Reader b = r.child("bump");
        if (b.ok()) {
          b.reject_unknown({"center", "radius"});
          t.bump_center = b.point("center", n, true);
          t.bump_radius = b.required_number("radius");
          require_positive(b, "radius", t.bump_radius);
        }
      } else {
        r.problem("bump", "missing");
      }
      t.tol = r.number("tol", t.tol);
      if (std::any_of(g.grid.mirror.begin(), g.grid.mirror.end(), [](bool m) { return m; }))
        r.problem("grid", "verify-representation needs an unmirrored grid");
      return t;
    }
  }
  return SolveTask{};
}

std::string read_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoError, "cannot open scenario " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

Scenario parse_scenario_text(const std::string& text, const std::string& base_dir) {
  const json doc = detail::parse_document(text, "scenario");
  std::vector<std::string> problems;
  Reader r(doc, "", problems);
  if (!r.ok()) throw ValidationError(problems);
  r.reject_unknown({"name", "boundary", "grid", "coefficients", "outer", "solver", "seed", "output", "tasks"});

  Scenario s;
  s.source_text = text;
  s.inputs_hash = fnv1a(text);
  s.name = r.string("name", "scenario");
  s.output = r.string("output", s.output);
  const long long seed = r.integer("seed", 1);
  if (seed < 0) r.problem("seed", "must be >= 0");
  s.seed = static_cast<std::uint64_t>(std::max(0LL, seed));

  int n = 0;
  if (!r.has("boundary")) {
    r.problem("boundary", "missing");
  } else if (auto b = detail::boundary_from_json(doc.at("boundary"), "boundary", base_dir, problems)) {
    s.gamma = std::make_shared<const BoundarySet>(std::move(*b));
    n = s.gamma->ambient_dim();
  } else if (doc.at("boundary").is_object() && doc.at("boundary").contains("n") &&
             doc.at("boundary").at("n").is_number_integer()) {
    n = doc.at("boundary").at("n").get<int>();  // keep validating the rest
  }
  if (n < 2 || n > kMaxDim) n = 3;

  GridDefaults base;
  base.grid.box = Box{};
  read_grid(r, "grid", n, base, true);
  read_coefficients(r, "coefficients", base.coeffs);
  read_outer(r, "outer", base.outer);
  read_solver(r, "solver", base.solve);
  check_spacings(r, "grid", base);
  if (s.gamma && base.grid.box.dim() == n && !s.gamma->intersects_box(base.grid.box))
    r.problem("grid", "the boundary set misses the box");

  const json* tasks = r.get("tasks");
  if (!tasks || !tasks->is_array() || tasks->empty()) {
    r.problem("tasks", "expected a non-empty array");
  } else {
    std::set<std::string> names;
    for (std::size_t k = 0; k < tasks->size(); ++k) {
      const std::string path = "tasks[" + std::to_string(k) + "]";
      Reader t((*tasks)[k], path, problems);
      if (!t.ok()) continue;
      const std::string kind_name = t.required_string("task");
      const auto kind = parse_task_kind(kind_name);
      if (!kind) {
        if (!kind_name.empty()) {
          std::string known;
          for (const auto& x : known_tasks()) known += (known.empty() ? "" : ", ") + x;
          t.problem("task", "unknown task '" + kind_name + "' (known tasks: " + known + ")");
        }
        continue;
      }
      Task task;
      task.kind = *kind;
      task.name = t.string("name", kind_name + "-" + std::to_string(k));
      if (!safe_name(task.name)) t.problem("name", "use letters, digits, '-', '_' and '.' only");
      if (!names.insert(task.name).second) t.problem("name", "duplicate task name '" + task.name + "'");
      const long long tseed = t.integer("seed", static_cast<long long>(s.seed));
      task.seed = static_cast<std::uint64_t>(std::max(0LL, tseed));

      GridDefaults g = base;
      read_grid(t, "grid", n, g, false);
      read_coefficients(t, "coefficients", g.coeffs);
      read_outer(t, "outer", g.outer);
      read_solver(t, "solver", g.solve);
      if (t.has("grid")) {
        check_spacings(t, "grid", g);
      }
      task.h = g.h;
      task.ladder.grid = g.grid;
      task.ladder.grid.h = g.h;
      task.ladder.h = g.ladder;
      task.ladder.coeffs = g.coeffs;
      task.ladder.outer = g.outer;
      task.ladder.solve = g.solve;
      task.params = read_params(t, task.kind, n, g);
      if (auto* gc = std::get_if<GreenCheckConfig>(&task.params)) {
        if (gc->far.grid.box.dim() == n) check_divides(t, "far", gc->far.grid.box, gc->far.h.front());
      }
      s.tasks.push_back(std::move(task));
    }
  }
  if (!problems.empty()) throw ValidationError(problems);
  return s;
}

Scenario parse_scenario(const std::string& path) {
  Scenario s = parse_scenario_text(read_text(path), std::filesystem::path(path).parent_path().string());
  s.source_path = path;
  return s;
}

void set_ladder_depth(Scenario& s, int depth) {
  if (depth < 1) throw Error(ErrorCode::InvalidArgument, "ladder depth must be >= 1");
  for (Task& t : s.tasks) {
    const double h0 = t.ladder.h.empty() ? t.h : t.ladder.h.front();
    t.ladder.h.clear();
    for (int i = 0; i < depth; ++i) t.ladder.h.push_back(h0 / std::pow(2.0, i));
  }
}

void set_seed(Scenario& s, std::uint64_t seed) {
  s.seed = seed;
  for (Task& t : s.tasks) t.seed = seed;
}

}  // namespace hmlab

#include "hmlab/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "hmlab/error.hpp"

namespace hmlab {

void SdeConfig::validate() const {
  if (!(beta > 0.0 && beta <= 1.0)) throw Error(ErrorCode::InvalidArgument, "beta must lie in (0, 1]");
  if (!(tau0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau0 must be > 0");
  if (max_steps < 1) throw Error(ErrorCode::InvalidArgument, "max_steps must be >= 1");
  if (box.dim() == 0 && !(escape_radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "escape_radius must be > 0");
}

double SdeConfig::absorption_radius(const BoundarySet& gamma) const {
  return eps_abs > 0.0 ? eps_abs : 2.0 * gamma.patch_spacing();
}

Box SdeConfig::escape_box(int n) const {
  if (box.dim() == n) return box;
  Box b{Point(n), Point(n)};
  for (int i = 0; i < n; ++i) {
    b.lo[i] = -escape_radius;
    b.hi[i] = escape_radius;
  }
  return b;
}

double step_size(const BoundarySet& gamma, const Point& x, const SdeConfig& cfg) {
  const double d = gamma.distance(x);
  return std::min(cfg.tau0, cfg.beta * d * d);
}

Point step(const Point& x, const BoundarySet& gamma, const SdeConfig& cfg, const Point& xi) {
  const double d = gamma.distance(x);
  const double tau = std::min(cfg.tau0, cfg.beta * d * d);
  const Point drift = (gamma.weight_exponent() / d) * gamma.distance_gradient(x);
  return x + tau * drift + std::sqrt(2.0 * tau) * xi;
}

Point step(const Point& x, const BoundarySet& gamma, const SdeConfig& cfg, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Point xi(x.dim());
  for (int i = 0; i < x.dim(); ++i) xi[i] = normal(rng);
  return step(x, gamma, cfg, xi);
}

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct PathResult {
  std::int64_t patch = -1;  // -1 escaped
  std::int64_t steps = 0;
  bool step_limited = false;
};

PathResult simulate(const BoundarySet& gamma, const Point& x0, const SdeConfig& cfg, double eps, const Box& box,
                    std::uint64_t index, std::vector<Point>* trace) {
  std::mt19937_64 rng = path_rng(cfg.seed, index);
  std::normal_distribution<double> normal;
  PathResult r;
  Point x = x0;
  Point xi(x.dim());
  if (trace) trace->push_back(x);
  while (true) {
    if (gamma.distance(x) < eps) {
      r.patch = static_cast<std::int64_t>(gamma.nearest_patch(x));
      return r;
    }
    if (!box.contains(x)) return r;
    if (r.steps >= cfg.max_steps) {
      r.step_limited = true;
      return r;
    }
    for (int i = 0; i < x.dim(); ++i) xi[i] = normal(rng);
    x = step(x, gamma, cfg, xi);
    ++r.steps;
    if (trace) trace->push_back(x);
  }
}

}  // namespace

std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix(splitmix(seed) ^ splitmix(index + 0x632be59bd9b4e019ULL)));
}

std::pair<double, double> wilson_interval(std::uint64_t k, std::uint64_t n, double z) {
  if (n == 0) return {0.5, 0.5};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  return {center, half};
}

PathStats run_paths(const BoundarySet& gamma, const Point& x0, std::size_t n_paths, const SdeConfig& cfg,
                    const Partition& partition, int jobs) {
  cfg.validate();
  if (n_paths < 1) throw Error(ErrorCode::InvalidArgument, "at least one path is required");
  if (partition.group_of_patch.size() != gamma.patch_count())
    throw Error(ErrorCode::PartitionMismatch, "partition does not match the patch count");
  const double eps = cfg.absorption_radius(gamma);
  if (!(gamma.distance(x0) > eps)) throw Error(ErrorCode::InvalidArgument, "start point lies within eps_abs of Γ");
  const Box box = cfg.escape_box(gamma.ambient_dim());

  std::vector<PathResult> results(n_paths);
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n_paths)));
  std::atomic<std::size_t> next{0};
  constexpr std::size_t kChunk = 64;
  auto work = [&] {
    while (true) {
      const std::size_t begin = next.fetch_add(kChunk);
      if (begin >= n_paths) return;
      const std::size_t end = std::min(n_paths, begin + kChunk);
      for (std::size_t i = begin; i < end; ++i) results[i] = simulate(gamma, x0, cfg, eps, box, i, nullptr);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  PathStats s;
  s.paths = n_paths;
  s.group_names = partition.names;
  s.patch_hits.assign(gamma.patch_count(), 0);
  s.group_hits.assign(partition.groups(), 0);
  std::uint64_t steps = 0;
  for (const PathResult& r : results) {
    steps += static_cast<std::uint64_t>(r.steps);
    if (r.patch < 0) {
      ++s.escaped;
      if (r.step_limited) ++s.step_limited;
      continue;
    }
    ++s.absorbed;
    ++s.patch_hits[r.patch];
    const int g = partition.group_of_patch[r.patch];
    if (g >= 0) ++s.group_hits[g];
  }
  const double nn = static_cast<double>(n_paths);
  s.absorbed_fraction = s.absorbed / nn;
  s.escaped_fraction = s.escaped / nn;
  s.mean_steps = steps / nn;
  for (std::uint64_t k : s.group_hits) {
    s.group_probability.push_back(k / nn);
    const auto [c, hw] = wilson_interval(k, n_paths);
    s.wilson_center.push_back(c);
    s.wilson_half_width.push_back(hw);
  }
  return s;
}

std::vector<std::vector<Point>> sample_trajectories(const BoundarySet& gamma, const Point& x0, std::size_t count,
                                                    const SdeConfig& cfg) {
  cfg.validate();
  count = std::min<std::size_t>(count, 100);
  const double eps = cfg.absorption_radius(gamma);
  const Box box = cfg.escape_box(gamma.ambient_dim());
  std::vector<std::vector<Point>> out(count);
  for (std::size_t i = 0; i < count; ++i) simulate(gamma, x0, cfg, eps, box, i, &out[i]);
  return out;
}

McComparison compare(const PathStats& mc, const std::vector<double>& pde, const std::vector<std::string>& groups) {
  if (groups != mc.group_names || pde.size() != groups.size())
    throw Error(ErrorCode::PartitionMismatch, "Monte Carlo and PDE partitions differ");
  McComparison c;
  c.group_names = groups;
  const double nn = static_cast<double>(std::max<std::size_t>(mc.paths, 1));
  double mc_sum = 0.0, pde_sum = 0.0, tv = 0.0, var = 0.0;
  for (std::size_t j = 0; j < groups.size(); ++j) {
    const double p = mc.group_probability[j];
    const double q = pde[j];
    const double sd = std::max(std::sqrt(p * (1.0 - p) / nn), 1.0 / nn);
    c.mc.push_back(p);
    c.pde.push_back(q);
    c.z_score.push_back((p - q) / sd);
    mc_sum += p;
    pde_sum += q;
    tv += std::abs(p - q);
    var += p * (1.0 - p) / nn;
  }
  c.mc_rest = std::max(0.0, 1.0 - mc_sum);
  c.pde_rest = std::max(0.0, 1.0 - pde_sum);
  tv += std::abs(c.mc_rest - c.pde_rest);
  c.total_variation = 0.5 * tv;
  c.statistical_error = std::sqrt(var);
  c.threshold = std::max(0.02, 3.0 * c.statistical_error);
  c.pass = c.total_variation <= c.threshold;
  return c;
}

McComparison compare(const PathStats& mc, const HarmonicMeasureRow& row, const Point& x0) {
  std::vector<double> pde;
  for (std::size_t j = 0; j < row.partition.groups(); ++j) pde.push_back(row.at(static_cast<int>(j), x0));
  return compare(mc, pde, row.partition.names);
}

void write_json(std::ostream& os, const PathStats& s) {
  nlohmann::ordered_json j;
  j["paths"] = s.paths;
  j["absorbed"] = s.absorbed;
  j["escaped"] = s.escaped;
  j["step_limited"] = s.step_limited;
  j["absorbed_fraction"] = s.absorbed_fraction;
  j["escaped_fraction"] = s.escaped_fraction;
  j["mean_steps"] = s.mean_steps;
  auto& groups = j["groups"] = nlohmann::ordered_json::array();
  for (std::size_t g = 0; g < s.group_names.size(); ++g)
    groups.push_back({{"name", s.group_names[g]},
                      {"hits", s.group_hits[g]},
                      {"probability", s.group_probability[g]},
                      {"wilson_center", s.wilson_center[g]},
                      {"wilson_half_width", s.wilson_half_width[g]}});
  j["patch_hits"] = s.patch_hits;
  os << j.dump(2) << '\n';
}

void write_trajectories_csv(std::ostream& os, const std::vector<std::vector<Point>>& paths) {
  os << "path,step";
  const int n = paths.empty() || paths.front().empty() ? 0 : paths.front().front().dim();
  for (int i = 0; i < n; ++i) os << ",x" << i;
  os << '\n';
  for (std::size_t p = 0; p < paths.size(); ++p)
    for (std::size_t k = 0; k < paths[p].size(); ++k) {
      os << p << ',' << k;
      for (int i = 0; i < n; ++i) os << ',' << paths[p][k][i];
      os << '\n';
    }
}

}  // namespace hmlab

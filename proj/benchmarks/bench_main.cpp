#include <benchmark/benchmark.h>

#include "hmlab/montecarlo.hpp"
#include "hmlab/solver.hpp"
#include "hmlab/whitney.hpp"

using namespace hmlab;

namespace {

const BoundarySet& flat_line() {
  static const BoundarySet g = BoundarySet::flat(3, 1, 64.0, 1.0 / 64);
  return g;
}

GridSpec flat_grid(double h) {
  GridSpec s;
  s.box = Box{Point{0.0, 0.0, 0.0}, Point{4.0, 4.0, 4.0}};
  s.h = h;
  s.mirror = {true, true, true, false};
  return s;
}

void BM_Distance(benchmark::State& state) {
  const BoundarySet& flat = flat_line();
  const BoundarySet cantor = BoundarySet::cantor(2, 10);
  double s = 0.0;
  if (state.range(0) == 0) {
    for (auto _ : state) benchmark::DoNotOptimize(s += flat.distance(Point{0.3, 0.7, 1.1}));
  } else {
    for (auto _ : state) benchmark::DoNotOptimize(s += cantor.distance(Point{0.41, 0.02}));
  }
}
BENCHMARK(BM_Distance)->Arg(0)->Arg(1);

void BM_Assemble(benchmark::State& state) {
  const GridSpec spec = flat_grid(1.0 / state.range(0));
  for (auto _ : state) {
    const Grid grid(flat_line(), spec);
    benchmark::DoNotOptimize(assemble(grid, CoefficientSpec{}));
  }
}
BENCHMARK(BM_Assemble)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_DirichletSolve(benchmark::State& state) {
  const Grid grid(flat_line(), flat_grid(1.0 / state.range(0)));
  const LinearSystem sys = assemble(grid, CoefficientSpec{});
  std::vector<double> g(flat_line().patch_count());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = std::abs(flat_line().patches()[k].center[0]) <= 1.0 ? 1.0 : 0.0;
  SolveOptions so;
  so.tol = 1e-8;
  std::int64_t iters = 0;
  for (auto _ : state) {
    const DirichletResult r = dirichlet_solve(sys, g, {}, so);
    iters = r.stats.iterations;
  }
  state.counters["iterations"] = static_cast<double>(iters);
}
BENCHMARK(BM_DirichletSolve)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_WhitneyDecompose(benchmark::State& state) {
  const BoundarySet cantor = BoundarySet::cantor(2, 8);
  const Box box{Point{-0.5, -1.0}, Point{1.5, 1.0}};
  for (auto _ : state) benchmark::DoNotOptimize(decompose(cantor, box, 1, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_WhitneyDecompose)->Arg(7)->Arg(9)->Unit(benchmark::kMillisecond);

void BM_SdeStep(benchmark::State& state) {
  const BoundarySet& g = flat_line();
  SdeConfig cfg;
  std::mt19937_64 rng = path_rng(1, 0);
  Point x{0.0, 1.0, 0.0};
  for (auto _ : state) {
    x = step(x, g, cfg, rng);
    if (g.distance(x) < 0.05 || g.distance(x) > 10.0) x = Point{0.0, 1.0, 0.0};
  }
  benchmark::DoNotOptimize(x);
}
BENCHMARK(BM_SdeStep);

}  // namespace

BENCHMARK_MAIN();

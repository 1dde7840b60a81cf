#include <gtest/gtest.h>

#include <cmath>

#include "hmlab/error.hpp"
#include "hmlab/verify.hpp"

using namespace hmlab;

TEST(Fit, LogLogSlope) {
  const std::vector<double> x = {1.0, 2.0, 4.0, 8.0};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -1.5));
  const LinearFit f = fit_loglog(x, y);
  EXPECT_NEAR(f.slope, -1.5, 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
  EXPECT_TRUE(f.conclusive);
  EXPECT_FALSE(fit_loglog(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 2.0}).conclusive);
}

TEST(Report, BudgetAndTrend) {
  EstimateReport r;
  Quantity q{"c", {1.0, 1.4}, 0.0, 2.0};
  r.add(q);
  EXPECT_TRUE(r.evaluate());
  r.quantities[0].values = {1.0, 1.6};
  EXPECT_FALSE(r.evaluate());
  EXPECT_EQ(r.failures().size(), 1u);
  r.quantities[0].check_trend = false;
  EXPECT_TRUE(r.evaluate());
  r.quantities[0].values = {1.0, 2.5};
  EXPECT_FALSE(r.evaluate());
  r.quantities[0].gating = false;
  EXPECT_TRUE(r.evaluate());
  EXPECT_EQ((Quantity{"s", {1.0, -1.0}}).trend_ratio(), kInf);
  EXPECT_EQ((Quantity{"z", {0.0, 0.0}}).trend_ratio(), 1.0);
  EXPECT_FALSE(EstimateReport{}.evaluate());
}

namespace {

struct FlatFixture {
  BoundarySet gamma = BoundarySet::flat(3, 1, 16.0, 1.0 / 32);
  GridSpec spec() const {
    GridSpec s;
    s.box = Box{Point{0.0, 0.0, 0.0}, Point{2.0, 2.0, 2.0}};
    s.h = 0.125;
    s.mirror = {true, true, true, false};
    return s;
  }
};

}  // namespace

TEST(Comparison, IdenticalPairGivesExactlyOneAndScalingIsInvariant) {
  FlatFixture f;
  const Grid grid(f.gamma, f.spec());
  const LinearSystem sys = assemble(grid, CoefficientSpec{});
  std::vector<bool> in(f.gamma.patch_count());
  for (std::size_t k = 0; k < in.size(); ++k) in[k] = std::abs(f.gamma.patches()[k].center[0]) > 1.5;
  const auto g = mollified_indicator(f.gamma, in, 2.0 * f.gamma.patch_spacing());
  const Field u = dirichlet_solve(sys, g).field;
  const Point x0 = corkscrew(f.gamma, Point{0.0, 0.0, 0.0}, 0.5).point;
  const auto [lo, hi] = comparison_window(u, u, grid, Point{0.0, 0.0, 0.0}, 0.5, x0);
  EXPECT_EQ(lo, 1.0);
  EXPECT_EQ(hi, 1.0);

  std::vector<bool> in2(f.gamma.patch_count());
  for (std::size_t k = 0; k < in2.size(); ++k) in2[k] = std::abs(f.gamma.patches()[k].center[0]) > 1.0 && !in[k];
  const Field v = dirichlet_solve(sys, mollified_indicator(f.gamma, in2, 2.0 * f.gamma.patch_spacing())).field;
  Field u3 = u;
  for (double& x : u3.values) x *= 3.0;
  const auto w1 = comparison_window(u, v, grid, Point{0.0, 0.0, 0.0}, 0.5, x0);
  const auto w3 = comparison_window(u3, v, grid, Point{0.0, 0.0, 0.0}, 0.5, x0);
  EXPECT_NEAR(w1.first, w3.first, 1e-12);
  EXPECT_NEAR(w1.second, w3.second, 1e-12);

  Field zero = make_field(grid, 0.0);
  try {
    comparison_window(u, zero, grid, Point{0.0, 0.0, 0.0}, 0.5, x0);
    FAIL() << "expected DegeneratePair";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegeneratePair);
  }
}

TEST(BoundaryRegularity, UnderResolvedBall) {
  FlatFixture f;
  BoundaryRegularityConfig c;
  c.ladder.grid = f.spec();
  c.ladder.h = {0.125};
  c.x0 = Point{0.0, 0.0, 0.0};
  c.radius = 0.25;
  c.far_lo = 1.0;
  try {
    check_boundary_regularity(f.gamma, c);
    FAIL() << "expected UnderResolved";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnderResolved);
  }
}

TEST(Poincare, ZeroFieldAndScaling) {
  const auto g = BoundarySet::flat(3, 1, 16.0, 1.0 / 32);
  PoincareConfig c;
  c.ladder.grid.box = Box{Point{-1.0, -1.0, -1.0}, Point{1.0, 1.0, 1.0}};
  c.ladder.h = {0.125};
  c.center = Point{0.0, 0.0, 0.0};
  c.radius = 0.75;
  c.random_fields = 1;
  const EstimateReport r = check_poincare(g, c);
  EXPECT_TRUE(r.pass) << r.failures().front();
  const Quantity* q = r.find("poincare_ratio");
  ASSERT_NE(q, nullptr);
  EXPECT_GT(q->values.front(), 0.0);
}

TEST(Trace, ConstantTraceIsExact) {
  const auto g = BoundarySet::cantor(2, 6);
  TraceConfig c;
  c.box = Box{Point{-0.5, -1.0}, Point{1.5, 1.0}};
  c.h = {1.0 / 64};
  c.traces = 1;
  const EstimateReport r = check_trace_extension(g, c);
  const Quantity* q = r.find("constant_trace_error");
  ASSERT_NE(q, nullptr);
  EXPECT_LE(q->values.front(), 1e-12);
  const Quantity* range = r.find("extension_range_violation");
  ASSERT_NE(range, nullptr);
  EXPECT_LE(range->values.front(), 1e-12);
}

TEST(MaxPrinciple, ShellPartitionCoversPatches) {
  const auto g = BoundarySet::flat(3, 1, 4.0, 1.0 / 8);
  const Partition p = partition_by_shells(g, Point{0.0, 0.0, 0.0}, {0.0, 1.0, 2.0}, {"inner", "outer"});
  ASSERT_EQ(p.groups(), 3u);
  for (int k : p.group_of_patch) EXPECT_GE(k, 0);
}

#include <gtest/gtest.h>

#include <cmath>

#include "hmlab/error.hpp"
#include "hmlab/montecarlo.hpp"

using namespace hmlab;

namespace {

Partition unit_partition(const BoundarySet& g) {
  return partition_by_boxes(g, {{"E", Box{Point{-1.0, -1e9, -1e9}, Point{1.0, 1e9, 1e9}}}}, "rest");
}

}  // namespace

TEST(MonteCarlo, DeterministicAcrossThreadCounts) {
  const auto g = BoundarySet::flat(3, 1, 16.0, 1.0 / 32);
  SdeConfig cfg;
  cfg.seed = 42;
  const Partition p = unit_partition(g);
  const PathStats a = run_paths(g, Point{0.0, 1.0, 0.0}, 400, cfg, p, 1);
  const PathStats b = run_paths(g, Point{0.0, 1.0, 0.0}, 400, cfg, p, 3);
  EXPECT_EQ(a.patch_hits, b.patch_hits);
  EXPECT_EQ(a.group_hits, b.group_hits);
  EXPECT_EQ(a.escaped, b.escaped);
  EXPECT_EQ(a.mean_steps, b.mean_steps);
  cfg.seed = 43;
  const PathStats c = run_paths(g, Point{0.0, 1.0, 0.0}, 400, cfg, p, 1);
  EXPECT_NE(a.patch_hits, c.patch_hits);
}

TEST(MonteCarlo, WilsonInterval) {
  // k = 50, n = 100: centre 0.5, half width z sqrt(n/4 + z²/4) / (n + z²).
  const auto [c, hw] = wilson_interval(50, 100);
  const double z = 1.96;
  EXPECT_NEAR(c, 0.5, 1e-15);
  EXPECT_NEAR(hw, z * std::sqrt(25.0 + z * z / 4.0) / (100.0 + z * z), 1e-15);
  const auto [c0, hw0] = wilson_interval(0, 10);
  EXPECT_GT(c0, 0.0);
  EXPECT_NEAR(c0 - hw0, 0.0, 1e-15);
}

TEST(MonteCarlo, StepFollowsDriftAndNoise) {
  const auto g = BoundarySet::flat(3, 1, 16.0, 1.0 / 32);
  SdeConfig cfg;
  cfg.beta = 0.02;
  const Point x{0.0, 2.0, 0.0};
  const double tau = step_size(g, x, cfg);
  EXPECT_DOUBLE_EQ(tau, 0.02 * 4.0);
  // Zero noise: the drift (d+1-n) ∇δ/δ = -(0, 1/2, 0) moves the point towards Γ.
  const Point y = step(x, g, cfg, Point{0.0, 0.0, 0.0});
  EXPECT_NEAR(y[1], 2.0 - 0.5 * tau, 1e-14);
  EXPECT_NEAR(y[0], 0.0, 1e-14);
}

TEST(MonteCarlo, ConfigValidation) {
  SdeConfig cfg;
  cfg.beta = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.beta = 0.5;
  cfg.tau0 = -1.0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(MonteCarlo, CompareRejectsMismatchedGroups) {
  const auto g = BoundarySet::flat(3, 1, 16.0, 1.0 / 32);
  const PathStats s = run_paths(g, Point{0.0, 1.0, 0.0}, 20, SdeConfig{}, unit_partition(g), 1);
  try {
    compare(s, {0.5, 0.5}, {"E", "other"});
    FAIL() << "expected PartitionMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PartitionMismatch);
  }
  const McComparison ok = compare(s, {0.5, 0.5}, {"E", "rest"});
  EXPECT_EQ(ok.group_names.size(), 2u);
}

TEST(MonteCarlo, TrajectoryDumpIsCapped) {
  const auto g = BoundarySet::flat(3, 1, 16.0, 1.0 / 32);
  SdeConfig cfg;
  cfg.max_steps = 50;
  const auto paths = sample_trajectories(g, Point{0.0, 1.0, 0.0}, 500, cfg);
  EXPECT_EQ(paths.size(), 100u);
}

#include <gtest/gtest.h>

#include <random>

#include "hmlab/error.hpp"
#include "hmlab/whitney.hpp"

using namespace hmlab;

namespace {

double pou_sum(const WhitneyDecomposition& w, const Point& x) {
  double s = 0.0;
  for (const PartitionWeight& pw : partition_of_unity(w, x)) s += pw.phi;
  return s;
}

}  // namespace

TEST(Whitney, PartitionOfUnitySumsToOne) {
  const auto g = BoundarySet::cantor(2, 7);
  const Box box{Point{-0.5, -1.0}, Point{1.5, 1.0}};
  const auto w = decompose(g, box, 1, 9);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(-0.5, 1.5), uy(-1.0, 1.0);
  int tested = 0;
  for (int k = 0; k < 400; ++k) {
    const Point x{ux(rng), uy(rng)};
    if (!w.cube_containing(x)) continue;
    EXPECT_NEAR(pou_sum(w, x), 1.0, 1e-12);
    ++tested;
  }
  EXPECT_GT(tested, 300);
}

TEST(Whitney, PartitionOfUnityFlat3d) {
  const auto g = BoundarySet::flat(3, 1, 8.0, 1.0 / 16);
  const Box box{Point{-2.0, -2.0, -2.0}, Point{2.0, 2.0, 2.0}};
  const auto [lmin, lmax] = default_levels(box, 0.125);
  const auto w = decompose(g, box, lmin, lmax);
  for (double y : {0.3, 0.7, 1.1, 1.9})
    for (double z : {-1.3, 0.2, 0.9}) {
      const Point x{0.37, y, z};
      if (w.cube_containing(x)) {
        EXPECT_NEAR(pou_sum(w, x), 1.0, 1e-12);
      }
    }
  EXPECT_EQ([&] {
    try {
      partition_of_unity(w, Point{0.0, 0.0, 0.0});
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  }(), ErrorCode::OutsideCover);
}

TEST(Whitney, CubesAreAdmissible) {
  const auto g = BoundarySet::cantor(2, 6);
  const auto w = decompose(g, Box{Point{-0.5, -1.0}, Point{1.5, 1.0}}, 1, 8);
  ASSERT_FALSE(w.cubes().empty());
  for (const WhitneyCube& q : w.cubes()) {
    Box b20{q.center, q.center};
    for (int a = 0; a < 2; ++a) {
      b20.lo[a] -= 10.0 * q.side;
      b20.hi[a] += 10.0 * q.side;
    }
    EXPECT_GT(g.box_distance(b20), 0.0);
  }
}

TEST(Whitney, ExtensionOfConstantIsConstant) {
  const auto g = BoundarySet::flat(3, 1, 8.0, 1.0 / 16);
  const Box box{Point{-2.0, -2.0, -2.0}, Point{2.0, 2.0, 2.0}};
  const auto [lmin, lmax] = default_levels(box, 0.125);
  const auto w = decompose(g, box, lmin, lmax);
  const std::vector<double> c(g.patch_count(), 0.75);
  const Extension e(w, c);
  for (const Point& x : {Point{0.1, 1.0, 0.3}, Point{-1.2, 0.4, -1.5}, Point{1.9, -1.9, 1.9}})
    EXPECT_NEAR(e(x), 0.75, 1e-14);
}

TEST(Whitney, ExtensionStaysInDataRange) {
  const auto g = BoundarySet::cantor(2, 7);
  const auto w = decompose(g, Box{Point{-0.5, -1.0}, Point{1.5, 1.0}}, 1, 9);
  std::vector<double> data(g.patch_count());
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (double& v : data) v = u(rng);
  const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
  const Extension e(w, data);
  for (const WhitneyCube& q : w.cubes()) {
    const double v = e(q.center);
    EXPECT_GE(v, *lo - 1e-12);
    EXPECT_LE(v, *hi + 1e-12);
  }
}

TEST(Whitney, EmptyBallRaised) {
  // Zero-mass patches leave every B_Q without mass.
  std::vector<Patch> patches;
  for (int k = 0; k <= 16; ++k) patches.push_back(Patch{Point{k / 16.0, 0.0, 0.0}, 0.0, 1.0 / 32});
  const auto g = BoundarySet::cloud(3, 1.0, patches);
  const auto w = decompose(g, Box{Point{-1.0, -1.0, -1.0}, Point{2.0, 1.0, 1.0}}, 0, 5);
  ASSERT_FALSE(w.cubes().empty());
  const Extension e(w, std::vector<double>(g.patch_count(), 1.0));
  try {
    e.y(w.cubes().front());
    FAIL() << "expected EmptyBall";
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::EmptyBall);
  }
}

TEST(Whitney, HalfSeminormOfConstantIsZero) {
  const auto g = BoundarySet::cantor(2, 6);
  EXPECT_EQ(h_half_seminorm(std::vector<double>(g.patch_count(), 3.0), g), 0.0);
}

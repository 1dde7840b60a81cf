#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hmlab/error.hpp"
#include "hmlab/geometry.hpp"
#include "oracles.hpp"

using namespace hmlab;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no hmlab::Error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Geometry, FlatLineDistanceAndWeight) {
  const auto g = BoundarySet::flat(3, 1, 8.0, 0.125);
  EXPECT_DOUBLE_EQ(g.distance(Point{0.3, 3.0, 4.0}), 5.0);
  EXPECT_DOUBLE_EQ(weight(g, Point{0.0, 0.0, 2.0}), 0.5);
  EXPECT_DOUBLE_EQ(g.weight_exponent(), -1.0);
  EXPECT_EQ(code_of([&] { weight(g, Point{1.0, 0.0, 0.0}); }), ErrorCode::DistanceZero);
}

TEST(Geometry, CantorDistance) {
  const auto g = BoundarySet::cantor(2, 10);
  EXPECT_NEAR(g.hausdorff_dim(), std::log(2.0) / std::log(3.0), 1e-15);
  // The midpoint of the removed middle third is 1/6 away from {1/3, 2/3}.
  EXPECT_NEAR(g.distance(Point{0.5, 0.0}), 1.0 / 6.0, 1e-12);
  EXPECT_NEAR(g.distance(Point{0.0, 0.25}), 0.25, 1e-12);
  EXPECT_NEAR(g.distance(Point{-1.0, 0.0}), 1.0, 1e-12);
}

TEST(Geometry, RejectsCodimensionOne) {
  EXPECT_EQ(code_of([] { BoundarySet::flat(3, 2, 1.0, 0.1); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { BoundarySet::cloud(2, 1.0, {Patch{Point{0.0, 0.0}, 1.0, 0.1}}); }),
            ErrorCode::InvalidArgument);
}

TEST(Geometry, UnitBallMeasureOfLine) {
  const auto g = BoundarySet::flat(3, 1, 16.0, 1.0 / 64);
  const double exact = oracle::line_unit_ball_measure(1.0);
  EXPECT_NEAR(exact, std::numbers::pi * std::numbers::pi, 1e-6);
  EXPECT_NEAR(measure_ball(g, Point{0.0, 0.0, 0.0}, 1.0), exact, 0.01 * exact);
}

TEST(Geometry, SurfaceMeasureOfSegmentBall) {
  const auto g = BoundarySet::flat(3, 1, 8.0, 1.0 / 64);
  const auto m = surface_measure_ball(g, Point{0.0, 0.0, 0.0}, 1.0);
  EXPECT_NEAR(m.value, 2.0, 0.05);
}

TEST(Geometry, FarBallIsNearlyUnweightedVolume) {
  const auto g = BoundarySet::flat(3, 1, 8.0, 1.0 / 16);
  const double r = 0.1;
  const double m = measure_ball(g, Point{0.0, 4.0, 0.0}, r);
  const double flat = 4.0 / 3.0 * std::numbers::pi * r * r * r / 4.0;
  EXPECT_NEAR(m / flat, 1.0, 1e-3);
}

TEST(Geometry, CorkscrewAndChain) {
  const auto g = BoundarySet::flat(3, 1, 16.0, 1.0 / 16);
  const Corkscrew c = corkscrew(g, Point{0.0, 0.0, 0.0}, 1.0);
  EXPECT_GE(c.clearance, c.epsilon * 1.0);
  EXPECT_LE(distance(c.point, Point{0.0, 0.0, 0.0}), 1.0 + 1e-12);
  EXPECT_EQ(code_of([&] { corkscrew(g, Point{0.0, 0.0, 0.0}, 1.0, 2.0); }), ErrorCode::NoCorkscrew);

  const HarnackChain ch = harnack_chain(g, Point{0.0, 0.0, 1.0}, Point{5.0, 0.0, 1.0}, 1.0, 5.0);
  EXPECT_NEAR(ch.tube_clearance, 1.0, 1e-9);
  EXPECT_GE(ch.ball_clearance, 0.0);
  EXPECT_EQ(code_of([&] { harnack_chain(g, Point{0.0, 0.0, 1.0}, Point{5.0, 0.0, 1.0}, 1.0, 5.0, 100.0); }),
            ErrorCode::ChainSearchFailed);
}

TEST(Geometry, AhlforsFlatLine) {
  const auto g = BoundarySet::flat(3, 1, 16.0, 1.0 / 32);
  const std::vector<double> radii = {0.5, 1.0, 2.0};
  const AhlforsReport a = ahlfors_check(g, 8, radii, 4.0);
  EXPECT_TRUE(a.pass);
  // Centres stay at least 2 from the ends of the sampled extent, so no ball is cut off.
  EXPECT_NEAR(a.c_lower, 2.0, 0.1);
  EXPECT_NEAR(a.c_upper, 2.0, 0.1);
}

TEST(Geometry, SmoothedDistanceRoutesAgree) {
  const auto g = BoundarySet::flat(3, 1, 64.0, 1.0 / 32);
  const Point x{0.0, 0.6, 0.8};
  const double closed = smoothed_distance(g, x, 1.0);
  const double quad = smoothed_distance_quadrature(g, x, 1.0);
  EXPECT_NEAR(closed / quad, 1.0, 0.02);
  EXPECT_EQ(code_of([&] { smoothed_distance(g, x, 0.0); }), ErrorCode::InvalidArgument);
}

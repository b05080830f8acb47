#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "geomprob/bodies.hpp"
#include "geomprob/sampling.hpp"

using namespace geomprob;
using std::numbers::pi;

namespace {

// Plain bounding-box hit-or-miss volume, independent of exact_volume.
MomentEstimate box_hit_volume(const ConvexBody& body, std::uint64_t n, Seed seed) {
  const BoundingBox box = bounding_box(body);
  const int d = body.dim();
  const BatchSums s = run_tuples(n, seed, 1, [&](SampleStream& st, std::span<double> out) {
    Point p(d);
    for (int i = 0; i < d; ++i) p[i] = box.lo[i] + st.uniform() * (box.hi[i] - box.lo[i]);
    out[0] = contains(body, p) ? 1.0 : 0.0;
  });
  MomentEstimate e = output_estimate(s, 0, seed);
  e.mean *= box.volume();
  e.std_error *= box.volume();
  return e;
}

Point random_in_box(const BoundingBox& b, SampleStream& s) {
  Point p(b.dim());
  for (int i = 0; i < b.dim(); ++i) p[i] = b.lo[i] + s.uniform() * (b.hi[i] - b.lo[i]);
  return p;
}

}  // namespace

TEST(Contains, Examples) {
  EXPECT_TRUE(contains(make_unit_ball(3), Point(3)));
  EXPECT_FALSE(contains(make_unit_ball(3), Point{1.0 + 1e-6, 0.0, 0.0}));
  EXPECT_TRUE(contains(make_half_ball_cone(4, 0.1, 0.0), Point{-0.05, 0.4, 0.0, 0.0}));
  EXPECT_FALSE(contains(make_half_ball_cone(4, 0.1, 0.0), Point{-0.05, 0.6, 0.0, 0.0}));
  EXPECT_FALSE(contains(make_half_ball_cone(4, 0.1, 0.05), Point{-0.07, 0.0, 0.0, 0.0}));
  EXPECT_THROW(contains(make_unit_ball(3), Point(2)), Error);
}

TEST(Construction, RejectsInvalidBodies) {
  EXPECT_THROW(make_ball(Point(2), -1.0), Error);
  EXPECT_THROW(make_half_ball_cone(3, 0.1, 0.1), Error);
  EXPECT_THROW(make_half_ball_cone(3, 0.0, 0.0), Error);
  EXPECT_THROW(make_polygon({{0, 0}, {1, 0}, {2, 0}}), Error);
  EXPECT_THROW(affine_image(make_cube(2), Matrix(2), Point(2)), Error);
  EXPECT_THROW(Halfspace(Point{1.0, 1.0}, 0.0), Error);
}

TEST(ExactVolume, ClosedForms) {
  EXPECT_NEAR(*exact_volume(make_unit_ball(3)), 4.0 * pi / 3.0, 1e-14);
  EXPECT_NEAR(*exact_volume(make_half_ball(2)), pi / 2.0, 1e-14);
  // the planar cone is a triangle with base 2 and height eps
  for (double eps : {0.05, 0.1, 0.5})
    EXPECT_NEAR(*exact_volume(make_half_ball_cone(2, eps, 0.0)), pi / 2.0 + eps, 1e-14);
  EXPECT_NEAR(*exact_volume(make_polygon({{0, 0}, {2, 0}, {0, 1}})), 1.0, 1e-15);
  Matrix m = Matrix::identity(3);
  m(0, 1) = 0.5;
  m(2, 2) = 3.0;
  EXPECT_NEAR(*exact_volume(affine_image(make_unit_ball(3), m, Point(3))), 4.0 * pi, 1e-12);
  EXPECT_FALSE(exact_volume(intersect_halfspace(make_unit_ball(3), Halfspace(Point{1, 0, 0}, 0.3))));
}

TEST(ExactVolume, HalfBallConeMatchesHitOrMiss) {
  std::uint64_t seed = 100;
  for (int d : {2, 3, 4})
    for (double eps : {0.05, 0.1, 0.3})
      for (double delta : {0.0, eps / 2}) {
        const ConvexBody b = make_half_ball_cone(d, eps, delta);
        const MomentEstimate mc = box_hit_volume(b, 400000, Seed{seed++});
        EXPECT_NEAR(mc.mean, *exact_volume(b), 4.0 * mc.std_error) << d << " " << eps << " " << delta;
      }
}

TEST(HalfBallCone, EqualsHullOfHalfBallAndApex) {
  // every point on a segment from the apex to the half-ball lies in the union,
  // and every cone point is on such a segment by construction
  const int d = 4;
  const ConvexBody l = make_half_ball_cone(d, 0.1, 0.0);
  const ConvexBody half = make_half_ball(d);
  const Point apex = l.as<HalfBallCone>()->apex();
  const BodySampler s(half);
  SampleStream st(Seed{4});
  for (int i = 0; i < 20000; ++i) {
    const Point y = s.draw(st);
    const double lambda = st.uniform();
    ASSERT_TRUE(contains(l, apex + (y - apex) * lambda, 1e-12));
  }
  // a point just outside the cone surface is outside the hull as well
  EXPECT_FALSE(contains(l, Point{-0.05, 0.51, 0, 0}));
}

TEST(IntersectHalfspace, BallHalfIsHalfBall) {
  const ConvexBody cut = intersect_halfspace(make_unit_ball(3), Halfspace(Point{1, 0, 0}, 0.0));
  const ConvexBody half = make_half_ball(3);
  SampleStream st(Seed{8});
  const BoundingBox box{Point{-1, -1, -1}, Point{1, 1, 1}};
  for (int i = 0; i < 10000; ++i) {
    const Point p = random_in_box(box, st);
    ASSERT_EQ(contains(cut, p), contains(half, p));
  }
}

TEST(IntersectHalfspace, TruncatingTheConeTip) {
  const double eps = 0.1, delta = 0.03;
  const ConvexBody cut = intersect_halfspace(make_half_ball_cone(3, eps, 0.0), Halfspace(Point{1, 0, 0}, -eps + delta));
  const ConvexBody k = make_half_ball_cone(3, eps, delta);
  SampleStream st(Seed{9});
  const BoundingBox box = bounding_box(make_half_ball_cone(3, eps, 0.0));
  for (int i = 0; i < 10000; ++i) {
    const Point p = random_in_box(box, st);
    ASSERT_EQ(contains(cut, p), contains(k, p));
  }
}

TEST(IntersectHalfspace, SquareHalf) {
  const ConvexBody half = intersect_halfspace(make_cube(2), Halfspace(Point{1, 0}, 0.5));
  const MomentEstimate v = box_hit_volume(half, 200000, Seed{3});
  EXPECT_NEAR(v.mean, 0.5, 4.0 * v.std_error + 1e-12);
  EXPECT_THROW(intersect_halfspace(make_cube(2), Halfspace(Point{1, 0}, 1.0)), DegenerateError);
}

TEST(AffineImage, MembershipTransportsAndBoxes) {
  Matrix m(3);
  const double v[3][3] = {{1.5, 0.2, 0}, {-0.3, 0.8, 0.1}, {0.4, 0, 1.1}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = v[i][j];
  const Point b{0.3, -1.0, 2.0};
  for (const ConvexBody& base : {make_unit_ball(3), make_half_ball_cone(3, 0.2, 0.05), make_regular_simplex(3)}) {
    const ConvexBody img = affine_image(base, m, b);
    SampleStream st(Seed{12});
    const BoundingBox box = bounding_box(base);
    for (int i = 0; i < 5000; ++i) {
      const Point p = random_in_box(box, st);
      ASSERT_EQ(contains(img, m * p + b, 1e-12), contains(base, p, 1e-12));
    }
  }
  const ConvexBody doubled = affine_image(make_cube(3), 2.0 * Matrix::identity(3), Point(3));
  const BoundingBox bb = bounding_box(doubled);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(bb.lo[i], 0.0, 1e-15);
    EXPECT_NEAR(bb.hi[i], 2.0, 1e-15);
  }
  Matrix flip = Matrix::identity(3);
  flip(0, 0) = -1.0;
  EXPECT_NEAR(*exact_volume(affine_image(make_half_ball(3), flip, Point(3))), 2.0 * pi / 3.0, 1e-14);
}

TEST(BoundingBox, Examples) {
  const BoundingBox ball = bounding_box(make_unit_ball(4));
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(ball.lo[i], -1.0);
    EXPECT_EQ(ball.hi[i], 1.0);
  }
  const BoundingBox hbc = bounding_box(make_half_ball_cone(3, 0.2, 0.0));
  EXPECT_EQ(hbc.lo[0], -0.2);
  EXPECT_EQ(hbc.hi[0], 1.0);
  EXPECT_EQ(hbc.lo[2], -1.0);
}

TEST(CounterexamplePair, ContainmentAndVolumeGap) {
  const auto [k, l] = make_counterexample_pair(4, 0.1, 0.01);
  const BodySampler s(k);
  SampleStream st(Seed{21});
  for (int i = 0; i < 100000; ++i) ASSERT_TRUE(contains(l, s.draw(st)));
  // removed tip: cone of height delta over a (d-1)-disk of radius delta/eps
  const double gap = exact::kappa(3).value() * std::pow(0.1, 3) * 0.01 / 4.0;
  EXPECT_NEAR(*exact_volume(l) - *exact_volume(k), gap, 1e-15);
  EXPECT_NEAR(*exact_volume(make_half_ball_cone(4, 0.1, 0.1 - 1e-9)), exact::kappa(4).value() / 2.0, 1e-8);
  EXPECT_THROW(make_counterexample_pair(4, 0.1, 0.0), Error);
}

TEST(CounterexamplePair, TipVolumeMatchesHitOrMiss) {
  // hit-or-miss restricted to the cone part, where the gap lives
  const double eps = 0.1, delta = 0.05;
  const auto [k, l] = make_counterexample_pair(3, eps, delta);
  const BoundingBox box{Point{-eps, -1, -1}, Point{0, 1, 1}};
  const BatchSums s = run_tuples(1000000, Seed{31}, 1, [&](SampleStream& st, std::span<double> out) {
    const Point p = random_in_box(box, st);
    out[0] = (contains(l, p) && !contains(k, p)) ? box.volume() : 0.0;
  });
  const MomentEstimate e = output_estimate(s, 0, Seed{31});
  EXPECT_NEAR(e.mean, *exact_volume(l) - *exact_volume(k), 4.0 * e.std_error);
}

TEST(Convexity, MidpointsOfSampledPairsStayInside) {
  const std::vector<ConvexBody> bodies{make_half_ball_cone(3, 0.3, 0.1), make_regular_simplex(3),
                                       intersect_halfspace(make_unit_ball(3), Halfspace(Point{0.6, 0.8, 0}, 0.2)),
                                       make_polygon({{0, 0}, {3, 1}, {2, 2}, {-1, 1}})};
  for (const auto& b : bodies) {
    const BodySampler s(b);
    SampleStream st(Seed{5});
    for (int i = 0; i < 100000; ++i) {
      const Point p = s.draw(st), q = s.draw(st);
      ASSERT_TRUE(contains(b, 0.5 * (p + q), 1e-12));
    }
  }
}

TEST(Polygon, CanonicalizesOrderAndDuplicates) {
  const ConvexBody p = make_polygon({{1, 1}, {0, 0}, {1, 0}, {0, 1}, {1, 1 + 1e-12}, {0.5, 0}});
  const auto& v = p.as<Polygon2D>()->vertices;
  ASSERT_EQ(v.size(), 4u);
  EXPECT_EQ(v[0], (Point{0, 0}));
  EXPECT_GT(polygon_area(v), 0.0);
  EXPECT_NEAR(polygon_area(v), 1.0, 1e-15);
}

TEST(Support, MatchesSampledExtremes) {
  const ConvexBody b = make_half_ball_cone(3, 0.4, 0.1);
  const Point dir = normalized(Point{-1.0, 0.3, 0.0});
  const double sup = *support(b, dir);
  const BodySampler s(b);
  SampleStream st(Seed{6});
  double best = -1e9;
  for (int i = 0; i < 200000; ++i) best = std::max(best, dot(dir, s.draw(st)));
  EXPECT_LE(best, sup + 1e-12);
  EXPECT_GT(best, sup - 0.02);
}

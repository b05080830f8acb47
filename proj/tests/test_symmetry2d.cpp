#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "geomprob/symmetry2d.hpp"

using namespace geomprob;
using std::numbers::pi;

namespace {

const std::vector<Point>& verts(const ConvexBody& b) { return b.as<Polygon2D>()->vertices; }

double area(const ConvexBody& b) { return polygon_area(verts(b)); }

bool same_vertices(const ConvexBody& a, const ConvexBody& b, double tol = 1e-9) {
  const auto &va = verts(a), &vb = verts(b);
  if (va.size() != vb.size()) return false;
  for (std::size_t i = 0; i < va.size(); ++i)
    if (norm(va[i] - vb[i]) > tol) return false;
  return true;
}

ConvexBody diamond() { return make_polygon({{1, 0}, {0, 1}, {-1, 0}, {0, -1}}); }

}  // namespace

TEST(ChordProfile, Examples) {
  const ChordProfile sq = chord_profile(make_polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}), 0.0);
  EXPECT_DOUBLE_EQ(sq.u_min(), 0.0);
  EXPECT_DOUBLE_EQ(sq.u_max(), 1.0);
  for (double u : {0.0, 0.3, 1.0}) {
    EXPECT_NEAR(sq.alpha(u), 0.0, 1e-15);
    EXPECT_NEAR(sq.length(u), 1.0, 1e-15);
  }
  const ChordProfile dm = chord_profile(diamond(), 0.0);
  for (double u : {-1.0, -0.4, 0.0, 0.7, 1.0}) EXPECT_NEAR(dm.length(u), 2.0 * (1.0 - std::abs(u)), 1e-15);
  const ChordProfile tri = chord_profile(make_polygon({{0, 0}, {1, 0}, {0, 1}}), 0.0);
  for (double u : {0.0, 0.25, 0.9}) {
    EXPECT_NEAR(tri.alpha(u), 0.0, 1e-15);
    EXPECT_NEAR(tri.length(u), 1.0 - u, 1e-15);
  }
  EXPECT_THROW(tri.length(1.5), Error);
}

TEST(Steiner, SymmetricPolygonIsFixed) {
  const ConvexBody hex = regular_polygon(6);
  EXPECT_TRUE(same_vertices(steiner_symmetrize(hex, 0.0), hex));
  EXPECT_TRUE(same_vertices(steiner_symmetrize(diamond(), pi / 2), diamond()));
}

TEST(Steiner, TriangleAreaPreserved) {
  const ConvexBody tri = make_polygon({{0.2, -0.3}, {2.0, 0.4}, {0.7, 1.9}});
  for (double angle : {0.0, 0.4, 1.3, 2.9}) {
    const ConvexBody s = steiner_symmetrize(tri, angle);
    EXPECT_NEAR(area(s), area(tri), 1e-12 * area(tri));
  }
}

TEST(Steiner, RightTriangleAboutCentroidAxis) {
  // chords are horizontal; their midpoints move onto x = 0 and lengths stay
  const Point g{2.0 / 3.0, 1.0 / 3.0};
  const ConvexBody tri = make_polygon({Point{0, 0} - g, Point{1, 0} - g, Point{1, 1} - g});
  const ConvexBody s = steiner_symmetrize(tri, pi / 2);
  const ChordProfile before = chord_profile(tri, pi / 2), after = chord_profile(s, pi / 2);
  for (double u = before.u_min(); u <= before.u_max(); u += 0.05) {
    EXPECT_NEAR(after.length(u), before.length(u), 1e-12);
    EXPECT_NEAR(after.alpha(u) + 0.5 * after.length(u), 0.0, 1e-12);
  }
  EXPECT_TRUE(same_vertices(s, make_polygon({{-0.5, -1.0 / 3.0}, {0.5, -1.0 / 3.0}, {0.0, 2.0 / 3.0}})));
}

TEST(Shake, RestingPolygonIsFixed) {
  const ConvexBody trap = make_polygon({{0, 0}, {3, 0}, {2, 1}, {1, 1}});
  EXPECT_TRUE(same_vertices(blaschke_shake(trap, 0.0), trap));
}

TEST(Shake, DiamondBecomesTriangle) {
  const ConvexBody t = blaschke_shake(diamond(), -1.0);
  EXPECT_TRUE(same_vertices(t, make_polygon({{-1, -1}, {1, -1}, {0, 1}})));
  EXPECT_NEAR(area(t), 2.0, 1e-15);
}

TEST(Shake, RequiresPolygonAboveLine) { EXPECT_THROW(blaschke_shake(diamond(), 0.0), Error); }

TEST(Operators, PreserveAreaAndConvexity) {
  for (std::uint64_t k = 0; k < 30; ++k) {
    const int m = 3 + static_cast<int>(k * 61 / 29);  // 3 .. 64 vertices
    const ConvexBody p = random_convex_polygon(m, Seed{1000 + k});
    const double a = area(p);
    const double angle = 0.37 * static_cast<double>(k);
    const ConvexBody s = steiner_symmetrize(p, angle);
    EXPECT_NEAR(area(s), a, 1e-12 * a) << m;
    EXPECT_TRUE(is_convex_polygon(verts(s)));
    double lowest = HUGE_VAL;
    for (const auto& v : verts(p)) lowest = std::min(lowest, v[1]);
    const ConvexBody sh = blaschke_shake(p, lowest);
    EXPECT_NEAR(area(sh), a, 1e-12 * a) << m;
    EXPECT_TRUE(is_convex_polygon(verts(sh)));
  }
}

TEST(Operators, ShakingIsIdempotent) {
  for (std::uint64_t k = 0; k < 20; ++k) {
    const ConvexBody p = random_symmetric_polygon(6, Seed{2000 + k});
    const ConvexBody once = blaschke_shake(p, 0.0);
    EXPECT_TRUE(same_vertices(blaschke_shake(once, 0.0), once));
  }
}

TEST(Helpers, ClipAndDistance) {
  const std::vector<Point> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const auto half = clip_polygon(sq, Halfspace(Point{1, 0}, 0.5));
  EXPECT_NEAR(polygon_area(half), 0.5, 1e-15);
  EXPECT_NEAR(segment_distance(Point{0.5, 2.0}, Point{0, 0}, Point{1, 0}), 2.0, 1e-15);
  EXPECT_NEAR(segment_distance(Point{2.0, 0.0}, Point{0, 0}, Point{1, 0}), 1.0, 1e-15);
}

TEST(Frame, MovesBoundaryPointToOrigin) {
  const ConvexBody p = make_polygon({{0, 0}, {2, 0}, {3, 2}, {0, 1}});
  const ConvexBody f = frame_at_boundary_point(p, Point{2.5, 1.0});
  EXPECT_NEAR(area(f), area(p), 1e-12);
  for (const auto& v : verts(f)) EXPECT_GE(v[1], 0.0);
  EXPECT_THROW(frame_at_boundary_point(p, Point{1.0, 0.5}), Error);
  // at a vertex the bisector line still supports the polygon
  const ConvexBody at_vertex = frame_at_boundary_point(p, Point{2.0, 0.0});
  for (const auto& v : verts(at_vertex)) EXPECT_GE(v[1], 0.0);
}

TEST(PinnedRatio, PairedMatchesDirect) {
  const ConvexBody p = random_symmetric_polygon(5, Seed{7});
  const PairedRatios r = paired_pinned_ratios(p, ChordOp::kShake, 0.0, Point(2), Point(2), 400000, Seed{8});
  const MomentEstimate direct = pinned_ratio_estimate(blaschke_shake(p, 0.0), Point(2), 400000, Seed{9});
  EXPECT_NEAR(r.after.mean, direct.mean, 4.0 * std::hypot(r.after.std_error, direct.std_error));
  EXPECT_LE(r.difference.mean, 4.0 * r.difference.std_error);
}

TEST(Pipeline, HalfDiskHitsTheBound) {
  const PlaneReport r = plane_bound_pipeline(half_disk_polygon(64), Point(2), 1000000, Seed{10});
  EXPECT_NEAR(r.r0.mean, 8.0 / (9.0 * pi * pi), 4.0 * r.r0.std_error);
  EXPECT_TRUE(r.pass());
}

TEST(Pipeline, SquareBottomMidpointIsAbove) {
  const ConvexBody sq = make_polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const PlaneReport r = plane_bound_pipeline(sq, Point{0.5, 0.0}, 1000000, Seed{11});
  EXPECT_GE((r.r0.mean - r.bound) / r.r0.std_error, 3.0);
  EXPECT_TRUE(r.pass());
}

TEST(Pipeline, RandomPolygonsStayAboveBound) {
  for (std::uint64_t k = 0; k < 3; ++k) {
    const ConvexBody p = random_convex_polygon(10, Seed{300 + k});
    const PlaneReport r = plane_bound_pipeline(p, verts(p)[0] * 0.5 + verts(p)[1] * 0.5, 200000, Seed{400 + k});
    EXPECT_GE(r.r0.mean, r.bound - 3.0 * r.r0.std_error);
    EXPECT_TRUE(r.pass());
  }
}

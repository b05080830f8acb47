#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "geomprob/estimators.hpp"

using namespace geomprob;
using std::numbers::pi;

namespace {

constexpr std::uint64_t kN = 1000000;

ConvexBody segment() { return make_box(Point{0.0}, Point{1.0}); }

double factorial(int d) { return std::tgamma(d + 1.0); }

void expect_within(const MomentEstimate& e, double expected, double sigmas = 4.0) {
  EXPECT_NEAR(e.mean, expected, sigmas * e.std_error) << "stderr " << e.std_error;
}

}  // namespace

TEST(SimplexVolume, Examples) {
  for (int d = 1; d <= 8; ++d) {
    std::vector<Point> pts{Point(d)};
    for (int i = 0; i < d; ++i) pts.push_back(Point::unit(d, i));
    EXPECT_NEAR(simplex_volume(pts), 1.0 / factorial(d), 1e-15);
  }
  const std::vector<Point> tri{{0, 0}, {1, 0}, {0, 2}};
  EXPECT_DOUBLE_EQ(simplex_volume(tri), 1.0);
  const std::vector<Point> rep{{0, 0}, {1, 0}, {1, 0}};
  EXPECT_EQ(simplex_volume(rep), 0.0);
  const std::vector<Point> bad{{0, 0}, {1, 0}};
  EXPECT_THROW(simplex_volume(bad), Error);
}

TEST(MomentEstimate, DiskAgainstClosedForm) {
  expect_within(moment_estimate(make_unit_ball(2), 1, kN, Seed{1}), exact::ball_simplex_moment(2, 1).value());
}

TEST(MomentEstimate, TriangleRatioIsOneTwelfth) {
  const ConvexBody tri = make_polygon({{0, 0}, {3, 0}, {1, 2}});
  const MomentEstimate e = moment_estimate(tri, 1, kN, Seed{2});
  const double area = 3.0;
  EXPECT_NEAR(e.mean / area, 1.0 / 12.0, 4.0 * e.std_error / area);
}

TEST(MomentEstimate, Segment) { expect_within(moment_estimate(segment(), 1, kN, Seed{3}), 1.0 / 3.0); }

TEST(MomentEstimate, StderrScaling) {
  const double a = moment_estimate(make_unit_ball(3), 1, 250000, Seed{4}).std_error;
  const double b = moment_estimate(make_unit_ball(3), 1, 1000000, Seed{4}).std_error;
  EXPECT_NEAR(a / b, 2.0, 0.6);
}

TEST(PinnedMoment, Examples) {
  expect_within(pinned_moment_estimate(make_unit_ball(2), Point(2), 1, kN, Seed{5}), 4.0 / (9.0 * pi));
  expect_within(pinned_moment_estimate(make_half_ball(2), Point(2), 1, kN, Seed{6}), 4.0 / (9.0 * pi));
  expect_within(pinned_moment_estimate(segment(), Point{0.0}, 1, kN, Seed{7}), 0.5);
  // the pinned point need not lie in the body
  expect_within(pinned_moment_estimate(segment(), Point{-1.0}, 1, kN, Seed{8}), 1.5);
}

TEST(PairedMoments, DifferenceIsConsistent) {
  const PairedMoments m = paired_moment_estimate(make_half_ball(3), Point(3), 1, 200000, Seed{9});
  EXPECT_NEAR(m.difference.mean, m.full.mean - m.pinned.mean, 1e-15);
  EXPECT_LT(m.difference.std_error, combined_stderr(m.full, m.pinned) * 1.5);
}

TEST(Covariance, SquareAndBall) {
  const CovarianceEstimate sq = covariance_estimate(make_cube(2), kN, Seed{10});
  EXPECT_LT((sq.matrix - (1.0 / 12.0) * Matrix::identity(2)).max_abs(), 4.0 * sq.stderr_scale);
  for (int d : {2, 3, 5}) {
    const CovarianceEstimate b = covariance_estimate(make_unit_ball(d), kN, Seed{11});
    EXPECT_LT((b.matrix - (1.0 / (d + 2.0)) * Matrix::identity(d)).max_abs(), 4.0 * b.stderr_scale) << d;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) EXPECT_EQ(b.matrix(i, j), b.matrix(j, i));
    EXPECT_GT(symmetric_eigen(b.matrix).values[0], -1e-9);
  }
}

TEST(Covariance, TranslationInvariance) {
  const ConvexBody b = make_half_ball_cone(3, 0.3, 0.0);
  const Point shift{2.0, -1.0, 0.5};
  const ConvexBody moved = affine_image(b, Matrix::identity(3), shift);
  const CovarianceEstimate c0 = covariance_estimate(b, kN, Seed{12});
  const CovarianceEstimate c1 = covariance_estimate(moved, kN, Seed{13});
  EXPECT_LT((c0.matrix - c1.matrix).max_abs(), 4.0 * std::hypot(c0.stderr_scale, c1.stderr_scale));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(c1.centroid[i] - c0.centroid[i], shift[i], 0.01);
}

TEST(DetCov, Examples) {
  expect_within(det_cov_estimate(make_cube(2), kN, Seed{14}), 1.0 / 144.0);
  expect_within(det_cov_estimate(make_unit_ball(3), kN, Seed{15}), 0.008);
  const MomentEstimate small = det_cov_estimate(make_unit_ball(2), kN, Seed{16});
  const MomentEstimate big = det_cov_estimate(make_ball(Point(2), 2.0), kN, Seed{16});
  // same draws scaled by 2: exact factor 2^4
  EXPECT_NEAR(big.mean / small.mean, 16.0, 1e-9);
}

TEST(DetCov, SimplexVolumeIdentityOnHalfDisk) {
  const ConvexBody b = make_half_ball(2);
  const MomentEstimate det = det_cov_estimate(b, kN, Seed{17});
  const MomentEstimate v2 = moment_estimate(b, 2, kN, Seed{18});
  const double scale = 2.0 / 3.0;  // d!/(d+1)
  EXPECT_NEAR(det.mean, scale * v2.mean, 4.0 * std::hypot(det.std_error, scale * v2.std_error));
}

TEST(DetCov, NonCenteredSecondMomentIdentity) {
  // det(E Y Y^T) = (1/d!) E det[Y_1..Y_d]^2 for a body away from the origin
  for (int d : {2, 3}) {
    Point c(d);
    c[0] = 1.5;
    const ConvexBody body = make_ball(c, 1.0);
    const BodySampler sampler(body);
    const int m = d * d;
    const BatchSums sums = run_tuples(kN, Seed{19}, m + 1, [&](SampleStream& s, std::span<double> out) {
      Point ys[kMaxDim];
      Matrix y(d);
      for (int i = 0; i < d; ++i) {
        ys[i] = sampler.draw(s);
        for (int r = 0; r < d; ++r) y(r, i) = ys[i][r];
      }
      for (int r = 0; r < d; ++r)
        for (int q = 0; q < d; ++q) out[static_cast<std::size_t>(r * d + q)] = ys[0][r] * ys[0][q];
      const double det = determinant(y);
      out[static_cast<std::size_t>(m)] = det * det;
    });
    const MomentEstimate lhs = jackknife_estimate(
        sums,
        [&](std::span<const double> mean) {
          Matrix a(d);
          for (int r = 0; r < d; ++r)
            for (int q = 0; q < d; ++q) a(r, q) = mean[static_cast<std::size_t>(r * d + q)];
          return determinant(a);
        },
        Seed{19});
    const MomentEstimate rhs = output_estimate(sums, m, Seed{19});
    const double inv = 1.0 / factorial(d);
    EXPECT_NEAR(lhs.mean, inv * rhs.mean, 4.0 * std::hypot(lhs.std_error, inv * rhs.std_error)) << d;
  }
}

TEST(Jensen, FirstMomentBelowLpNorm) {
  const std::vector<ConvexBody> bodies{make_unit_ball(3), make_half_ball(2), make_regular_simplex(3),
                                       make_half_ball_cone(4, 0.2, 0.0), make_cube(2)};
  SampleStream dir_stream(Seed{20});
  for (const auto& b : bodies) {
    const int d = b.dim();
    Point u(d);
    double a, c;
    for (int i = 0; i < d; i += 2) {
      dir_stream.normal_pair(a, c);
      u[i] = a;
      if (i + 1 < d) u[i + 1] = c;
    }
    u = normalized(u);
    const BodySampler s(b);
    const BatchSums sums = run_tuples(200000, Seed{21}, 3, [&](SampleStream& st, std::span<double> out) {
      const double f = std::abs(dot(u, s.draw(st)));
      out[0] = f;
      out[1] = f * f;
      out[2] = f * f * f * f;
    });
    const MomentEstimate m1 = output_estimate(sums, 0, Seed{21});
    for (int p : {2, 4}) {
      const MomentEstimate lp = jackknife_estimate(
          sums, [p](std::span<const double> m) { return std::pow(m[p == 2 ? 1 : 2], 1.0 / p); }, Seed{21});
      EXPECT_LE(m1.mean, lp.mean + 4.0 * std::hypot(m1.std_error, lp.std_error));
    }
  }
}

TEST(BlaschkeGroemer, HalfBallAboveBall) {
  for (int d = 2; d <= 4; ++d)
    for (int k = 1; k <= 2; ++k) {
      const double vol = exact::kappa(d).value() / 2.0;
      const MomentEstimate half = moment_estimate(make_half_ball(d), k, kN, Seed{static_cast<std::uint64_t>(30 + d * 3 + k)});
      const double ratio = half.mean / std::pow(vol, k);
      const double ball = exact::ball_simplex_moment(d, k).value() / std::pow(exact::kappa(d).value(), k);
      EXPECT_GE((ratio - ball) / (half.std_error / std::pow(vol, k)), 3.0) << d << "," << k;
    }
}

TEST(IsotropicTransform, BallBecomesScaledBall) {
  for (int d : {2, 3}) {
    const ConvexBody iso = isotropic_transform(make_unit_ball(d), kN, Seed{40});
    const CovarianceEstimate c = covariance_estimate(iso, kN, Seed{41});
    EXPECT_LT((c.matrix - Matrix::identity(d)).max_abs(), 0.02) << d;
    const auto* img = iso.as<AffineImage>();
    ASSERT_NE(img, nullptr);
    EXPECT_NEAR(img->matrix(0, 0), std::sqrt(d + 2.0), 0.02);
  }
}

TEST(IsotropicTransform, FixpointForIsotropicBody) {
  const ConvexBody b = affine_image(make_unit_ball(3), std::sqrt(5.0) * Matrix::identity(3), Point(3));
  const AffineMap map = isotropic_map(covariance_estimate(b, kN, Seed{42}));
  EXPECT_LT((map.matrix - Matrix::identity(3)).max_abs(), 0.02);
}

TEST(IsotropicTransform, RegularSimplexFacetCentres) {
  const ConvexBody iso = isotropic_transform(make_regular_simplex(3), kN, Seed{43});
  const auto* p = iso.as<HPolytope>();
  ASSERT_NE(p, nullptr);
  ASSERT_EQ(p->vertices.size(), 4u);
  double best = 1e9;
  for (std::size_t skip = 0; skip < 4; ++skip) {
    Point c(3);
    for (std::size_t i = 0; i < 4; ++i)
      if (i != skip) c += p->vertices[i] * (1.0 / 3.0);
    best = std::min(best, norm(c));
  }
  EXPECT_NEAR(best, std::sqrt(5.0 / 3.0), 0.01);
}

TEST(IsotropicTransform, SimplexUnionMomentsAreExact) {
  // the unit square as two triangles
  const ExactMoments m = simplex_union_moments({{1.0, {{0, 0}, {1, 0}, {1, 1}}}, {1.0, {{0, 0}, {1, 1}, {0, 1}}}});
  EXPECT_NEAR(m.volume, 1.0, 1e-15);
  EXPECT_NEAR(m.centroid[0], 0.5, 1e-15);
  EXPECT_LT((m.covariance() - (1.0 / 12.0) * Matrix::identity(2)).max_abs(), 1e-15);
  const AffineMap map = isotropic_map(m.covariance(), m.centroid);
  EXPECT_NEAR(map.matrix(0, 0), std::sqrt(12.0), 1e-12);
}

TEST(IsotropicConstant, Examples) {
  expect_within(isotropic_constant_estimate(make_unit_ball(2), kN, Seed{44}), 1.0 / (2.0 * std::sqrt(pi)));
  for (int d : {2, 3, 4}) expect_within(isotropic_constant_estimate(make_cube(d), kN, Seed{45}), 1.0 / std::sqrt(12.0));
  Matrix m(2);
  m(0, 0) = 2.0;
  m(0, 1) = 0.7;
  m(1, 0) = -0.4;
  m(1, 1) = 0.5;
  expect_within(isotropic_constant_estimate(affine_image(make_unit_ball(2), m, Point{3, 1}), kN, Seed{46}),
                1.0 / (2.0 * std::sqrt(pi)));
}

TEST(NestedDetCov, PairedDifferenceMatchesSeparateRuns) {
  const ConvexBody outer = make_cube(2);
  const ConvexBody inner = intersect_halfspace(outer, Halfspace(Point{1, 0}, 0.5));
  const NestedDetCov r = nested_det_cov_estimate(outer, inner, kN, Seed{47});
  // [0.5,1] x [0,1]: variances 1/48 and 1/12
  EXPECT_NEAR(r.inner.mean, 1.0 / 48.0 / 12.0, 4.0 * r.inner.std_error);
  EXPECT_NEAR(r.outer.mean, 1.0 / 144.0, 4.0 * r.outer.std_error);
  EXPECT_NEAR(r.difference.mean, r.inner.mean - r.outer.mean, 1e-15);
}

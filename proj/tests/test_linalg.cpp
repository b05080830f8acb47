#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "geomprob/linalg.hpp"

using namespace geomprob;

TEST(Point, ArithmeticAndNorm) {
  const Point a{3.0, 4.0};
  const Point b{1.0, -1.0};
  EXPECT_DOUBLE_EQ(norm(a), 5.0);
  EXPECT_DOUBLE_EQ(dot(a, b), -1.0);
  EXPECT_EQ(a + b, (Point{4.0, 3.0}));
  EXPECT_EQ(2.0 * b, (Point{2.0, -2.0}));
  EXPECT_DOUBLE_EQ(norm(normalized(a)), 1.0);
}

TEST(Point, RejectsBadDimension) {
  EXPECT_THROW(Point(kMaxDim + 1), Error);
  EXPECT_THROW(Point(-1), Error);
  EXPECT_THROW(normalized(Point(3)), Error);
}

TEST(Matrix, DeterminantOfKnownMatrices) {
  EXPECT_DOUBLE_EQ(determinant(Matrix::identity(5)), 1.0);
  Matrix m(3);
  const double v[3][3] = {{2, 1, 0}, {1, 3, 1}, {0, 1, 4}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = v[i][j];
  EXPECT_NEAR(determinant(m), 18.0, 1e-12);
  // a row swap flips the sign
  Matrix p(2);
  p(0, 1) = 1.0;
  p(1, 0) = 1.0;
  EXPECT_DOUBLE_EQ(determinant(p), -1.0);
  EXPECT_DOUBLE_EQ(determinant(Matrix(4)), 0.0);
}

TEST(Matrix, InverseRoundTrip) {
  Matrix m(4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = 1.0 / (i + j + 1.0) + (i == j ? 1.0 : 0.0);
  const Matrix prod = m * inverse(m);
  EXPECT_LT((prod - Matrix::identity(4)).max_abs(), 1e-12);
  EXPECT_THROW(inverse(Matrix(3)), DegenerateError);
}

TEST(Matrix, SymmetricEigenReconstructs) {
  Matrix s(3);
  const double v[3][3] = {{4, 1, 2}, {1, 3, 0.5}, {2, 0.5, 5}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s(i, j) = v[i][j];
  const SymmetricEigen e = symmetric_eigen(s);
  EXPECT_LE(e.values[0], e.values[1]);
  EXPECT_LE(e.values[1], e.values[2]);
  const Matrix back = e.vectors * Matrix::diagonal(e.values) * e.vectors.transposed();
  EXPECT_LT((back - s).max_abs(), 1e-12);
  EXPECT_NEAR(e.values[0] * e.values[1] * e.values[2], determinant(s), 1e-10);
}

TEST(HyperplaneNormal, OrthogonalToEdges) {
  const std::vector<Point> pts{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const Point n = hyperplane_normal(pts);
  EXPECT_NEAR(dot(n, pts[1] - pts[0]), 0.0, 1e-15);
  EXPECT_NEAR(dot(n, pts[2] - pts[0]), 0.0, 1e-15);
  EXPECT_GT(norm(n), 0.0);
}

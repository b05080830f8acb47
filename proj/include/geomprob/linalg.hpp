#pragma once

// Fixed-capacity points and square matrices for dimensions up to kMaxDim.
// Everything here is tiny and allocation-free; the samplers call these in
// their innermost loops.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace geomprob {

inline constexpr int kMaxDim = 8;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A body, slice or covariance is too thin to work with (rejection limit,
/// singular matrix, empty interior).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

inline void require(bool ok, const char* what) {
  if (!ok) throw Error(what);
}
inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(what);
}

class Point {
 public:
  Point() = default;
  explicit Point(int dim) : dim_(dim) {
    if (dim < 0 || dim > kMaxDim) throw Error("dimension out of range: " + std::to_string(dim));
  }
  Point(std::initializer_list<double> xs) : Point(static_cast<int>(xs.size())) {
    std::copy(xs.begin(), xs.end(), c_.begin());
  }
  explicit Point(std::span<const double> xs) : Point(static_cast<int>(xs.size())) {
    std::copy(xs.begin(), xs.end(), c_.begin());
  }

  static Point unit(int dim, int axis) {
    Point p(dim);
    p[axis] = 1.0;
    return p;
  }

  int dim() const { return dim_; }
  double& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  std::span<const double> coords() const { return {c_.data(), static_cast<std::size_t>(dim_)}; }

  Point& operator+=(const Point& o) {
    for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Point& operator-=(const Point& o) {
    for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Point& operator*=(double s) {
    for (int i = 0; i < dim_; ++i) c_[i] *= s;
    return *this;
  }
  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }
  friend Point operator*(Point a, double s) { return a *= s; }
  friend Point operator*(double s, Point a) { return a *= s; }

  friend bool operator==(const Point& a, const Point& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i)
      if (a.c_[i] != b.c_[i]) return false;
    return true;
  }

  bool finite() const {
    for (int i = 0; i < dim_; ++i)
      if (!std::isfinite(c_[i])) return false;
    return true;
  }

 private:
  std::array<double, kMaxDim> c_{};
  int dim_ = 0;
};

inline double dot(const Point& a, const Point& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Point& a) { return dot(a, a); }
inline double norm(const Point& a) { return std::sqrt(norm2(a)); }

inline Point normalized(const Point& a) {
  const double n = norm(a);
  if (!(n > 0.0)) throw Error("cannot normalize a zero vector");
  return a * (1.0 / n);
}

/// Dense n x n matrix, row-major, n <= kMaxDim.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(int n) : n_(n) {
    if (n < 0 || n > kMaxDim) throw Error("matrix size out of range: " + std::to_string(n));
  }

  static Matrix identity(int n) {
    Matrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static Matrix diagonal(const Point& d) {
    Matrix m(d.dim());
    for (int i = 0; i < d.dim(); ++i) m(i, i) = d[i];
    return m;
  }

  int size() const { return n_; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i * kMaxDim + j)]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * kMaxDim + j)]; }

  Point row(int i) const {
    Point p(n_);
    for (int j = 0; j < n_; ++j) p[j] = (*this)(i, j);
    return p;
  }
  Point col(int j) const {
    Point p(n_);
    for (int i = 0; i < n_; ++i) p[i] = (*this)(i, j);
    return p;
  }

  Matrix transposed() const {
    Matrix t(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend Point operator*(const Matrix& m, const Point& x) {
    Point y(m.n_);
    for (int i = 0; i < m.n_; ++i) {
      double s = 0.0;
      for (int j = 0; j < m.n_; ++j) s += m(i, j) * x[j];
      y[i] = s;
    }
    return y;
  }
  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix c(a.n_);
    for (int i = 0; i < a.n_; ++i)
      for (int k = 0; k < a.n_; ++k) {
        const double aik = a(i, k);
        for (int j = 0; j < a.n_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }
  friend Matrix operator-(Matrix a, const Matrix& b) {
    for (int i = 0; i < a.n_; ++i)
      for (int j = 0; j < a.n_; ++j) a(i, j) -= b(i, j);
    return a;
  }
  friend Matrix operator*(double s, Matrix a) {
    for (int i = 0; i < a.n_; ++i)
      for (int j = 0; j < a.n_; ++j) a(i, j) *= s;
    return a;
  }

  double max_abs() const {
    double m = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m = std::max(m, std::abs((*this)(i, j)));
    return m;
  }

 private:
  std::array<double, kMaxDim * kMaxDim> a_{};
  int n_ = 0;
};

/// LU factorization with partial pivoting, in place. Returns the determinant.
/// Used directly by the simplex-volume kernel, so it works on a raw
/// row-major buffer with stride kMaxDim.
inline double lu_determinant(double* a, int n) {
  double det = 1.0;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(a[k * kMaxDim + k]);
    for (int i = k + 1; i < n; ++i) {
      const double v = std::abs(a[i * kMaxDim + k]);
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best == 0.0) return 0.0;
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(a[k * kMaxDim + j], a[piv * kMaxDim + j]);
      det = -det;
    }
    const double pivot = a[k * kMaxDim + k];
    det *= pivot;
    for (int i = k + 1; i < n; ++i) {
      const double f = a[i * kMaxDim + k] / pivot;
      if (f == 0.0) continue;
      for (int j = k + 1; j < n; ++j) a[i * kMaxDim + j] -= f * a[k * kMaxDim + j];
    }
  }
  return det;
}

inline double determinant(Matrix m) {
  // operator() addresses the same row-major stride-kMaxDim layout.
  return lu_determinant(&m(0, 0), m.size());
}

/// Gauss-Jordan inverse with partial pivoting.
inline Matrix inverse(const Matrix& m) {
  const int n = m.size();
  Matrix a = m;
  Matrix inv = Matrix::identity(n);
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (std::abs(a(piv, k)) < 1e-300) throw DegenerateError("singular matrix");
    if (piv != k)
      for (int j = 0; j < n; ++j) {
        std::swap(a(k, j), a(piv, j));
        std::swap(inv(k, j), inv(piv, j));
      }
    const double p = a(k, k);
    for (int j = 0; j < n; ++j) {
      a(k, j) /= p;
      inv(k, j) /= p;
    }
    for (int i = 0; i < n; ++i) {
      if (i == k) continue;
      const double f = a(i, k);
      if (f == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        a(i, j) -= f * a(k, j);
        inv(i, j) -= f * inv(k, j);
      }
    }
  }
  return inv;
}

struct SymmetricEigen {
  Point values;    // ascending
  Matrix vectors;  // column j is the eigenvector of values[j]
};

/// Cyclic Jacobi rotations. Input must be symmetric; only the upper
/// triangle is trusted.
inline SymmetricEigen symmetric_eigen(const Matrix& sym) {
  const int n = sym.size();
  Matrix a = sym;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) a(i, j) = a(j, i);
  Matrix v = Matrix::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) < a(y, y); });
  SymmetricEigen out{Point(n), Matrix(n)};
  for (int j = 0; j < n; ++j) {
    const int src = order[static_cast<std::size_t>(j)];
    out.values[j] = a(src, src);
    for (int i = 0; i < n; ++i) out.vectors(i, j) = v(i, src);
  }
  return out;
}

/// Normal of the hyperplane through d points in R^d (generalized cross
/// product of the d-1 edge vectors), not normalized.
inline Point hyperplane_normal(std::span<const Point> pts) {
  const int d = pts.front().dim();
  require(static_cast<int>(pts.size()) == d, "hyperplane_normal needs d points");
  Point n(d);
  for (int col = 0; col < d; ++col) {
    Matrix minor(d - 1);
    for (int r = 1; r < d; ++r) {
      int cc = 0;
      for (int c = 0; c < d; ++c) {
        if (c == col) continue;
        minor(r - 1, cc++) = pts[static_cast<std::size_t>(r)][c] - pts[0][c];
      }
    }
    const double cof = d == 1 ? 1.0 : determinant(minor);
    n[col] = (col % 2 == 0 ? 1.0 : -1.0) * cof;
  }
  return n;
}

}  // namespace geomprob

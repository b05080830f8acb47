#pragma once

// Monte Carlo estimators: random-simplex volume moments (free and pinned),
// centroid and covariance, det A(K), isotropic position and the isotropic
// constant. Every estimator is a pure function of (body, parameters, seed).

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "geomprob/batch.hpp"
#include "geomprob/bodies.hpp"
#include "geomprob/sampling.hpp"

namespace geomprob {

namespace detail {
inline double inverse_factorial(int d) { return 1.0 / std::tgamma(d + 1.0); }

/// |det(p1 - p0, ..., pd - p0)| / d!, no checks.
inline double simplex_volume_raw(const Point* pts, int d, double inv_fact) {
  double a[kMaxDim * kMaxDim];
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) a[i * kMaxDim + j] = pts[j + 1][i] - pts[0][i];
  return std::abs(lu_determinant(a, d)) * inv_fact;
}

inline double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}
}  // namespace detail

/// Volume of conv(points) for exactly d+1 points in R^d.
inline double simplex_volume(std::span<const Point> points) {
  require(!points.empty(), "simplex_volume needs d+1 points");
  const int d = points.front().dim();
  if (static_cast<int>(points.size()) != d + 1)
    throw Error("simplex_volume needs exactly d+1 points, got " + std::to_string(points.size()));
  for (const auto& p : points)
    if (p.dim() != d) throw Error("simplex_volume: point dimension mismatch");
  if (d == 0) return 1.0;
  return detail::simplex_volume_raw(points.data(), d, detail::inverse_factorial(d));
}

/// E(V_K^k), V_K the volume of d+1 uniform points.
inline MomentEstimate moment_estimate(const ConvexBody& body, int k, std::uint64_t n, Seed seed) {
  require(n >= 1000, "moment_estimate needs n >= 1000");
  require(k >= 1, "moment order must be >= 1");
  const BodySampler sampler(body);
  const int d = body.dim();
  const double inv_fact = detail::inverse_factorial(d);
  const BatchSums sums = run_tuples(n, seed, 1, [&](SampleStream& s, std::span<double> out) {
    Point pts[kMaxDim + 1];
    for (int i = 0; i <= d; ++i) pts[i] = sampler.draw(s);
    out[0] = detail::ipow(detail::simplex_volume_raw(pts, d, inv_fact), k);
  });
  return output_estimate(sums, 0, seed, k);
}

/// E((vol conv(x, X_1..X_d))^k); x need not lie in the body.
inline MomentEstimate pinned_moment_estimate(const ConvexBody& body, const Point& x, int k, std::uint64_t n,
                                             Seed seed) {
  require(n >= 1000, "pinned_moment_estimate needs n >= 1000");
  require(k >= 1, "moment order must be >= 1");
  require(x.dim() == body.dim(), "pinned point dimension mismatch");
  const BodySampler sampler(body);
  const int d = body.dim();
  const double inv_fact = detail::inverse_factorial(d);
  const BatchSums sums = run_tuples(n, seed, 1, [&](SampleStream& s, std::span<double> out) {
    Point pts[kMaxDim + 1];
    pts[0] = x;
    for (int i = 1; i <= d; ++i) pts[i] = sampler.draw(s);
    out[0] = detail::ipow(detail::simplex_volume_raw(pts, d, inv_fact), k);
  });
  return output_estimate(sums, 0, seed, k);
}

struct PairedMoments {
  MomentEstimate full;        // E V^k
  MomentEstimate pinned;      // E (vol conv(x, X_1..X_d))^k
  MomentEstimate difference;  // free - pinned, batch means of paired differences
};

/// Free and pinned moments from shared draws: tuple j draws X_0..X_d and
/// both volumes reuse X_1..X_d.
inline PairedMoments paired_moment_estimate(const ConvexBody& body, const Point& x, int k, std::uint64_t n,
                                            Seed seed) {
  require(n >= 1000, "paired_moment_estimate needs n >= 1000");
  require(x.dim() == body.dim(), "pinned point dimension mismatch");
  const BodySampler sampler(body);
  const int d = body.dim();
  const double inv_fact = detail::inverse_factorial(d);
  const BatchSums sums = run_tuples(n, seed, 2, [&](SampleStream& s, std::span<double> out) {
    Point pts[kMaxDim + 1];
    for (int i = 0; i <= d; ++i) pts[i] = sampler.draw(s);
    out[0] = detail::ipow(detail::simplex_volume_raw(pts, d, inv_fact), k);
    pts[0] = x;
    out[1] = detail::ipow(detail::simplex_volume_raw(pts, d, inv_fact), k);
  });
  const double diff[] = {1.0, -1.0};
  return {output_estimate(sums, 0, seed, k), output_estimate(sums, 1, seed, k), linear_estimate(sums, diff, seed, k)};
}

// ---------------------------------------------------------------------------
// Covariance

struct CovarianceEstimate {
  Point centroid;
  Matrix matrix;
  std::uint64_t n = 0;
  double stderr_scale = 0.0;  // largest jackknife standard error over entries
};

namespace detail {

inline int second_moment_outputs(int d) { return 1 + d + d * (d + 1) / 2; }

/// Accumulates (1, y, y y^T upper) for y = p - shift into out[0..].
inline void push_moments(const Point& p, const Point& shift, std::span<double> out) {
  const int d = p.dim();
  out[0] = 1.0;
  int o = 1;
  Point y = p - shift;
  for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(o++)] = y[i];
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) out[static_cast<std::size_t>(o++)] = y[i] * y[j];
}

inline void zero_moments(int d, std::span<double> out) {
  for (int o = 0; o < second_moment_outputs(d); ++o) out[static_cast<std::size_t>(o)] = 0.0;
}

/// Population covariance from raw moment means (weight, y, y y^T).
inline Matrix covariance_from_means(int d, std::span<const double> m, Point* mean_out = nullptr) {
  const double w = m[0];
  Point mu(d);
  for (int i = 0; i < d; ++i) mu[i] = m[static_cast<std::size_t>(1 + i)] / w;
  Matrix a(d);
  int o = 1 + d;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      const double v = m[static_cast<std::size_t>(o++)] / w - mu[i] * mu[j];
      a(i, j) = v;
      a(j, i) = v;
    }
  if (mean_out) *mean_out = mu;
  return a;
}

inline BatchSums moment_sums(const ConvexBody& body, std::uint64_t n, Seed seed, const Point& shift) {
  const BodySampler sampler(body);
  return run_tuples(n, seed, second_moment_outputs(body.dim()),
                    [&](SampleStream& s, std::span<double> out) { push_moments(sampler.draw(s), shift, out); });
}

}  // namespace detail

/// Sample centroid and population (1/n) covariance.
inline CovarianceEstimate covariance_estimate(const ConvexBody& body, std::uint64_t n, Seed seed) {
  require(n >= 10000, "covariance_estimate needs n >= 10^4");
  const int d = body.dim();
  const Point shift = bounding_box(body).center();
  const BatchSums sums = detail::moment_sums(body, n, seed, shift);
  std::vector<double> means(static_cast<std::size_t>(sums.outputs));
  for (int o = 0; o < sums.outputs; ++o)
    means[static_cast<std::size_t>(o)] = sums.grand_sum(o) / static_cast<double>(sums.total());
  CovarianceEstimate c;
  Point mu;
  c.matrix = detail::covariance_from_means(d, means, &mu);
  c.centroid = mu + shift;
  c.n = sums.total();
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      const auto e = jackknife_estimate(
          sums, [&](std::span<const double> m) { return detail::covariance_from_means(d, m)(i, j); }, seed);
      c.stderr_scale = std::max(c.stderr_scale, e.std_error);
    }
  return c;
}

/// det of the estimated covariance; jackknife standard error over batches.
inline MomentEstimate det_cov_estimate(const ConvexBody& body, std::uint64_t n, Seed seed) {
  require(n >= 10000, "det_cov_estimate needs n >= 10^4");
  const int d = body.dim();
  const Point shift = bounding_box(body).center();
  const BatchSums sums = detail::moment_sums(body, n, seed, shift);
  return jackknife_estimate(
      sums, [&](std::span<const double> m) { return determinant(detail::covariance_from_means(d, m)); }, seed);
}

struct NestedDetCov {
  MomentEstimate outer;       // det A(L)
  MomentEstimate inner;       // det A(K), from the draws of L that land in K
  MomentEstimate difference;  // det A(K) - det A(L), paired
};

/// det A for a nested pair K ⊆ L from one stream of draws in L: the draws
/// that land in K are uniform on K. Far lower variance than independent runs
/// when K is most of L.
inline NestedDetCov nested_det_cov_estimate(const ConvexBody& outer, const ConvexBody& inner, std::uint64_t n,
                                            Seed seed) {
  require(n >= 10000, "nested_det_cov_estimate needs n >= 10^4");
  require(outer.dim() == inner.dim(), "nested bodies must share a dimension");
  const int d = outer.dim();
  const int m = detail::second_moment_outputs(d);
  const Point shift = bounding_box(outer).center();
  const BodySampler sampler(outer);
  const BatchSums sums = run_tuples(n, seed, 2 * m, [&](SampleStream& s, std::span<double> out) {
    const Point p = sampler.draw(s);
    detail::push_moments(p, shift, out.first(static_cast<std::size_t>(m)));
    if (contains(inner, p))
      detail::push_moments(p, shift, out.subspan(static_cast<std::size_t>(m)));
    else
      detail::zero_moments(d, out.subspan(static_cast<std::size_t>(m)));
  });
  auto det_of = [d, m](std::span<const double> means, int block) {
    return determinant(detail::covariance_from_means(d, means.subspan(static_cast<std::size_t>(block * m))));
  };
  NestedDetCov r;
  r.outer = jackknife_estimate(sums, [&](std::span<const double> v) { return det_of(v, 0); }, seed);
  r.inner = jackknife_estimate(sums, [&](std::span<const double> v) { return det_of(v, 1); }, seed);
  r.difference =
      jackknife_estimate(sums, [&](std::span<const double> v) { return det_of(v, 1) - det_of(v, 0); }, seed);
  return r;
}

// ---------------------------------------------------------------------------
// Exact moments of unions of simplices

/// Volume, centroid and second moment E[X X^T] of a body given as a signed
/// sum of simplices (sign -1 removes a simplex contained in the others).
struct ExactMoments {
  double volume = 0.0;
  Point centroid;
  Matrix second;

  Matrix covariance() const {
    const int d = centroid.dim();
    Matrix a = second;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) -= centroid[i] * centroid[j];
    return a;
  }
};

struct SignedSimplex {
  double sign = 1.0;
  std::vector<Point> vertices;
};

inline ExactMoments simplex_union_moments(const std::vector<SignedSimplex>& pieces) {
  require(!pieces.empty(), "need at least one simplex");
  const int d = pieces.front().vertices.front().dim();
  ExactMoments m;
  m.centroid = Point(d);
  m.second = Matrix(d);
  for (const auto& piece : pieces) {
    require(static_cast<int>(piece.vertices.size()) == d + 1, "simplex needs d+1 vertices");
    const double vol = piece.sign * simplex_volume_of(piece.vertices);
    Point sum(d);
    for (const auto& v : piece.vertices) sum += v;
    // E X = sum/(d+1), E X X^T = (sum_i v_i v_i^T + sum sum^T) / ((d+1)(d+2))
    for (int i = 0; i < d; ++i) {
      m.centroid[i] += vol * sum[i] / (d + 1.0);
      for (int j = 0; j < d; ++j) {
        double s = sum[i] * sum[j];
        for (const auto& v : piece.vertices) s += v[i] * v[j];
        m.second(i, j) += vol * s / ((d + 1.0) * (d + 2.0));
      }
    }
    m.volume += vol;
  }
  require(m.volume > 0.0, "signed simplex sum has non-positive volume");
  m.centroid *= 1.0 / m.volume;
  m.second = (1.0 / m.volume) * m.second;
  return m;
}

// ---------------------------------------------------------------------------
// Isotropic position

struct AffineMap {
  Matrix matrix;
  Point shift;
};

/// x -> A^{-1/2}(x - mu).
inline AffineMap isotropic_map(const Matrix& cov, const Point& centroid) {
  const int d = cov.size();
  const SymmetricEigen eig = symmetric_eigen(cov);
  if (!(eig.values[0] > 1e-9)) throw DegenerateError("covariance estimate is near-singular");
  Matrix m(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += eig.vectors(i, k) * eig.vectors(j, k) / std::sqrt(eig.values[k]);
      m(i, j) = s;
    }
  return {m, (m * centroid) * -1.0};
}

inline AffineMap isotropic_map(const CovarianceEstimate& cov) { return isotropic_map(cov.matrix, cov.centroid); }

inline ConvexBody isotropic_transform(const ConvexBody& body, std::uint64_t n, Seed seed) {
  const AffineMap map = isotropic_map(covariance_estimate(body, n, seed));
  return affine_image(body, map.matrix, map.shift);
}

/// L_K = (det A / vol^2)^{1/(2d)}, delta-method standard error.
inline MomentEstimate isotropic_constant_estimate(const ConvexBody& body, std::uint64_t n, Seed seed) {
  const int d = body.dim();
  const MomentEstimate det = det_cov_estimate(body, n, seed.substream(0));
  const MomentEstimate vol = volume_estimate(body, n, seed.substream(1));
  MomentEstimate e;
  e.mean = std::pow(det.mean / (vol.mean * vol.mean), 1.0 / (2.0 * d));
  const double rel = std::hypot(det.std_error / det.mean, 2.0 * vol.std_error / vol.mean);
  e.std_error = e.mean * rel / (2.0 * d);
  e.n = n;
  e.seed = seed;
  return e;
}

}  // namespace geomprob

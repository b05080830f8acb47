#pragma once

// Uniform sampling from bodies, from hyperplane slices, and slice measures.
//
// Method per variant:
//   Ball             rejection from the cube (d <= 4), else normalized
//                    normals with radius U^{1/d}
//   centred Cut(Ball) ball draw reflected across the cut plane
//   HalfBallCone     piece chosen by exact volume; frustum by inverse CDF
//   AffineImage      base draw mapped forward
//   other Cut        rejection from the cut's bounding box (d <= 4), else
//                    base draw rejected against the halfspace
//   HPolytope/Polygon rejection from the bounding box
// Rejection gives up after 10^6 consecutive misses (DegenerateError).

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "geomprob/batch.hpp"
#include "geomprob/bodies.hpp"
#include "geomprob/exact.hpp"
#include "geomprob/random.hpp"

namespace geomprob {

inline constexpr long kRejectionLimit = 1000000;

/// Uniform point in the unit d-ball: rejection from [-1,1]^d for d <= 4,
/// otherwise d normals (Box-Muller) normalized, radius U^{1/d}.
inline Point sample_ball(int d, SampleStream& s) {
  require(d >= 1 && d <= kMaxDim, "sample_ball: dimension out of range");
  Point p(d);
  if (d <= 4) {
    for (;;) {
      double n2 = 0.0;
      for (int i = 0; i < d; ++i) {
        p[i] = 2.0 * s.uniform() - 1.0;
        n2 += p[i] * p[i];
      }
      if (n2 < 1.0) return p;
    }
  }
  for (int i = 0; i < d; i += 2) {
    double a, b;
    s.normal_pair(a, b);
    p[i] = a;
    if (i + 1 < d) p[i + 1] = b;
  }
  double n2 = norm2(p);
  while (n2 == 0.0) {  // probability zero; keeps the map total
    double a, b;
    s.normal_pair(a, b);
    p[0] = a;
    n2 = norm2(p);
  }
  const double r = std::pow(s.uniform_open0(), 1.0 / d);
  return p * (r / std::sqrt(n2));
}

class BodySampler {
 public:
  explicit BodySampler(const ConvexBody& body) : body_(std::make_shared<const ConvexBody>(body)) { init(); }
  explicit BodySampler(BodyPtr body) : body_(std::move(body)) { init(); }

  const ConvexBody& body() const { return *body_; }
  int dim() const { return body_->dim(); }

  Point draw(SampleStream& s) const {
    switch (kind_) {
      case Kind::kBall:
        return center_ + sample_ball(dim(), s) * radius_;
      case Kind::kReflectedBall: {
        Point p = center_ + sample_ball(dim(), s) * radius_;
        const double gap = cut_.level(p) - cut_.offset;
        if (gap < 0.0) p -= cut_.normal * (2.0 * gap);
        return p;
      }
      case Kind::kHalfBallCone:
        return draw_half_ball_cone(s);
      case Kind::kAffine:
        return matrix_ * inner_->draw(s) + shift_;
      case Kind::kCut:
        for (long miss = 0; miss < kRejectionLimit; ++miss) {
          Point p = inner_->draw(s);
          if (cut_.contains(p)) return p;
        }
        throw DegenerateError("rejection limit reached sampling a cut body");
      case Kind::kBoxRejection:
        for (long miss = 0; miss < kRejectionLimit; ++miss) {
          Point p(dim());
          for (int i = 0; i < dim(); ++i) p[i] = box_.lo[i] + s.uniform() * (box_.hi[i] - box_.lo[i]);
          if (detail::contains_unchecked(*body_, p, 0.0)) return p;
        }
        throw DegenerateError("rejection limit reached sampling from the bounding box");
    }
    return Point(dim());
  }

 private:
  enum class Kind { kBall, kReflectedBall, kHalfBallCone, kAffine, kCut, kBoxRejection };

  void init() {
    const ConvexBody& b = *body_;
    if (const auto* ball = b.as<Ball>()) {
      kind_ = Kind::kBall;
      center_ = ball->center;
      radius_ = ball->radius;
    } else if (const auto* cut = b.as<Cut>()) {
      cut_ = cut->h;
      if (is_centered_cut_of_ball(*cut)) {
        kind_ = Kind::kReflectedBall;
        center_ = cut->base->as<Ball>()->center;
        radius_ = cut->base->as<Ball>()->radius;
      } else if (b.dim() <= 4) {
        kind_ = Kind::kBoxRejection;
        box_ = bounding_box(b);
      } else {
        kind_ = Kind::kCut;
        inner_ = std::make_shared<const BodySampler>(cut->base);
      }
    } else if (const auto* hbc = b.as<HalfBallCone>()) {
      kind_ = Kind::kHalfBallCone;
      const int d = hbc->dim;
      rho_ = hbc->delta / hbc->eps;
      rho_pow_ = std::pow(rho_, d);
      eps_ = hbc->eps;
      const double half = 0.5 * exact::kappa(d).value();
      const double frustum = exact::kappa(d - 1).value() * (hbc->eps / d) * (1.0 - rho_pow_);
      p_half_ = half / (half + frustum);
    } else if (const auto* aff = b.as<AffineImage>()) {
      kind_ = Kind::kAffine;
      matrix_ = aff->matrix;
      shift_ = aff->shift;
      inner_ = std::make_shared<const BodySampler>(aff->base);
    } else {
      kind_ = Kind::kBoxRejection;
      box_ = bounding_box(b);
    }
  }

  Point draw_half_ball_cone(SampleStream& s) const {
    const int d = dim();
    if (s.uniform() < p_half_) {
      Point p = sample_ball(d, s);
      p[0] = std::abs(p[0]);
      return p;
    }
    // apex + sc * (B - apex), B uniform on the unit disk at x1 = 0,
    // sc with density ∝ sc^{d-1} on [rho, 1]
    const Point disk = sample_ball(d - 1, s);
    const double sc = std::pow(rho_pow_ + s.uniform() * (1.0 - rho_pow_), 1.0 / d);
    Point p(d);
    p[0] = -eps_ + sc * eps_;
    for (int i = 1; i < d; ++i) p[i] = sc * disk[i - 1];
    return p;
  }

  BodyPtr body_;
  Kind kind_ = Kind::kBoxRejection;
  Point center_;
  double radius_ = 1.0;
  Halfspace cut_;
  std::shared_ptr<const BodySampler> inner_;
  Matrix matrix_;
  Point shift_;
  BoundingBox box_;
  double rho_ = 0.0, rho_pow_ = 0.0, eps_ = 0.0, p_half_ = 1.0;
};

/// Convenience wrapper; estimators keep a BodySampler instead.
inline Point sample_body(const ConvexBody& body, SampleStream& s) { return BodySampler(body).draw(s); }

// ---------------------------------------------------------------------------
// Slices

/// Orthonormal basis of v's orthogonal complement: Gram-Schmidt over the
/// coordinate axes in index order, skipping the axis with the largest |v_i|
/// (lowest index on ties).
inline std::vector<Point> orthonormal_complement(const Point& v) {
  const int d = v.dim();
  int skip = 0;
  for (int i = 1; i < d; ++i)
    if (std::abs(v[i]) > std::abs(v[skip])) skip = i;
  std::vector<Point> basis;
  for (int i = 0; i < d; ++i) {
    if (i == skip) continue;
    Point u = Point::unit(d, i);
    u -= v * dot(v, u);
    for (const auto& w : basis) u -= w * dot(w, u);
    basis.push_back(normalized(u));
  }
  return basis;
}

/// Rejection sampler for S_t = body ∩ {<v,x> = t}. The (d-1)-dimensional
/// proposal box has half-width min(circumradius bound from the bounding-box
/// diagonal, exact range of each basis coordinate over the bounding box).
class SliceSampler {
 public:
  SliceSampler(const ConvexBody& body, const Point& v, double t, double tol = 1e-12)
      : body_(std::make_shared<const ConvexBody>(body)), v_(v), t_(t), tol_(tol) {
    require(v.dim() == body.dim(), "slice direction dimension mismatch");
    require(std::abs(norm(v) - 1.0) <= 1e-12, "slice direction must be a unit vector");
    require(body.dim() >= 2, "slices need d >= 2");
    const BoundingBox box = bounding_box(body);
    const Point c = box.center();
    const double radius = box.half_diagonal();
    origin_ = c + v * (t - dot(v, c));
    basis_ = orthonormal_complement(v);
    const int m = body.dim() - 1;
    lo_ = Point(m);
    hi_ = Point(m);
    box_volume_ = 1.0;
    for (int j = 0; j < m; ++j) {
      const Point& u = basis_[static_cast<std::size_t>(j)];
      double spread = 0.0;
      for (int i = 0; i < body.dim(); ++i) spread += std::abs(u[i]) * 0.5 * (box.hi[i] - box.lo[i]);
      const double mid = dot(u, c - origin_);
      lo_[j] = std::max(-radius, mid - spread);
      hi_[j] = std::min(radius, mid + spread);
      if (!(hi_[j] > lo_[j])) {
        lo_[j] = hi_[j] = 0.0;
      }
      box_volume_ *= hi_[j] - lo_[j];
    }
  }

  double proposal_volume() const { return box_volume_; }

  /// One proposal; true when it lands in the slice.
  bool propose(SampleStream& s, Point& out) const {
    out = origin_;
    for (std::size_t j = 0; j < basis_.size(); ++j) {
      const double y = lo_[static_cast<int>(j)] + s.uniform() * (hi_[static_cast<int>(j)] - lo_[static_cast<int>(j)]);
      out += basis_[j] * y;
    }
    return detail::contains_unchecked(*body_, out, tol_);
  }

  Point draw(SampleStream& s) const {
    if (!(box_volume_ > 0.0)) throw DegenerateError("slice proposal box is empty");
    Point p;
    for (long miss = 0; miss < kRejectionLimit; ++miss)
      if (propose(s, p)) return p;
    throw DegenerateError("rejection limit reached sampling a slice (degenerate slice?)");
  }

 private:
  BodyPtr body_;
  Point v_;
  double t_;
  double tol_;
  Point origin_;
  std::vector<Point> basis_;
  Point lo_, hi_;
  double box_volume_ = 0.0;
};

inline Point sample_slice(const ConvexBody& body, const Point& v, double t, SampleStream& s) {
  return SliceSampler(body, v, t).draw(s);
}

/// vol_{d-1}(S_t): acceptance rate of n slice proposals times the proposal
/// box volume, with binomial standard error.
inline MomentEstimate slice_measure(const ConvexBody& body, const Point& v, double t, std::uint64_t n, Seed seed) {
  const SliceSampler sampler(body, v, t);
  const double area = sampler.proposal_volume();
  const BatchSums sums = run_tuples(n, seed, 1, [&](SampleStream& s, std::span<double> out) {
    Point p;
    out[0] = sampler.propose(s, p) ? 1.0 : 0.0;
  });
  MomentEstimate e;
  e.n = sums.total();
  const double rate = sums.grand_sum(0) / static_cast<double>(e.n);
  e.mean = rate * area;
  e.std_error = area * std::sqrt(rate * (1.0 - rate) / static_cast<double>(e.n));
  e.seed = seed;
  return e;
}

/// Volume: exact when available (std_error 0), else Monte Carlo. Cuts use
/// the hit rate of base samples times the base volume; everything else uses
/// bounding-box hit rate times box volume.
inline MomentEstimate volume_estimate(const ConvexBody& body, std::uint64_t n, Seed seed) {
  if (auto v = exact_volume(body)) {
    MomentEstimate e;
    e.mean = *v;
    e.n = 0;
    e.seed = seed;
    return e;
  }
  if (const auto* aff = body.as<AffineImage>()) {
    MomentEstimate e = volume_estimate(*aff->base, n, seed);
    e.mean *= aff->abs_det;
    e.std_error *= aff->abs_det;
    return e;
  }
  if (const auto* cut = body.as<Cut>()) {
    const MomentEstimate base = volume_estimate(*cut->base, n, seed.substream(1));
    const BodySampler sampler(cut->base);
    const BatchSums sums = run_tuples(n, seed.substream(0), 1, [&](SampleStream& s, std::span<double> out) {
      out[0] = cut->h.contains(sampler.draw(s)) ? 1.0 : 0.0;
    });
    const double rate = sums.grand_sum(0) / static_cast<double>(sums.total());
    const double rate_se = std::sqrt(rate * (1.0 - rate) / static_cast<double>(sums.total()));
    MomentEstimate e;
    e.n = sums.total();
    e.mean = base.mean * rate;
    e.std_error = std::hypot(base.mean * rate_se, rate * base.std_error);
    e.seed = seed;
    return e;
  }
  const BoundingBox box = bounding_box(body);
  const double box_volume = box.volume();
  const int d = body.dim();
  const BatchSums sums = run_tuples(n, seed, 1, [&](SampleStream& s, std::span<double> out) {
    Point p(d);
    for (int i = 0; i < d; ++i) p[i] = box.lo[i] + s.uniform() * (box.hi[i] - box.lo[i]);
    out[0] = detail::contains_unchecked(body, p, 0.0) ? 1.0 : 0.0;
  });
  MomentEstimate e;
  e.n = sums.total();
  const double rate = sums.grand_sum(0) / static_cast<double>(e.n);
  e.mean = rate * box_volume;
  e.std_error = box_volume * std::sqrt(rate * (1.0 - rate) / static_cast<double>(e.n));
  e.seed = seed;
  return e;
}

}  // namespace geomprob

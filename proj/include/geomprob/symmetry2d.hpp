#pragma once

// Steiner symmetrization and Blaschke shaking of convex polygons, done
// exactly through chord profiles, plus the pinned-ratio pipeline that takes
// a polygon with a boundary point down to a shaken symmetric body.
//
// Frame convention: for a direction `angle`, points are rotated by -angle;
// chords are then vertical, u is the horizontal coordinate, and the chord
// over u is {u} x [alpha(u), alpha(u) + length(u)].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "geomprob/batch.hpp"
#include "geomprob/bodies.hpp"
#include "geomprob/exact.hpp"
#include "geomprob/sampling.hpp"

namespace geomprob {

namespace detail {
inline Point rotate2(const Point& p, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return Point{c * p[0] - s * p[1], s * p[0] + c * p[1]};
}

inline const Polygon2D& polygon_of(const ConvexBody& body) {
  const auto* p = body.as<Polygon2D>();
  require(p != nullptr, "expected a polygon body");
  return *p;
}
}  // namespace detail

struct ChordProfile {
  double angle = 0.0;
  std::vector<double> breakpoints;  // sorted u values
  std::vector<double> lower;        // alpha at each breakpoint
  std::vector<double> upper;        // alpha + length at each breakpoint

  double u_min() const { return breakpoints.front(); }
  double u_max() const { return breakpoints.back(); }

  double alpha(double u) const { return interpolate(lower, u); }
  double length(double u) const { return interpolate(upper, u) - interpolate(lower, u); }

 private:
  double interpolate(const std::vector<double>& y, double u) const {
    require(u >= u_min() - 1e-12 && u <= u_max() + 1e-12, "u outside the chord profile");
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), u);
    if (it == breakpoints.end()) return y.back();
    if (it == breakpoints.begin()) return y.front();
    const std::size_t k = static_cast<std::size_t>(it - breakpoints.begin());
    const double u0 = breakpoints[k - 1], u1 = breakpoints[k];
    const double w = (u - u0) / (u1 - u0);
    return y[k - 1] + w * (y[k] - y[k - 1]);
  }
};

/// Profile of the chords perpendicular to direction `angle`. Breakpoints are
/// the projected vertices; both chains are linear in between.
inline ChordProfile chord_profile(const ConvexBody& poly, double angle) {
  const auto& verts = detail::polygon_of(poly).vertices;
  std::vector<Point> r;
  for (const auto& v : verts) r.push_back(detail::rotate2(v, -angle));
  ChordProfile p;
  p.angle = angle;
  for (const auto& v : r) p.breakpoints.push_back(v[0]);
  std::sort(p.breakpoints.begin(), p.breakpoints.end());
  const double scale = std::max(1.0, std::abs(p.breakpoints.back()) + std::abs(p.breakpoints.front()));
  p.breakpoints.erase(std::unique(p.breakpoints.begin(), p.breakpoints.end(),
                                  [&](double a, double b) { return std::abs(a - b) <= 1e-12 * scale; }),
                      p.breakpoints.end());
  if (p.breakpoints.size() < 2) throw DegenerateError("polygon has zero width");
  for (double u : p.breakpoints) {
    double lo = HUGE_VAL, hi = -HUGE_VAL;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const Point& a = r[i];
      const Point& b = r[(i + 1) % r.size()];
      if (std::abs(a[0] - u) <= 1e-12 * scale) {
        lo = std::min(lo, a[1]);
        hi = std::max(hi, a[1]);
      }
      if ((a[0] - u) * (b[0] - u) < 0.0) {
        const double y = a[1] + (u - a[0]) / (b[0] - a[0]) * (b[1] - a[1]);
        lo = std::min(lo, y);
        hi = std::max(hi, y);
      }
    }
    p.lower.push_back(lo);
    p.upper.push_back(hi);
  }
  return p;
}

namespace detail {
/// Polygon from chords {u} x [lo(u), hi(u)] at the breakpoints, rotated back.
inline ConvexBody polygon_from_chords(const ChordProfile& p, const std::vector<double>& lo,
                                      const std::vector<double>& hi) {
  std::vector<Point> pts;
  for (std::size_t k = 0; k < p.breakpoints.size(); ++k) {
    pts.push_back(rotate2(Point{p.breakpoints[k], lo[k]}, p.angle));
    pts.push_back(rotate2(Point{p.breakpoints[k], hi[k]}, p.angle));
  }
  return make_polygon(convex_hull_2d(std::move(pts)));
}
}  // namespace detail

/// Chords perpendicular to `angle` re-centred on the line through the origin
/// in direction `angle`.
inline ConvexBody steiner_symmetrize(const ConvexBody& poly, double angle) {
  const ChordProfile p = chord_profile(poly, angle);
  std::vector<double> lo, hi;
  for (std::size_t k = 0; k < p.breakpoints.size(); ++k) {
    const double half = 0.5 * (p.upper[k] - p.lower[k]);
    lo.push_back(-half);
    hi.push_back(half);
  }
  return detail::polygon_from_chords(p, lo, hi);
}

/// Vertical chords slid down onto y = line_y. The polygon must already lie in
/// {y >= line_y} (within 1e-9); it is not translated there.
inline ConvexBody blaschke_shake(const ConvexBody& poly, double line_y) {
  for (const auto& v : detail::polygon_of(poly).vertices)
    require(v[1] >= line_y - 1e-9, "polygon must lie in {y >= line_y} before shaking");
  const ChordProfile p = chord_profile(poly, 0.0);
  std::vector<double> lo, hi;
  for (std::size_t k = 0; k < p.breakpoints.size(); ++k) {
    lo.push_back(line_y);
    hi.push_back(line_y + (p.upper[k] - p.lower[k]));
  }
  return detail::polygon_from_chords(p, lo, hi);
}

/// Counter-clockwise and convex (collinear runs allowed).
inline bool is_convex_polygon(const std::vector<Point>& v) {
  if (v.size() < 3) return false;
  double scale = 0.0;
  for (const auto& p : v) scale = std::max({scale, std::abs(p[0]), std::abs(p[1])});
  const double tol = 1e-12 * std::max(1.0, scale * scale);
  for (std::size_t i = 0; i < v.size(); ++i)
    if (cross2(v[i], v[(i + 1) % v.size()], v[(i + 2) % v.size()]) < -tol) return false;
  return polygon_area(v) > 0.0;
}

/// Sutherland-Hodgman clip of a convex CCW polygon to {<n,x> >= c}.
inline std::vector<Point> clip_polygon(const std::vector<Point>& v, const Halfspace& h) {
  std::vector<Point> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point& a = v[i];
    const Point& b = v[(i + 1) % v.size()];
    const double la = h.level(a) - h.offset, lb = h.level(b) - h.offset;
    if (la >= 0.0) out.push_back(a);
    if ((la < 0.0) != (lb < 0.0)) out.push_back(a + (b - a) * (la / (la - lb)));
  }
  return out;
}

/// Distance from p to segment ab.
inline double segment_distance(const Point& p, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double t = std::clamp(dot(p - a, ab) / norm2(ab), 0.0, 1.0);
  return norm(p - (a + ab * t));
}

// ---------------------------------------------------------------------------
// Pinned ratios and paired comparisons

/// E vol conv(x, X_1, X_2) / area for the polygon.
inline MomentEstimate pinned_ratio_estimate(const ConvexBody& poly, const Point& x, std::uint64_t n, Seed seed) {
  const double area = polygon_area(detail::polygon_of(poly).vertices);
  const BodySampler sampler(poly);
  const BatchSums sums = run_tuples(n, seed, 1, [&](SampleStream& s, std::span<double> out) {
    const Point a = sampler.draw(s), b = sampler.draw(s);
    out[0] = 0.5 * std::abs(cross2(x, a, b)) / area;
  });
  return output_estimate(sums, 0, seed);
}

enum class ChordOp { kSteiner, kShake };

struct PairedRatios {
  MomentEstimate before;
  MomentEstimate after;
  MomentEstimate difference;  // after - before
};

/// Pinned ratio before and after a chord operation from shared draws: each
/// draw (u, y) in the polygon is moved to (u, y - alpha(u) + alpha'(u)),
/// which maps the uniform law on the polygon onto the uniform law on its
/// image. `param` is the angle for Steiner and line_y for shaking (whose
/// chords are vertical).
inline PairedRatios paired_pinned_ratios(const ConvexBody& poly, ChordOp op, double param, const Point& x_before,
                                         const Point& x_after, std::uint64_t n, Seed seed) {
  const double angle = op == ChordOp::kSteiner ? param : 0.0;
  const ChordProfile p = chord_profile(poly, angle);
  if (op == ChordOp::kShake)
    for (const auto& v : detail::polygon_of(poly).vertices)
      require(v[1] >= param - 1e-9, "polygon must lie in {y >= line_y} before shaking");
  const double area = polygon_area(detail::polygon_of(poly).vertices);
  const BodySampler sampler(poly);
  auto moved = [&](const Point& q) {
    Point r = detail::rotate2(q, -angle);
    const double u = std::clamp(r[0], p.u_min(), p.u_max());
    const double target = op == ChordOp::kSteiner ? -0.5 * p.length(u) : param;
    r[1] += target - p.alpha(u);
    return detail::rotate2(r, angle);
  };
  const BatchSums sums = run_tuples(n, seed, 2, [&](SampleStream& s, std::span<double> out) {
    const Point a = sampler.draw(s), b = sampler.draw(s);
    out[0] = 0.5 * std::abs(cross2(x_before, a, b)) / area;
    out[1] = 0.5 * std::abs(cross2(x_after, moved(a), moved(b))) / area;
  });
  const double diff[] = {-1.0, 1.0};
  return {output_estimate(sums, 0, seed), output_estimate(sums, 1, seed), linear_estimate(sums, diff, seed)};
}

// ---------------------------------------------------------------------------
// Pipeline

struct PlaneReport {
  ConvexBody framed;      // x at the origin, supporting line y = 0, body above
  ConvexBody symmetric;   // Steiner image about the y axis
  ConvexBody shaken;      // shaken onto y = 0
  MomentEstimate r0, r1, r2;
  MomentEstimate steiner_change;  // r1 - r0, paired
  MomentEstimate shake_change;    // r2 - r1, paired
  double bound = 0.0;             // 8/(9 pi^2)
  double sigma = 0.0;             // largest standard error among r0, r1, r2
  bool steiner_monotone = false;  // r0 >= r1 - 4 sigma
  bool shake_monotone = false;    // r1 - 4 sigma >= r2 - 8 sigma
  bool above_bound = false;       // r2 - 8 sigma >= bound - 12 sigma
  bool pass() const { return steiner_monotone && shake_monotone && above_bound; }
};

/// Rigid motion taking x to the origin and a supporting line at x to y = 0
/// with the polygon above. At a vertex the supporting line is the one whose
/// normal bisects the two edge normals.
inline ConvexBody frame_at_boundary_point(const ConvexBody& poly, const Point& x) {
  const auto& pg = detail::polygon_of(poly);
  require(x.dim() == 2, "boundary point must be 2D");
  const auto& v = pg.vertices;
  const std::size_t m = v.size();
  double best = HUGE_VAL;
  std::size_t edge = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dist = segment_distance(x, v[i], v[(i + 1) % m]);
    if (dist < best) {
      best = dist;
      edge = i;
    }
  }
  if (!(best <= 1e-9)) throw Error("point is not on the polygon boundary (distance > 1e-9)");
  Point inward = pg.edges[edge].normal;
  const Point& a = v[edge];
  const Point& b = v[(edge + 1) % m];
  if (norm(x - a) <= 1e-9) inward = normalized(inward + pg.edges[(edge + m - 1) % m].normal);
  if (norm(x - b) <= 1e-9) inward = normalized(inward + pg.edges[(edge + 1) % m].normal);
  // rotate the inward normal onto +y
  const double angle = std::numbers::pi / 2 - std::atan2(inward[1], inward[0]);
  std::vector<Point> out;
  for (const auto& p : v) out.push_back(detail::rotate2(p - x, angle));
  for (auto& p : out) p[1] = std::max(p[1], 0.0);  // clears -1e-16 round-off below the line
  return make_polygon(std::move(out));
}

inline PlaneReport plane_bound_pipeline(const ConvexBody& poly, const Point& x, std::uint64_t n, Seed seed) {
  const Point origin(2);
  ConvexBody framed = frame_at_boundary_point(poly, x);
  ConvexBody symmetric = steiner_symmetrize(framed, std::numbers::pi / 2);
  ConvexBody shaken = blaschke_shake(symmetric, 0.0);
  const PairedRatios s1 =
      paired_pinned_ratios(framed, ChordOp::kSteiner, std::numbers::pi / 2, origin, origin, n, seed.substream(0));
  const PairedRatios s2 = paired_pinned_ratios(symmetric, ChordOp::kShake, 0.0, origin, origin, n, seed.substream(1));
  PlaneReport r{std::move(framed), std::move(symmetric), std::move(shaken), {}, {}, {}, {}, {}};
  r.r0 = s1.before;
  r.r1 = s1.after;
  r.r2 = s2.after;
  r.steiner_change = s1.difference;
  r.shake_change = s2.difference;
  r.bound = 8.0 / (9.0 * std::numbers::pi * std::numbers::pi);
  r.sigma = std::max({r.r0.std_error, r.r1.std_error, r.r2.std_error});
  r.steiner_monotone = r.r0.mean >= r.r1.mean - 4.0 * r.sigma;
  r.shake_monotone = r.r1.mean - 4.0 * r.sigma >= r.r2.mean - 8.0 * r.sigma;
  r.above_bound = r.r2.mean - 8.0 * r.sigma >= r.bound - 12.0 * r.sigma;
  return r;
}

// ---------------------------------------------------------------------------
// Generators

/// Strictly convex m-gon: m sorted random angles on the unit circle, mapped
/// by a random linear map with singular values in [0.5, 2].
inline ConvexBody random_convex_polygon(int m, Seed seed) {
  require(m >= 3 && m <= 4096, "polygon needs 3 <= m <= 4096 vertices");
  SampleStream s(seed);
  for (;;) {
    std::vector<double> th;
    for (int i = 0; i < m; ++i) th.push_back(2.0 * std::numbers::pi * s.uniform());
    std::sort(th.begin(), th.end());
    const double rot = 2.0 * std::numbers::pi * s.uniform();
    const double sx = 0.5 + 1.5 * s.uniform(), sy = 0.5 + 1.5 * s.uniform();
    std::vector<Point> pts;
    for (double t : th) pts.push_back(detail::rotate2(Point{sx * std::cos(t), sy * std::sin(t)}, rot));
    try {
      ConvexBody b = make_polygon(pts);
      if (static_cast<int>(b.as<Polygon2D>()->vertices.size()) == m) return b;
    } catch (const Error&) {
    }
  }
}

/// Convex polygon symmetric about the y axis, lying in y >= 0 with the
/// origin on its boundary: mirrored random points of the right half, hulled,
/// translated so the bottom of the chord over u = 0 is the origin.
inline ConvexBody random_symmetric_polygon(int half_points, Seed seed) {
  require(half_points >= 2, "need at least two points per half");
  SampleStream s(seed);
  for (;;) {
    std::vector<Point> pts;
    for (int i = 0; i < half_points; ++i) {
      const double x = 0.05 + s.uniform(), y = 2.0 * s.uniform() - 1.0;
      pts.push_back(Point{x, y});
      pts.push_back(Point{-x, y});
    }
    std::vector<Point> hull = convex_hull_2d(pts);
    if (hull.size() < 3) continue;
    const ChordProfile p = chord_profile(make_polygon(hull), 0.0);
    const double shift = p.alpha(0.0);
    for (auto& v : hull) v[1] = std::max(v[1] - shift, 0.0);
    try {
      return make_polygon(hull);
    } catch (const Error&) {
    }
  }
}

/// Approximation of the half-disk {|x| <= 1, y >= 0} by a polygon with m
/// vertices on the arc (both endpoints included).
inline ConvexBody half_disk_polygon(int m = 64) {
  require(m >= 3, "half disk needs at least 3 vertices");
  std::vector<Point> pts;
  for (int k = 0; k < m; ++k) {
    const double t = std::numbers::pi * k / (m - 1);
    pts.push_back(Point{std::cos(t), std::sin(t)});
  }
  pts.front()[1] = 0.0;
  pts.back()[1] = 0.0;
  return make_polygon(std::move(pts));
}

/// Regular m-gon with unit circumradius centred at the origin.
inline ConvexBody regular_polygon(int m) {
  require(m >= 3, "regular polygon needs m >= 3");
  std::vector<Point> pts;
  for (int k = 0; k < m; ++k) {
    const double t = 2.0 * std::numbers::pi * k / m;
    pts.push_back(Point{std::cos(t), std::sin(t)});
  }
  return make_polygon(std::move(pts));
}

}  // namespace geomprob

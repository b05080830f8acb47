#pragma once

// Convex bodies: balls, H-polytopes, the half-ball-plus-cone family,
// halfspace cuts, affine images and planar polygons.
//
// Bodies are immutable values. Composite variants (Cut, AffineImage) hold
// their base through shared_ptr<const ConvexBody>, so copies are cheap and
// safe to share across threads.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "geomprob/exact.hpp"
#include "geomprob/linalg.hpp"

namespace geomprob {

/// {x : <normal, x> >= offset}, normal of unit length.
struct Halfspace {
  Point normal;
  double offset = 0.0;

  Halfspace() = default;
  Halfspace(Point v, double t) : normal(std::move(v)), offset(t) {
    require(std::abs(norm(normal) - 1.0) <= 1e-12, "halfspace normal must be a unit vector");
  }
  /// Normalizes (v, t) jointly, so the set is unchanged.
  static Halfspace from_normal(const Point& v, double t) {
    const double n = norm(v);
    require(n > 0.0, "halfspace normal must be non-zero");
    return Halfspace(v * (1.0 / n), t / n);
  }

  double level(const Point& p) const { return dot(normal, p); }
  bool contains(const Point& p, double tol = 0.0) const { return dot(normal, p) >= offset - tol; }
};

struct BoundingBox {
  Point lo;
  Point hi;

  int dim() const { return lo.dim(); }
  Point center() const { return 0.5 * (lo + hi); }
  double half_diagonal() const { return 0.5 * norm(hi - lo); }
  double volume() const {
    double v = 1.0;
    for (int i = 0; i < lo.dim(); ++i) v *= hi[i] - lo[i];
    return v;
  }
  bool contains(const Point& p, double tol = 0.0) const {
    for (int i = 0; i < lo.dim(); ++i)
      if (p[i] < lo[i] - tol || p[i] > hi[i] + tol) return false;
    return true;
  }
};

class ConvexBody;
using BodyPtr = std::shared_ptr<const ConvexBody>;

struct Ball {
  Point center;
  double radius = 1.0;
};

struct HPolytope {
  std::vector<Halfspace> halfspaces;
  BoundingBox bound;
  std::vector<Point> vertices;   // filled by vertex-based factories; empty otherwise
  std::optional<double> volume;  // known only for factory-built simplices/boxes
};

/// {x1 >= 0, |x| <= 1} union the cone from (-eps, 0, ..., 0) over the unit
/// (d-1)-disk at x1 = 0, truncated to x1 >= -eps + delta.
struct HalfBallCone {
  int dim = 2;
  double eps = 0.1;
  double delta = 0.0;

  Point apex() const {
    Point p(dim);
    p[0] = -eps + delta;
    return p;
  }
};

struct Cut {
  BodyPtr base;
  Halfspace h;
};

struct AffineImage {
  BodyPtr base;
  Matrix matrix;
  Point shift;
  Matrix inverse;  // cached
  double abs_det = 1.0;
};

/// Strictly convex, counter-clockwise.
struct Polygon2D {
  std::vector<Point> vertices;
  std::vector<Halfspace> edges;  // inward edge halfplanes, cached
};

class ConvexBody {
 public:
  using Shape = std::variant<Ball, HPolytope, HalfBallCone, Cut, AffineImage, Polygon2D>;

  explicit ConvexBody(Shape s);

  const Shape& shape() const { return shape_; }
  int dim() const { return dim_; }

  template <class T>
  const T* as() const {
    return std::get_if<T>(&shape_);
  }

 private:
  Shape shape_;
  int dim_ = 0;
};

// ---------------------------------------------------------------------------
// Membership

bool contains(const ConvexBody& body, const Point& p, double tol = 0.0);

namespace detail {

inline bool contains_unchecked(const ConvexBody& body, const Point& p, double tol);

inline bool contains_half_ball_cone(const HalfBallCone& c, const Point& p, double tol) {
  double r2 = 0.0;
  for (int i = 1; i < c.dim; ++i) r2 += p[i] * p[i];
  const double x1 = p[0];
  if (x1 >= -tol && std::sqrt(x1 * x1 + r2) <= 1.0 + tol) return true;
  if (x1 < -c.eps + c.delta - tol || x1 > tol) return false;
  return std::sqrt(r2) <= (x1 + c.eps) / c.eps + tol;
}

inline bool contains_unchecked(const ConvexBody& body, const Point& p, double tol) {
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) {
          return norm(p - s.center) <= s.radius + tol;
        } else if constexpr (std::is_same_v<T, HPolytope>) {
          for (const auto& h : s.halfspaces)
            if (!h.contains(p, tol)) return false;
          return true;
        } else if constexpr (std::is_same_v<T, HalfBallCone>) {
          return contains_half_ball_cone(s, p, tol);
        } else if constexpr (std::is_same_v<T, Cut>) {
          return s.h.contains(p, tol) && contains_unchecked(*s.base, p, tol);
        } else if constexpr (std::is_same_v<T, AffineImage>) {
          return contains_unchecked(*s.base, s.inverse * (p - s.shift), tol);
        } else {
          for (const auto& h : s.edges)
            if (!h.contains(p, tol)) return false;
          return true;
        }
      },
      body.shape());
}

}  // namespace detail

inline bool contains(const ConvexBody& body, const Point& p, double tol) {
  if (p.dim() != body.dim())
    throw Error("dimension mismatch: point has " + std::to_string(p.dim()) + ", body has " +
                std::to_string(body.dim()));
  return detail::contains_unchecked(body, p, tol);
}

// ---------------------------------------------------------------------------
// Polygon helpers

inline double cross2(const Point& o, const Point& a, const Point& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

inline double polygon_area(const std::vector<Point>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point& a = v[i];
    const Point& b = v[(i + 1) % v.size()];
    s += a[0] * b[1] - a[1] * b[0];
  }
  return 0.5 * s;
}

/// Vertices in counter-clockwise order form a strictly convex polygon.
inline bool is_strictly_convex(const std::vector<Point>& v) {
  if (v.size() < 3) return false;
  double scale = 0.0;
  for (const auto& p : v) scale = std::max({scale, std::abs(p[0]), std::abs(p[1])});
  const double tol = 1e-14 * std::max(1.0, scale * scale);
  for (std::size_t i = 0; i < v.size(); ++i)
    if (cross2(v[i], v[(i + 1) % v.size()], v[(i + 2) % v.size()]) <= tol) return false;
  // total turning of exactly one revolution
  return polygon_area(v) > 0.0;
}

/// Deduplicate (1e-9), sort CCW about the centroid, drop collinear vertices.
inline std::vector<Point> canonical_polygon(std::vector<Point> pts) {
  for (const auto& p : pts) require(p.dim() == 2 && p.finite(), "polygon vertices must be finite 2D points");
  std::vector<Point> uniq;
  for (const auto& p : pts) {
    const bool dup = std::any_of(uniq.begin(), uniq.end(), [&](const Point& q) {
      return std::abs(p[0] - q[0]) <= 1e-9 && std::abs(p[1] - q[1]) <= 1e-9;
    });
    if (!dup) uniq.push_back(p);
  }
  if (uniq.size() < 3) throw DegenerateError("polygon needs at least 3 distinct vertices");
  Point c(2);
  for (const auto& p : uniq) c += p;
  c *= 1.0 / static_cast<double>(uniq.size());
  std::sort(uniq.begin(), uniq.end(), [&](const Point& a, const Point& b) {
    return std::atan2(a[1] - c[1], a[0] - c[0]) < std::atan2(b[1] - c[1], b[0] - c[0]);
  });
  double scale = 0.0;
  for (const auto& p : uniq) scale = std::max({scale, std::abs(p[0]), std::abs(p[1])});
  const double tol = 1e-12 * std::max(1.0, scale * scale);
  bool changed = true;
  while (changed && uniq.size() >= 3) {
    changed = false;
    for (std::size_t i = 0; i < uniq.size(); ++i) {
      const std::size_t n = uniq.size();
      const Point& a = uniq[(i + n - 1) % n];
      const Point& b = uniq[i];
      const Point& d = uniq[(i + 1) % n];
      if (std::abs(cross2(a, b, d)) <= tol * std::max(1.0, norm(d - a))) {
        uniq.erase(uniq.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  if (uniq.size() < 3) throw DegenerateError("polygon is degenerate (collinear vertices)");
  // start at the lowest-then-leftmost vertex so equal polygons compare equal
  auto first = std::min_element(uniq.begin(), uniq.end(), [](const Point& a, const Point& b) {
    return a[1] < b[1] - 1e-12 || (std::abs(a[1] - b[1]) <= 1e-12 && a[0] < b[0]);
  });
  std::rotate(uniq.begin(), first, uniq.end());
  return uniq;
}

/// Andrew's monotone chain; returns CCW hull without collinear points.
inline std::vector<Point> convex_hull_2d(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(),
            [](const Point& a, const Point& b) { return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]); });
  if (pts.size() < 3) return pts;
  std::vector<Point> h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross2(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross2(h[k - 2], h[k - 1], pts[i - 1]) <= 0) --k;
    h[k++] = pts[i - 1];
  }
  h.resize(k - 1);
  return h;
}

// ---------------------------------------------------------------------------
// Construction

inline ConvexBody::ConvexBody(Shape s) : shape_(std::move(s)) {
  std::visit(
      [&](auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Ball>) {
          dim_ = b.center.dim();
          require(b.radius > 0.0 && std::isfinite(b.radius), "ball radius must be positive");
          require(b.center.finite(), "ball center must be finite");
        } else if constexpr (std::is_same_v<T, HPolytope>) {
          dim_ = b.bound.dim();
          require(!b.halfspaces.empty(), "polytope needs at least one halfspace");
          for (const auto& h : b.halfspaces) require(h.normal.dim() == dim_, "halfspace dimension mismatch");
          for (int i = 0; i < dim_; ++i) require(b.bound.lo[i] <= b.bound.hi[i], "bounding box must satisfy lo <= hi");
        } else if constexpr (std::is_same_v<T, HalfBallCone>) {
          dim_ = b.dim;
          require(b.dim >= 2 && b.dim <= kMaxDim, "half-ball-cone dimension must be in [2, 8]");
          require(b.eps > 0.0, "eps must be positive");
          require(b.delta >= 0.0 && b.delta < b.eps, "delta must lie in [0, eps)");
        } else if constexpr (std::is_same_v<T, Cut>) {
          require(b.base != nullptr, "cut needs a base body");
          dim_ = b.base->dim();
          require(b.h.normal.dim() == dim_, "cut halfspace dimension mismatch");
        } else if constexpr (std::is_same_v<T, AffineImage>) {
          require(b.base != nullptr, "affine image needs a base body");
          dim_ = b.base->dim();
          require(b.matrix.size() == dim_ && b.shift.dim() == dim_, "affine map dimension mismatch");
          const double det = determinant(b.matrix);
          if (!(std::abs(det) > 1e-12)) throw Error("affine map is singular");
          b.abs_det = std::abs(det);
          b.inverse = geomprob::inverse(b.matrix);
        } else {
          b.vertices = canonical_polygon(std::move(b.vertices));
          if (!is_strictly_convex(b.vertices)) throw Error("polygon is not strictly convex");
          dim_ = 2;
          b.edges.clear();
          for (std::size_t i = 0; i < b.vertices.size(); ++i) {
            const Point& a = b.vertices[i];
            const Point& c = b.vertices[(i + 1) % b.vertices.size()];
            // inward normal of a CCW edge is the left normal
            b.edges.push_back(Halfspace::from_normal(Point{-(c[1] - a[1]), c[0] - a[0]},
                                                     -(c[1] - a[1]) * a[0] + (c[0] - a[0]) * a[1]));
          }
        }
      },
      shape_);
  require(dim_ >= 1 && dim_ <= kMaxDim, "body dimension must be in [1, 8]");
}

inline BodyPtr share(ConvexBody b) { return std::make_shared<const ConvexBody>(std::move(b)); }

inline ConvexBody make_ball(Point center, double radius) { return ConvexBody(Ball{std::move(center), radius}); }
inline ConvexBody make_unit_ball(int d) { return make_ball(Point(d), 1.0); }

/// Unit half-ball {x1 >= 0}.
inline ConvexBody make_half_ball(int d) {
  return ConvexBody(Cut{share(make_unit_ball(d)), Halfspace(Point::unit(d, 0), 0.0)});
}

inline ConvexBody make_half_ball_cone(int d, double eps, double delta) {
  return ConvexBody(HalfBallCone{d, eps, delta});
}

inline ConvexBody make_box(const Point& lo, const Point& hi) {
  const int d = lo.dim();
  require(hi.dim() == d, "box corner dimension mismatch");
  HPolytope p;
  double vol = 1.0;
  for (int i = 0; i < d; ++i) {
    require(lo[i] < hi[i], "box must have positive extent");
    p.halfspaces.emplace_back(Point::unit(d, i), lo[i]);
    p.halfspaces.emplace_back(Point::unit(d, i) * -1.0, -hi[i]);
    vol *= hi[i] - lo[i];
  }
  p.bound = {lo, hi};
  p.volume = vol;
  for (int mask = 0; mask < (1 << d); ++mask) {
    Point v(d);
    for (int i = 0; i < d; ++i) v[i] = (mask >> i & 1) ? hi[i] : lo[i];
    p.vertices.push_back(v);
  }
  return ConvexBody(std::move(p));
}

/// [0,1]^d
inline ConvexBody make_cube(int d) {
  Point hi(d);
  for (int i = 0; i < d; ++i) hi[i] = 1.0;
  return make_box(Point(d), hi);
}

inline BoundingBox box_of_points(const std::vector<Point>& pts) {
  BoundingBox b{pts.front(), pts.front()};
  for (const auto& p : pts)
    for (int i = 0; i < p.dim(); ++i) {
      b.lo[i] = std::min(b.lo[i], p[i]);
      b.hi[i] = std::max(b.hi[i], p[i]);
    }
  return b;
}

inline double simplex_volume_of(const std::vector<Point>& v) {
  const int d = v.front().dim();
  Matrix e(d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) e(i, j) = v[static_cast<std::size_t>(j + 1)][i] - v[0][i];
  return std::abs(determinant(e)) / std::tgamma(d + 1.0);
}

namespace detail {
/// Halfspace through pts (d of them) oriented so `inside` is contained.
inline Halfspace facet_through(const std::vector<Point>& pts, const Point& inside) {
  const Point n = hyperplane_normal(pts);
  Halfspace h = Halfspace::from_normal(n, dot(n, pts.front()));
  if (!h.contains(inside)) h = Halfspace::from_normal(n * -1.0, -dot(n, pts.front()));
  return h;
}
}  // namespace detail

/// Simplex from d+1 affinely independent vertices.
inline ConvexBody make_simplex(std::vector<Point> verts) {
  require(!verts.empty(), "simplex needs vertices");
  const int d = verts.front().dim();
  require(static_cast<int>(verts.size()) == d + 1, "simplex needs exactly d+1 vertices");
  const double vol = simplex_volume_of(verts);
  if (!(vol > 1e-14)) throw DegenerateError("simplex vertices are affinely dependent");
  HPolytope p;
  for (int skip = 0; skip <= d; ++skip) {
    std::vector<Point> face;
    for (int i = 0; i <= d; ++i)
      if (i != skip) face.push_back(verts[static_cast<std::size_t>(i)]);
    p.halfspaces.push_back(detail::facet_through(face, verts[static_cast<std::size_t>(skip)]));
  }
  p.bound = box_of_points(verts);
  p.vertices = std::move(verts);
  p.volume = vol;
  return ConvexBody(std::move(p));
}

/// Regular simplex with unit circumradius, centred at the origin.
inline std::vector<Point> regular_simplex_vertices(int d) {
  require(d >= 1 && d <= kMaxDim, "dimension out of range");
  // e_1..e_d plus c(1,...,1) with c = (1 - sqrt(d+1))/d is regular with edge sqrt 2.
  std::vector<Point> v;
  for (int i = 0; i < d; ++i) v.push_back(Point::unit(d, i));
  Point last(d);
  const double c = (1.0 - std::sqrt(d + 1.0)) / d;
  for (int i = 0; i < d; ++i) last[i] = c;
  v.push_back(last);
  Point centroid(d);
  for (const auto& p : v) centroid += p;
  centroid *= 1.0 / (d + 1.0);
  const double r = norm(v.front() - centroid);
  for (auto& p : v) p = (p - centroid) * (1.0 / r);
  return v;
}

inline ConvexBody make_regular_simplex(int d) { return make_simplex(regular_simplex_vertices(d)); }

/// conv(simplex, apex) where apex lies beyond facet `facet` (the facet
/// opposite vertex `facet`) and beneath every other facet.
inline ConvexBody make_capped_simplex(const std::vector<Point>& verts, int facet, const Point& apex) {
  const int d = verts.front().dim();
  require(static_cast<int>(verts.size()) == d + 1, "capped simplex needs d+1 vertices");
  require(facet >= 0 && facet <= d, "facet index out of range");
  const ConvexBody base = make_simplex(verts);
  const auto& hs = base.as<HPolytope>()->halfspaces;
  require(!hs[static_cast<std::size_t>(facet)].contains(apex), "apex must lie beyond the capped facet");
  for (int i = 0; i <= d; ++i)
    if (i != facet)
      require(hs[static_cast<std::size_t>(i)].contains(apex), "apex must lie beneath the other facets");
  HPolytope p;
  for (int i = 0; i <= d; ++i)
    if (i != facet) p.halfspaces.push_back(hs[static_cast<std::size_t>(i)]);
  std::vector<Point> face;
  for (int i = 0; i <= d; ++i)
    if (i != facet) face.push_back(verts[static_cast<std::size_t>(i)]);
  double cap_volume = 0.0;
  {
    std::vector<Point> pyramid = face;
    pyramid.push_back(apex);
    cap_volume = simplex_volume_of(pyramid);
  }
  // new facets: apex with the capped facet minus one of its vertices
  for (std::size_t drop = 0; drop < face.size(); ++drop) {
    std::vector<Point> pts{apex};
    for (std::size_t i = 0; i < face.size(); ++i)
      if (i != drop) pts.push_back(face[i]);
    p.halfspaces.push_back(detail::facet_through(pts, face[drop]));
  }
  p.vertices = verts;
  p.vertices.push_back(apex);
  p.bound = box_of_points(p.vertices);
  p.volume = *base.as<HPolytope>()->volume + cap_volume;
  return ConvexBody(std::move(p));
}

inline ConvexBody make_hpolytope(std::vector<Halfspace> hs, BoundingBox bound) {
  HPolytope p;
  p.halfspaces = std::move(hs);
  p.bound = std::move(bound);
  return ConvexBody(std::move(p));
}

inline ConvexBody make_polygon(std::vector<Point> vertices) {
  Polygon2D p;
  p.vertices = std::move(vertices);
  return ConvexBody(std::move(p));
}

// ---------------------------------------------------------------------------
// Queries

inline bool is_centered_cut_of_ball(const Cut& c) {
  const auto* ball = c.base->as<Ball>();
  return ball != nullptr && std::abs(c.h.level(ball->center) - c.h.offset) <= 1e-12 * ball->radius;
}

inline std::optional<double> exact_volume(const ConvexBody& body) {
  return std::visit(
      [&](const auto& s) -> std::optional<double> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) {
          return exact::kappa(s.center.dim()).value() * std::pow(s.radius, s.center.dim());
        } else if constexpr (std::is_same_v<T, HPolytope>) {
          return s.volume;
        } else if constexpr (std::is_same_v<T, HalfBallCone>) {
          const int d = s.dim;
          const double rho = s.delta / s.eps;  // cone radius at the truncation
          return 0.5 * exact::kappa(d).value() +
                 exact::kappa(d - 1).value() * (s.eps / d) * (1.0 - std::pow(rho, d));
        } else if constexpr (std::is_same_v<T, Cut>) {
          if (is_centered_cut_of_ball(s)) {
            if (auto v = exact_volume(*s.base)) return 0.5 * *v;
          }
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, AffineImage>) {
          if (auto v = exact_volume(*s.base)) return s.abs_det * *v;
          return std::nullopt;
        } else {
          return polygon_area(s.vertices);
        }
      },
      body.shape());
}

/// sup over the body of <dir, x>, when it has a closed form.
inline std::optional<double> support(const ConvexBody& body, const Point& dir) {
  return std::visit(
      [&](const auto& s) -> std::optional<double> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) {
          return dot(dir, s.center) + s.radius * norm(dir);
        } else if constexpr (std::is_same_v<T, HPolytope> || std::is_same_v<T, Polygon2D>) {
          if (s.vertices.empty()) return std::nullopt;
          double m = -HUGE_VAL;
          for (const auto& v : s.vertices) m = std::max(m, dot(dir, v));
          return m;
        } else if constexpr (std::is_same_v<T, HalfBallCone>) {
          double lateral = 0.0;
          for (int i = 1; i < s.dim; ++i) lateral += dir[i] * dir[i];
          lateral = std::sqrt(lateral);
          const double half_ball = dir[0] >= 0.0 ? norm(dir) : lateral;
          const double rho = s.delta / s.eps;  // cone radius at the truncation
          const double tip = dir[0] * (-s.eps + s.delta) + rho * lateral;
          return std::max(half_ball, tip);
        } else if constexpr (std::is_same_v<T, Cut>) {
          if (!is_centered_cut_of_ball(s)) return std::nullopt;
          const auto& ball = *s.base->template as<Ball>();
          const double along = dot(dir, s.h.normal);
          const double reach = along >= 0.0 ? norm(dir) : norm(dir - s.h.normal * along);
          return dot(dir, ball.center) + ball.radius * reach;
        } else {
          const Point pulled = s.matrix.transposed() * dir;
          auto inner = support(*s.base, pulled);
          if (!inner) return std::nullopt;
          return *inner + dot(dir, s.shift);
        }
      },
      body.shape());
}

inline BoundingBox bounding_box(const ConvexBody& body) {
  return std::visit(
      [&](const auto& s) -> BoundingBox {
        using T = std::decay_t<decltype(s)>;
        const int d = body.dim();
        if constexpr (std::is_same_v<T, Ball>) {
          BoundingBox b{s.center, s.center};
          for (int i = 0; i < d; ++i) {
            b.lo[i] -= s.radius;
            b.hi[i] += s.radius;
          }
          return b;
        } else if constexpr (std::is_same_v<T, HPolytope>) {
          return s.bound;
        } else if constexpr (std::is_same_v<T, HalfBallCone>) {
          BoundingBox b{Point(d), Point(d)};
          b.lo[0] = -s.eps + s.delta;
          b.hi[0] = 1.0;
          for (int i = 1; i < d; ++i) {
            b.lo[i] = -1.0;
            b.hi[i] = 1.0;
          }
          return b;
        } else if constexpr (std::is_same_v<T, Cut>) {
          BoundingBox b = bounding_box(*s.base);
          for (int i = 0; i < d; ++i) {
            if (s.h.normal[i] == 1.0) b.lo[i] = std::max(b.lo[i], s.h.offset);
            if (s.h.normal[i] == -1.0) b.hi[i] = std::min(b.hi[i], -s.h.offset);
          }
          for (int i = 0; i < d; ++i) b.hi[i] = std::max(b.hi[i], b.lo[i]);
          return b;
        } else if constexpr (std::is_same_v<T, AffineImage>) {
          const BoundingBox base = bounding_box(*s.base);
          std::vector<Point> corners;
          for (int mask = 0; mask < (1 << d); ++mask) {
            Point c(d);
            for (int i = 0; i < d; ++i) c[i] = (mask >> i & 1) ? base.hi[i] : base.lo[i];
            corners.push_back(s.matrix * c + s.shift);
          }
          return box_of_points(corners);
        } else {
          return box_of_points(s.vertices);
        }
      },
      body.shape());
}

// ---------------------------------------------------------------------------
// Transformations

inline ConvexBody affine_image(const ConvexBody& body, const Matrix& m, const Point& b) {
  require(m.size() == body.dim() && b.dim() == body.dim(), "affine map dimension mismatch");
  if (!(std::abs(determinant(m)) > 1e-12)) throw Error("affine map is singular");
  if (const auto* inner = body.as<AffineImage>()) {
    return ConvexBody(AffineImage{inner->base, m * inner->matrix, m * inner->shift + b, {}, 1.0});
  }
  if (const auto* poly = body.as<HPolytope>()) {
    // {<n,x> >= c} maps to {<M^{-T} n, y> >= c + <M^{-T} n, b>}
    const Matrix inv_t = inverse(m).transposed();
    HPolytope p;
    for (const auto& h : poly->halfspaces) {
      const Point w = inv_t * h.normal;
      const double len = norm(w);
      p.halfspaces.emplace_back(w * (1.0 / len), (h.offset + dot(w, b)) / len);
    }
    std::vector<Point> corners = poly->vertices;
    if (corners.empty()) {
      const int d = body.dim();
      for (int mask = 0; mask < (1 << d); ++mask) {
        Point c(d);
        for (int i = 0; i < d; ++i) c[i] = (mask >> i & 1) ? poly->bound.hi[i] : poly->bound.lo[i];
        corners.push_back(c);
      }
    }
    for (auto& c : corners) c = m * c + b;
    p.bound = box_of_points(corners);
    if (!poly->vertices.empty()) p.vertices = std::move(corners);
    if (poly->volume) p.volume = *poly->volume * std::abs(determinant(m));
    return ConvexBody(std::move(p));
  }
  return ConvexBody(AffineImage{share(body), m, b, {}, 1.0});
}

namespace detail {
// Deterministic interior probe for bodies without a closed-form support:
// scan a regular grid of the bounding box. Defined here rather than in the
// sampling module to keep bodies free of random streams.
inline bool any_point_beyond(const ConvexBody& body, const Halfspace& h) {
  const BoundingBox box = bounding_box(body);
  const int d = body.dim();
  const int per_axis = d <= 2 ? 200 : d == 3 ? 40 : d == 4 ? 14 : 6;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  for (;;) {
    Point p(d);
    for (int i = 0; i < d; ++i)
      p[i] = box.lo[i] + (idx[static_cast<std::size_t>(i)] + 0.5) / per_axis * (box.hi[i] - box.lo[i]);
    if (h.level(p) > h.offset && contains(body, p)) return true;
    int i = 0;
    while (i < d && ++idx[static_cast<std::size_t>(i)] == per_axis) idx[static_cast<std::size_t>(i++)] = 0;
    if (i == d) return false;
  }
}
}  // namespace detail

/// body ∩ {<v,x> >= t}. Folds into HPolytope halfspace lists and into the
/// HalfBallCone truncation parameter; otherwise wraps in a Cut.
inline ConvexBody intersect_halfspace(const ConvexBody& body, const Halfspace& h) {
  require(h.normal.dim() == body.dim(), "halfspace dimension mismatch");
  const auto sup = support(body, h.normal);
  if (sup) {
    if (!(*sup > h.offset + 1e-12)) throw DegenerateError("cut leaves an empty interior");
  } else if (!detail::any_point_beyond(body, h)) {
    throw DegenerateError("cut leaves an empty interior");
  }
  if (const auto inf = support(body, h.normal * -1.0); inf && -*inf >= h.offset) return body;

  if (const auto* poly = body.as<HPolytope>()) {
    HPolytope p;
    p.halfspaces = poly->halfspaces;
    p.halfspaces.push_back(h);
    p.bound = poly->bound;
    const int d = body.dim();
    for (int i = 0; i < d; ++i) {
      if (h.normal[i] == 1.0) p.bound.lo[i] = std::max(p.bound.lo[i], h.offset);
      if (h.normal[i] == -1.0) p.bound.hi[i] = std::min(p.bound.hi[i], -h.offset);
    }
    if (!poly->vertices.empty()) {
      // kept vertices plus every crossing of a vertex pair span the cut polytope
      const auto& v = poly->vertices;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double li = h.level(v[i]) - h.offset;
        if (li >= 0.0) p.vertices.push_back(v[i]);
        for (std::size_t j = i + 1; j < v.size(); ++j) {
          const double lj = h.level(v[j]) - h.offset;
          if ((li < 0.0) != (lj < 0.0)) p.vertices.push_back(v[i] + (v[j] - v[i]) * (li / (li - lj)));
        }
      }
      p.bound = box_of_points(p.vertices);
    }
    return ConvexBody(std::move(p));
  }
  if (const auto* hbc = body.as<HalfBallCone>()) {
    const bool along_axis = h.normal[0] == 1.0;
    if (along_axis && h.offset < 0.0) {
      // offset > -eps + delta here, since the halfspace does not contain the body
      return make_half_ball_cone(hbc->dim, hbc->eps, h.offset + hbc->eps);
    }
  }
  return ConvexBody(Cut{share(body), h});
}

/// (K, L) = (HalfBallCone(d, eps, delta), HalfBallCone(d, eps, 0)), K ⊆ L.
inline std::pair<ConvexBody, ConvexBody> make_counterexample_pair(int d, double eps, double delta) {
  require(d >= 2 && d <= kMaxDim, "counterexample needs 2 <= d <= 8");
  require(eps > 0.0 && delta > 0.0 && delta < eps, "counterexample needs 0 < delta < eps");
  return {make_half_ball_cone(d, eps, delta), make_half_ball_cone(d, eps, 0.0)};
}

}  // namespace geomprob

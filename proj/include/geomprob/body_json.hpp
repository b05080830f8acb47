#pragma once

// JSON descriptions of bodies, {"type": ..., fields...}. See docs/formats.md.

#include <string>
#include <vector>

#include <json.hpp>

#include "geomprob/bodies.hpp"

namespace geomprob {

using Json = nlohmann::json;

namespace detail {

inline const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(std::string("body JSON is missing field '") + key + "'");
  return j.at(key);
}

inline double number(const Json& j, const char* what) {
  if (!j.is_number()) throw Error(std::string("body JSON field '") + what + "' must be a number");
  return j.get<double>();
}

inline int dimension(const Json& j) {
  const Json& d = field(j, "d");
  if (!d.is_number_integer()) throw Error("body JSON field 'd' must be an integer");
  const int v = d.get<int>();
  require(v >= 1 && v <= kMaxDim, "body JSON dimension must be in [1, 8]");
  return v;
}

inline Point point_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.empty() || j.size() > static_cast<std::size_t>(kMaxDim))
    throw Error(std::string("body JSON field '") + what + "' must be an array of 1 to 8 numbers");
  Point p(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) p[static_cast<int>(i)] = number(j[i], what);
  return p;
}

inline std::vector<Point> points_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw Error(std::string("body JSON field '") + what + "' must be an array of points");
  std::vector<Point> pts;
  for (const auto& e : j) pts.push_back(point_from_json(e, what));
  return pts;
}

inline Json point_to_json(const Point& p) {
  Json a = Json::array();
  for (int i = 0; i < p.dim(); ++i) a.push_back(p[i]);
  return a;
}

}  // namespace detail

/// Parses a body description; throws Error on anything malformed.
inline ConvexBody body_from_json(const Json& j) {
  using namespace detail;
  const Json& type_field = field(j, "type");
  if (!type_field.is_string()) throw Error("body JSON field 'type' must be a string");
  const std::string type = type_field.get<std::string>();
  if (type == "ball") {
    if (j.contains("d") && !j.contains("center")) return make_unit_ball(dimension(j));
    return make_ball(point_from_json(field(j, "center"), "center"), number(field(j, "radius"), "radius"));
  }
  if (type == "halfball") return make_half_ball(dimension(j));
  if (type == "halfballcone") {
    const double delta = j.contains("delta") ? number(j.at("delta"), "delta") : 0.0;
    return make_half_ball_cone(dimension(j), number(field(j, "eps"), "eps"), delta);
  }
  if (type == "cube") return make_cube(dimension(j));
  if (type == "box") {
    const Point lo = point_from_json(field(j, "lo"), "lo"), hi = point_from_json(field(j, "hi"), "hi");
    require(lo.dim() == hi.dim(), "box corners must have the same dimension");
    return make_box(lo, hi);
  }
  if (type == "simplex") return make_simplex(points_from_json(field(j, "vertices"), "vertices"));
  if (type == "regular_simplex") return make_regular_simplex(dimension(j));
  if (type == "polygon") {
    std::vector<Point> v = points_from_json(field(j, "vertices"), "vertices");
    for (const auto& p : v) require(p.dim() == 2, "polygon vertices must be 2D");
    return make_polygon(std::move(v));
  }
  if (type == "hpoly") {
    const Json& hs = field(j, "halfspaces");
    if (!hs.is_array() || hs.empty()) throw Error("body JSON field 'halfspaces' must be a non-empty array");
    std::vector<Halfspace> list;
    for (const auto& h : hs)
      list.push_back(Halfspace::from_normal(point_from_json(field(h, "normal"), "normal"),
                                            number(field(h, "offset"), "offset")));
    const Json& bound = field(j, "bound");
    BoundingBox box{point_from_json(field(bound, "lo"), "lo"), point_from_json(field(bound, "hi"), "hi")};
    for (const auto& h : list) require(h.normal.dim() == box.lo.dim(), "halfspace dimension mismatch");
    ConvexBody body = make_hpolytope(std::move(list), std::move(box));
    // optional extras written by body_to_json for factory-built polytopes
    if (j.contains("vertices") || j.contains("volume")) {
      HPolytope p = *body.as<HPolytope>();
      if (j.contains("vertices")) p.vertices = points_from_json(j.at("vertices"), "vertices");
      if (j.contains("volume")) p.volume = number(j.at("volume"), "volume");
      body = ConvexBody(std::move(p));
    }
    return body;
  }
  if (type == "cut") {
    const ConvexBody base = body_from_json(field(j, "base"));
    return intersect_halfspace(base, Halfspace::from_normal(point_from_json(field(j, "normal"), "normal"),
                                                            number(field(j, "offset"), "offset")));
  }
  if (type == "affine") {
    const ConvexBody base = body_from_json(field(j, "base"));
    const int d = base.dim();
    const Json& rows = field(j, "matrix");
    if (!rows.is_array() || static_cast<int>(rows.size()) != d) throw Error("affine matrix must have d rows");
    Matrix m(d);
    for (int i = 0; i < d; ++i) {
      const Point row = point_from_json(rows[static_cast<std::size_t>(i)], "matrix");
      require(row.dim() == d, "affine matrix must be d x d");
      for (int k = 0; k < d; ++k) m(i, k) = row[k];
    }
    const Point shift = j.contains("shift") ? point_from_json(j.at("shift"), "shift") : Point(d);
    return affine_image(base, m, shift);
  }
  throw Error("unknown body type '" + type + "'");
}

/// Parses JSON text; syntax errors are reported as Error.
inline ConvexBody body_from_json_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed body JSON: ") + e.what());
  }
  return body_from_json(j);
}

/// Polygon and vertex-carrying polytope descriptions.
inline Json body_to_json(const ConvexBody& body) {
  using detail::point_to_json;
  if (const auto* p = body.as<Polygon2D>()) {
    Json v = Json::array();
    for (const auto& q : p->vertices) v.push_back(point_to_json(q));
    return {{"type", "polygon"}, {"vertices", v}};
  }
  if (const auto* b = body.as<Ball>()) return {{"type", "ball"}, {"center", point_to_json(b->center)}, {"radius", b->radius}};
  if (const auto* c = body.as<HalfBallCone>())
    return {{"type", "halfballcone"}, {"d", c->dim}, {"eps", c->eps}, {"delta", c->delta}};
  if (const auto* h = body.as<HPolytope>()) {
    Json hs = Json::array();
    for (const auto& s : h->halfspaces) hs.push_back({{"normal", point_to_json(s.normal)}, {"offset", s.offset}});
    Json out = {{"type", "hpoly"},
                {"halfspaces", hs},
                {"bound", {{"lo", point_to_json(h->bound.lo)}, {"hi", point_to_json(h->bound.hi)}}}};
    if (!h->vertices.empty()) {
      Json v = Json::array();
      for (const auto& q : h->vertices) v.push_back(point_to_json(q));
      out["vertices"] = v;
    }
    if (h->volume) out["volume"] = *h->volume;
    return out;
  }
  if (const auto* c = body.as<Cut>()) {
    return {{"type", "cut"}, {"base", body_to_json(*c->base)}, {"normal", point_to_json(c->h.normal)}, {"offset", c->h.offset}};
  }
  const auto& a = *body.as<AffineImage>();
  Json rows = Json::array();
  for (int i = 0; i < a.matrix.size(); ++i) rows.push_back(point_to_json(a.matrix.row(i)));
  return {{"type", "affine"}, {"base", body_to_json(*a.base)}, {"matrix", rows}, {"shift", point_to_json(a.shift)}};
}

}  // namespace geomprob

#include "emdet/geometry.hpp"

#include <algorithm>
#include <limits>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

namespace emdet::geom {

namespace {

double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double shoelace(const std::vector<Point>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point& a = v[i];
    const Point& b = v[(i + 1) % v.size()];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

bool on_segment(Point p, Point a, Point b) {
  return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
         std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
}

// Proper crossing or collinear overlap between two segments.
bool segments_cross(Point a1, Point a2, Point b1, Point b2) {
  const double d1 = cross(b1, b2, a1);
  const double d2 = cross(b1, b2, a2);
  const double d3 = cross(a1, a2, b1);
  const double d4 = cross(a1, a2, b2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  // Collinear overlap of positive length.
  if (d1 == 0 && d2 == 0 && d3 == 0 && d4 == 0) {
    double lo = std::max(std::min(a1.x, a2.x), std::min(b1.x, b2.x));
    double hi = std::min(std::max(a1.x, a2.x), std::max(b1.x, b2.x));
    double lo_y = std::max(std::min(a1.y, a2.y), std::min(b1.y, b2.y));
    double hi_y = std::min(std::max(a1.y, a2.y), std::max(b1.y, b2.y));
    if (hi - lo > 1e-12 || hi_y - lo_y > 1e-12) {
      // Overlap only counts when the ranges actually intersect.
      if (on_segment(a1, b1, b2) || on_segment(a2, b1, b2) ||
          on_segment(b1, a1, a2) || on_segment(b2, a1, a2))
        return true;
    }
  }
  return false;
}

namespace bg = boost::geometry;
using BgPoint = bg::model::d2::point_xy<double>;
using BgPolygon = bg::model::polygon<BgPoint, /*Clockwise=*/false, /*Closed=*/true>;

BgPolygon to_bg(const Polygon& p) {
  BgPolygon out;
  for (const Point& v : p.vertices()) bg::append(out.outer(), BgPoint(v.x, v.y));
  const Point& first = p.vertices().front();
  bg::append(out.outer(), BgPoint(first.x, first.y));
  return out;
}

}  // namespace

bool polyline_self_intersects(const std::vector<Point>& pts) {
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Skip adjacent edges (sharing a vertex), including the wrap-around pair.
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]))
        return true;
    }
  }
  return false;
}

bool point_in_polygon(Point p, const std::vector<Point>& verts) {
  bool inside = false;
  const std::size_t n = verts.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = verts[i];
    const Point& b = verts[j];
    if ((a.y > p.y) != (b.y > p.y) &&
        p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x)
      inside = !inside;
  }
  return inside;
}

Polygon::Polygon(std::vector<Point> vertices) {
  for (const Point& v : vertices) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y))
      throw std::invalid_argument("Polygon: non-finite vertex");
  }
  // Drop duplicate consecutive vertices (closing pair included).
  std::vector<Point> v;
  for (const Point& p : vertices) {
    if (v.empty() || dist(v.back(), p) > 1e-12) v.push_back(p);
  }
  while (v.size() > 1 && dist(v.front(), v.back()) <= 1e-12) v.pop_back();
  if (v.size() < 3) throw std::invalid_argument("Polygon: fewer than 3 distinct vertices");
  const double a = shoelace(v);
  if (std::abs(a) < 1e-12) throw std::invalid_argument("Polygon: zero signed area");
  if (a < 0) std::reverse(v.begin(), v.end());
  if (polyline_self_intersects(v))
    throw std::invalid_argument("Polygon: self-intersecting");
  verts_ = std::move(v);
}

double Polygon::area() const { return shoelace(verts_); }

double Polygon::perimeter() const {
  double s = 0.0;
  for (std::size_t i = 0; i < verts_.size(); ++i)
    s += dist(verts_[i], verts_[(i + 1) % verts_.size()]);
  return s;
}

Box bbox_of_polygon(const Polygon& poly) {
  Box b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
        -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Point& v : poly.vertices()) {
    b.x_min = std::min(b.x_min, v.x);
    b.y_min = std::min(b.y_min, v.y);
    b.x_max = std::max(b.x_max, v.x);
    b.y_max = std::max(b.y_max, v.y);
  }
  return b;
}

ExtremePoints extreme_points(const Polygon& poly) {
  const std::vector<Point>& v = poly.vertices();
  std::size_t it = 0, il = 0, ib = 0, ir = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i].y < v[it].y) it = i;
    if (v[i].x < v[il].x) il = i;
    if (v[i].y > v[ib].y) ib = i;
    if (v[i].x > v[ir].x) ir = i;
  }
  return {v[it], v[il], v[ib], v[ir]};
}

Polygon diamond_from_box(const Box& b) {
  if (b.degenerate()) throw std::invalid_argument("diamond_from_box: degenerate box");
  const Point c = b.center();
  return Polygon({{c.x, b.y_min}, {b.x_max, c.y}, {c.x, b.y_max}, {b.x_min, c.y}});
}

Polygon octagon_from_extremes(const ExtremePoints& ex, const Box& b) {
  if (b.degenerate()) throw std::invalid_argument("octagon_from_extremes: degenerate box");
  const double hx = b.width() / 8.0;   // half-length of horizontal extensions
  const double hy = b.height() / 8.0;  // half-length of vertical extensions
  auto cx = [&](double x) { return std::clamp(x, b.x_min, b.x_max); };
  auto cy = [&](double y) { return std::clamp(y, b.y_min, b.y_max); };
  std::vector<Point> v{
      {cx(ex.top.x - hx), ex.top.y},    {cx(ex.top.x + hx), ex.top.y},
      {ex.right.x, cy(ex.right.y - hy)}, {ex.right.x, cy(ex.right.y + hy)},
      {cx(ex.bottom.x + hx), ex.bottom.y}, {cx(ex.bottom.x - hx), ex.bottom.y},
      {ex.left.x, cy(ex.left.y + hy)},  {ex.left.x, cy(ex.left.y - hy)}};
  return Polygon(std::move(v));  // duplicate consecutive vertices dropped there
}

Contour resample_contour(const Polygon& poly, int n) {
  if (n < 3) throw std::invalid_argument("resample_contour: n < 3");
  const std::vector<Point>& v = poly.vertices();
  // Start at the top extreme vertex (min y, smallest index on ties).
  std::size_t start = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i].y < v[start].y) start = i;

  const std::size_t m = v.size();
  std::vector<double> seg(m);
  double perim = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    seg[i] = dist(v[(start + i) % m], v[(start + i + 1) % m]);
    perim += seg[i];
  }
  const double step = perim / n;
  Contour out;
  out.points.reserve(n);
  std::size_t e = 0;
  double walked = 0.0;  // arc length at the start of edge e
  for (int k = 0; k < n; ++k) {
    const double target = k * step;
    while (e + 1 < m && walked + seg[e] <= target) {
      walked += seg[e];
      ++e;
    }
    const Point a = v[(start + e) % m];
    const Point b = v[(start + e + 1) % m];
    const double t = seg[e] > 0 ? (target - walked) / seg[e] : 0.0;
    out.points.push_back(a + t * (b - a));
  }
  return out;
}

double polygon_iou(const Polygon& a, const Polygon& b) {
  const BgPolygon pa = to_bg(a);
  const BgPolygon pb = to_bg(b);
  std::vector<BgPolygon> inter;
  bg::intersection(pa, pb, inter);
  double ai = 0.0;
  for (const BgPolygon& p : inter) ai += bg::area(p);
  const double au = a.area() + b.area() - ai;
  if (au <= 0.0) return 0.0;
  return std::clamp(ai / au, 0.0, 1.0);
}

double box_iou(const Box& a, const Box& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

Box expand_box(const Box& b, double fx, double fy) {
  if (fx < 0.0 || fy < 0.0) throw std::invalid_argument("expand_box: negative factor");
  const Point c = b.center();
  const double hw = 0.5 * b.width() * (1.0 + fx);
  const double hh = 0.5 * b.height() * (1.0 + fy);
  return {c.x - hw, c.y - hh, c.x + hw, c.y + hh};
}

}  // namespace emdet::geom

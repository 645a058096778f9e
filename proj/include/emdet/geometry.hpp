#ifndef EMDET_GEOMETRY_HPP_
#define EMDET_GEOMETRY_HPP_

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace emdet::geom {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Box {
  double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  double diag() const { return std::hypot(width(), height()); }
  Point center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }
  bool degenerate() const { return width() <= 0.0 || height() <= 0.0; }
};

/// Simple closed polygon, stored counter-clockwise. Construction canonicalizes
/// orientation, drops duplicate consecutive vertices, and rejects degenerate or
/// self-intersecting input.
class Polygon {
 public:
  explicit Polygon(std::vector<Point> vertices);

  const std::vector<Point>& vertices() const { return verts_; }
  std::size_t size() const { return verts_.size(); }

  double area() const;       // positive (CCW)
  double perimeter() const;

 private:
  std::vector<Point> verts_;
};

struct ExtremePoints {
  Point top, left, bottom, right;
};

/// Ordered contour sample; produced by resample_contour (n points, uniform
/// arc-length spacing along the source polygon).
struct Contour {
  std::vector<Point> points;
};

Box bbox_of_polygon(const Polygon& poly);

/// Boundary vertices with minimal y (top), minimal x (left), maximal y
/// (bottom), maximal x (right). Ties broken by smallest vertex index.
ExtremePoints extreme_points(const Polygon& poly);

/// 4-gon through the midpoints of the four box edges.
Polygon diamond_from_box(const Box& b);

/// Octagon built by extending a segment at each extreme point parallel to its
/// box edge (half-length = 1/8 of that edge, clipped to the box) and connecting
/// the endpoints in boundary order.
Polygon octagon_from_extremes(const ExtremePoints& ex, const Box& b);

/// n points at uniform arc-length spacing, starting at the top extreme vertex,
/// preserving orientation.
Contour resample_contour(const Polygon& poly, int n = 128);

/// Exact-clipping intersection-over-union of two simple polygons.
double polygon_iou(const Polygon& a, const Polygon& b);

double box_iou(const Box& a, const Box& b);

/// Width scaled by (1+fx), height by (1+fy), center fixed.
Box expand_box(const Box& b, double fx, double fy);

/// True when the closed polyline has a proper self crossing.
bool polyline_self_intersects(const std::vector<Point>& pts);

bool point_in_polygon(Point p, const std::vector<Point>& verts);

}  // namespace emdet::geom

#endif

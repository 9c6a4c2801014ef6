#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace regio {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }
};

struct BoundingBox {
  double min_x, min_y, max_x, max_y;
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  double diagonal() const;
};

BoundingBox bounding_box(std::span<const Point> pts);

/// Signed ring area (shoelace); positive for counterclockwise rings.
double signed_area(std::span<const Point> ring);

/// Total edge length of a closed ring (first vertex implicitly follows last).
double ring_perimeter(std::span<const Point> ring);

/// Arithmetic mean of the vertices.
Point vertex_centroid(std::span<const Point> ring);

/// Area-weighted polygon centroid; falls back to the vertex mean for
/// near-zero areas.
Point polygon_centroid(std::span<const Point> ring);

/// Convex hull in counterclockwise order (monotone chain, collinear points
/// dropped). Throws std::invalid_argument for fewer than 3 points or an
/// all-collinear input.
std::vector<Point> convex_hull(std::span<const Point> pts);

/// Even-odd point-in-ring test. Points exactly on the boundary may land on
/// either side; callers needing exactness must not rely on boundary points.
bool point_in_ring(const Point& p, std::span<const Point> ring);

/// Twice the signed area of triangle (a, b, c); > 0 for counterclockwise.
double cross(const Point& a, const Point& b, const Point& c);

double distance(const Point& a, const Point& b);

}  // namespace regio

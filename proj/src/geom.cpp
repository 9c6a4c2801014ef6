#include "regio/geom.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace regio {

double BoundingBox::diagonal() const { return std::hypot(width(), height()); }

BoundingBox bounding_box(std::span<const Point> pts) {
  if (pts.empty()) throw std::invalid_argument("bounding_box: empty point set");
  BoundingBox bb{pts[0].x, pts[0].y, pts[0].x, pts[0].y};
  for (const auto& p : pts) {
    bb.min_x = std::min(bb.min_x, p.x);
    bb.min_y = std::min(bb.min_y, p.y);
    bb.max_x = std::max(bb.max_x, p.x);
    bb.max_y = std::max(bb.max_y, p.y);
  }
  return bb;
}

double signed_area(std::span<const Point> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    s += ring[j].x * ring[i].y - ring[i].x * ring[j].y;
  }
  return 0.5 * s;
}

double ring_perimeter(std::span<const Point> ring) {
  const std::size_t n = ring.size();
  if (n < 2) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    s += std::hypot(ring[i].x - ring[j].x, ring[i].y - ring[j].y);
  }
  return s;
}

Point vertex_centroid(std::span<const Point> ring) {
  Point c;
  for (const auto& p : ring) {
    c.x += p.x;
    c.y += p.y;
  }
  const double n = static_cast<double>(ring.size());
  return {c.x / n, c.y / n};
}

Point polygon_centroid(std::span<const Point> ring) {
  const std::size_t n = ring.size();
  const double a = signed_area(ring);
  if (n < 3 || std::abs(a) < 1e-300) return vertex_centroid(ring);
  double cx = 0.0, cy = 0.0;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const double w = ring[j].x * ring[i].y - ring[i].x * ring[j].y;
    cx += (ring[j].x + ring[i].x) * w;
    cy += (ring[j].y + ring[i].y) * w;
  }
  return {cx / (6.0 * a), cy / (6.0 * a)};
}

double cross(const Point& a, const Point& b, const Point& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::vector<Point> convex_hull(std::span<const Point> pts) {
  if (pts.size() < 3) throw std::invalid_argument("convex_hull: need at least 3 points");
  std::vector<Point> p(pts.begin(), pts.end());
  std::sort(p.begin(), p.end(), [](const Point& a, const Point& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  p.erase(std::unique(p.begin(), p.end()), p.end());
  const std::size_t n = p.size();
  if (n < 3) throw std::invalid_argument("convex_hull: degenerate input");

  std::vector<Point> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {  // lower
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p[i]) <= 0.0) --k;
    hull[k++] = p[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper
    while (k >= t && cross(hull[k - 2], hull[k - 1], p[i]) <= 0.0) --k;
    hull[k++] = p[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) throw std::invalid_argument("convex_hull: collinear input");
  return hull;
}

bool point_in_ring(const Point& p, std::span<const Point> ring) {
  const std::size_t n = ring.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const bool straddles = (ring[i].y > p.y) != (ring[j].y > p.y);
    if (straddles) {
      const double x_at =
          ring[j].x + (ring[i].x - ring[j].x) * (p.y - ring[j].y) / (ring[i].y - ring[j].y);
      if (p.x < x_at) inside = !inside;
    }
  }
  return inside;
}

}  // namespace regio

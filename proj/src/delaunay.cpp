#include "regio/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace regio {

namespace {

constexpr double kRelTol = 1e-12;

// > 0: p strictly inside circumcircle of CCW (a, b, c); ties count as outside.
double incircle(const Point& a, const Point& b, const Point& c, const Point& p, double* mag) {
  const double adx = a.x - p.x, ady = a.y - p.y;
  const double bdx = b.x - p.x, bdy = b.y - p.y;
  const double cdx = c.x - p.x, cdy = c.y - p.y;
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  const double det = adx * (bdy * cd - cdy * bd) - ady * (bdx * cd - cdx * bd) +
                     ad * (bdx * cdy - cdx * bdy);
  *mag = std::abs(adx) * (std::abs(bdy * cd) + std::abs(cdy * bd)) +
         std::abs(ady) * (std::abs(bdx * cd) + std::abs(cdx * bd)) +
         ad * (std::abs(bdx * cdy) + std::abs(cdx * bdy));
  return det;
}

double orient(const Point& a, const Point& b, const Point& c, double* mag) {
  const double l = (b.x - a.x) * (c.y - a.y);
  const double r = (b.y - a.y) * (c.x - a.x);
  *mag = std::abs(l) + std::abs(r);
  return l - r;
}

struct Tri {
  std::array<std::int32_t, 3> v;   // CCW
  std::array<std::int32_t, 3> nb;  // nb[i] faces the edge (v[i], v[(i+1)%3]); -1 = none
  bool alive = true;
};

class Builder {
 public:
  explicit Builder(std::vector<Point> pts) : pts_(std::move(pts)) {}

  std::vector<std::array<std::int32_t, 3>> run() {
    const std::int32_t n = static_cast<std::int32_t>(pts_.size());
    make_super_triangle();
    for (std::int32_t i = 0; i < n; ++i) insert(i);
    std::vector<std::array<std::int32_t, 3>> out;
    for (const Tri& t : tris_) {
      if (!t.alive) continue;
      if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
      out.push_back(t.v);
    }
    return out;
  }

 private:
  void make_super_triangle() {
    const BoundingBox bb = bounding_box(pts_);
    const double cx = 0.5 * (bb.min_x + bb.max_x);
    const double cy = 0.5 * (bb.min_y + bb.max_y);
    const double r = std::max(bb.diagonal(), 1.0) * 64.0;
    // Slightly irrational aspect to dodge accidental degeneracies with grids.
    pts_.push_back({cx - 1.7320508 * r, cy - r});
    pts_.push_back({cx + 1.7320508 * r, cy - r});
    pts_.push_back({cx, cy + 1.9318517 * r});
    const std::int32_t s = static_cast<std::int32_t>(pts_.size());
    tris_.push_back({{s - 3, s - 2, s - 1}, {-1, -1, -1}, true});
    last_ = 0;
  }

  bool in_circumcircle(const Tri& t, const Point& p) const {
    double mag = 0.0;
    const double det = incircle(pts_[t.v[0]], pts_[t.v[1]], pts_[t.v[2]], p, &mag);
    return det > kRelTol * mag;
  }

  // Triangle whose closure contains p: walk from the last created triangle,
  // with a linear-scan fallback if the walk cycles on degenerate input.
  std::int32_t locate(const Point& p) const {
    std::int32_t cur = last_;
    std::size_t steps = 0;
    const std::size_t cap = 4 * tris_.size() + 64;
    while (steps++ < cap) {
      const Tri& t = tris_[cur];
      std::int32_t next = -1;
      for (int e = 0; e < 3; ++e) {
        double mag = 0.0;
        const double o = orient(pts_[t.v[e]], pts_[t.v[(e + 1) % 3]], p, &mag);
        if (o < -kRelTol * mag) {
          next = t.nb[e];
          break;
        }
      }
      if (next == -1) return cur;
      cur = next;
    }
    for (std::size_t i = 0; i < tris_.size(); ++i) {
      const Tri& t = tris_[i];
      if (!t.alive) continue;
      bool inside = true;
      for (int e = 0; e < 3 && inside; ++e) {
        double mag = 0.0;
        if (orient(pts_[t.v[e]], pts_[t.v[(e + 1) % 3]], p, &mag) < -kRelTol * mag) inside = false;
      }
      if (inside) return static_cast<std::int32_t>(i);
    }
    throw std::runtime_error("delaunay: point location failed");
  }

  void insert(std::int32_t pi) {
    const Point& p = pts_[pi];
    const std::int32_t seed = locate(p);

    // Grow the cavity of triangles whose circumcircle strictly contains p.
    cavity_.clear();
    boundary_.clear();
    stack_.clear();
    stack_.push_back(seed);
    tris_[seed].alive = false;
    cavity_.push_back(seed);
    while (!stack_.empty()) {
      const std::int32_t ti = stack_.back();
      stack_.pop_back();
      const Tri t = tris_[ti];
      for (int e = 0; e < 3; ++e) {
        const std::int32_t ni = t.nb[e];
        if (ni >= 0 && !tris_[ni].alive) continue;  // already in cavity
        if (ni >= 0 && in_circumcircle(tris_[ni], p)) {
          tris_[ni].alive = false;
          cavity_.push_back(ni);
          stack_.push_back(ni);
        } else {
          boundary_.push_back({t.v[e], t.v[(e + 1) % 3], ni});
        }
      }
    }

    // Re-triangulate: fan from p over the boundary polygon.
    first_new_.clear();
    const std::size_t base = tris_.size();
    for (std::size_t b = 0; b < boundary_.size(); ++b) {
      const auto& [ea, eb, outside] = boundary_[b];
      Tri nt;
      nt.v = {pi, ea, eb};
      nt.nb = {-1, outside, -1};  // nb[1] faces edge (ea, eb)
      const std::int32_t nti = static_cast<std::int32_t>(tris_.size());
      if (outside >= 0) {
        Tri& o = tris_[outside];
        for (int e = 0; e < 3; ++e) {
          if ((o.v[e] == eb && o.v[(e + 1) % 3] == ea)) o.nb[e] = nti;
        }
      }
      first_new_.push_back({ea, nti});
      tris_.push_back(nt);
    }
    // Link new triangles around p: triangle with edge (p, ea) pairs with the
    // one whose boundary edge ends at ea.
    std::sort(first_new_.begin(), first_new_.end());
    for (std::size_t b = 0; b < boundary_.size(); ++b) {
      const std::int32_t ti = static_cast<std::int32_t>(base + b);
      Tri& t = tris_[ti];
      // edge (v[2]=eb, v[0]=p) belongs to the triangle whose ea == eb
      const std::int32_t eb = t.v[2];
      const auto it = std::lower_bound(first_new_.begin(), first_new_.end(),
                                       std::pair<std::int32_t, std::int32_t>{eb, -1});
      t.nb[2] = it->second;       // across (eb, p)
      tris_[it->second].nb[0] = ti;  // across (p, eb) on the partner
    }
    last_ = static_cast<std::int32_t>(base);
  }

  std::vector<Point> pts_;
  std::vector<Tri> tris_;
  std::vector<std::int32_t> cavity_;
  std::vector<std::int32_t> stack_;
  std::vector<std::tuple<std::int32_t, std::int32_t, std::int32_t>> boundary_;
  std::vector<std::pair<std::int32_t, std::int32_t>> first_new_;
  std::int32_t last_ = 0;
};

}  // namespace

std::vector<std::pair<std::int32_t, std::int32_t>> Triangulation::unique_edges() const {
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  edges.reserve(triangles.size() * 3);
  for (const auto& t : triangles) {
    for (int e = 0; e < 3; ++e) {
      const std::int32_t a = t[e];
      const std::int32_t b = t[(e + 1) % 3];
      edges.emplace_back(std::min(a, b), std::max(a, b));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

Triangulation delaunay_triangulate(std::span<const Point> pts) {
  if (pts.size() < 3) throw std::invalid_argument("delaunay: need at least 3 points");

  // Lexicographic insertion order; duplicates are an input error.
  std::vector<std::int32_t> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    return pts[a].x < pts[b].x || (pts[a].x == pts[b].x && pts[a].y < pts[b].y);
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (pts[order[i]] == pts[order[i - 1]])
      throw std::invalid_argument("delaunay: duplicate points");
  }

  // All-collinear check.
  bool collinear = true;
  for (std::size_t i = 2; i < order.size() && collinear; ++i) {
    double mag = 0.0;
    const double o = orient(pts[order[0]], pts[order[1]], pts[order[i]], &mag);
    if (std::abs(o) > kRelTol * mag) collinear = false;
  }
  if (collinear) throw std::invalid_argument("delaunay: all points collinear");

  std::vector<Point> sorted(pts.size());
  for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = pts[order[i]];

  Builder builder(std::move(sorted));
  auto tri_sorted = builder.run();

  Triangulation result;
  result.points.assign(pts.begin(), pts.end());
  result.triangles.reserve(tri_sorted.size());
  for (auto& t : tri_sorted) {
    result.triangles.push_back({order[t[0]], order[t[1]], order[t[2]]});
  }
  return result;
}

}  // namespace regio

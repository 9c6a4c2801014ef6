#include "regio/region_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "regio/delaunay.hpp"

namespace regio {

namespace {

constexpr double kSnapRel = 1e-9;

std::int64_t key_of(std::int64_t a, std::int64_t b) { return (a << 21) ^ (b + 0x2aaaaaaaaLL); }

/// Exact-match vertex interning with epsilon-tolerant cell probing.
class PointInterner {
 public:
  explicit PointInterner(double eps) : eps_(eps) {}

  std::int32_t intern(const Point& p) {
    const std::int64_t cx = static_cast<std::int64_t>(std::floor(p.x / eps_));
    const std::int64_t cy = static_cast<std::int64_t>(std::floor(p.y / eps_));
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto it = cells_.find(key_of(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (const std::int32_t c : it->second) {
          if (std::abs(pts_[c].x - p.x) <= eps_ && std::abs(pts_[c].y - p.y) <= eps_) return c;
        }
      }
    }
    const std::int32_t c = static_cast<std::int32_t>(pts_.size());
    pts_.push_back(p);
    cells_[key_of(cx, cy)].push_back(c);
    return c;
  }

  const Point& at(std::int32_t c) const { return pts_[c]; }

 private:
  double eps_;
  std::vector<Point> pts_;
  std::unordered_map<std::int64_t, std::vector<std::int32_t>> cells_;
};

/// Chains directed boundary edges into closed rings. At pinch vertices the
/// next edge is the most-clockwise outgoing edge relative to the incoming
/// one, which keeps the traced face consistent.
std::vector<std::vector<std::int32_t>> chain_rings(
    std::vector<std::pair<std::int32_t, std::int32_t>> edges,
    const std::vector<Point>& coords) {
  std::map<std::int32_t, std::vector<std::size_t>> outgoing;
  for (std::size_t e = 0; e < edges.size(); ++e) outgoing[edges[e].first].push_back(e);
  std::vector<bool> used(edges.size(), false);

  auto angle_of = [&](std::int32_t from, std::int32_t to) {
    return std::atan2(coords[to].y - coords[from].y, coords[to].x - coords[from].x);
  };

  std::vector<std::vector<std::int32_t>> rings;
  for (std::size_t start = 0; start < edges.size(); ++start) {
    if (used[start]) continue;
    std::vector<std::int32_t> ring;
    std::size_t cur = start;
    while (!used[cur]) {
      used[cur] = true;
      const auto [a, b] = edges[cur];
      ring.push_back(a);
      const auto it = outgoing.find(b);
      if (it == outgoing.end()) break;
      const double in_angle = angle_of(b, a);  // reversed incoming direction
      std::size_t next = edges.size();
      double best_turn = std::numeric_limits<double>::infinity();
      for (const std::size_t cand : it->second) {
        if (used[cand]) continue;
        double turn = in_angle - angle_of(b, edges[cand].second);
        while (turn <= 0.0) turn += 2.0 * M_PI;
        while (turn > 2.0 * M_PI) turn -= 2.0 * M_PI;
        if (turn < best_turn) {
          best_turn = turn;
          next = cand;
        }
      }
      if (next == edges.size()) break;  // ring closed (or dead end on defects)
      cur = next;
    }
    if (ring.size() >= 3) rings.push_back(std::move(ring));
  }
  return rings;
}

}  // namespace

RegionShape dissolve(std::span<const SpatialUnit> units, std::span<const std::int32_t> members) {
  if (members.empty()) throw std::invalid_argument("dissolve: empty member set");

  std::vector<Point> all;
  for (const auto id : members) {
    const auto& poly = units[id].polygon;
    all.insert(all.end(), poly.begin(), poly.end());
  }
  const double eps = kSnapRel * std::max(bounding_box(all).diagonal(), 1e-300);
  PointInterner interner(eps);

  RegionShape shape;
  // Directed edge counts over CCW-normalized rings; shared internal edges
  // appear once per direction and cancel.
  std::map<std::pair<std::int32_t, std::int32_t>, std::int32_t> dir_count;
  for (const auto id : members) {
    const auto& poly = units[id].polygon;
    std::vector<std::int32_t> ring;
    ring.reserve(poly.size());
    for (const auto& p : poly) {
      const std::int32_t c = interner.intern(p);
      if (ring.empty() || ring.back() != c) ring.push_back(c);
    }
    while (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
    if (ring.size() < 3)
      throw std::invalid_argument("dissolve: degenerate polygon in unit " + std::to_string(id));
    const double a = signed_area(units[id].polygon);
    shape.area += std::abs(a);
    if (a < 0.0) std::reverse(ring.begin(), ring.end());
    for (std::size_t i = 0; i < ring.size(); ++i) {
      ++dir_count[{ring[i], ring[(i + 1) % ring.size()]}];
    }
  }

  std::vector<std::pair<std::int32_t, std::int32_t>> boundary;
  std::vector<Point> coords;
  {
    std::int32_t max_class = -1;
    for (const auto& [e, c] : dir_count) max_class = std::max({max_class, e.first, e.second});
    coords.resize(max_class + 1);
    for (const auto& [e, c] : dir_count) {
      coords[e.first] = interner.at(e.first);
      coords[e.second] = interner.at(e.second);
    }
  }
  for (const auto& [e, c] : dir_count) {
    const auto rev = dir_count.find({e.second, e.first});
    const std::int32_t rc = rev == dir_count.end() ? 0 : rev->second;
    // Net boundary edges (tessellation input: counts are 0/1 in practice).
    for (std::int32_t t = 0; t < c - rc; ++t) boundary.push_back(e);
  }
  for (const auto& [a, b] : boundary) {
    shape.perimeter += distance(coords[a], coords[b]);
  }

  for (const auto& ring_ids : chain_rings(std::move(boundary), coords)) {
    std::vector<Point> ring;
    ring.reserve(ring_ids.size());
    for (const auto c : ring_ids) ring.push_back(coords[c]);
    shape.rings.push_back(std::move(ring));
  }
  return shape;
}

AlphaShape concave_hull(std::span<const Point> pts, double alpha) {
  Triangulation tri;
  try {
    tri = delaunay_triangulate(pts);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("concave_hull: degenerate input (") + e.what() + ")");
  }

  const double max_radius = alpha > 0.0 ? 1.0 / alpha : std::numeric_limits<double>::infinity();
  std::vector<std::array<std::int32_t, 3>> kept;
  double tri_area_sum = 0.0;
  for (const auto& t : tri.triangles) {
    const Point& a = tri.points[t[0]];
    const Point& b = tri.points[t[1]];
    const Point& c = tri.points[t[2]];
    const double area2 = std::abs(cross(a, b, c));
    if (area2 <= 0.0) continue;
    const double la = distance(b, c);
    const double lb = distance(a, c);
    const double lc = distance(a, b);
    const double circumradius = la * lb * lc / (2.0 * area2);
    if (circumradius <= max_radius) {
      kept.push_back(t);
      tri_area_sum += 0.5 * area2;
    }
  }
  if (kept.empty())
    throw std::invalid_argument("concave_hull: alpha too large, no triangles pass; use a smaller alpha");

  // Directed boundary edges: edges of kept CCW triangles whose twin is absent.
  std::map<std::pair<std::int32_t, std::int32_t>, bool> directed;
  for (const auto& t : kept) {
    for (int e = 0; e < 3; ++e) directed[{t[e], t[(e + 1) % 3]}] = true;
  }
  std::vector<std::pair<std::int32_t, std::int32_t>> boundary;
  for (const auto& [e, _] : directed) {
    if (!directed.count({e.second, e.first})) boundary.push_back(e);
  }

  AlphaShape shape;
  for (const auto& ring_ids : chain_rings(std::move(boundary), tri.points)) {
    std::vector<Point> ring;
    ring.reserve(ring_ids.size());
    for (const auto c : ring_ids) ring.push_back(tri.points[c]);
    const double a = signed_area(ring);
    if (a <= 0.0) continue;  // holes are dropped; outer rings only
    shape.area += a;
    shape.perimeter += ring_perimeter(ring);
    shape.rings.push_back(std::move(ring));
  }
  if (shape.rings.empty())
    throw std::invalid_argument("concave_hull: no outer ring; use a smaller alpha");
  (void)tri_area_sum;
  return shape;
}

double default_alpha(std::span<const Point> pts) {
  const Triangulation tri = delaunay_triangulate(pts);
  std::vector<double> nn(pts.size(), std::numeric_limits<double>::infinity());
  for (const auto& [a, b] : tri.unique_edges()) {
    const double d = distance(tri.points[a], tri.points[b]);
    nn[a] = std::min(nn[a], d);
    nn[b] = std::min(nn[b], d);
  }
  std::sort(nn.begin(), nn.end());
  const double median = nn[nn.size() / 2];
  if (!(median > 0.0) || !std::isfinite(median))
    throw std::invalid_argument("default_alpha: degenerate spacing");
  return 1.0 / (2.0 * median);
}

double polsby_popper(const RegionShape& shape) {
  if (!(shape.perimeter > 0.0)) throw std::invalid_argument("polsby_popper: zero perimeter");
  if (!(shape.area > 0.0)) throw std::invalid_argument("polsby_popper: zero area");
  return 4.0 * M_PI * shape.area / (shape.perimeter * shape.perimeter);
}

double convex_hull_ratio(const RegionShape& shape) {
  if (!(shape.area > 0.0)) throw std::invalid_argument("convex_hull_ratio: zero area");
  std::vector<Point> vertices;
  for (const auto& ring : shape.rings)
    vertices.insert(vertices.end(), ring.begin(), ring.end());
  const auto hull = convex_hull(vertices);
  const double hull_area = signed_area(hull);
  if (!(hull_area > 0.0)) throw std::invalid_argument("convex_hull_ratio: degenerate hull");
  return shape.area / hull_area;
}

namespace {

/// Even-odd scanline rasterization of a ring set onto a shared grid.
void rasterize_rings(const std::vector<std::vector<Point>>& rings, const BoundingBox& bb,
                     std::int32_t res, std::vector<std::uint64_t>& bits) {
  const double cell_w = bb.width() / res;
  const double cell_h = bb.height() / res;
  std::vector<double> xs;
  for (std::int32_t row = 0; row < res; ++row) {
    const double y = bb.min_y + (row + 0.5) * cell_h;
    xs.clear();
    for (const auto& ring : rings) {
      const std::size_t n = ring.size();
      for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& a = ring[j];
        const Point& b = ring[i];
        if ((a.y > y) == (b.y > y)) continue;
        xs.push_back(a.x + (b.x - a.x) * (y - a.y) / (b.y - a.y));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t s = 0; s + 1 < xs.size(); s += 2) {
      std::int64_t c0 = static_cast<std::int64_t>(std::ceil((xs[s] - bb.min_x) / cell_w - 0.5));
      std::int64_t c1 = static_cast<std::int64_t>(std::floor((xs[s + 1] - bb.min_x) / cell_w - 0.5));
      c0 = std::max<std::int64_t>(c0, 0);
      c1 = std::min<std::int64_t>(c1, res - 1);
      for (std::int64_t c = c0; c <= c1; ++c) {
        const std::size_t bit = static_cast<std::size_t>(row) * res + c;
        bits[bit >> 6] |= 1ULL << (bit & 63);
      }
    }
  }
}

std::int64_t popcount_and(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  std::int64_t c = 0;
  for (std::size_t i = 0; i < a.size(); ++i) c += __builtin_popcountll(a[i] & b[i]);
  return c;
}

std::int64_t popcount(const std::vector<std::uint64_t>& a) {
  std::int64_t c = 0;
  for (const auto w : a) c += __builtin_popcountll(w);
  return c;
}

std::vector<AlphaShape> region_hulls(const Partition& p, std::span<const SpatialUnit> units,
                                     double alpha) {
  std::vector<AlphaShape> hulls(p.k);
  const auto regions = p.regions();
  for (std::int32_t r = 0; r < p.k; ++r) {
    std::vector<Point> centroids;
    centroids.reserve(regions[r].size());
    for (const auto id : regions[r]) centroids.push_back(units[id].centroid);
    try {
      const double a = alpha > 0.0 ? alpha : default_alpha(centroids);
      hulls[r] = concave_hull(centroids, a);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("percent_overlap: degenerate hull for region " +
                                  std::to_string(r) + " (" + e.what() + ")");
    }
  }
  return hulls;
}

double overlap_of_hulls(const std::vector<AlphaShape>& hulls, std::int32_t grid_res) {
  const std::int32_t k = static_cast<std::int32_t>(hulls.size());
  std::vector<Point> all;
  for (const auto& h : hulls) {
    for (const auto& ring : h.rings) all.insert(all.end(), ring.begin(), ring.end());
  }
  BoundingBox bb = bounding_box(all);
  const double pad_x = std::max(bb.width(), 1e-12) * 1e-3;
  const double pad_y = std::max(bb.height(), 1e-12) * 1e-3;
  bb.min_x -= pad_x;
  bb.max_x += pad_x;
  bb.min_y -= pad_y;
  bb.max_y += pad_y;

  const std::size_t words = (static_cast<std::size_t>(grid_res) * grid_res + 63) / 64;
  std::vector<std::vector<std::uint64_t>> bits(k, std::vector<std::uint64_t>(words, 0));
  std::vector<std::int64_t> counts(k);
  for (std::int32_t r = 0; r < k; ++r) {
    rasterize_rings(hulls[r].rings, bb, grid_res, bits[r]);
    counts[r] = popcount(bits[r]);
    if (counts[r] == 0)
      throw std::invalid_argument("percent_overlap: degenerate hull for region " +
                                  std::to_string(r) + " (empty raster)");
  }

  double total = 0.0;
  for (std::int32_t i = 0; i < k; ++i) {
    for (std::int32_t j = 0; j < k; ++j) {
      if (i == j) continue;
      total += static_cast<double>(popcount_and(bits[i], bits[j])) /
               static_cast<double>(counts[i]);
    }
  }
  return total / (static_cast<double>(k) * k - k);
}

}  // namespace

double percent_overlap(const Partition& p, std::span<const SpatialUnit> units, double alpha,
                       std::int32_t grid_res) {
  if (p.k < 2) throw std::invalid_argument("percent_overlap: need at least 2 regions");
  return overlap_of_hulls(region_hulls(p, units, alpha), grid_res);
}

GeoMetricsReport geographic_metrics(const Partition& p, std::span<const SpatialUnit> units,
                                    double alpha, std::int32_t grid_res) {
  GeoMetricsReport rep;
  const auto regions = p.regions();
  rep.polsby_popper_per_region.resize(p.k);
  rep.convex_hull_ratio_per_region.resize(p.k);
  for (std::int32_t r = 0; r < p.k; ++r) {
    const RegionShape shape = dissolve(units, regions[r]);
    rep.polsby_popper_per_region[r] = polsby_popper(shape);
    rep.convex_hull_ratio_per_region[r] = convex_hull_ratio(shape);
  }
  rep.percent_overlap = p.k >= 2 ? percent_overlap(p, units, alpha, grid_res) : 0.0;
  return rep;
}

}  // namespace regio

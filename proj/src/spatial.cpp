#include "regio/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "regio/delaunay.hpp"

namespace regio {

namespace {

// Snap tolerance relative to the dataset bounding-box diagonal. The inputs
// are float tessellations, not exact ones, so boundary contact is detected
// up to this epsilon.
constexpr double kSnapRel = 1e-9;

std::int64_t cell_key(std::int64_t cx, std::int64_t cy) {
  return (cx << 21) ^ (cy + 0x2aaaaaaaaLL) ^ (cx >> 21 << 42);
}

/// Merges vertices closer than eps into classes and exposes class lookups.
class VertexSnapper {
 public:
  explicit VertexSnapper(double eps) : eps_(eps) {}

  std::int32_t classify(const Point& p) {
    const std::int64_t cx = static_cast<std::int64_t>(std::floor(p.x / eps_));
    const std::int64_t cy = static_cast<std::int64_t>(std::floor(p.y / eps_));
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto it = cells_.find(cell_key(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (const std::int32_t cls : it->second) {
          const Point& r = reps_[cls];
          if (std::abs(r.x - p.x) <= eps_ && std::abs(r.y - p.y) <= eps_) return cls;
        }
      }
    }
    const std::int32_t cls = static_cast<std::int32_t>(reps_.size());
    reps_.push_back(p);
    cells_[cell_key(cx, cy)].push_back(cls);
    return cls;
  }

  const Point& rep(std::int32_t cls) const { return reps_[cls]; }
  std::int32_t count() const { return static_cast<std::int32_t>(reps_.size()); }

 private:
  double eps_;
  std::vector<Point> reps_;
  std::unordered_map<std::int64_t, std::vector<std::int32_t>> cells_;
};

struct SnappedRings {
  double eps = 0.0;
  VertexSnapper snapper{1.0};
  // Per unit: ring of vertex classes (consecutive duplicates removed).
  std::vector<std::vector<std::int32_t>> rings;

  explicit SnappedRings(std::span<const SpatialUnit> units) : snapper(1.0) {
    std::vector<Point> all;
    for (const auto& u : units)
      all.insert(all.end(), u.polygon.begin(), u.polygon.end());
    if (all.empty()) throw std::invalid_argument("contiguity: no polygon vertices");
    const double diag = bounding_box(all).diagonal();
    eps = kSnapRel * std::max(diag, 1e-300);
    snapper = VertexSnapper(eps);

    rings.reserve(units.size());
    for (const auto& u : units) {
      for (const auto& p : u.polygon) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
          throw std::invalid_argument("unit " + std::to_string(u.id) +
                                      ": non-finite polygon coordinate");
      }
      if (u.polygon.size() < 3)
        throw std::invalid_argument("unit " + std::to_string(u.id) +
                                    ": degenerate polygon (fewer than 3 vertices)");
      if (std::abs(signed_area(u.polygon)) <= eps * diag)
        throw std::invalid_argument("unit " + std::to_string(u.id) +
                                    ": degenerate polygon (zero area)");
      std::vector<std::int32_t> ring;
      ring.reserve(u.polygon.size());
      for (const auto& p : u.polygon) {
        const std::int32_t cls = snapper.classify(p);
        if (ring.empty() || ring.back() != cls) ring.push_back(cls);
      }
      while (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
      if (ring.size() < 3)
        throw std::invalid_argument("unit " + std::to_string(u.id) +
                                    ": degenerate polygon (collapses under snapping)");
      rings.push_back(std::move(ring));
    }
  }
};

double point_segment_dist(const Point& p, const Point& a, const Point& b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len_sq = vx * vx + vy * vy;
  double t = len_sq > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len_sq : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

// Splits every ring edge at snapped vertices that land on its interior, so
// T-junction tessellations share identical sub-edges. Returns per unit the
// ring expanded with split points.
std::vector<std::vector<std::int32_t>> split_rings(const SnappedRings& sr) {
  const VertexSnapper& vs = sr.snapper;

  // Spatial hash of vertex classes, cell size from the median edge length.
  std::vector<double> lengths;
  for (const auto& ring : sr.rings) {
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const Point& a = vs.rep(ring[i]);
      const Point& b = vs.rep(ring[(i + 1) % ring.size()]);
      lengths.push_back(std::hypot(a.x - b.x, a.y - b.y));
    }
  }
  std::nth_element(lengths.begin(), lengths.begin() + lengths.size() / 2, lengths.end());
  const double h = std::max(lengths[lengths.size() / 2], sr.eps * 16.0);

  std::unordered_map<std::int64_t, std::vector<std::int32_t>> grid;
  grid.reserve(static_cast<std::size_t>(vs.count()) * 2);
  for (std::int32_t c = 0; c < vs.count(); ++c) {
    const Point& p = vs.rep(c);
    grid[cell_key(static_cast<std::int64_t>(std::floor(p.x / h)),
                  static_cast<std::int64_t>(std::floor(p.y / h)))].push_back(c);
  }

  std::vector<std::vector<std::int32_t>> out;
  out.reserve(sr.rings.size());
  std::vector<std::pair<double, std::int32_t>> on_edge;
  for (const auto& ring : sr.rings) {
    std::vector<std::int32_t> expanded;
    expanded.reserve(ring.size());
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const std::int32_t ca = ring[i];
      const std::int32_t cb = ring[(i + 1) % ring.size()];
      const Point& a = vs.rep(ca);
      const Point& b = vs.rep(cb);
      expanded.push_back(ca);

      on_edge.clear();
      const std::int64_t x0 = static_cast<std::int64_t>(std::floor((std::min(a.x, b.x) - sr.eps) / h));
      const std::int64_t x1 = static_cast<std::int64_t>(std::floor((std::max(a.x, b.x) + sr.eps) / h));
      const std::int64_t y0 = static_cast<std::int64_t>(std::floor((std::min(a.y, b.y) - sr.eps) / h));
      const std::int64_t y1 = static_cast<std::int64_t>(std::floor((std::max(a.y, b.y) + sr.eps) / h));
      const double seg_len_sq = (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
      for (std::int64_t cx = x0; cx <= x1; ++cx) {
        for (std::int64_t cy = y0; cy <= y1; ++cy) {
          const auto it = grid.find(cell_key(cx, cy));
          if (it == grid.end()) continue;
          for (const std::int32_t cls : it->second) {
            if (cls == ca || cls == cb) continue;
            const Point& p = vs.rep(cls);
            if (point_segment_dist(p, a, b) > sr.eps) continue;
            const double t = ((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) / seg_len_sq;
            if (t <= 0.0 || t >= 1.0) continue;
            on_edge.emplace_back(t, cls);
          }
        }
      }
      std::sort(on_edge.begin(), on_edge.end());
      for (const auto& [t, cls] : on_edge) expanded.push_back(cls);
    }
    out.push_back(std::move(expanded));
  }
  return out;
}

ContiguityGraph build_contiguity(std::span<const SpatialUnit> units, bool queen) {
  validate_units(units);
  const std::int32_t n = static_cast<std::int32_t>(units.size());
  if (n == 0) return ContiguityGraph::from_edges(0, {});

  SnappedRings sr(units);
  const auto rings = split_rings(sr);

  std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
  if (queen) {
    // Units sharing any snapped boundary vertex (split points included).
    std::unordered_map<std::int32_t, std::vector<std::int32_t>> by_vertex;
    for (std::int32_t u = 0; u < n; ++u) {
      for (const std::int32_t cls : rings[u]) {
        auto& lst = by_vertex[cls];
        if (lst.empty() || lst.back() != u) lst.push_back(u);
      }
    }
    for (const auto& [cls, lst] : by_vertex) {
      for (std::size_t i = 0; i < lst.size(); ++i)
        for (std::size_t j = i + 1; j < lst.size(); ++j)
          pairs.emplace_back(std::min(lst[i], lst[j]), std::max(lst[i], lst[j]));
    }
  } else {
    // Units sharing a positive-length sub-edge.
    std::unordered_map<std::int64_t, std::vector<std::int32_t>> by_edge;
    for (std::int32_t u = 0; u < n; ++u) {
      const auto& ring = rings[u];
      for (std::size_t i = 0; i < ring.size(); ++i) {
        const std::int32_t a = ring[i];
        const std::int32_t b = ring[(i + 1) % ring.size()];
        const std::int64_t key =
            (static_cast<std::int64_t>(std::min(a, b)) << 32) | static_cast<std::uint32_t>(std::max(a, b));
        auto& lst = by_edge[key];
        if (lst.empty() || lst.back() != u) lst.push_back(u);
      }
    }
    for (const auto& [key, lst] : by_edge) {
      for (std::size_t i = 0; i < lst.size(); ++i)
        for (std::size_t j = i + 1; j < lst.size(); ++j)
          pairs.emplace_back(std::min(lst[i], lst[j]), std::max(lst[i], lst[j]));
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return ContiguityGraph::from_edges(n, pairs);
}

}  // namespace

ContiguityGraph ContiguityGraph::from_edges(
    std::int32_t n, std::span<const std::pair<std::int32_t, std::int32_t>> edges) {
  ContiguityGraph g;
  g.n_ = n;
  std::vector<std::int32_t> deg(n, 0);
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) throw std::invalid_argument("edge endpoint out of range");
    if (a == b) throw std::invalid_argument("self-loop edge");
    ++deg[a];
    ++deg[b];
  }
  g.offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (std::int32_t i = 0; i < n; ++i) g.offsets_[i + 1] = g.offsets_[i] + deg[i];
  g.flat_.resize(g.offsets_[n]);
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const auto& [a, b] : edges) {
    g.flat_[cursor[a]++] = b;
    g.flat_[cursor[b]++] = a;
  }
  for (std::int32_t i = 0; i < n; ++i) {
    auto begin = g.flat_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]);
    auto end = g.flat_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]);
    std::sort(begin, end);
    if (std::adjacent_find(begin, end) != end) throw std::invalid_argument("duplicate edge");
  }
  return g;
}

bool ContiguityGraph::adjacent(std::int32_t i, std::int32_t j) const {
  const auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<std::pair<std::int32_t, std::int32_t>> ContiguityGraph::edges() const {
  std::vector<std::pair<std::int32_t, std::int32_t>> out;
  out.reserve(static_cast<std::size_t>(edge_count()));
  for (std::int32_t i = 0; i < n_; ++i) {
    for (const std::int32_t j : neighbors(i)) {
      if (i < j) out.emplace_back(i, j);
    }
  }
  return out;
}

ContiguityGraph build_queen_contiguity(std::span<const SpatialUnit> units) {
  return build_contiguity(units, true);
}

ContiguityGraph build_rook_contiguity(std::span<const SpatialUnit> units) {
  return build_contiguity(units, false);
}

ContiguityGraph bridge_gaps(std::span<const SpatialUnit> units,
                            std::optional<double> max_bridge_distance) {
  const std::int32_t n = static_cast<std::int32_t>(units.size());
  if (n < 3) throw std::invalid_argument("bridge_gaps: need at least 3 units");
  std::vector<Point> centroids(n);
  for (std::int32_t i = 0; i < n; ++i) centroids[i] = units[i].centroid;

  Triangulation tri;
  try {
    tri = delaunay_triangulate(centroids);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("bridge_gaps: degenerate input (") + e.what() + ")");
  }

  auto edges = tri.unique_edges();
  if (max_bridge_distance) {
    const double cap = *max_bridge_distance;
    std::erase_if(edges, [&](const auto& e) {
      return distance(centroids[e.first], centroids[e.second]) > cap;
    });
  }
  return ContiguityGraph::from_edges(n, edges);
}

bool is_region_connected(const ContiguityGraph& g, std::span<const std::int32_t> members) {
  if (members.empty()) throw std::invalid_argument("is_region_connected: empty region");
  for (const auto m : members) {
    if (m < 0 || m >= g.size()) throw std::invalid_argument("is_region_connected: invalid unit id");
  }
  if (members.size() == 1) return true;

  std::unordered_map<std::int32_t, bool> in_set;
  in_set.reserve(members.size() * 2);
  for (const auto m : members) in_set.emplace(m, false);

  std::deque<std::int32_t> queue{members[0]};
  in_set[members[0]] = true;
  std::size_t seen = 1;
  while (!queue.empty()) {
    const std::int32_t u = queue.front();
    queue.pop_front();
    for (const std::int32_t v : g.neighbors(u)) {
      const auto it = in_set.find(v);
      if (it != in_set.end() && !it->second) {
        it->second = true;
        ++seen;
        queue.push_back(v);
      }
    }
  }
  return seen == in_set.size();
}

Partition connected_components(const ContiguityGraph& g) {
  const std::int32_t n = g.size();
  Partition p;
  p.labels.assign(n, -1);
  std::int32_t next = 0;
  std::vector<std::int32_t> stack;
  for (std::int32_t s = 0; s < n; ++s) {
    if (p.labels[s] != -1) continue;
    const std::int32_t label = next++;
    stack.push_back(s);
    p.labels[s] = label;
    while (!stack.empty()) {
      const std::int32_t u = stack.back();
      stack.pop_back();
      for (const std::int32_t v : g.neighbors(u)) {
        if (p.labels[v] == -1) {
          p.labels[v] = label;
          stack.push_back(v);
        }
      }
    }
  }
  p.k = next;
  return p;
}

bool all_regions_connected(const ContiguityGraph& g, const Partition& p) {
  for (const auto& members : p.regions()) {
    if (!is_region_connected(g, members)) return false;
  }
  return true;
}

void validate_units(std::span<const SpatialUnit> units) {
  const std::int32_t n = static_cast<std::int32_t>(units.size());
  std::vector<char> seen(n, 0);
  std::size_t m = units.empty() ? 0 : units[0].features.size();
  for (const auto& u : units) {
    if (u.id < 0 || u.id >= n)
      throw std::invalid_argument("unit " + std::to_string(u.id) + ": id not dense in [0, n)");
    if (seen[u.id])
      throw std::invalid_argument("unit " + std::to_string(u.id) + ": duplicate id");
    seen[u.id] = 1;
    if (u.features.size() != m)
      throw std::invalid_argument("unit " + std::to_string(u.id) + ": feature length mismatch");
  }
}

FeatureMatrix feature_matrix(std::span<const SpatialUnit> units) {
  const std::int32_t n = static_cast<std::int32_t>(units.size());
  const std::int32_t m = n > 0 ? static_cast<std::int32_t>(units[0].features.size()) : 0;
  FeatureMatrix f(n, m);
  for (const auto& u : units) {
    auto row = f.row(u.id);
    for (std::int32_t j = 0; j < m; ++j) row[j] = u.features[j];
  }
  return f;
}

}  // namespace regio

// Independent reference implementations used as test oracles. Everything here
// is deliberately naive (plain loops, no shared kernels, no shared data
// structures) so it exercises a different code path than the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "regio/geom.hpp"
#include "regio/objective.hpp"
#include "regio/spatial.hpp"

namespace oracle {

inline double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline std::vector<double> row_of(const regio::FeatureMatrix& f, std::int32_t i) {
  auto r = f.row(i);
  return {r.begin(), r.end()};
}

inline std::vector<double> mean_of(const regio::FeatureMatrix& f,
                                   const std::vector<std::int32_t>& members) {
  std::vector<double> mu(f.cols(), 0.0);
  for (const auto i : members) {
    for (std::int32_t j = 0; j < f.cols(); ++j) mu[j] += f(i, j);
  }
  for (auto& v : mu) v /= static_cast<double>(members.size());
  return mu;
}

/// Direct Eq.-style W: sum of member distances to region means.
inline double within_w(const regio::Partition& p, const regio::FeatureMatrix& f) {
  std::vector<std::vector<std::int32_t>> regions(p.k);
  for (std::int32_t i = 0; i < p.n(); ++i) regions[p.labels[i]].push_back(i);
  double w = 0.0;
  for (const auto& members : regions) {
    if (members.empty()) continue;
    const auto mu = mean_of(f, members);
    for (const auto i : members) w += dist(row_of(f, i), mu);
  }
  return w;
}

/// Direct ordered-pair SSE normalized by region size.
inline double sse_norm(const regio::Partition& p, const regio::FeatureMatrix& f) {
  std::vector<std::vector<std::int32_t>> regions(p.k);
  for (std::int32_t i = 0; i < p.n(); ++i) regions[p.labels[i]].push_back(i);
  double total = 0.0;
  for (const auto& members : regions) {
    double acc = 0.0;
    for (const auto i : members) {
      for (const auto j : members) {
        for (std::int32_t c = 0; c < f.cols(); ++c) {
          const double d = f(i, c) - f(j, c);
          acc += d * d;
        }
      }
    }
    total += acc / static_cast<double>(members.size());
  }
  return total;
}

/// Exhaustive silhouette, plain loops.
inline double silhouette(const regio::Partition& p, const regio::FeatureMatrix& f) {
  const std::int32_t n = p.n();
  std::vector<std::int64_t> count(p.k, 0);
  for (const auto l : p.labels) ++count[l];
  double total = 0.0;
  for (std::int32_t i = 0; i < n; ++i) {
    const std::int32_t own = p.labels[i];
    if (count[own] <= 1) continue;  // scores 0
    std::vector<double> sum(p.k, 0.0);
    for (std::int32_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sum[p.labels[j]] += dist(row_of(f, i), row_of(f, j));
    }
    const double a = sum[own] / static_cast<double>(count[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::int32_t c = 0; c < p.k; ++c) {
      if (c == own || count[c] == 0) continue;
      b = std::min(b, sum[c] / static_cast<double>(count[c]));
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / n;
}

/// Direct evaluation of the four linkage rules over member lists.
inline double linkage(regio::Linkage kind, const std::vector<std::int32_t>& a,
                      const std::vector<std::int32_t>& b, const regio::FeatureMatrix& f) {
  using regio::Linkage;
  if (kind == Linkage::ward) {
    // Three explicit sums of squared deviations, Eq.-style.
    auto ssd = [&](const std::vector<std::int32_t>& members) {
      const auto mu = mean_of(f, members);
      double s = 0.0;
      for (const auto i : members) {
        const auto r = row_of(f, i);
        for (std::size_t j = 0; j < mu.size(); ++j) s += (r[j] - mu[j]) * (r[j] - mu[j]);
      }
      return s;
    };
    std::vector<std::int32_t> both = a;
    both.insert(both.end(), b.begin(), b.end());
    return ssd(both) - ssd(a) - ssd(b);
  }
  double mn = std::numeric_limits<double>::infinity();
  double mx = 0.0;
  double sum = 0.0;
  for (const auto i : a) {
    for (const auto j : b) {
      const double d = dist(row_of(f, i), row_of(f, j));
      mn = std::min(mn, d);
      mx = std::max(mx, d);
      sum += d;
    }
  }
  switch (kind) {
    case Linkage::complete: return mx;
    case Linkage::single: return mn;
    default: return sum / (static_cast<double>(a.size()) * b.size());
  }
}

struct NaiveMerge {
  std::int32_t left, right, parent;
  double distance;
};

/// Naive O(n^3) unconstrained hierarchical clustering with direct linkage
/// evaluation at every step; ties break on the smallest (left, right) pair.
inline std::vector<NaiveMerge> naive_hac(const regio::FeatureMatrix& f, regio::Linkage kind) {
  const std::int32_t n = f.rows();
  std::map<std::int32_t, std::vector<std::int32_t>> clusters;
  for (std::int32_t i = 0; i < n; ++i) clusters[i] = {i};
  std::vector<NaiveMerge> merges;
  std::int32_t next = n;
  while (clusters.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::int32_t ba = -1, bb = -1;
    for (auto ia = clusters.begin(); ia != clusters.end(); ++ia) {
      for (auto ib = std::next(ia); ib != clusters.end(); ++ib) {
        const double d = linkage(kind, ia->second, ib->second, f);
        if (d < best) {
          best = d;
          ba = ia->first;
          bb = ib->first;
        }
      }
    }
    auto merged = clusters[ba];
    merged.insert(merged.end(), clusters[bb].begin(), clusters[bb].end());
    clusters.erase(ba);
    clusters.erase(bb);
    clusters[next] = std::move(merged);
    merges.push_back({ba, bb, next, best});
    ++next;
  }
  return merges;
}

/// Delaunay admissibility by brute-force circumcircle testing: an edge (i, j)
/// is strictly Delaunay when some circle through i and j and a third point
/// strictly excludes every other point; weakly when ties are allowed.
struct DelaunayOracle {
  std::set<std::pair<std::int32_t, std::int32_t>> strict;      // must be present
  std::set<std::pair<std::int32_t, std::int32_t>> admissible;  // may be present
};

inline DelaunayOracle brute_force_delaunay(const std::vector<regio::Point>& pts) {
  const std::int32_t n = static_cast<std::int32_t>(pts.size());
  DelaunayOracle out;
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  const double tol = 1e-9 * std::max(scale, 1.0);

  auto circum = [&](std::int32_t a, std::int32_t b, std::int32_t c, regio::Point* center) {
    const double ax = pts[a].x, ay = pts[a].y;
    const double bx = pts[b].x, by = pts[b].y;
    const double cx = pts[c].x, cy = pts[c].y;
    const double d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
    if (std::abs(d) < 1e-14 * std::max(scale * scale, 1.0)) return false;
    const double a2 = ax * ax + ay * ay;
    const double b2 = bx * bx + by * by;
    const double c2 = cx * cx + cy * cy;
    center->x = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d;
    center->y = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d;
    return true;
  };

  for (std::int32_t i = 0; i < n; ++i) {
    for (std::int32_t j = i + 1; j < n; ++j) {
      bool strict_ok = false, weak_ok = false;
      for (std::int32_t k = 0; k < n && !strict_ok; ++k) {
        if (k == i || k == j) continue;
        regio::Point c;
        if (!circum(i, j, k, &c)) continue;
        const double r = std::hypot(pts[i].x - c.x, pts[i].y - c.y);
        bool empty_strict = true, empty_weak = true;
        for (std::int32_t l = 0; l < n; ++l) {
          if (l == i || l == j || l == k) continue;
          const double d = std::hypot(pts[l].x - c.x, pts[l].y - c.y);
          if (d < r - tol) {
            empty_strict = false;
            empty_weak = false;
            break;
          }
          if (d < r + tol) empty_strict = false;
        }
        if (empty_strict) strict_ok = true;
        if (empty_weak) weak_ok = true;
      }
      if (strict_ok) out.strict.insert({i, j});
      if (strict_ok || weak_ok) out.admissible.insert({i, j});
    }
  }
  return out;
}

/// Voronoi adjacency by bisector sampling: i and j are strictly adjacent when
/// some bisector point is closer to them than to every other site by a
/// margin.
inline bool voronoi_adjacent_strict(const std::vector<regio::Point>& pts, std::int32_t i,
                                    std::int32_t j, double span) {
  const regio::Point mid{(pts[i].x + pts[j].x) / 2, (pts[i].y + pts[j].y) / 2};
  const double dx = pts[j].x - pts[i].x;
  const double dy = pts[j].y - pts[i].y;
  const double len = std::hypot(dx, dy);
  const double ux = -dy / len, uy = dx / len;  // bisector direction
  const double margin = 1e-9 * std::max(span, 1.0);
  for (std::int32_t s = -4000; s <= 4000; ++s) {
    const double t = span * s / 2000.0;
    const regio::Point p{mid.x + t * ux, mid.y + t * uy};
    const double di = std::hypot(p.x - pts[i].x, p.y - pts[i].y);
    bool nearest = true;
    for (std::size_t l = 0; l < pts.size() && nearest; ++l) {
      if (static_cast<std::int32_t>(l) == i || static_cast<std::int32_t>(l) == j) continue;
      if (std::hypot(p.x - pts[l].x, p.y - pts[l].y) <= di + margin) nearest = false;
    }
    if (nearest) return true;
  }
  return false;
}

/// Max region count over all partitions of a small connected graph into
/// connected parts each meeting the weight threshold (exhaustive recursion).
inline std::int32_t maxp_brute_force(const regio::ContiguityGraph& g,
                                     const std::vector<double>& attr, double threshold) {
  const std::int32_t n = g.size();
  std::vector<std::int32_t> label(n, -1);
  std::int32_t best = 0;

  auto region_connected = [&](std::int32_t r) {
    std::vector<std::int32_t> members;
    for (std::int32_t i = 0; i < n; ++i)
      if (label[i] == r) members.push_back(i);
    if (members.empty()) return false;
    std::set<std::int32_t> seen{members[0]};
    std::vector<std::int32_t> stack{members[0]};
    while (!stack.empty()) {
      const std::int32_t u = stack.back();
      stack.pop_back();
      for (const auto v : g.neighbors(u)) {
        if (label[v] == r && !seen.count(v)) {
          seen.insert(v);
          stack.push_back(v);
        }
      }
    }
    return seen.size() == members.size();
  };

  // Assign units one by one; unit 0 pins region 0 to avoid label symmetry.
  std::function<void(std::int32_t, std::int32_t)> rec = [&](std::int32_t u,
                                                            std::int32_t used) {
    if (u == n) {
      std::vector<double> wsum(used, 0.0);
      for (std::int32_t i = 0; i < n; ++i) wsum[label[i]] += attr[i];
      for (const auto w : wsum)
        if (w < threshold) return;
      for (std::int32_t r = 0; r < used; ++r)
        if (!region_connected(r)) return;
      best = std::max(best, used);
      return;
    }
    for (std::int32_t r = 0; r <= used && r < n; ++r) {
      label[u] = r;
      rec(u + 1, std::max(used, r + 1));
    }
    label[u] = -1;
  };
  rec(0, 0);
  return best;
}

/// All 2-partitions of a connected graph into two connected parts.
inline std::vector<regio::Partition> connected_two_partitions(const regio::ContiguityGraph& g) {
  const std::int32_t n = g.size();
  std::vector<regio::Partition> out;
  for (std::uint32_t mask = 1; mask < (1u << n) - 1; ++mask) {
    regio::Partition p;
    p.k = 2;
    p.labels.resize(n);
    std::vector<std::int32_t> a, b;
    for (std::int32_t i = 0; i < n; ++i) {
      const bool in_a = (mask >> i) & 1;
      p.labels[i] = in_a ? 0 : 1;
      (in_a ? a : b).push_back(i);
    }
    if (!(mask & 1)) continue;  // canonical: unit 0 in part a
    if (regio::is_region_connected(g, a) && regio::is_region_connected(g, b)) out.push_back(p);
  }
  return out;
}

/// Polygon area by fan triangulation from vertex 0 (independent of shoelace).
inline double fan_area(const std::vector<regio::Point>& ring) {
  double s = 0.0;
  for (std::size_t i = 1; i + 1 < ring.size(); ++i) {
    const double x1 = ring[i].x - ring[0].x, y1 = ring[i].y - ring[0].y;
    const double x2 = ring[i + 1].x - ring[0].x, y2 = ring[i + 1].y - ring[0].y;
    s += 0.5 * (x1 * y2 - x2 * y1);
  }
  return std::abs(s);
}

}  // namespace oracle

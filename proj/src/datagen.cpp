#include "regio/datagen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "regio/kernels.hpp"
#include "regio/rng.hpp"

namespace regio {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

struct AxialCell {
  std::int32_t q = 0;
  std::int32_t r = 0;
};

std::int32_t hex_dist(std::int32_t q, std::int32_t r) {
  return (std::abs(q) + std::abs(r) + std::abs(q + r)) / 2;
}

Point hex_center(const AxialCell& c, double d) {
  return {d * (c.q + 0.5 * c.r), d * (kSqrt3 / 2.0) * c.r};
}

constexpr std::array<std::pair<std::int32_t, std::int32_t>, 6> kHexNeighbors = {
    {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, -1}, {-1, 1}}};

/// Roughly convex blob of exactly `target` cells: the largest full hexagonal
/// disk plus a deterministic arc of the next ring.
std::vector<AxialCell> hex_blob(std::int64_t target, double d) {
  std::int32_t rad = 0;
  while (1 + 3LL * (rad + 1) * (rad + 2) <= target) ++rad;
  std::vector<AxialCell> cells;
  cells.reserve(target);
  for (std::int32_t q = -rad; q <= rad; ++q) {
    for (std::int32_t r = std::max(-rad, -q - rad); r <= std::min(rad, -q + rad); ++r) {
      cells.push_back({q, r});
    }
  }
  const std::int64_t missing = target - static_cast<std::int64_t>(cells.size());
  if (missing > 0) {
    std::vector<std::pair<double, AxialCell>> ring;
    const std::int32_t rr = rad + 1;
    for (std::int32_t q = -rr; q <= rr; ++q) {
      for (std::int32_t r = std::max(-rr, -q - rr); r <= std::min(rr, -q + rr); ++r) {
        if (hex_dist(q, r) != rr) continue;
        const Point c = hex_center({q, r}, d);
        ring.push_back({std::atan2(c.y, c.x), {q, r}});
      }
    }
    std::sort(ring.begin(), ring.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::int64_t i = 0; i < missing; ++i) cells.push_back(ring[i].second);
  }
  // Canonical cell order: by (r, q).
  std::sort(cells.begin(), cells.end(), [](const AxialCell& a, const AxialCell& b) {
    return a.r < b.r || (a.r == b.r && a.q < b.q);
  });
  return cells;
}

/// Dense axial-grid index over the blob's bounding ranges.
struct HexGrid {
  std::int32_t qmin = 0, rmin = 0, width = 0, height = 0;
  std::vector<std::int32_t> unit_at;  // -1 where no cell

  HexGrid(const std::vector<AxialCell>& cells) {
    std::int32_t qmax = cells[0].q, rmax = cells[0].r;
    qmin = cells[0].q;
    rmin = cells[0].r;
    for (const auto& c : cells) {
      qmin = std::min(qmin, c.q);
      qmax = std::max(qmax, c.q);
      rmin = std::min(rmin, c.r);
      rmax = std::max(rmax, c.r);
    }
    width = qmax - qmin + 1;
    height = rmax - rmin + 1;
    unit_at.assign(static_cast<std::size_t>(width) * height, -1);
  }

  std::size_t slot(std::int32_t q, std::int32_t r) const {
    return static_cast<std::size_t>(r - rmin) * width + (q - qmin);
  }
  bool in_range(std::int32_t q, std::int32_t r) const {
    return q >= qmin && q < qmin + width && r >= rmin && r < rmin + height;
  }
  std::int32_t at(std::int32_t q, std::int32_t r) const {
    return in_range(q, r) ? unit_at[slot(q, r)] : -1;
  }
};

ContiguityGraph hex_queen_graph(const std::vector<AxialCell>& cells, const HexGrid& grid) {
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (const auto& [dq, dr] : kHexNeighbors) {
      const std::int32_t j = grid.at(cells[i].q + dq, cells[i].r + dr);
      if (j >= 0 && static_cast<std::int32_t>(i) < j)
        edges.emplace_back(static_cast<std::int32_t>(i), j);
    }
  }
  return ContiguityGraph::from_edges(static_cast<std::int32_t>(cells.size()), edges);
}

/// Removes `holes` cells in contiguous random blobs; returns false when the
/// removal disconnects the survivors.
bool carve_holes(std::vector<AxialCell>& cells, std::int64_t holes, Rng& rng) {
  if (holes <= 0) return true;
  HexGrid grid(cells);
  for (std::size_t i = 0; i < cells.size(); ++i)
    grid.unit_at[grid.slot(cells[i].q, cells[i].r)] = static_cast<std::int32_t>(i);

  std::vector<bool> removed(cells.size(), false);
  std::int64_t done = 0;
  std::int64_t guard = 0;
  while (done < holes && guard++ < holes * 64) {
    const std::int32_t seed = static_cast<std::int32_t>(rng.next_below(cells.size()));
    if (removed[seed]) continue;
    const std::int64_t blob = std::min<std::int64_t>(4 + rng.next_below(17), holes - done);
    std::vector<std::int32_t> frontier{seed};
    std::int64_t taken = 0;
    while (taken < blob && !frontier.empty()) {
      const std::size_t idx = rng.next_below(frontier.size());
      const std::int32_t u = frontier[idx];
      frontier[idx] = frontier.back();
      frontier.pop_back();
      if (removed[u]) continue;
      removed[u] = true;
      ++taken;
      for (const auto& [dq, dr] : kHexNeighbors) {
        const std::int32_t v = grid.at(cells[u].q + dq, cells[u].r + dr);
        if (v >= 0 && !removed[v]) frontier.push_back(v);
      }
    }
    done += taken;
  }
  if (done < holes) return false;

  std::vector<AxialCell> kept;
  kept.reserve(cells.size() - holes);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!removed[i]) kept.push_back(cells[i]);
  }
  if (kept.empty()) return false;
  HexGrid kgrid(kept);
  for (std::size_t i = 0; i < kept.size(); ++i)
    kgrid.unit_at[kgrid.slot(kept[i].q, kept[i].r)] = static_cast<std::int32_t>(i);
  const ContiguityGraph g = hex_queen_graph(kept, kgrid);
  if (connected_components(g).k != 1) return false;
  cells = std::move(kept);
  return true;
}

/// Kernel-smoothed unit-variance noise, evaluated per grid slot over present
/// cells. Offsets accumulate with add_scaled over contiguous row spans.
std::vector<double> smooth_field(const std::vector<double>& noise, const std::vector<double>& mask,
                                 const HexGrid& grid, double radius, double sigma, double d) {
  const std::int32_t W = grid.width;
  const std::int32_t H = grid.height;
  const std::size_t slots = noise.size();
  std::vector<double> acc(slots, 0.0), wsum(slots, 0.0);
  std::vector<double> masked(slots);
  for (std::size_t i = 0; i < slots; ++i) masked[i] = noise[i] * mask[i];

  const std::int32_t irad = static_cast<std::int32_t>(radius);
  for (std::int32_t dq = -irad; dq <= irad; ++dq) {
    for (std::int32_t dr = -irad; dr <= irad; ++dr) {
      if (hex_dist(dq, dr) > irad) continue;
      const Point off = hex_center({dq, dr}, d);
      const double dist = std::hypot(off.x, off.y);
      const double w = std::exp(-0.5 * (dist / sigma) * (dist / sigma));
      // Slot shift of (dq, dr) in the dense grid.
      const std::int64_t shift = static_cast<std::int64_t>(dr) * W + dq;
      const std::int32_t row_lo = std::max(0, -dr);
      const std::int32_t row_hi = std::min(H, H - dr);
      const std::int32_t col_lo = std::max(0, -dq);
      const std::int32_t col_hi = std::min(W, W - dq);
      if (col_lo >= col_hi) continue;
      for (std::int32_t row = row_lo; row < row_hi; ++row) {
        const std::size_t dst = static_cast<std::size_t>(row) * W + col_lo;
        const std::size_t src = dst + shift;
        kernels::add_scaled(acc.data() + dst, masked.data() + src, w, col_hi - col_lo);
        kernels::add_scaled(wsum.data() + dst, mask.data() + src, w, col_hi - col_lo);
      }
    }
  }
  for (std::size_t i = 0; i < slots; ++i) {
    acc[i] = (mask[i] > 0.0 && wsum[i] > 0.0) ? acc[i] / wsum[i] : 0.0;
  }
  return acc;
}

/// Sector-Voronoi assignment of points to 5 contiguous blobs.
std::vector<std::int32_t> sector_blobs(const std::vector<Point>& centroids) {
  const std::size_t n = centroids.size();
  double max_r = 0.0;
  for (const auto& c : centroids) max_r = std::max(max_r, std::hypot(c.x, c.y));
  std::array<Point, 5> seeds;
  for (int b = 0; b < 5; ++b) {
    const double ang = 2.0 * M_PI * b / 5.0 + 0.3;
    seeds[b] = {0.55 * max_r * std::cos(ang), 0.55 * max_r * std::sin(ang)};
  }
  std::vector<std::int32_t> blob_of(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int b = 0; b < 5; ++b) {
      const double dist = std::hypot(centroids[i].x - seeds[b].x, centroids[i].y - seeds[b].y);
      if (dist < best_d) {
        best_d = dist;
        best = b;
      }
    }
    blob_of[i] = best;
  }
  return blob_of;
}

std::vector<Point> hex_polygon(const Point& center, double d) {
  const double rc = d / kSqrt3;  // circumradius for flat-to-flat spacing d
  std::vector<Point> poly(6);
  for (int i = 0; i < 6; ++i) {
    const double ang = M_PI / 6.0 + i * M_PI / 3.0;
    poly[i] = {center.x + rc * std::cos(ang), center.y + rc * std::sin(ang)};
  }
  return poly;
}

std::vector<SpatialUnit> generate_attempt(const LevelSpec& spec, Rng rng) {
  const std::int64_t target = spec.resolved_target();
  if (target < 1) throw std::invalid_argument("generate_level: target_n must be positive");
  if (spec.hole_fraction < 0.0 || spec.hole_fraction >= 1.0)
    throw std::invalid_argument("generate_level: hole_fraction out of [0,1)");
  const double d = spec.hex_diameter;
  if (!(d > 0.0)) throw std::invalid_argument("generate_level: hex_diameter must be positive");

  // Start from a larger blob so carving holes lands on the target exactly.
  const std::int64_t holes =
      static_cast<std::int64_t>(std::llround(spec.hole_fraction * target / (1.0 - spec.hole_fraction)));
  std::vector<AxialCell> cells = hex_blob(target + holes, d);
  if (!carve_holes(cells, holes, rng))
    throw std::runtime_error("generate_level: holes disconnected the tessellation");

  const std::int32_t n = static_cast<std::int32_t>(cells.size());
  HexGrid grid(cells);
  for (std::int32_t i = 0; i < n; ++i)
    grid.unit_at[grid.slot(cells[i].q, cells[i].r)] = i;

  // Per-channel smoothed noise over the dense grid.
  const std::size_t slots = grid.unit_at.size();
  std::vector<double> mask(slots, 0.0);
  for (std::int32_t i = 0; i < n; ++i) mask[grid.slot(cells[i].q, cells[i].r)] = 1.0;

  std::vector<std::vector<double>> fields(spec.channels);
  const double sigma = std::max(1.0, spec.smooth_radius / 3.0) * d;
  for (std::int32_t ch = 0; ch < spec.channels; ++ch) {
    Rng crng = rng.fork(1000 + ch);
    std::vector<double> noise(slots);
    for (auto& v : noise) v = crng.next_normal();
    fields[ch] = smooth_field(noise, mask, grid, spec.smooth_radius, sigma, d);
    // Scale the present cells to [0, 1].
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::int32_t i = 0; i < n; ++i) {
      const double v = fields[ch][grid.slot(cells[i].q, cells[i].r)];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi > lo) {
      const double inv = 1.0 / (hi - lo);
      for (auto& v : fields[ch]) v = (v - lo) * inv;
    }
  }

  // Planted mode: 5 contiguous sector blobs with well-separated base vectors
  // plus a small share of the smoothed field.
  std::vector<std::int32_t> blob_of;
  if (spec.planted) {
    std::vector<Point> centroids(n);
    for (std::int32_t i = 0; i < n; ++i) centroids[i] = hex_center(cells[i], d);
    blob_of = sector_blobs(centroids);
  }

  std::vector<SpatialUnit> units(n);
  for (std::int32_t i = 0; i < n; ++i) {
    SpatialUnit& u = units[i];
    u.id = i;
    u.centroid = hex_center(cells[i], d);
    u.polygon = hex_polygon(u.centroid, d);
    u.features.resize(spec.channels);
    for (std::int32_t ch = 0; ch < spec.channels; ++ch) {
      const double field = fields[ch][grid.slot(cells[i].q, cells[i].r)];
      if (spec.planted) {
        const std::int32_t b = blob_of[i];
        const double base = 0.1 + 0.8 * ((b >> (ch % 3)) & 1);
        u.features[ch] = base + 0.05 * field;
      } else {
        u.features[ch] = field;
      }
    }
  }
  return units;
}

}  // namespace

std::vector<SpatialUnit> generate_level(const LevelSpec& spec) {
  const Rng base(spec.seed ^ (0x5eedULL + spec.level));
  for (int attempt = 0; attempt < 10; ++attempt) {
    std::vector<SpatialUnit> units;
    try {
      units = generate_attempt(spec, base.fork(attempt));
    } catch (const std::runtime_error&) {
      continue;  // holes disconnected the blob; re-draw
    }
    // Autocorrelation acceptance bar.
    const ContiguityGraph queen = build_queen_contiguity(units);
    const auto morans = feature_field_moran(units, queen);
    bool ok = true;
    for (const double mi : morans) {
      if (!(mi > 0.5)) ok = false;
    }
    if (ok) return units;
  }
  throw std::runtime_error("generate_level: no acceptable draw in 10 attempts");
}

double moran_i(std::span<const double> values, const ContiguityGraph& graph) {
  const std::int32_t n = graph.size();
  if (n < 2 || static_cast<std::int32_t>(values.size()) != n)
    throw std::invalid_argument("moran_i: need >= 2 values matching the graph");
  const double mean = kernels::sum(values.data(), values.size()) / n;
  double denom = 0.0;
  for (const double v : values) denom += (v - mean) * (v - mean);
  if (denom <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  double num = 0.0;
  std::int64_t s0 = 0;
  for (std::int32_t i = 0; i < n; ++i) {
    for (const std::int32_t j : graph.neighbors(i)) {
      num += (values[i] - mean) * (values[j] - mean);
      ++s0;
    }
  }
  return (static_cast<double>(n) / s0) * num / denom;
}

std::vector<double> feature_field_moran(std::span<const SpatialUnit> units,
                                        const ContiguityGraph& graph) {
  const FeatureMatrix f = feature_matrix(units);
  const auto cols = f.columns();
  std::vector<double> out;
  out.reserve(cols.size());
  for (const auto& col : cols) out.push_back(moran_i(col, graph));
  return out;
}

Partition planted_partition(std::span<const SpatialUnit> units) {
  std::vector<Point> centroids(units.size());
  for (std::size_t i = 0; i < units.size(); ++i) centroids[i] = units[i].centroid;
  Partition p;
  p.labels = sector_blobs(centroids);
  p.k = 5;
  p.canonicalize();
  return p;
}

std::string level_filename(std::int32_t level, std::uint64_t seed) {
  return "level_" + std::to_string(level) + "_seed_" + std::to_string(seed) + ".geojson";
}

}  // namespace regio

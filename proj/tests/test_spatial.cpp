#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "oracles.hpp"
#include "regio/datagen.hpp"
#include "regio/geojson.hpp"
#include "regio/rng.hpp"
#include "regio/spatial.hpp"

using namespace regio;

namespace {

SpatialUnit square(std::int32_t id, double x, double y, double side = 1.0) {
  SpatialUnit u;
  u.id = id;
  u.polygon = {{x, y}, {x + side, y}, {x + side, y + side}, {x, y + side}};
  u.centroid = {x + side / 2, y + side / 2};
  u.features = {0.0};
  return u;
}

SpatialUnit hex(std::int32_t id, double q, double r, double d = 1.0) {
  const double s3 = std::sqrt(3.0);
  SpatialUnit u;
  u.id = id;
  u.centroid = {d * (q + 0.5 * r), d * (s3 / 2.0) * r};
  const double rc = d / s3;
  for (int i = 0; i < 6; ++i) {
    const double ang = M_PI / 6.0 + i * M_PI / 3.0;
    u.polygon.push_back({u.centroid.x + rc * std::cos(ang), u.centroid.y + rc * std::sin(ang)});
  }
  u.features = {0.0};
  return u;
}

std::set<std::pair<std::int32_t, std::int32_t>> edge_set(const ContiguityGraph& g) {
  const auto e = g.edges();
  return {e.begin(), e.end()};
}

}  // namespace

TEST_CASE("queen and rook contiguity on a 2x2 grid of unit squares") {
  std::vector<SpatialUnit> units = {square(0, 0, 0), square(1, 1, 0), square(2, 0, 1),
                                    square(3, 1, 1)};
  const auto queen = build_queen_contiguity(units);
  CHECK(queen.edge_count() == 6);  // all pairs, diagonals touch at the corner
  const auto rook = build_rook_contiguity(units);
  CHECK(rook.edge_count() == 4);  // diagonal pairs excluded
  for (const auto& e : edge_set(rook)) CHECK(edge_set(queen).count(e) == 1);
}

TEST_CASE("single unit has no neighbors; separated squares have none either") {
  std::vector<SpatialUnit> one = {square(0, 0, 0)};
  CHECK(build_queen_contiguity(one).edge_count() == 0);

  std::vector<SpatialUnit> gap = {square(0, 0, 0), square(1, 2.0, 0)};
  CHECK(build_queen_contiguity(gap).edge_count() == 0);
  CHECK(build_rook_contiguity(gap).edge_count() == 0);
}

TEST_CASE("corner-only contact is queen-only") {
  std::vector<SpatialUnit> units = {square(0, 0, 0), square(1, 1, 1)};
  CHECK(build_queen_contiguity(units).edge_count() == 1);
  CHECK(build_rook_contiguity(units).edge_count() == 0);
}

TEST_CASE("seven-hexagon flower: rook equals queen, center has 6 neighbors") {
  std::vector<SpatialUnit> units;
  units.push_back(hex(0, 0, 0));
  const std::pair<double, double> ring[6] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, -1}, {-1, 1}};
  for (int i = 0; i < 6; ++i) units.push_back(hex(i + 1, ring[i].first, ring[i].second));

  const auto queen = build_queen_contiguity(units);
  const auto rook = build_rook_contiguity(units);
  CHECK(edge_set(queen) == edge_set(rook));
  CHECK(queen.degree(0) == 6);
  CHECK(queen.edge_count() == 12);  // 6 spokes + 6 ring edges
}

TEST_CASE("T-junction tessellations are detected via edge splitting") {
  // One 2x1 block on top of two unit squares.
  SpatialUnit top;
  top.id = 0;
  top.polygon = {{0, 1}, {2, 1}, {2, 2}, {0, 2}};
  top.centroid = {1, 1.5};
  top.features = {0.0};
  std::vector<SpatialUnit> units = {top, square(1, 0, 0), square(2, 1, 0)};
  const auto rook = build_rook_contiguity(units);
  CHECK(rook.adjacent(0, 1));
  CHECK(rook.adjacent(0, 2));
  CHECK(rook.adjacent(1, 2));
}

TEST_CASE("degenerate polygons are rejected with the offending id") {
  std::vector<SpatialUnit> units = {square(0, 0, 0)};
  SpatialUnit bad;
  bad.id = 1;
  bad.polygon = {{5, 5}, {6, 5}};
  bad.features = {0.0};
  units.push_back(bad);
  CHECK_THROWS_WITH_AS(build_queen_contiguity(units),
                       doctest::Contains("unit 1"), std::invalid_argument);

  units[1].polygon = {{5, 5}, {6, 5}, {7, 5}};  // zero area
  CHECK_THROWS_WITH_AS(build_queen_contiguity(units),
                       doctest::Contains("unit 1"), std::invalid_argument);
}

TEST_CASE("graphs are symmetric, loop-free, sorted") {
  LevelSpec spec;
  spec.target_n = 600;
  spec.seed = 9;
  spec.hole_fraction = 0.05;
  const auto units = generate_level(spec);
  const auto queen_graph = build_queen_contiguity(units);
  const auto rook_graph = build_rook_contiguity(units);
  for (const auto* g : {&queen_graph, &rook_graph}) {
    for (std::int32_t i = 0; i < g->size(); ++i) {
      auto nb = g->neighbors(i);
      CHECK(std::is_sorted(nb.begin(), nb.end()));
      for (const auto j : nb) {
        CHECK(j != i);
        CHECK(g->adjacent(j, i));
      }
    }
  }
  // Queen edges are a superset of rook edges.
  const auto queen = edge_set(queen_graph);
  for (const auto& e : edge_set(rook_graph)) CHECK(queen.count(e) == 1);
}

TEST_CASE("bridge_gaps: simple fixtures") {
  // Three non-collinear points form a triangle.
  std::vector<SpatialUnit> tri = {square(0, 0, 0), square(1, 5, 0), square(2, 2, 4)};
  CHECK(bridge_gaps(tri).edge_count() == 3);

  // Four unit-square corners: 4 sides plus one tie-broken diagonal.
  std::vector<SpatialUnit> sq = {square(0, 0, 0), square(1, 10, 0), square(2, 0, 10),
                                 square(3, 10, 10)};
  const auto g = bridge_gaps(sq);
  CHECK(g.edge_count() == 5);
  CHECK(g.adjacent(0, 1));
  CHECK(g.adjacent(0, 2));
  CHECK(g.adjacent(1, 3));
  CHECK(g.adjacent(2, 3));
  // Deterministic: rebuilding gives the same diagonal.
  const auto g2 = bridge_gaps(sq);
  CHECK(edge_set(g) == edge_set(g2));

  CHECK_THROWS_AS(bridge_gaps(std::vector<SpatialUnit>{square(0, 0, 0), square(1, 1, 0)}),
                  std::invalid_argument);
  std::vector<SpatialUnit> collinear = {square(0, 0, 0), square(1, 2, 0), square(2, 4, 0)};
  CHECK_THROWS_AS(bridge_gaps(collinear), std::invalid_argument);
}

TEST_CASE("bridge_gaps matches the brute-force circumcircle oracle on random points") {
  Rng rng(123);
  for (int trial = 0; trial < 6; ++trial) {
    const std::int32_t n = 8 + static_cast<std::int32_t>(rng.next_below(25));
    std::vector<SpatialUnit> units;
    std::vector<Point> pts;
    for (std::int32_t i = 0; i < n; ++i) {
      SpatialUnit u = square(i, 0, 0, 0.01);
      u.centroid = {10.0 * rng.next_double(), 10.0 * rng.next_double()};
      units.push_back(u);
      pts.push_back(units.back().centroid);
    }
    const auto g = bridge_gaps(units);
    const auto o = oracle::brute_force_delaunay(pts);
    const auto edges = edge_set(g);
    for (const auto& e : o.strict) {
      CAPTURE(trial);
      CHECK(edges.count(e) == 1);
    }
    for (const auto& e : edges) CHECK(o.admissible.count(e) == 1);
  }
}

TEST_CASE("bridge_gaps links the ring around a deleted hex cell like Voronoi") {
  // 19-hex patch (radius 2) with the center removed.
  std::vector<SpatialUnit> units;
  std::int32_t id = 0;
  std::vector<Point> pts;
  for (int q = -2; q <= 2; ++q) {
    for (int r = std::max(-2, -q - 2); r <= std::min(2, -q + 2); ++r) {
      if (q == 0 && r == 0) continue;
      units.push_back(hex(id++, q, r));
      pts.push_back(units.back().centroid);
    }
  }
  const auto g = bridge_gaps(units);
  CHECK(connected_components(g).k == 1);

  // Strictly witnessed Voronoi adjacencies must all be present.
  double span = 10.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (oracle::voronoi_adjacent_strict(pts, static_cast<std::int32_t>(i),
                                          static_cast<std::int32_t>(j), span)) {
        CAPTURE(i, j);
        CHECK(g.adjacent(static_cast<std::int32_t>(i), static_cast<std::int32_t>(j)));
      }
    }
  }
  // The six ring cells around the hole gain links across it: every ring cell
  // is adjacent to at least one non-touching ring cell.
  std::vector<std::int32_t> ring_ids;
  for (const auto& u : units) {
    if (std::hypot(u.centroid.x, u.centroid.y) < 1.1) ring_ids.push_back(u.id);
  }
  CHECK(ring_ids.size() == 6);
  const auto queen = build_queen_contiguity(units);
  for (const auto a : ring_ids) {
    bool bridged = false;
    for (const auto b : ring_ids) {
      if (a != b && g.adjacent(a, b) && !queen.adjacent(a, b)) bridged = true;
    }
    CHECK(bridged);
  }
}

TEST_CASE("bridge_gaps respects the max bridge distance") {
  std::vector<SpatialUnit> units = {square(0, 0, 0), square(1, 5, 0), square(2, 2, 40)};
  const auto capped = bridge_gaps(units, 10.0);
  CHECK(capped.edge_count() == 1);
  CHECK(capped.adjacent(0, 1));
}

TEST_CASE("bridge_gaps covers queen contiguity on a hole-free hex patch") {
  LevelSpec spec;
  spec.target_n = 400;
  spec.seed = 4;
  const auto units = generate_level(spec);
  const auto queen = edge_set(build_queen_contiguity(units));
  const auto bridged = edge_set(bridge_gaps(units));
  for (const auto& e : queen) CHECK(bridged.count(e) == 1);
}

TEST_CASE("is_region_connected") {
  const std::vector<std::pair<std::int32_t, std::int32_t>> edges = {{0, 1}, {1, 2}};
  const auto g = ContiguityGraph::from_edges(3, edges);
  const std::vector<std::int32_t> both_ends = {0, 2};
  CHECK_FALSE(is_region_connected(g, both_ends));
  const std::vector<std::int32_t> single = {1};
  CHECK(is_region_connected(g, single));
  const std::vector<std::int32_t> all = {0, 1, 2};
  CHECK(is_region_connected(g, all));
  CHECK_THROWS_AS(is_region_connected(g, std::vector<std::int32_t>{}), std::invalid_argument);
}

TEST_CASE("connected_components") {
  const std::vector<std::pair<std::int32_t, std::int32_t>> two_triangles = {
      {0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}};
  CHECK(connected_components(ContiguityGraph::from_edges(6, two_triangles)).k == 2);
  CHECK(connected_components(ContiguityGraph::from_edges(5, {})).k == 5);

  LevelSpec spec;
  spec.target_n = 300;
  spec.seed = 1;
  const auto units = generate_level(spec);
  CHECK(connected_components(build_queen_contiguity(units)).k == 1);
}

TEST_CASE("geojson round trip and edge list export") {
  LevelSpec spec;
  spec.target_n = 120;
  spec.seed = 11;
  const auto units = generate_level(spec);
  const auto dir = std::filesystem::temp_directory_path() / "regio_spatial_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "units.geojson").string();
  write_units_geojson(path, units);
  const auto back = read_units_geojson(path);
  REQUIRE(back.size() == units.size());
  for (std::size_t i = 0; i < units.size(); ++i) {
    CHECK(back[i].id == units[i].id);
    CHECK(back[i].features == units[i].features);
    REQUIRE(back[i].polygon.size() == units[i].polygon.size());
    for (std::size_t v = 0; v < units[i].polygon.size(); ++v) {
      CHECK(back[i].polygon[v].x == doctest::Approx(units[i].polygon[v].x));
    }
  }

  const auto g = build_queen_contiguity(units);
  const std::string epath = (dir / "edges.txt").string();
  write_edge_list(epath, g);
  std::ifstream in(epath);
  std::int64_t count = 0;
  std::int32_t a, b, prev_a = -1, prev_b = -1;
  while (in >> a >> b) {
    CHECK(a < b);
    CHECK(std::pair{prev_a, prev_b} < std::pair{a, b});
    prev_a = a;
    prev_b = b;
    ++count;
  }
  CHECK(count == g.edge_count());
  std::filesystem::remove_all(dir);
}

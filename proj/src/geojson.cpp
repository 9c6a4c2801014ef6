#include "regio/geojson.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace regio {

namespace {

using json = nlohmann::ordered_json;

json ring_to_json(std::span<const Point> ring) {
  json coords = json::array();
  for (const auto& p : ring) coords.push_back({p.x, p.y});
  if (!ring.empty()) coords.push_back({ring[0].x, ring[0].y});  // close the ring
  return coords;
}

std::vector<Point> ring_from_json(const json& coords) {
  std::vector<Point> ring;
  ring.reserve(coords.size());
  for (const auto& c : coords) {
    if (!c.is_array() || c.size() < 2) throw std::runtime_error("geojson: bad coordinate");
    ring.push_back({c[0].get<double>(), c[1].get<double>()});
  }
  if (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
  return ring;
}

json unit_feature(const SpatialUnit& u) {
  json props;
  props["id"] = u.id;
  for (std::size_t j = 0; j < u.features.size(); ++j)
    props["f" + std::to_string(j)] = u.features[j];
  json geom;
  geom["type"] = "Polygon";
  geom["coordinates"] = json::array({ring_to_json(u.polygon)});
  json feat;
  feat["type"] = "Feature";
  feat["properties"] = std::move(props);
  feat["geometry"] = std::move(geom);
  return feat;
}

json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json doc;
  in >> doc;
  return doc;
}

void save_file(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << doc.dump() << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

const json& features_of(const json& doc) {
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array())
    throw std::runtime_error("geojson: expected a FeatureCollection");
  return doc["features"];
}

}  // namespace

std::vector<SpatialUnit> read_units_geojson(const std::string& path) {
  const json doc = load_file(path);
  const json& feats = features_of(doc);

  std::vector<SpatialUnit> units(feats.size());
  std::vector<char> seen(feats.size(), 0);
  std::size_t m = 0;
  bool first = true;
  for (const auto& feat : feats) {
    if (!feat.contains("properties") || !feat.contains("geometry"))
      throw std::runtime_error("geojson: feature missing properties or geometry");
    const json& props = feat["properties"];
    const json& geom = feat["geometry"];
    if (geom.value("type", "") != "Polygon")
      throw std::runtime_error("geojson: only Polygon geometries are supported");
    if (!props.contains("id")) throw std::runtime_error("geojson: feature missing id");

    SpatialUnit u;
    u.id = props["id"].get<std::int32_t>();
    if (u.id < 0 || static_cast<std::size_t>(u.id) >= units.size() || seen[u.id])
      throw std::runtime_error("geojson: ids must be unique and dense from 0");
    seen[u.id] = 1;

    if (first) {
      while (props.contains("f" + std::to_string(m))) ++m;
      if (m == 0) throw std::runtime_error("geojson: no f0.. feature properties");
      first = false;
    }
    u.features.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      const std::string key = "f" + std::to_string(j);
      if (!props.contains(key)) throw std::runtime_error("geojson: missing property " + key);
      u.features[j] = props[key].get<double>();
    }

    const json& coords = geom["coordinates"];
    if (!coords.is_array() || coords.empty()) throw std::runtime_error("geojson: empty polygon");
    u.polygon = ring_from_json(coords[0]);
    if (u.polygon.size() < 3)
      throw std::runtime_error("geojson: unit " + std::to_string(u.id) + " polygon degenerate");
    u.centroid = polygon_centroid(u.polygon);
    units[u.id] = std::move(u);
  }
  return units;
}

void write_units_geojson(const std::string& path, std::span<const SpatialUnit> units) {
  json doc;
  doc["type"] = "FeatureCollection";
  json feats = json::array();
  for (const auto& u : units) feats.push_back(unit_feature(u));
  doc["features"] = std::move(feats);
  save_file(path, doc);
}

void write_regions_geojson(const std::string& path, std::span<const SpatialUnit> units,
                           const Partition& partition,
                           std::span<const std::int32_t> risk_rank) {
  if (partition.n() != static_cast<std::int32_t>(units.size()))
    throw std::invalid_argument("write_regions_geojson: partition size mismatch");
  json doc;
  doc["type"] = "FeatureCollection";
  json feats = json::array();
  for (const auto& u : units) {
    json feat = unit_feature(u);
    const std::int32_t r = partition.labels[u.id];
    feat["properties"]["region"] = r;
    if (!risk_rank.empty()) feat["properties"]["risk_rank"] = risk_rank[r];
    feats.push_back(std::move(feat));
  }
  doc["features"] = std::move(feats);
  save_file(path, doc);
}

Partition read_regions_geojson(const std::string& path) {
  const json doc = load_file(path);
  const json& feats = features_of(doc);
  Partition p;
  p.labels.assign(feats.size(), -1);
  std::int32_t max_label = -1;
  for (const auto& feat : feats) {
    const json& props = feat["properties"];
    if (!props.contains("id") || !props.contains("region"))
      throw std::runtime_error("geojson: feature missing id or region");
    const std::int32_t id = props["id"].get<std::int32_t>();
    const std::int32_t r = props["region"].get<std::int32_t>();
    if (id < 0 || static_cast<std::size_t>(id) >= p.labels.size() || p.labels[id] != -1)
      throw std::runtime_error("geojson: ids must be unique and dense from 0");
    p.labels[id] = r;
    max_label = std::max(max_label, r);
  }
  p.k = max_label + 1;
  return p;
}

void write_edge_list(const std::string& path, const ContiguityGraph& g) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& [i, j] : g.edges()) out << i << ' ' << j << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

void write_shapes_geojson(const std::string& path,
                          const std::vector<std::vector<std::vector<Point>>>& shapes) {
  json doc;
  doc["type"] = "FeatureCollection";
  json feats = json::array();
  for (std::size_t r = 0; r < shapes.size(); ++r) {
    json polys = json::array();
    for (const auto& ring : shapes[r]) polys.push_back(json::array({ring_to_json(ring)}));
    json geom;
    geom["type"] = "MultiPolygon";
    geom["coordinates"] = std::move(polys);
    json feat;
    feat["type"] = "Feature";
    feat["properties"] = {{"region", static_cast<std::int64_t>(r)}};
    feat["geometry"] = std::move(geom);
    feats.push_back(std::move(feat));
  }
  doc["features"] = std::move(feats);
  save_file(path, doc);
}

}  // namespace regio

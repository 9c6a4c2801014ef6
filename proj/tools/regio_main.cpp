// regio — spatially constrained regionalization toolkit and benchmark harness.
//
// Subcommands: generate, graph, run, bench, metrics, export (and the hidden
// per-trial `worker` used by bench for process isolation).

#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "regio/bench.hpp"
#include "regio/datagen.hpp"
#include "regio/geojson.hpp"
#include "regio/kernels.hpp"
#include "regio/region_geometry.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace regio;

std::string self_path() {
  char buf[4096];
  const ssize_t len = readlink("/proc/self/exe", buf, sizeof(buf) - 1);
  if (len <= 0) return "regio";
  buf[len] = '\0';
  return buf;
}

int cmd_generate(std::int32_t level, std::uint64_t seed, std::string out, std::int64_t target_n,
                 double hole_fraction, bool planted, double diameter, std::int32_t channels) {
  LevelSpec spec;
  spec.level = level;
  spec.seed = seed;
  spec.target_n = target_n;
  spec.hole_fraction = hole_fraction;
  spec.planted = planted;
  spec.hex_diameter = diameter;
  spec.channels = channels;
  const auto units = generate_level(spec);
  if (out.empty()) out = level_filename(level, seed);
  write_units_geojson(out, units);
  std::cout << "wrote " << units.size() << " units to " << out << "\n";
  return 0;
}

int cmd_graph(const std::string& input, const std::string& type, double max_bridge,
              const std::string& out) {
  const auto units = read_units_geojson(input);
  ContiguityGraph g;
  if (type == "queen") {
    g = build_queen_contiguity(units);
  } else if (type == "rook") {
    g = build_rook_contiguity(units);
  } else if (type == "bridge") {
    g = bridge_gaps(units, max_bridge > 0 ? std::optional<double>(max_bridge) : std::nullopt);
  } else {
    throw std::runtime_error("unknown graph type: " + type);
  }
  write_edge_list(out, g);
  std::cout << "wrote " << g.edge_count() << " edges to " << out << "\n";
  return 0;
}

int cmd_run(const AlgoSpec& algo, const std::string& input, const std::string& out,
            std::int32_t k, std::uint64_t seed, const std::string& contiguity) {
  const auto units = read_units_geojson(input);
  ContiguityGraph graph;
  if (contiguity == "queen") graph = build_queen_contiguity(units);
  else if (contiguity == "rook") graph = build_rook_contiguity(units);
  else if (contiguity == "bridge") graph = bridge_gaps(units);
  else throw std::runtime_error("unknown contiguity type: " + contiguity);

  const FeatureMatrix features = minmax_normalize(feature_matrix(units));
  const auto t0 = std::chrono::steady_clock::now();
  const Partition p = run_algorithm(algo, graph, features, k, seed);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  export_regions(p, units, out);
  std::cout << "algo=" << algo.label() << " n=" << units.size() << " k=" << p.k
            << " W=" << within_variability(p, features) << " time_s=" << secs << "\n"
            << "wrote " << out << "\n";
  return 0;
}

int cmd_bench(const std::string& config_path, std::string out_csv) {
  ExperimentConfig cfg = load_config(config_path);
  if (!out_csv.empty()) cfg.out_csv = out_csv;
  if (cfg.out_csv.empty()) cfg.out_csv = "results.csv";
  std::ofstream csv(cfg.out_csv);
  if (!csv) throw std::runtime_error("cannot write " + cfg.out_csv);
  const int code = run_experiment(cfg, csv, self_path());
  std::cout << "wrote " << cfg.out_csv << "\n";
  return code;
}

int cmd_metrics(const std::string& input, const std::string& regions_path, const std::string& out,
                std::int64_t silhouette_cap, std::uint64_t seed, bool geo, double alpha,
                std::int32_t grid_res) {
  const auto units = read_units_geojson(input);
  const Partition p = read_regions_geojson(regions_path);
  if (p.n() != static_cast<std::int32_t>(units.size()))
    throw std::runtime_error("metrics: regions file does not match the input units");
  const FeatureMatrix features = minmax_normalize(feature_matrix(units));

  MetricsOptions mopt;
  mopt.silhouette_cap = silhouette_cap;
  mopt.seed = seed;
  const MetricsReport rep = compute_metrics(p, features, mopt);

  json doc;
  doc["n"] = p.n();
  doc["k"] = p.k;
  doc["chi"] = rep.chi;
  doc["silhouette"] = rep.silhouette;
  doc["sse_norm"] = rep.sse_normalized;
  doc["within"] = rep.within;
  doc["between"] = rep.between;
  doc["ahr"] = rep.ahr_per_region;
  doc["risk_rank"] = rep.region_risk_rank;
  if (geo) {
    const GeoMetricsReport g = geographic_metrics(p, units, alpha, grid_res);
    doc["polsby_popper"] = g.polsby_popper_per_region;
    doc["convex_hull_ratio"] = g.convex_hull_ratio_per_region;
    doc["percent_overlap"] = g.percent_overlap;
  }
  const std::string text = doc.dump(2);
  if (out.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << text << "\n";
    std::cout << "wrote " << out << "\n";
  }
  return 0;
}

int cmd_export(const std::string& input, const std::string& regions_path, const std::string& what,
               const std::string& out, double alpha) {
  const auto units = read_units_geojson(input);
  const Partition p = read_regions_geojson(regions_path);
  const auto regions = p.regions();
  std::vector<std::vector<std::vector<Point>>> shapes;
  shapes.reserve(regions.size());
  if (what == "shapes") {
    for (const auto& members : regions) shapes.push_back(dissolve(units, members).rings);
  } else if (what == "hulls") {
    for (std::int32_t r = 0; r < p.k; ++r) {
      std::vector<Point> centroids;
      for (const auto id : regions[r]) centroids.push_back(units[id].centroid);
      const double a = alpha > 0 ? alpha : default_alpha(centroids);
      shapes.push_back(concave_hull(centroids, a).rings);
    }
  } else {
    throw std::runtime_error("unknown export kind: " + what);
  }
  write_shapes_geojson(out, shapes);
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_worker(const std::string& input, const std::string& result_path, const AlgoSpec& algo,
               std::int32_t k, std::uint64_t seed, std::int32_t level,
               const std::string& contiguity, std::int64_t silhouette_cap) {
  json doc;
  try {
    const TrialResult t =
        run_trial_in_process(input, algo, level, seed, k, contiguity, silhouette_cap);
    doc["status"] = "ok";
    doc["algo_seconds"] = t.wall_time_s;
    doc["k"] = t.k;
    json m;
    m["chi"] = t.metrics.chi;
    m["silhouette"] = t.metrics.silhouette;
    m["sse_norm"] = t.metrics.sse_normalized;
    m["within"] = t.metrics.within;
    m["between"] = t.metrics.between;
    m["ahr"] = t.metrics.ahr_per_region;
    m["risk_rank"] = t.metrics.region_risk_rank;
    doc["metrics"] = std::move(m);
  } catch (const std::exception& e) {
    doc["status"] = "error";
    doc["error"] = e.what();
    std::ofstream f(result_path);
    f << doc.dump() << "\n";
    return 1;
  }
  std::ofstream f(result_path);
  if (!f) return 1;
  f << doc.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spatially constrained regionalization toolkit"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "generate a synthetic hexagon level");
  std::int32_t g_level = 0;
  std::uint64_t g_seed = 0;
  std::string g_out;
  std::int64_t g_target = 0;
  double g_holes = 0.0, g_diameter = 1.0;
  bool g_planted = false;
  std::int32_t g_channels = 5;
  gen->add_option("--level", g_level, "level index (target ~8000*2^level)");
  gen->add_option("--seed", g_seed, "generation seed");
  gen->add_option("--out", g_out, "output GeoJSON (default level_{L}_seed_{S}.geojson)");
  gen->add_option("--target-n", g_target, "override the unit count");
  gen->add_option("--hole-fraction", g_holes, "fraction of cells removed as holes");
  gen->add_option("--diameter", g_diameter, "hexagon flat-to-flat diameter");
  gen->add_option("--channels", g_channels, "feature channels");
  gen->add_flag("--planted", g_planted, "emit 5 feature-distinct blobs");

  // graph
  auto* gr = app.add_subcommand("graph", "build a contiguity graph and export the edge list");
  std::string gr_input, gr_type = "queen", gr_out = "edges.txt";
  double gr_bridge = 0.0;
  gr->add_option("--input", gr_input, "units GeoJSON")->required();
  gr->add_option("--type", gr_type, "queen|rook|bridge");
  gr->add_option("--max-bridge-dist", gr_bridge, "bridge: drop links longer than this");
  gr->add_option("--out", gr_out, "edge list path");

  // run
  auto* run = app.add_subcommand("run", "run one regionalization and export regions");
  AlgoSpec r_algo;
  std::string r_linkage = "ward", r_order = "full";
  std::string r_input, r_out = "regions.geojson", r_contiguity = "queen";
  std::int32_t r_k = 5;
  std::uint64_t r_seed = 0;
  run->add_option("--algo", r_algo.name, "agglomerative|skater|redcap|azp|maxp|kmeans")->required();
  run->add_option("--input", r_input, "units GeoJSON")->required();
  run->add_option("--out", r_out, "regions GeoJSON");
  run->add_option("--k", r_k, "region count (ignored by maxp)");
  run->add_option("--seed", r_seed, "algorithm seed");
  run->add_option("--linkage", r_linkage, "ward|complete|average|single");
  run->add_option("--order", r_order, "first|full (redcap)");
  run->add_option("--threshold-fraction", r_algo.threshold_fraction, "maxp threshold fraction");
  run->add_option("--threshold", r_algo.threshold_absolute, "maxp absolute threshold");
  run->add_option("--restarts", r_algo.restarts, "maxp restarts");
  run->add_option("--contiguity", r_contiguity, "queen|rook|bridge");

  // bench
  auto* bench = app.add_subcommand("bench", "run the benchmark sweep from a JSON config");
  std::string b_config, b_out;
  bench->add_option("--config", b_config, "experiment config JSON")->required();
  bench->add_option("--out", b_out, "results CSV (overrides config)");

  // metrics
  auto* met = app.add_subcommand("metrics", "score an exported partition");
  std::string m_input, m_regions, m_out;
  std::int64_t m_cap = 10000;
  std::uint64_t m_seed = 0;
  bool m_geo = false;
  double m_alpha = 0.0;
  std::int32_t m_grid = 1024;
  met->add_option("--input", m_input, "units GeoJSON")->required();
  met->add_option("--regions", m_regions, "regions GeoJSON from `run`")->required();
  met->add_option("--out", m_out, "report JSON (default stdout)");
  met->add_option("--silhouette-cap", m_cap, "silhouette sample cap");
  met->add_option("--seed", m_seed, "sampling seed");
  met->add_flag("--geo", m_geo, "include geographic compactness metrics");
  met->add_option("--alpha", m_alpha, "concave hull alpha (0 = per-region default)");
  met->add_option("--grid-res", m_grid, "overlap raster resolution");

  // export
  auto* exp = app.add_subcommand("export", "export dissolved region shapes or concave hulls");
  std::string e_input, e_regions, e_what = "shapes", e_out = "shapes.geojson";
  double e_alpha = 0.0;
  exp->add_option("--input", e_input, "units GeoJSON")->required();
  exp->add_option("--regions", e_regions, "regions GeoJSON from `run`")->required();
  exp->add_option("--what", e_what, "shapes|hulls");
  exp->add_option("--out", e_out, "output GeoJSON");
  exp->add_option("--alpha", e_alpha, "concave hull alpha (0 = per-region default)");

  // worker (hidden)
  auto* wk = app.add_subcommand("worker");
  wk->group("");  // hidden
  std::string w_input, w_result, w_linkage = "ward", w_order = "full", w_contiguity = "queen";
  AlgoSpec w_algo;
  std::int32_t w_k = 5, w_level = 0;
  std::uint64_t w_seed = 0;
  std::int64_t w_cap = 10000;
  wk->add_option("--input", w_input)->required();
  wk->add_option("--result", w_result)->required();
  wk->add_option("--algo", w_algo.name)->required();
  wk->add_option("--k", w_k);
  wk->add_option("--seed", w_seed);
  wk->add_option("--level", w_level);
  wk->add_option("--linkage", w_linkage);
  wk->add_option("--order", w_order);
  wk->add_option("--threshold-fraction", w_algo.threshold_fraction);
  wk->add_option("--threshold", w_algo.threshold_absolute);
  wk->add_option("--restarts", w_algo.restarts);
  wk->add_option("--contiguity", w_contiguity);
  wk->add_option("--silhouette-cap", w_cap);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen)
      return cmd_generate(g_level, g_seed, g_out, g_target, g_holes, g_planted, g_diameter,
                          g_channels);
    if (*gr) return cmd_graph(gr_input, gr_type, gr_bridge, gr_out);
    if (*run) {
      r_algo.linkage = linkage_from_string(r_linkage);
      r_algo.order = order_from_string(r_order);
      return cmd_run(r_algo, r_input, r_out, r_k, r_seed, r_contiguity);
    }
    if (*bench) return cmd_bench(b_config, b_out);
    if (*met) return cmd_metrics(m_input, m_regions, m_out, m_cap, m_seed, m_geo, m_alpha, m_grid);
    if (*exp) return cmd_export(e_input, e_regions, e_what, e_out, e_alpha);
    if (*wk) {
      w_algo.linkage = linkage_from_string(w_linkage);
      w_algo.order = order_from_string(w_order);
      return cmd_worker(w_input, w_result, w_algo, w_k, w_seed, w_level, w_contiguity, w_cap);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

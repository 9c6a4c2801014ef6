#include "regio/bench.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "regio/datagen.hpp"
#include "regio/geojson.hpp"
#include "regio/local_search.hpp"
#include "regio/tree_methods.hpp"

namespace regio {

namespace {

using json = nlohmann::ordered_json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

/// Resident set size of a process in bytes (0 when unreadable).
std::int64_t read_rss_bytes(pid_t pid) {
  static const long page = sysconf(_SC_PAGESIZE);
  std::ifstream in("/proc/" + std::to_string(pid) + "/statm");
  if (!in) return 0;
  long long total = 0, resident = 0;
  in >> total >> resident;
  if (!in) return 0;
  return static_cast<std::int64_t>(resident) * page;
}

ContiguityGraph build_graph(const std::string& contiguity, std::span<const SpatialUnit> units) {
  if (contiguity == "queen") return build_queen_contiguity(units);
  if (contiguity == "rook") return build_rook_contiguity(units);
  if (contiguity == "bridge") return bridge_gaps(units);
  throw std::invalid_argument("unknown contiguity type: " + contiguity);
}

}  // namespace

std::string to_string(TrialStatus s) {
  switch (s) {
    case TrialStatus::ok: return "ok";
    case TrialStatus::timeout: return "timeout";
    case TrialStatus::oom: return "oom";
    default: return "error";
  }
}

std::string AlgoSpec::label() const {
  if (name == "agglomerative") return name + "-" + to_string(linkage);
  if (name == "redcap") return name + "-" + to_string(order) + "-" + to_string(linkage);
  return name;
}

std::int32_t ExperimentConfig::max_regions() const {
  std::int64_t mx = k;
  for (const auto& a : algorithms) {
    if (a.name != "maxp") continue;
    if (a.threshold_absolute > 0.0) {
      for (const auto level : levels) {
        LevelSpec spec;
        spec.level = level;
        mx = std::max<std::int64_t>(
            mx, static_cast<std::int64_t>(spec.resolved_target() / a.threshold_absolute));
      }
    } else if (a.threshold_fraction > 0.0) {
      mx = std::max<std::int64_t>(mx, static_cast<std::int64_t>(1.0 / a.threshold_fraction));
    }
  }
  return static_cast<std::int32_t>(std::min<std::int64_t>(mx, 4096));
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw std::runtime_error("config parse error: " + std::string(e.what()));
  }

  ExperimentConfig cfg;
  cfg.k = doc.value("k", 5);
  cfg.time_cap_s = doc.value("time_cap_s", 3600.0);
  cfg.memory_cap_bytes = doc.value("memory_cap_bytes", std::int64_t(0));
  cfg.data_dir = doc.value("data_dir", std::string("data"));
  cfg.out_csv = doc.value("out", std::string());
  cfg.generate_missing = doc.value("generate_missing", true);
  cfg.hole_fraction = doc.value("hole_fraction", 0.0);
  cfg.contiguity = doc.value("contiguity", std::string("queen"));
  cfg.silhouette_cap = doc.value("silhouette_cap", std::int64_t(10000));
  for (const auto& l : doc.value("levels", json::array())) cfg.levels.push_back(l.get<int>());
  for (const auto& s : doc.value("seeds", json::array()))
    cfg.seeds.push_back(s.get<std::uint64_t>());
  for (const auto& a : doc.value("algorithms", json::array())) {
    AlgoSpec spec;
    spec.name = a.at("name").get<std::string>();
    spec.linkage = linkage_from_string(a.value("linkage", std::string("ward")));
    spec.order = order_from_string(a.value("order", std::string("full")));
    spec.threshold_fraction = a.value("threshold_fraction", 0.1);
    spec.threshold_absolute = a.value("threshold", 0.0);
    spec.restarts = a.value("restarts", 16);
    cfg.algorithms.push_back(std::move(spec));
  }
  if (cfg.algorithms.empty() || cfg.levels.empty())
    throw std::runtime_error("config: need at least one algorithm and one level");
  if (cfg.seeds.empty()) cfg.seeds.push_back(0);
  if (cfg.k < 1) throw std::runtime_error("config: k must be >= 1");
  return cfg;
}

Partition run_algorithm(const AlgoSpec& algo, const ContiguityGraph& graph,
                        const FeatureMatrix& features, std::int32_t k, std::uint64_t seed) {
  if (algo.name == "agglomerative") {
    return cut(constrained_agglomerative(graph, features, algo.linkage), k);
  }
  if (algo.name == "skater") {
    return skater(graph, features, k);
  }
  if (algo.name == "redcap") {
    return redcap(graph, features, k, algo.linkage, algo.order);
  }
  if (algo.name == "azp") {
    return azp(graph, features, k, seed).partition;
  }
  if (algo.name == "maxp") {
    MaxpOptions opt;
    opt.threshold = algo.threshold_absolute > 0.0
                        ? algo.threshold_absolute
                        : algo.threshold_fraction * graph.size();
    opt.restarts = algo.restarts;
    return maxp(graph, features, opt, seed);
  }
  if (algo.name == "kmeans") {
    return kmeans_baseline(features, k, seed);
  }
  throw std::invalid_argument("unknown algorithm: " + algo.name);
}

TrialResult run_trial_in_process(const std::string& units_path, const AlgoSpec& algo,
                                 std::int32_t level, std::uint64_t seed, std::int32_t k,
                                 const std::string& contiguity, std::int64_t silhouette_cap) {
  TrialResult t;
  t.algo = algo.label();
  t.level = level;
  t.seed = seed;
  const auto units = read_units_geojson(units_path);
  const ContiguityGraph graph = build_graph(contiguity, units);
  const FeatureMatrix features = minmax_normalize(feature_matrix(units));

  const double t0 = now_seconds();
  Partition p = run_algorithm(algo, graph, features, k, seed);
  t.wall_time_s = now_seconds() - t0;
  t.k = p.k;

  MetricsOptions mopt;
  mopt.silhouette_cap = silhouette_cap;
  mopt.seed = seed;
  t.metrics = compute_metrics(p, features, mopt);
  t.status = TrialStatus::ok;
  return t;
}

std::string ensure_level_file(const ExperimentConfig& cfg, std::int32_t level,
                              std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.data_dir);
  const std::string path = (fs::path(cfg.data_dir) / level_filename(level, seed)).string();
  if (fs::exists(path)) return path;
  if (!cfg.generate_missing) throw std::runtime_error("missing data file " + path);
  LevelSpec spec;
  spec.level = level;
  spec.seed = seed;
  spec.hole_fraction = cfg.hole_fraction;
  write_units_geojson(path, generate_level(spec));
  return path;
}

TrialResult run_trial(const ExperimentConfig& cfg, const AlgoSpec& algo, std::int32_t level,
                      std::uint64_t seed, const std::string& worker_bin) {
  TrialResult t;
  t.algo = algo.label();
  t.level = level;
  t.seed = seed;

  std::string units_path;
  try {
    units_path = ensure_level_file(cfg, level, seed);
  } catch (const std::exception& e) {
    t.error = e.what();
    return t;
  }

  namespace fs = std::filesystem;
  const std::string result_path =
      (fs::path(cfg.data_dir) / ("trial_" + t.algo + "_" + std::to_string(level) + "_" +
                                 std::to_string(seed) + ".json"))
          .string();
  std::error_code ec;
  fs::remove(result_path, ec);

  std::vector<std::string> args = {
      worker_bin, "worker",
      "--input", units_path,
      "--result", result_path,
      "--algo", algo.name,
      "--k", std::to_string(cfg.k),
      "--seed", std::to_string(seed),
      "--level", std::to_string(level),
      "--linkage", to_string(algo.linkage),
      "--order", to_string(algo.order),
      "--threshold-fraction", fmt_double(algo.threshold_fraction),
      "--threshold", fmt_double(algo.threshold_absolute),
      "--restarts", std::to_string(algo.restarts),
      "--contiguity", cfg.contiguity,
      "--silhouette-cap", std::to_string(cfg.silhouette_cap),
  };

  const pid_t pid = fork();
  if (pid < 0) {
    t.error = "fork failed";
    return t;
  }
  if (pid == 0) {
    const int devnull = open("/dev/null", O_WRONLY);
    if (devnull >= 0) {
      dup2(devnull, STDOUT_FILENO);
      close(devnull);
    }
    std::vector<char*> argv;
    argv.reserve(args.size() + 1);
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    execv(worker_bin.c_str(), argv.data());
    _exit(127);
  }

  // Sample resident memory at >= 10 Hz while enforcing the caps.
  const double start = now_seconds();
  std::int64_t peak = 0;
  bool killed_timeout = false;
  bool killed_oom = false;
  int wstatus = 0;
  struct rusage usage{};
  for (;;) {
    const pid_t done = wait4(pid, &wstatus, WNOHANG, &usage);
    if (done == pid) break;
    peak = std::max(peak, read_rss_bytes(pid));
    const double elapsed = now_seconds() - start;
    if (!killed_timeout && !killed_oom && elapsed > cfg.time_cap_s) {
      kill(pid, SIGKILL);
      killed_timeout = true;
    }
    if (!killed_timeout && !killed_oom && cfg.memory_cap_bytes > 0 &&
        peak > cfg.memory_cap_bytes) {
      kill(pid, SIGKILL);
      killed_oom = true;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  const double elapsed = now_seconds() - start;
  // Post-exit high-water readback; ru_maxrss is in kilobytes on Linux.
  peak = std::max(peak, static_cast<std::int64_t>(usage.ru_maxrss) * 1024);
  t.peak_mem_bytes = peak;

  if (killed_timeout) {
    t.status = TrialStatus::timeout;
    t.wall_time_s = elapsed;
    return t;
  }
  if (killed_oom) {
    t.status = TrialStatus::oom;
    t.wall_time_s = elapsed;
    return t;
  }

  std::ifstream in(result_path);
  if (!in || !(WIFEXITED(wstatus) && WEXITSTATUS(wstatus) == 0)) {
    t.status = TrialStatus::error;
    t.wall_time_s = elapsed;
    t.error = "worker failed (exit status " + std::to_string(wstatus) + ")";
    return t;
  }
  try {
    json doc;
    in >> doc;
    const std::string status = doc.value("status", "error");
    if (status != "ok") {
      t.status = TrialStatus::error;
      t.error = doc.value("error", "unknown worker error");
      t.wall_time_s = elapsed;
      return t;
    }
    t.status = TrialStatus::ok;
    t.wall_time_s = doc.at("algo_seconds").get<double>();
    t.k = doc.at("k").get<std::int32_t>();
    const json& m = doc.at("metrics");
    t.metrics.chi = m.at("chi").get<double>();
    t.metrics.silhouette = m.at("silhouette").get<double>();
    t.metrics.sse_normalized = m.at("sse_norm").get<double>();
    t.metrics.within = m.at("within").get<double>();
    t.metrics.between = m.at("between").get<double>();
    t.metrics.ahr_per_region = m.at("ahr").get<std::vector<double>>();
    t.metrics.region_risk_rank = m.at("risk_rank").get<std::vector<std::int32_t>>();
  } catch (const std::exception& e) {
    t.status = TrialStatus::error;
    t.error = std::string("bad worker result: ") + e.what();
  }
  std::error_code ec2;
  fs::remove(result_path, ec2);
  return t;
}

std::string csv_header(std::int32_t max_regions) {
  std::string h = "algo,level,seed,k,time_s,peak_mem_bytes,status,chi,silhouette,sse_norm,within,between";
  for (std::int32_t i = 1; i <= max_regions; ++i) h += ",ahr_" + std::to_string(i);
  return h;
}

std::string csv_row(const TrialResult& t, std::int32_t max_regions) {
  std::ostringstream out;
  out << t.algo << ',' << t.level << ',' << t.seed << ',' << t.k << ','
      << fmt_double(t.wall_time_s) << ',' << t.peak_mem_bytes << ',' << to_string(t.status);
  if (t.status == TrialStatus::ok) {
    out << ',' << fmt_double(t.metrics.chi) << ',' << fmt_double(t.metrics.silhouette) << ','
        << fmt_double(t.metrics.sse_normalized) << ',' << fmt_double(t.metrics.within) << ','
        << fmt_double(t.metrics.between);
    for (std::int32_t i = 0; i < max_regions; ++i) {
      out << ',';
      if (i < static_cast<std::int32_t>(t.metrics.ahr_per_region.size()))
        out << fmt_double(t.metrics.ahr_per_region[i]);
    }
  } else {
    for (std::int32_t i = 0; i < 5 + max_regions; ++i) out << ',';
  }
  return out.str();
}

int run_experiment(const ExperimentConfig& cfg, std::ostream& csv,
                   const std::string& worker_bin, std::vector<TrialResult>* results) {
  const std::int32_t max_regions = cfg.max_regions();
  csv << csv_header(max_regions) << '\n' << std::flush;

  std::int64_t trials = 0, timeouts = 0, errors = 0;
  for (const auto& algo : cfg.algorithms) {
    for (const auto level : cfg.levels) {
      for (const auto seed : cfg.seeds) {
        TrialResult t = run_trial(cfg, algo, level, seed, worker_bin);
        ++trials;
        if (t.status == TrialStatus::timeout) ++timeouts;
        if (t.status == TrialStatus::error) ++errors;
        csv << csv_row(t, max_regions) << '\n' << std::flush;
        if (results) results->push_back(std::move(t));
      }
    }
  }
  if (errors > 0) return 3;
  if (trials > 0 && timeouts == trials) return 4;
  return 0;
}

void export_regions(const Partition& p, std::span<const SpatialUnit> units,
                    const std::string& path) {
  const BinMatrix bins = bin_national(feature_matrix(units));
  const auto ahr_values = ahr(p, bins);
  const auto ranks = risk_rank(ahr_values);
  write_regions_geojson(path, units, p, ranks);
}

}  // namespace regio

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "regio/hierarchy.hpp"
#include "regio/metrics.hpp"
#include "regio/objective.hpp"
#include "regio/spatial.hpp"

namespace regio {

enum class TrialStatus { ok, timeout, oom, error };
std::string to_string(TrialStatus s);

struct AlgoSpec {
  std::string name;  // agglomerative | skater | redcap | azp | maxp | kmeans
  Linkage linkage = Linkage::ward;
  OrderConstraint order = OrderConstraint::full;
  double threshold_fraction = 0.1;   // maxp: threshold = fraction * n
  double threshold_absolute = 0.0;   // maxp: used instead when > 0
  std::int32_t restarts = 16;

  /// CSV label, e.g. "agglomerative-ward", "redcap-full-complete", "skater".
  std::string label() const;
};

struct ExperimentConfig {
  std::vector<AlgoSpec> algorithms;
  std::vector<std::int32_t> levels;
  std::vector<std::uint64_t> seeds;
  std::int32_t k = 5;
  double time_cap_s = 3600.0;
  std::int64_t memory_cap_bytes = 0;  // 0 = no cap
  std::string data_dir = "data";
  std::string out_csv;
  bool generate_missing = true;
  double hole_fraction = 0.0;
  std::string contiguity = "queen";  // queen | rook | bridge
  std::int64_t silhouette_cap = 10000;

  /// Largest region count any row can report (bounds the ahr_* columns).
  std::int32_t max_regions() const;
};

ExperimentConfig load_config(const std::string& path);

struct TrialResult {
  std::string algo;
  std::int32_t level = 0;
  std::uint64_t seed = 0;
  std::int32_t k = 0;
  TrialStatus status = TrialStatus::error;
  double wall_time_s = 0.0;
  std::int64_t peak_mem_bytes = 0;
  MetricsReport metrics;  // valid iff status == ok
  std::string error;
};

/// Runs one (algo, level, seed) in an isolated worker process (the `worker`
/// subcommand of `worker_bin`), sampling its resident memory at >= 10 Hz and
/// reading the post-exit high-water mark. Kills the worker at the time cap
/// (status timeout) or the memory cap (status oom). The level file must
/// already exist.
TrialResult run_trial(const ExperimentConfig& cfg, const AlgoSpec& algo, std::int32_t level,
                      std::uint64_t seed, const std::string& worker_bin);

/// Ensures `data_dir/level_{L}_seed_{S}.geojson` exists (generating it when
/// configured to) and returns the path.
std::string ensure_level_file(const ExperimentConfig& cfg, std::int32_t level, std::uint64_t seed);

/// Full sweep. Rows are appended to `csv` and flushed after every trial, so
/// an interrupted sweep keeps its completed rows. Returns the process exit
/// code: 0 ok, 3 when any trial errored, 4 when every trial timed out.
int run_experiment(const ExperimentConfig& cfg, std::ostream& csv,
                   const std::string& worker_bin, std::vector<TrialResult>* results = nullptr);

std::string csv_header(std::int32_t max_regions);
std::string csv_row(const TrialResult& t, std::int32_t max_regions);

/// The in-process body of one trial: load, build the contiguity graph,
/// min-max normalize, run the algorithm (timed), compute metrics.
TrialResult run_trial_in_process(const std::string& units_path, const AlgoSpec& algo,
                                 std::int32_t level, std::uint64_t seed, std::int32_t k,
                                 const std::string& contiguity, std::int64_t silhouette_cap);

/// Dispatches an algorithm by spec on prepared inputs.
Partition run_algorithm(const AlgoSpec& algo, const ContiguityGraph& graph,
                        const FeatureMatrix& features, std::int32_t k, std::uint64_t seed);

/// Writes the unit-level region export with `risk_rank` ordered by ascending
/// region AHR (rank 1 = lowest risk).
void export_regions(const Partition& p, std::span<const SpatialUnit> units,
                    const std::string& path);

}  // namespace regio

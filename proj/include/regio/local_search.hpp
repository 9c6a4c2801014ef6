#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "regio/objective.hpp"
#include "regio/spatial.hpp"

namespace regio {

/// Random contiguous m-region partition grown from m random seed units by
/// randomized breadth-first accretion. Deterministic given the seed.
Partition azp_initial(const ContiguityGraph& graph, std::int32_t m, std::uint64_t seed);

struct AzpOptions {
  /// 0 = run until a full pass accepts no move (the convergence rule);
  /// otherwise an upper bound on passes.
  std::int32_t max_passes = 0;
  /// Re-verify donor connectivity with an independent full check after every
  /// accepted move; throws std::logic_error on violation.
  bool check_moves = false;
  /// Start from this partition instead of azp_initial (must have connected,
  /// nonempty regions).
  std::optional<Partition> initial;
};

struct AzpResult {
  Partition partition;
  double initial_w = 0.0;
  double final_w = 0.0;
  std::int64_t accepted_moves = 0;
  std::vector<double> objective_trace;  // W after each accepted move
};

/// AZP local optimization: regions are visited in random order without
/// replacement; border units move into the visited region when W strictly
/// decreases and the donor region stays connected and nonempty. Terminates
/// when a full pass over all regions accepts no move.
AzpResult azp(const ContiguityGraph& graph, const FeatureMatrix& features, std::int32_t m,
              std::uint64_t seed, const AzpOptions& options = {});

struct MaxpOptions {
  double threshold = 0.0;
  /// Per-unit nonnegative weights; empty = all ones (threshold counts units).
  std::vector<double> spatial_attr;
  std::int32_t restarts = 16;
  std::int32_t max_passes = 0;
  bool check_moves = false;
};

/// Max-P-Regions heuristic: threshold-constrained region growth, enclave
/// assignment, and AZP-style local search. The region count is data-driven;
/// the best of `restarts` runs is kept (max region count, then lower W).
Partition maxp(const ContiguityGraph& graph, const FeatureMatrix& features,
               const MaxpOptions& options, std::uint64_t seed);

/// Unconstrained K-Means baseline (k-means++ seeding, Lloyd iterations).
/// The contiguity invariant is explicitly waived for this operation.
Partition kmeans_baseline(const FeatureMatrix& features, std::int32_t k, std::uint64_t seed,
                          std::int32_t max_iters = 300);

}  // namespace regio

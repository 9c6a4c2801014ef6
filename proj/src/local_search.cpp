#include "regio/local_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "regio/kernels.hpp"
#include "regio/rng.hpp"

namespace regio {

namespace {

constexpr double kImproveRel = 1e-12;

/// Mutable region states for swap-based local search: per-region member list,
/// per-channel feature blocks (kernel-friendly SoA), moment sums, cached W.
class SwapEngine {
 public:
  SwapEngine(const ContiguityGraph& graph, const FeatureMatrix& features, Partition partition,
             const std::vector<double>* attr)
      : graph_(graph), features_(features), m_(features.cols()), attr_(attr) {
    labels_ = std::move(partition.labels);
    k_ = partition.k;
    regions_.resize(k_);
    for (auto& r : regions_) {
      r.cols.assign(m_, {});
      r.sum.assign(m_, 0.0);
    }
    pos_.assign(graph_.size(), 0);
    mu_.resize(m_);
    mark_.assign(graph_.size(), 0);
    target_mark_.assign(graph_.size(), 0);
    for (std::int32_t u = 0; u < graph_.size(); ++u) add_unit(labels_[u], u);
    for (std::int32_t r = 0; r < k_; ++r) {
      if (regions_[r].members.empty()) throw std::invalid_argument("swap engine: empty region");
      regions_[r].w = region_w(r);
      total_w_ += regions_[r].w;
    }
  }

  double total_w() const { return total_w_; }
  const std::vector<std::int32_t>& labels() const { return labels_; }
  std::int32_t region_count() const { return k_; }
  double region_attr(std::int32_t r) const { return regions_[r].attr; }
  const std::vector<std::int32_t>& region_members(std::int32_t r) const {
    return regions_[r].members;
  }

  /// Units outside region r adjacent to at least one member, ascending ids.
  void border_units(std::int32_t r, std::vector<std::int32_t>& out) {
    out.clear();
    ++generation_;
    for (const std::int32_t u : regions_[r].members) {
      for (const std::int32_t v : graph_.neighbors(u)) {
        if (labels_[v] != r && mark_[v] != generation_) {
          mark_[v] = generation_;
          out.push_back(v);
        }
      }
    }
    std::sort(out.begin(), out.end());
  }

  /// Moves u into region `to` iff W strictly decreases and the donor stays
  /// connected, nonempty, and (when min_attr > 0) above the attr threshold.
  bool try_move(std::int32_t u, std::int32_t to, double min_attr, bool check) {
    const std::int32_t from = labels_[u];
    if (from == to) return false;
    Region& donor = regions_[from];
    Region& rec = regions_[to];
    if (donor.members.size() <= 1) return false;
    if (min_attr > 0.0 && donor.attr - unit_attr(u) < min_attr) return false;

    auto row = features_.row(u);
    // W of the recipient with u appended: batch over the block + u's own term.
    double w_rec = 0.0;
    {
      const double inv = 1.0 / static_cast<double>(rec.members.size() + 1);
      for (std::int32_t j = 0; j < m_; ++j) mu_[j] = (rec.sum[j] + row[j]) * inv;
      w_rec = block_w(rec, mu_) + row_dist(row, mu_);
    }
    // W of the donor without u: batch over the block minus u's own term.
    double w_don = 0.0;
    {
      const double inv = 1.0 / static_cast<double>(donor.members.size() - 1);
      for (std::int32_t j = 0; j < m_; ++j) mu_[j] = (donor.sum[j] - row[j]) * inv;
      w_don = block_w(donor, mu_) - row_dist(row, mu_);
    }
    const double new_sum = w_rec + w_don;
    const double old_sum = rec.w + donor.w;
    if (!(new_sum < old_sum - kImproveRel * std::max(1.0, total_w_))) return false;
    if (!donor_stays_connected(u, from)) return false;

    remove_unit(from, u);
    add_unit(to, u);
    total_w_ += new_sum - old_sum;
    donor.w = w_don;
    rec.w = w_rec;

    if (check) {
      // The recipient gains an adjacent unit and trivially stays connected;
      // the donor is the region at risk.
      if (!is_region_connected(graph_, regions_[from].members))
        throw std::logic_error("local search: accepted move broke donor contiguity");
    }
    return true;
  }

  /// One visit of region r per the AZP rule: collect its border, shuffle,
  /// sweep once. Returns the number of accepted moves.
  std::int64_t visit_region(std::int32_t r, Rng& rng, double min_attr, bool check,
                            std::vector<double>* trace) {
    border_units(r, border_);
    rng.shuffle(border_);
    std::int64_t accepted = 0;
    for (const std::int32_t u : border_) {
      if (labels_[u] == r) continue;  // arrived here by an earlier move
      if (try_move(u, r, min_attr, check)) {
        ++accepted;
        if (trace) trace->push_back(total_w_);
      }
    }
    return accepted;
  }

  Partition partition() const {
    Partition p;
    p.labels = labels_;
    p.k = k_;
    p.canonicalize();
    return p;
  }

  /// Recomputed (non-incremental) W, for drift control in callers.
  double recompute_w() {
    double w = 0.0;
    for (std::int32_t r = 0; r < k_; ++r) w += region_w(r);
    return w;
  }

 private:
  struct Region {
    std::vector<std::int32_t> members;
    std::vector<std::vector<double>> cols;  // m channels parallel to members
    std::vector<double> sum;
    double attr = 0.0;
    double w = 0.0;
  };

  double unit_attr(std::int32_t u) const { return attr_ ? (*attr_)[u] : 1.0; }

  void add_unit(std::int32_t r, std::int32_t u) {
    Region& reg = regions_[r];
    pos_[u] = static_cast<std::int32_t>(reg.members.size());
    reg.members.push_back(u);
    auto row = features_.row(u);
    for (std::int32_t j = 0; j < m_; ++j) {
      reg.cols[j].push_back(row[j]);
      reg.sum[j] += row[j];
    }
    reg.attr += unit_attr(u);
    labels_[u] = r;
  }

  void remove_unit(std::int32_t r, std::int32_t u) {
    Region& reg = regions_[r];
    const std::int32_t p = pos_[u];
    const std::int32_t last = reg.members.back();
    reg.members[p] = last;
    pos_[last] = p;
    reg.members.pop_back();
    auto row = features_.row(u);
    for (std::int32_t j = 0; j < m_; ++j) {
      reg.cols[j][p] = reg.cols[j].back();
      reg.cols[j].pop_back();
      reg.sum[j] -= row[j];
    }
    reg.attr -= unit_attr(u);
  }

  double block_w(const Region& reg, const std::vector<double>& mu) {
    const std::size_t s = reg.members.size();
    if (s == 0) return 0.0;
    chan_ptrs_.resize(m_);
    for (std::int32_t j = 0; j < m_; ++j) chan_ptrs_[j] = reg.cols[j].data();
    return kernels::sum_euclid(chan_ptrs_.data(), m_, mu.data(), s);
  }

  double row_dist(std::span<const double> row, const std::vector<double>& mu) const {
    return std::sqrt(kernels::squared_distance(row.data(), mu.data(), m_));
  }

  double region_w(std::int32_t r) {
    Region& reg = regions_[r];
    const double inv = 1.0 / static_cast<double>(reg.members.size());
    for (std::int32_t j = 0; j < m_; ++j) mu_[j] = reg.sum[j] * inv;
    return block_w(reg, mu_);
  }

  /// Donor minus u stays connected iff every in-donor neighbor of u is
  /// reachable from the first one without passing through u.
  bool donor_stays_connected(std::int32_t u, std::int32_t from) {
    targets_.clear();
    for (const std::int32_t v : graph_.neighbors(u)) {
      if (labels_[v] == from) targets_.push_back(v);
    }
    if (targets_.size() <= 1) return true;

    ++target_gen_;
    for (const std::int32_t t : targets_) target_mark_[t] = target_gen_;

    ++generation_;
    mark_[u] = generation_;  // blocked
    std::size_t found = 1;   // targets_[0]
    bfs_.clear();
    bfs_.push_back(targets_[0]);
    mark_[targets_[0]] = generation_;
    for (std::size_t head = 0; head < bfs_.size() && found < targets_.size(); ++head) {
      const std::int32_t x = bfs_[head];
      for (const std::int32_t y : graph_.neighbors(x)) {
        if (labels_[y] != from || mark_[y] == generation_) continue;
        mark_[y] = generation_;
        bfs_.push_back(y);
        if (target_mark_[y] == target_gen_) ++found;
      }
    }
    return found == targets_.size();
  }

  const ContiguityGraph& graph_;
  const FeatureMatrix& features_;
  std::int32_t m_;
  const std::vector<double>* attr_;
  std::int32_t k_ = 0;
  double total_w_ = 0.0;
  std::vector<std::int32_t> labels_;
  std::vector<Region> regions_;
  std::vector<std::int32_t> pos_;

  std::vector<std::uint32_t> mark_, target_mark_;
  std::uint32_t generation_ = 0;
  std::uint32_t target_gen_ = 0;
  std::vector<double> tmp_, mu_;
  std::vector<const double*> chan_ptrs_;
  std::vector<std::int32_t> border_, targets_, bfs_;
};

}  // namespace

Partition azp_initial(const ContiguityGraph& graph, std::int32_t m, std::uint64_t seed) {
  const std::int32_t n = graph.size();
  if (m < 1 || m > n) throw std::invalid_argument("azp_initial: region count out of range");
  Rng rng(seed);

  std::vector<std::int32_t> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  rng.shuffle(ids);

  Partition p;
  p.labels.assign(n, -1);
  p.k = m;
  std::vector<std::vector<std::int32_t>> frontier(m);
  std::int32_t assigned = 0;
  for (std::int32_t r = 0; r < m; ++r) {
    const std::int32_t s = ids[r];
    p.labels[s] = r;
    ++assigned;
    for (const std::int32_t v : graph.neighbors(s)) frontier[r].push_back(v);
  }

  while (assigned < n) {
    std::int32_t r = static_cast<std::int32_t>(rng.next_below(m));
    std::int32_t probes = 0;
    while (frontier[r].empty() && probes++ < m) r = (r + 1) % m;
    if (frontier[r].empty()) throw std::invalid_argument("azp_initial: graph is disconnected");

    auto& f = frontier[r];
    const std::size_t idx = rng.next_below(f.size());
    const std::int32_t u = f[idx];
    f[idx] = f.back();
    f.pop_back();
    if (p.labels[u] != -1) continue;  // stale entry
    p.labels[u] = r;
    ++assigned;
    for (const std::int32_t v : graph.neighbors(u)) {
      if (p.labels[v] == -1) f.push_back(v);
    }
  }
  p.canonicalize();
  return p;
}

AzpResult azp(const ContiguityGraph& graph, const FeatureMatrix& features, std::int32_t m,
              std::uint64_t seed, const AzpOptions& options) {
  Rng rng(seed);
  Partition init = options.initial ? *options.initial : azp_initial(graph, m, seed);
  SwapEngine engine(graph, features, std::move(init), nullptr);

  AzpResult result;
  result.initial_w = engine.total_w();

  std::vector<std::int32_t> order(engine.region_count());
  std::iota(order.begin(), order.end(), 0);
  std::int32_t passes = 0;
  for (;;) {
    rng.shuffle(order);
    std::int64_t accepted_in_pass = 0;
    for (const std::int32_t r : order) {
      accepted_in_pass +=
          engine.visit_region(r, rng, 0.0, options.check_moves, &result.objective_trace);
    }
    result.accepted_moves += accepted_in_pass;
    ++passes;
    if (accepted_in_pass == 0) break;
    if (options.max_passes > 0 && passes >= options.max_passes) break;
  }

  result.final_w = engine.total_w();
  result.partition = engine.partition();
  return result;
}

namespace {

struct GrowthOutcome {
  Partition partition;  // labels over all units; k = grown region count
  double w = 0.0;
};

/// One Max-P restart: growth, enclave assignment, local search.
GrowthOutcome maxp_restart(const ContiguityGraph& graph, const FeatureMatrix& features,
                           const MaxpOptions& opt, Rng rng) {
  const std::int32_t n = graph.size();
  const std::int32_t m = features.cols();
  const std::vector<double>* attr = opt.spatial_attr.empty() ? nullptr : &opt.spatial_attr;
  auto unit_attr = [&](std::int32_t u) { return attr ? (*attr)[u] : 1.0; };

  // Phase 1: grow regions from random unassigned seeds until the threshold
  // is met; groups that stall under the threshold become enclaves.
  std::vector<std::int32_t> labels(n, -1);
  std::vector<std::int32_t> seed_order(n);
  std::iota(seed_order.begin(), seed_order.end(), 0);
  rng.shuffle(seed_order);

  std::vector<std::vector<std::int32_t>> groups;   // regions then enclaves
  std::vector<bool> is_enclave;
  std::vector<std::int32_t> frontier;
  for (const std::int32_t seed_unit : seed_order) {
    if (labels[seed_unit] != -1) continue;
    const std::int32_t g = static_cast<std::int32_t>(groups.size());
    std::vector<std::int32_t> members{seed_unit};
    labels[seed_unit] = g;
    double total = unit_attr(seed_unit);
    frontier.clear();
    for (const std::int32_t v : graph.neighbors(seed_unit)) {
      if (labels[v] == -1) frontier.push_back(v);
    }
    while (total < opt.threshold && !frontier.empty()) {
      const std::size_t idx = rng.next_below(frontier.size());
      const std::int32_t u = frontier[idx];
      frontier[idx] = frontier.back();
      frontier.pop_back();
      if (labels[u] != -1) continue;
      labels[u] = g;
      members.push_back(u);
      total += unit_attr(u);
      for (const std::int32_t v : graph.neighbors(u)) {
        if (labels[v] == -1) frontier.push_back(v);
      }
    }
    groups.push_back(std::move(members));
    is_enclave.push_back(total < opt.threshold);
  }

  // Phase 2: absorb each enclave into the neighboring region with the
  // smallest dissimilarity (distance between mean feature vectors). Enclaves
  // touching only enclaves wait for their neighbors to be absorbed first.
  std::vector<std::vector<double>> group_sum(groups.size(), std::vector<double>(m, 0.0));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const std::int32_t u : groups[g]) {
      auto row = features.row(u);
      for (std::int32_t j = 0; j < m; ++j) group_sum[g][j] += row[j];
    }
  }
  std::vector<char> pending(groups.size(), 0);
  std::vector<std::int32_t> enclaves;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (is_enclave[g]) {
      pending[g] = 1;
      enclaves.push_back(static_cast<std::int32_t>(g));
    }
  }
  std::vector<double> mu_e(m), mu_r(m);
  while (!enclaves.empty()) {
    bool progress = false;
    std::vector<std::int32_t> still;
    for (const std::int32_t e : enclaves) {
      // Neighboring non-enclave groups of this enclave.
      std::int32_t best = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (const std::int32_t u : groups[e]) {
        for (const std::int32_t v : graph.neighbors(u)) {
          const std::int32_t g = labels[v];
          if (g == e || pending[g]) continue;
          const double inv_e = 1.0 / static_cast<double>(groups[e].size());
          const double inv_r = 1.0 / static_cast<double>(groups[g].size());
          for (std::int32_t j = 0; j < m; ++j) {
            mu_e[j] = group_sum[e][j] * inv_e;
            mu_r[j] = group_sum[g][j] * inv_r;
          }
          const double d = std::sqrt(kernels::squared_distance(mu_e.data(), mu_r.data(), m));
          if (d < best_d || (d == best_d && g < best)) {
            best_d = d;
            best = g;
          }
        }
      }
      if (best < 0) {
        still.push_back(e);
        continue;
      }
      for (const std::int32_t u : groups[e]) {
        labels[u] = best;
        groups[best].push_back(u);
      }
      for (std::int32_t j = 0; j < m; ++j) group_sum[best][j] += group_sum[e][j];
      groups[e].clear();
      pending[e] = 0;
      is_enclave[e] = true;  // stays marked; group is now empty
      progress = true;
    }
    if (!progress && !still.empty())
      throw std::logic_error("maxp: enclave cannot reach any region");
    enclaves = std::move(still);
  }

  // Compact labels to the surviving regions.
  Partition p;
  p.labels.assign(n, -1);
  std::vector<std::int32_t> remap(groups.size(), -1);
  std::int32_t next = 0;
  for (std::int32_t u = 0; u < n; ++u) {
    const std::int32_t g = labels[u];
    if (remap[g] == -1) remap[g] = next++;
    p.labels[u] = remap[g];
  }
  p.k = next;

  // Phase 3: AZP-style swaps preserving contiguity and the threshold.
  SwapEngine engine(graph, features, std::move(p), attr);
  std::vector<std::int32_t> order(engine.region_count());
  std::iota(order.begin(), order.end(), 0);
  std::int32_t passes = 0;
  for (;;) {
    rng.shuffle(order);
    std::int64_t accepted = 0;
    for (const std::int32_t r : order) {
      accepted += engine.visit_region(r, rng, opt.threshold, opt.check_moves, nullptr);
    }
    ++passes;
    if (accepted == 0) break;
    if (opt.max_passes > 0 && passes >= opt.max_passes) break;
  }

  GrowthOutcome out;
  out.w = engine.total_w();
  out.partition = engine.partition();
  return out;
}

}  // namespace

Partition maxp(const ContiguityGraph& graph, const FeatureMatrix& features,
               const MaxpOptions& options, std::uint64_t seed) {
  const std::int32_t n = graph.size();
  if (n == 0) throw std::invalid_argument("maxp: empty graph");
  if (!options.spatial_attr.empty() &&
      options.spatial_attr.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("maxp: spatial_attr size mismatch");
  if (options.threshold <= 0.0) throw std::invalid_argument("maxp: threshold must be positive");
  double total = 0.0;
  for (std::int32_t u = 0; u < n; ++u) {
    const double a = options.spatial_attr.empty() ? 1.0 : options.spatial_attr[u];
    if (a < 0.0) throw std::invalid_argument("maxp: negative spatial attribute");
    total += a;
  }
  if (total < options.threshold)
    throw std::invalid_argument("maxp: total spatial attribute below threshold");
  if (connected_components(graph).k != 1)
    throw std::invalid_argument("maxp: graph is disconnected");

  const Rng base(seed);
  Partition best;
  double best_w = std::numeric_limits<double>::infinity();
  for (std::int32_t r = 0; r < std::max<std::int32_t>(options.restarts, 1); ++r) {
    GrowthOutcome out = maxp_restart(graph, features, options, base.fork(r));
    if (best.k == 0 || out.partition.k > best.k ||
        (out.partition.k == best.k && out.w < best_w)) {
      best = std::move(out.partition);
      best_w = out.w;
    }
  }
  return best;
}

Partition kmeans_baseline(const FeatureMatrix& features, std::int32_t k, std::uint64_t seed,
                          std::int32_t max_iters) {
  const std::int32_t n = features.rows();
  const std::int32_t m = features.cols();
  if (k < 1 || k > n) throw std::invalid_argument("kmeans: k out of range");

  Partition p;
  p.labels.assign(n, 0);
  p.k = k;
  if (k == n) {
    std::iota(p.labels.begin(), p.labels.end(), 0);
    return p;
  }
  if (k == 1) return p;

  Rng rng(seed);
  const auto cols = features.columns();

  // k-means++ seeding.
  std::vector<std::vector<double>> centers;
  centers.reserve(k);
  std::vector<double> d2(n, 0.0), cand(n);
  {
    const std::int32_t first = static_cast<std::int32_t>(rng.next_below(n));
    centers.emplace_back(features.row(first).begin(), features.row(first).end());
    std::fill(d2.begin(), d2.end(), 0.0);
    for (std::int32_t j = 0; j < m; ++j)
      kernels::accumulate_sq_diff(d2.data(), cols[j].data(), centers[0][j], n);
  }
  while (static_cast<std::int32_t>(centers.size()) < k) {
    const double total = kernels::sum(d2.data(), n);
    std::int32_t pick;
    if (total <= 0.0) {
      pick = static_cast<std::int32_t>(rng.next_below(n));
    } else {
      const double x = rng.next_double() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::int32_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (x < acc) {
          pick = i;
          break;
        }
      }
    }
    centers.emplace_back(features.row(pick).begin(), features.row(pick).end());
    std::fill(cand.begin(), cand.end(), 0.0);
    for (std::int32_t j = 0; j < m; ++j)
      kernels::accumulate_sq_diff(cand.data(), cols[j].data(), centers.back()[j], n);
    for (std::int32_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], cand[i]);
  }

  // Lloyd iterations.
  std::vector<std::vector<double>> dist(k, std::vector<double>(n));
  std::vector<std::int64_t> counts(k);
  for (std::int32_t iter = 0; iter < max_iters; ++iter) {
    for (std::int32_t c = 0; c < k; ++c) {
      std::fill(dist[c].begin(), dist[c].end(), 0.0);
      for (std::int32_t j = 0; j < m; ++j)
        kernels::accumulate_sq_diff(dist[c].data(), cols[j].data(), centers[c][j], n);
    }
    bool changed = false;
    for (std::int32_t i = 0; i < n; ++i) {
      std::int32_t best = 0;
      double best_d = dist[0][i];
      for (std::int32_t c = 1; c < k; ++c) {
        if (dist[c][i] < best_d) {
          best_d = dist[c][i];
          best = c;
        }
      }
      if (p.labels[i] != best) {
        p.labels[i] = best;
        changed = true;
      }
    }
    // Repair empty clusters with the point farthest from its center.
    std::fill(counts.begin(), counts.end(), 0);
    for (const auto l : p.labels) ++counts[l];
    for (std::int32_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      std::int32_t far = -1;
      double far_d = -1.0;
      for (std::int32_t i = 0; i < n; ++i) {
        if (counts[p.labels[i]] <= 1) continue;
        const double d = dist[p.labels[i]][i];
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far >= 0) {
        --counts[p.labels[far]];
        p.labels[far] = c;
        counts[c] = 1;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
    // Recompute centers.
    for (auto& c : centers) std::fill(c.begin(), c.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::int32_t i = 0; i < n; ++i) {
      auto row = features.row(i);
      auto& c = centers[p.labels[i]];
      for (std::int32_t j = 0; j < m; ++j) c[j] += row[j];
      ++counts[p.labels[i]];
    }
    for (std::int32_t c = 0; c < k; ++c) {
      for (std::int32_t j = 0; j < m; ++j) centers[c][j] /= static_cast<double>(counts[c]);
    }
  }
  p.canonicalize();
  return p;
}

}  // namespace regio

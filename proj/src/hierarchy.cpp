#include "regio/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "regio/kernels.hpp"

namespace regio {

OrderConstraint order_from_string(const std::string& s) {
  if (s == "first") return OrderConstraint::first;
  if (s == "full") return OrderConstraint::full;
  throw std::invalid_argument("unknown order constraint: " + s);
}

std::string to_string(OrderConstraint o) {
  return o == OrderConstraint::first ? "first" : "full";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct PairData {
  double value = 0.0;   // linkage value, or a lower bound when !exact
  double min_edge_w = kInf;
  double first_sum = 0.0;
  double first_min = kInf;
  double first_max = 0.0;
  std::int64_t first_cnt = 0;
  std::int32_t edge_u = -1;
  std::int32_t edge_v = -1;
  bool exact = true;
};

struct HeapEntry {
  double value;
  std::int32_t a, b;  // a < b
  bool exact;
};

struct HeapGreater {
  bool operator()(const HeapEntry& x, const HeapEntry& y) const {
    if (x.value != y.value) return x.value > y.value;
    if (x.a != y.a) return x.a > y.a;
    if (x.b != y.b) return x.b > y.b;
    return x.exact && !y.exact;  // bounds drain before equal exact entries
  }
};

std::uint64_t pair_key(std::int32_t a, std::int32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

/// Full merge state: cluster moments, member lists, adjacency, candidate heap.
class MergeEngine {
 public:
  MergeEngine(const ContiguityGraph& graph, const FeatureMatrix& features,
              const MergeOptions& opt)
      : graph_(graph), features_(features), opt_(opt), n_(graph.size()), m_(features.cols()) {
    if (features.rows() != n_) throw std::invalid_argument("constrained_merge: size mismatch");
    track_members_ = opt_.order == OrderConstraint::full && opt_.linkage != Linkage::ward;
  }

  MergeResult run() {
    const std::int32_t slots = n_ > 0 ? 2 * n_ - 1 : 0;
    alive_.assign(slots, false);
    count_.assign(slots, 0);
    sum_.assign(static_cast<std::size_t>(slots) * m_, 0.0);
    rad_.assign(slots, 0.0);
    neighbors_.resize(slots);
    if (track_members_) members_.resize(slots);

    for (std::int32_t i = 0; i < n_; ++i) {
      alive_[i] = true;
      count_[i] = 1;
      auto row = features_.row(i);
      std::copy(row.begin(), row.end(), sum_.begin() + static_cast<std::size_t>(i) * m_);
      if (track_members_) members_[i] = {i};
    }

    for (const auto& [i, j] : graph_.edges()) {
      const double d = std::sqrt(
          kernels::squared_distance(features_.row(i).data(), features_.row(j).data(), m_));
      PairData pd;
      pd.value = opt_.linkage == Linkage::ward ? 0.5 * d * d : d;
      pd.min_edge_w = d;
      pd.edge_u = i;
      pd.edge_v = j;
      pd.first_sum = d;
      pd.first_min = d;
      pd.first_max = d;
      pd.first_cnt = 1;
      pairs_.emplace(pair_key(i, j), pd);
      neighbors_[i].insert(j);
      neighbors_[j].insert(i);
      heap_.push({pd.value, i, j, true});
    }

    MergeResult result;
    result.tree.n_leaves = n_;
    std::int32_t next_id = n_;
    const std::int32_t target = n_ > 0 ? n_ - 1 : 0;

    while (static_cast<std::int32_t>(result.tree.merges.size()) < target) {
      if (heap_.empty()) {
        if (opt_.allow_forest) break;
        throw std::invalid_argument("constrained_merge: graph is disconnected");
      }
      const HeapEntry e = heap_.top();
      heap_.pop();
      const auto it = pairs_.find(pair_key(e.a, e.b));
      if (it == pairs_.end() || !alive_[e.a] || !alive_[e.b]) continue;
      PairData& pd = it->second;
      if (pd.value != e.value || pd.exact != e.exact) continue;  // stale

      if (!pd.exact) {
        pd.value = direct_linkage(e.a, e.b);
        pd.exact = true;
        heap_.push({pd.value, e.a, e.b, true});
        continue;
      }
      merge(e.a, e.b, pd, next_id, result);
      ++next_id;
    }
    return result;
  }

 private:
  std::span<const double> cluster_sum(std::int32_t c) const {
    return {sum_.data() + static_cast<std::size_t>(c) * m_, static_cast<std::size_t>(m_)};
  }

  void cluster_mean(std::int32_t c, double* out) const {
    const double inv = 1.0 / static_cast<double>(count_[c]);
    auto s = cluster_sum(c);
    for (std::int32_t j = 0; j < m_; ++j) out[j] = s[j] * inv;
  }

  double mean_distance(std::int32_t a, std::int32_t b) const {
    scratch_a_.resize(m_);
    scratch_b_.resize(m_);
    cluster_mean(a, scratch_a_.data());
    cluster_mean(b, scratch_b_.data());
    return std::sqrt(kernels::squared_distance(scratch_a_.data(), scratch_b_.data(), m_));
  }

  double ward_value(std::int32_t a, std::int32_t b) const {
    const double na = static_cast<double>(count_[a]);
    const double nb = static_cast<double>(count_[b]);
    const double d = mean_distance(a, b);
    return na * nb / (na + nb) * d * d;
  }

  /// Exact full-order linkage by member enumeration (SoA batches over the
  /// larger side).
  double direct_linkage(std::int32_t a, std::int32_t b) {
    const auto& ma = members_[a];
    const auto& mb = members_[b];
    const auto& big = ma.size() >= mb.size() ? ma : mb;
    const auto& small = ma.size() >= mb.size() ? mb : ma;

    soa_.assign(static_cast<std::size_t>(m_) * big.size(), 0.0);
    for (std::size_t i = 0; i < big.size(); ++i) {
      auto row = features_.row(big[i]);
      for (std::int32_t j = 0; j < m_; ++j) soa_[static_cast<std::size_t>(j) * big.size() + i] = row[j];
    }
    chan_ptrs_.resize(m_);
    for (std::int32_t j = 0; j < m_; ++j)
      chan_ptrs_[j] = soa_.data() + static_cast<std::size_t>(j) * big.size();

    double agg_min = kInf;
    double agg_max = 0.0;
    double agg_sum = 0.0;
    for (const std::int32_t u : small) {
      auto row = features_.row(u);
      switch (opt_.linkage) {
        case Linkage::single:
        case Linkage::complete: {
          const auto [lo, hi] =
              kernels::sq_dist_min_max(chan_ptrs_.data(), m_, row.data(), big.size());
          agg_min = std::min(agg_min, lo);
          agg_max = std::max(agg_max, hi);
          break;
        }
        default:
          agg_sum += kernels::sum_euclid(chan_ptrs_.data(), m_, row.data(), big.size());
          break;
      }
    }
    switch (opt_.linkage) {
      case Linkage::single: return std::sqrt(agg_min);
      case Linkage::complete: return std::sqrt(agg_max);
      default:
        return agg_sum / (static_cast<double>(ma.size()) * static_cast<double>(mb.size()));
    }
  }

  /// Lower bound on the full-order linkage between live clusters a and b.
  double bound_linkage(std::int32_t a, std::int32_t b) const {
    const double d = mean_distance(a, b);
    if (opt_.linkage == Linkage::single) return std::max(0.0, d - rad_[a] - rad_[b]);
    return d;  // complete and average are both >= the distance of the means
  }

  void merge(std::int32_t a, std::int32_t b, const PairData& pd_ab, std::int32_t c,
             MergeResult& result) {
    result.tree.merges.push_back({a, b, c, pd_ab.value});
    if (opt_.record_connecting_edges) {
      result.connecting_edges.push_back({pd_ab.edge_u, pd_ab.edge_v, pd_ab.min_edge_w});
    }

    count_[c] = count_[a] + count_[b];
    {
      auto sa = cluster_sum(a);
      auto sb = cluster_sum(b);
      double* sc = sum_.data() + static_cast<std::size_t>(c) * m_;
      for (std::int32_t j = 0; j < m_; ++j) sc[j] = sa[j] + sb[j];
    }
    // Radius upper bound for the single-linkage lower bound.
    {
      scratch_a_.resize(m_);
      scratch_b_.resize(m_);
      scratch_c_.resize(m_);
      cluster_mean(a, scratch_a_.data());
      cluster_mean(b, scratch_b_.data());
      cluster_mean(c, scratch_c_.data());
      const double da =
          std::sqrt(kernels::squared_distance(scratch_a_.data(), scratch_c_.data(), m_));
      const double db =
          std::sqrt(kernels::squared_distance(scratch_b_.data(), scratch_c_.data(), m_));
      rad_[c] = std::max(rad_[a] + da, rad_[b] + db);
    }
    if (track_members_) {
      auto& mc = members_[c];
      if (members_[a].size() >= members_[b].size()) {
        mc = std::move(members_[a]);
        mc.insert(mc.end(), members_[b].begin(), members_[b].end());
      } else {
        mc = std::move(members_[b]);
        mc.insert(mc.end(), members_[a].begin(), members_[a].end());
      }
      members_[a].clear();
      members_[a].shrink_to_fit();
      members_[b].clear();
      members_[b].shrink_to_fit();
    }

    alive_[a] = false;
    alive_[b] = false;
    alive_[c] = true;

    auto& na = neighbors_[a];
    auto& nb = neighbors_[b];
    auto& nc = neighbors_[c];
    nc.reserve(na.size() + nb.size());
    for (const std::int32_t k : na)
      if (k != b) nc.insert(k);
    for (const std::int32_t k : nb)
      if (k != a) nc.insert(k);

    for (const std::int32_t k : nc) {
      const auto it_ak = pairs_.find(pair_key(a, k));
      const auto it_bk = pairs_.find(pair_key(b, k));
      const PairData* pa = it_ak != pairs_.end() ? &it_ak->second : nullptr;
      const PairData* pb = it_bk != pairs_.end() ? &it_bk->second : nullptr;

      PairData pd;
      // Cross-edge aggregates and the recorded minimum-weight edge combine
      // exactly from whichever sides exist.
      for (const PairData* p : {pa, pb}) {
        if (!p) continue;
        pd.first_sum += p->first_sum;
        pd.first_cnt += p->first_cnt;
        pd.first_min = std::min(pd.first_min, p->first_min);
        pd.first_max = std::max(pd.first_max, p->first_max);
        if (p->min_edge_w < pd.min_edge_w ||
            (p->min_edge_w == pd.min_edge_w && p->edge_u < pd.edge_u)) {
          pd.min_edge_w = p->min_edge_w;
          pd.edge_u = p->edge_u;
          pd.edge_v = p->edge_v;
        }
      }

      if (opt_.linkage == Linkage::ward) {
        pd.value = ward_value(c, k);
        pd.exact = true;
      } else if (opt_.order == OrderConstraint::first) {
        switch (opt_.linkage) {
          case Linkage::single: pd.value = pd.first_min; break;
          case Linkage::complete: pd.value = pd.first_max; break;
          default: pd.value = pd.first_sum / static_cast<double>(pd.first_cnt); break;
        }
        pd.exact = true;
      } else {
        const double va = pa ? pa->value : bound_linkage(a, k);
        const double vb = pb ? pb->value : bound_linkage(b, k);
        const bool both_exact = pa && pb && pa->exact && pb->exact;
        switch (opt_.linkage) {
          case Linkage::single: pd.value = std::min(va, vb); break;
          case Linkage::complete: pd.value = std::max(va, vb); break;
          default: {
            const double wa = static_cast<double>(count_[a]);
            const double wb = static_cast<double>(count_[b]);
            pd.value = (wa * va + wb * vb) / (wa + wb);
            break;
          }
        }
        pd.exact = both_exact;
      }

      if (pa) pairs_.erase(it_ak);
      if (pb) pairs_.erase(it_bk);
      neighbors_[k].erase(a);
      neighbors_[k].erase(b);
      neighbors_[k].insert(c);

      pairs_.emplace(pair_key(c, k), pd);
      heap_.push({pd.value, std::min(c, k), std::max(c, k), pd.exact});
    }

    pairs_.erase(pair_key(a, b));
    na.clear();
    nb.clear();
    std::unordered_set<std::int32_t>().swap(na);
    std::unordered_set<std::int32_t>().swap(nb);
  }

  const ContiguityGraph& graph_;
  const FeatureMatrix& features_;
  MergeOptions opt_;
  std::int32_t n_;
  std::int32_t m_;
  bool track_members_ = false;

  std::vector<bool> alive_;
  std::vector<std::int64_t> count_;
  std::vector<double> sum_;
  std::vector<double> rad_;
  std::vector<std::unordered_set<std::int32_t>> neighbors_;
  std::vector<std::vector<std::int32_t>> members_;
  std::unordered_map<std::uint64_t, PairData> pairs_;
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapGreater> heap_;

  mutable std::vector<double> scratch_a_, scratch_b_, scratch_c_;
  std::vector<double> soa_;
  std::vector<const double*> chan_ptrs_;
};

}  // namespace

MergeResult constrained_merge(const ContiguityGraph& graph, const FeatureMatrix& features,
                              const MergeOptions& options) {
  MergeEngine engine(graph, features, options);
  return engine.run();
}

MergeTree constrained_agglomerative(const ContiguityGraph& graph, const FeatureMatrix& features,
                                    Linkage linkage) {
  MergeOptions opt;
  opt.linkage = linkage;
  return constrained_merge(graph, features, opt).tree;
}

Partition cut(const MergeTree& tree, std::int32_t k) {
  const std::int32_t n = tree.n_leaves;
  const std::int32_t components = n - static_cast<std::int32_t>(tree.merges.size());
  if (k < components || k > n || n == 0)
    throw std::invalid_argument("cut: k out of range (" + std::to_string(components) + ".." +
                                std::to_string(n) + ")");
  const std::int32_t apply = n - k;

  std::vector<std::int32_t> parent(static_cast<std::size_t>(n) + apply);
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<std::int32_t>(i);
  auto find = [&](std::int32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (std::int32_t t = 0; t < apply; ++t) {
    const MergeRecord& mr = tree.merges[t];
    if (mr.parent != n + t) throw std::invalid_argument("cut: malformed merge tree");
    parent[find(mr.left)] = find(mr.parent);
    parent[find(mr.right)] = find(mr.parent);
  }

  Partition p;
  p.labels.resize(n);
  std::unordered_map<std::int32_t, std::int32_t> remap;
  remap.reserve(k * 2);
  std::int32_t next = 0;
  for (std::int32_t i = 0; i < n; ++i) {
    const std::int32_t root = find(i);
    auto [it, inserted] = remap.emplace(root, next);
    if (inserted) ++next;
    p.labels[i] = it->second;
  }
  p.k = next;
  return p;
}

}  // namespace regio

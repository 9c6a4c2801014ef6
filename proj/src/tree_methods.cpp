#include "regio/tree_methods.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "regio/kernels.hpp"

namespace regio {

namespace {

struct Dsu {
  std::vector<std::int32_t> parent;
  explicit Dsu(std::int32_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::int32_t find(std::int32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

}  // namespace

double SpanningTree::total_weight() const {
  double s = 0.0;
  for (const double w : weights) s += w;
  return s;
}

SpanningTree build_mst(const ContiguityGraph& graph, const FeatureMatrix& features) {
  const std::int32_t n = graph.size();
  if (features.rows() != n) throw std::invalid_argument("build_mst: size mismatch");
  const std::int32_t m = features.cols();

  struct WeightedEdge {
    double w;
    std::int32_t u, v;
  };
  std::vector<WeightedEdge> edges;
  edges.reserve(static_cast<std::size_t>(graph.edge_count()));
  for (const auto& [u, v] : graph.edges()) {
    const double w =
        std::sqrt(kernels::squared_distance(features.row(u).data(), features.row(v).data(), m));
    edges.push_back({w, u, v});
  }
  std::sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
    if (a.w != b.w) return a.w < b.w;
    if (a.u != b.u) return a.u < b.u;
    return a.v < b.v;
  });

  SpanningTree tree;
  tree.n = n;
  Dsu dsu(n);
  for (const auto& e : edges) {
    if (dsu.unite(e.u, e.v)) {
      tree.edges.emplace_back(e.u, e.v);
      tree.weights.push_back(e.w);
    }
  }
  if (n > 0 && static_cast<std::int32_t>(tree.edges.size()) != n - 1) {
    const std::int32_t root = dsu.find(0);
    for (std::int32_t i = 1; i < n; ++i) {
      if (dsu.find(i) != root) {
        throw std::invalid_argument("build_mst: graph is disconnected (no path between unit 0 and unit " +
                                    std::to_string(i) + ")");
      }
    }
  }
  return tree;
}

SpanningTree redcap_tree(const ContiguityGraph& graph, const FeatureMatrix& features,
                         Linkage linkage, OrderConstraint order) {
  MergeOptions opt;
  opt.linkage = linkage;
  opt.order = order;
  opt.record_connecting_edges = true;
  const MergeResult res = constrained_merge(graph, features, opt);

  SpanningTree tree;
  tree.n = graph.size();
  tree.edges.reserve(res.connecting_edges.size());
  tree.weights.reserve(res.connecting_edges.size());
  for (const auto& e : res.connecting_edges) {
    tree.edges.emplace_back(e.u, e.v);
    tree.weights.push_back(e.weight);
  }
  return tree;
}

namespace {

/// One region of the evolving forest plus its cached best cut.
struct CutRegion {
  std::vector<std::int32_t> members;
  double w = 0.0;               // W of this region
  double best_sum = 0.0;        // W(A) + W(B) for the best internal cut
  std::int32_t best_edge = -1;  // global edge id, -1 if the region has no edges
  std::int32_t best_child = -1; // endpoint whose subtree becomes the new region
};

class TreePartitioner {
 public:
  TreePartitioner(const SpanningTree& tree, const FeatureMatrix& features)
      : tree_(tree), features_(features), n_(tree.n), m_(features.cols()) {
    adj_.resize(n_);
    for (std::size_t e = 0; e < tree_.edges.size(); ++e) {
      const auto& [u, v] = tree_.edges[e];
      adj_[u].push_back({v, static_cast<std::int32_t>(e)});
      adj_[v].push_back({u, static_cast<std::int32_t>(e)});
    }
    for (auto& a : adj_) std::sort(a.begin(), a.end());
    region_of_.assign(n_, 0);
  }

  Partition run(std::int32_t k) {
    CutRegion whole;
    whole.members.resize(n_);
    std::iota(whole.members.begin(), whole.members.end(), 0);
    regions_.push_back(std::move(whole));
    evaluate(0);

    for (std::int32_t cuts = 0; cuts < k - 1; ++cuts) {
      std::int32_t pick = -1;
      double pick_decrease = -std::numeric_limits<double>::infinity();
      std::pair<std::int32_t, std::int32_t> pick_edge{0, 0};
      for (std::size_t r = 0; r < regions_.size(); ++r) {
        const CutRegion& reg = regions_[r];
        if (reg.best_edge < 0) continue;
        const double decrease = reg.w - reg.best_sum;
        const auto& [eu, ev] = tree_.edges[reg.best_edge];
        const std::pair<std::int32_t, std::int32_t> edge{std::min(eu, ev), std::max(eu, ev)};
        if (pick < 0 || decrease > pick_decrease ||
            (decrease == pick_decrease && edge < pick_edge)) {
          pick = static_cast<std::int32_t>(r);
          pick_decrease = decrease;
          pick_edge = edge;
        }
      }
      if (pick < 0) throw std::logic_error("tree_partition: no cuttable edge left");
      split(pick);
    }

    Partition p;
    p.labels.assign(n_, -1);
    for (std::size_t r = 0; r < regions_.size(); ++r) {
      for (const std::int32_t u : regions_[r].members) p.labels[u] = static_cast<std::int32_t>(r);
    }
    p.k = static_cast<std::int32_t>(regions_.size());
    p.canonicalize();
    return p;
  }

 private:
  // Fills order/parent-edge/subtree arrays for the region rooted at members[0]
  // and scores every internal edge; caches the region's best cut.
  void evaluate(std::size_t r) {
    CutRegion& reg = regions_[r];
    const std::int32_t s = static_cast<std::int32_t>(reg.members.size());
    if (s == 1) {
      reg.w = 0.0;
      reg.best_edge = -1;
      reg.best_child = -1;
      reg.best_sum = 0.0;
      return;
    }
    const std::int32_t rid = region_of_[reg.members[0]];

    order_.clear();
    order_.reserve(s);
    parent_edge_.assign(s, -1);
    parent_pos_.assign(s, -1);
    size_.assign(s, 1);
    if (pos_of_.size() != static_cast<std::size_t>(n_)) pos_of_.assign(n_, -1);

    // Preorder traversal; subtrees occupy contiguous index ranges.
    stack_.clear();
    stack_.push_back({reg.members[0], -1});
    while (!stack_.empty()) {
      const auto [u, pe] = stack_.back();
      stack_.pop_back();
      const std::int32_t idx = static_cast<std::int32_t>(order_.size());
      order_.push_back(u);
      pos_of_[u] = idx;
      parent_edge_[idx] = pe;
      for (auto it = adj_[u].rbegin(); it != adj_[u].rend(); ++it) {
        const auto [v, e] = *it;
        if (e == pe || region_of_[v] != rid) continue;
        stack_.push_back({v, e});
      }
    }
    // Parent positions and subtree sizes (children appear after parents).
    for (std::int32_t i = 1; i < s; ++i) {
      const auto& [u, v] = tree_.edges[parent_edge_[i]];
      const std::int32_t parent_unit = (u == order_[i]) ? v : u;
      parent_pos_[i] = pos_of_[parent_unit];
    }
    for (std::int32_t i = s - 1; i >= 1; --i) size_[parent_pos_[i]] += size_[i];

    // Subtree feature sums in traversal order.
    sums_.assign(static_cast<std::size_t>(s) * m_, 0.0);
    soa_.assign(static_cast<std::size_t>(s) * m_, 0.0);
    for (std::int32_t i = 0; i < s; ++i) {
      auto row = features_.row(order_[i]);
      for (std::int32_t j = 0; j < m_; ++j) {
        sums_[static_cast<std::size_t>(i) * m_ + j] = row[j];
        soa_[static_cast<std::size_t>(j) * s + i] = row[j];
      }
    }
    for (std::int32_t i = s - 1; i >= 1; --i) {
      double* dst = sums_.data() + static_cast<std::size_t>(parent_pos_[i]) * m_;
      const double* src = sums_.data() + static_cast<std::size_t>(i) * m_;
      for (std::int32_t j = 0; j < m_; ++j) dst[j] += src[j];
    }

    tmp_.resize(s);
    mu_a_.resize(m_);
    mu_b_.resize(m_);

    reg.w = range_w(0, s, sums_.data(), static_cast<double>(s));

    double best = std::numeric_limits<double>::infinity();
    std::pair<std::int32_t, std::int32_t> best_edge_pair{0, 0};
    std::int32_t best_edge = -1;
    std::int32_t best_child = -1;
    const double* root_sum = sums_.data();
    for (std::int32_t i = 1; i < s; ++i) {
      const std::int32_t na = size_[i];
      const std::int32_t nb = s - na;
      const double* sub = sums_.data() + static_cast<std::size_t>(i) * m_;
      for (std::int32_t j = 0; j < m_; ++j) {
        mu_a_[j] = sub[j] / na;
        mu_b_[j] = (root_sum[j] - sub[j]) / nb;
      }
      const double wa = slice_w(i, i + na, mu_a_.data());
      const double wb = slice_w(0, i, mu_b_.data()) + slice_w(i + na, s, mu_b_.data());
      const double cand = wa + wb;
      const auto& [eu, ev] = tree_.edges[parent_edge_[i]];
      const std::pair<std::int32_t, std::int32_t> ep{std::min(eu, ev), std::max(eu, ev)};
      if (cand < best || (cand == best && ep < best_edge_pair)) {
        best = cand;
        best_edge_pair = ep;
        best_edge = parent_edge_[i];
        best_child = order_[i];
      }
    }
    reg.best_sum = best;
    reg.best_edge = best_edge;
    reg.best_child = best_child;
  }

  // W over traversal slice [lo, hi) against the supplied mean.
  double slice_w(std::int32_t lo, std::int32_t hi, const double* mu) {
    if (lo >= hi) return 0.0;
    const std::int32_t s = static_cast<std::int32_t>(order_.size());
    chan_ptrs_.resize(m_);
    for (std::int32_t j = 0; j < m_; ++j)
      chan_ptrs_[j] = soa_.data() + static_cast<std::size_t>(j) * s + lo;
    return kernels::sum_euclid(chan_ptrs_.data(), m_, mu, hi - lo);
  }

  double range_w(std::int32_t lo, std::int32_t hi, const double* sum, double count) {
    mu_a_.resize(m_);
    for (std::int32_t j = 0; j < m_; ++j) mu_a_[j] = sum[j] / count;
    return slice_w(lo, hi, mu_a_.data());
  }

  void split(std::size_t r) {
    CutRegion& reg = regions_[r];
    const std::int32_t cut_edge = reg.best_edge;
    const std::int32_t child = reg.best_child;
    const std::int32_t rid = region_of_[reg.members[0]];
    const std::int32_t new_rid = static_cast<std::int32_t>(regions_.size());

    // Child-side members via BFS avoiding the cut edge.
    std::vector<std::int32_t> side;
    side.push_back(child);
    region_of_[child] = new_rid;
    for (std::size_t head = 0; head < side.size(); ++head) {
      const std::int32_t u = side[head];
      for (const auto& [v, e] : adj_[u]) {
        if (e == cut_edge || region_of_[v] != rid) continue;
        region_of_[v] = new_rid;
        side.push_back(v);
      }
    }

    std::vector<std::int32_t> rest;
    rest.reserve(reg.members.size() - side.size());
    for (const std::int32_t u : reg.members) {
      if (region_of_[u] == rid) rest.push_back(u);
    }
    reg.members = std::move(rest);

    CutRegion fresh;
    fresh.members = std::move(side);
    regions_.push_back(std::move(fresh));

    evaluate(r);
    evaluate(regions_.size() - 1);
  }

  const SpanningTree& tree_;
  const FeatureMatrix& features_;
  std::int32_t n_;
  std::int32_t m_;
  std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> adj_;  // (neighbor, edge id)
  std::vector<std::int32_t> region_of_;
  std::vector<CutRegion> regions_;

  // evaluate() scratch
  std::vector<std::int32_t> order_, parent_edge_, parent_pos_, size_, pos_of_;
  std::vector<std::pair<std::int32_t, std::int32_t>> stack_;
  std::vector<double> sums_, soa_, tmp_, mu_a_, mu_b_;
  std::vector<const double*> chan_ptrs_;
};

}  // namespace

Partition tree_partition(const SpanningTree& tree, const FeatureMatrix& features, std::int32_t k) {
  if (tree.n <= 0) throw std::invalid_argument("tree_partition: empty tree");
  if (k < 1 || k > tree.n) throw std::invalid_argument("tree_partition: k out of range");
  if (static_cast<std::int32_t>(tree.edges.size()) != tree.n - 1)
    throw std::invalid_argument("tree_partition: not a spanning tree");
  TreePartitioner tp(tree, features);
  return tp.run(k);
}

Partition skater(const ContiguityGraph& graph, const FeatureMatrix& features, std::int32_t k) {
  return tree_partition(build_mst(graph, features), features, k);
}

Partition redcap(const ContiguityGraph& graph, const FeatureMatrix& features, std::int32_t k,
                 Linkage linkage, OrderConstraint order) {
  return tree_partition(redcap_tree(graph, features, linkage, order), features, k);
}

}  // namespace regio

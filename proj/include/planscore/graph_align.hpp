#pragma once

// Exact alignment between small plan DAGs: minimum edit distance under
// unlabeled nodes (substitution free, insert/delete charged) and a maximum
// edge-consistent node matching.  Both searches are exhaustive with
// branch-and-bound pruning, sized for plans of at most a dozen nodes.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "planscore/errors.hpp"
#include "planscore/plan_graph.hpp"

namespace planscore {

struct EditCosts {
  double node_insert = 1.0;
  double node_delete = 1.0;
  double edge_insert = 1.0;
  double edge_delete = 1.0;
};

struct Matching {
  std::vector<std::pair<int, int>> pairs;  // (rollout node, gold node), sorted
  std::size_t size() const { return pairs.size(); }
};

inline constexpr int kDefaultMaxAlignNodes = 10;
inline constexpr int kHardMaxAlignNodes = 16;  // adjacency masks are 16 bits wide

namespace detail {

struct AdjGraph {
  int n = 0;
  std::array<std::uint32_t, kHardMaxAlignNodes> out{};  // out[i] bit j: edge i->j
  std::array<std::uint32_t, kHardMaxAlignNodes> in{};
  int edge_count = 0;

  bool edge(int i, int j) const { return (out[i] >> j) & 1u; }
};

inline AdjGraph to_adj(const PlanGraph& g, int max_nodes) {
  if (max_nodes < 1 || max_nodes > kHardMaxAlignNodes)
    raise(ErrorCode::MalformedInput, "max alignment size must be in [1, 16]");
  if (static_cast<int>(g.node_count()) > max_nodes)
    raise(ErrorCode::GraphTooLarge, "plan has " + std::to_string(g.node_count()) +
                                        " nodes, limit is " + std::to_string(max_nodes));
  AdjGraph a;
  a.n = static_cast<int>(g.node_count());
  for (const auto& [u, v] : g.edges()) {
    a.out[u] |= 1u << v;
    a.in[v] |= 1u << u;
    ++a.edge_count;
  }
  return a;
}

// Minimum-cost total injective map of `a` into `b`, where a.n <= b.n.
// Leaving an assignable node unmapped never pays off with non-negative
// costs, so total maps of the smaller side cover the optimum.
struct GedSearch {
  const AdjGraph& a;
  const AdjGraph& b;
  double edge_del, edge_ins;
  double best = std::numeric_limits<double>::infinity();
  std::array<int, kHardMaxAlignNodes> assign{};

  GedSearch(const AdjGraph& a_, const AdjGraph& b_, double ed, double ei)
      : a(a_), b(b_), edge_del(ed), edge_ins(ei) {}

  void dfs(int i, std::uint32_t used, double cur, int matched_edges) {
    if (cur >= best) return;
    if (i == a.n) {
      best = std::min(best, cur + (b.edge_count - matched_edges) * edge_ins);
      return;
    }
    for (int j = 0; j < b.n; ++j) {
      if ((used >> j) & 1u) continue;
      double delta = 0.0;
      int newly_matched = 0;
      for (int k = 0; k < i; ++k) {
        int jk = assign[k];
        bool ea = a.edge(k, i), eb = b.edge(jk, j);
        if (ea && eb) ++newly_matched;
        else if (ea) delta += edge_del;
        ea = a.edge(i, k);
        eb = b.edge(j, jk);
        if (ea && eb) ++newly_matched;
        else if (ea) delta += edge_del;
      }
      assign[i] = j;
      dfs(i + 1, used | (1u << j), cur + delta, matched_edges + newly_matched);
    }
  }
};

}  // namespace detail

// Minimum number of node/edge insertions and deletions (weighted by `costs`)
// turning `g` into `gold`; node substitution is free because nodes carry no
// labels here.  Exact, exponential in the smaller node count.
inline double graph_edit_distance(const PlanGraph& g, const PlanGraph& gold,
                                  const EditCosts& costs = {},
                                  int max_nodes = kDefaultMaxAlignNodes) {
  detail::AdjGraph a = detail::to_adj(g, max_nodes);
  detail::AdjGraph b = detail::to_adj(gold, max_nodes);
  double node_gap_cost, edge_del, edge_ins;
  if (a.n <= b.n) {
    node_gap_cost = costs.node_insert;
    edge_del = costs.edge_delete;
    edge_ins = costs.edge_insert;
  } else {
    // Map the smaller side; directions of insert/delete swap with the swap.
    std::swap(a, b);
    node_gap_cost = costs.node_delete;
    edge_del = costs.edge_insert;
    edge_ins = costs.edge_delete;
  }
  detail::GedSearch search(a, b, edge_del, edge_ins);
  search.dfs(0, 0, (b.n - a.n) * node_gap_cost, 0);
  return search.best;
}

// exp(-distance); an absent rollout plan scores against the empty graph.
inline double structural_reward(const std::optional<PlanGraph>& g, const PlanGraph& gold,
                                const EditCosts& costs = {},
                                int max_nodes = kDefaultMaxAlignNodes) {
  const PlanGraph empty;
  return std::exp(-graph_edit_distance(g ? *g : empty, gold, costs, max_nodes));
}

using NodeAffinity = std::function<double(const Subgoal&, const Subgoal&)>;

namespace detail {

struct McsSearch {
  const AdjGraph& a;
  const AdjGraph& b;
  const std::vector<std::vector<double>>& aff;

  std::vector<std::pair<int, int>> cur;
  std::vector<std::pair<int, int>> best_pairs;
  std::size_t best_size = 0;
  double best_aff = -std::numeric_limits<double>::infinity();
  bool have_best = false;

  McsSearch(const AdjGraph& a_, const AdjGraph& b_, const std::vector<std::vector<double>>& m)
      : a(a_), b(b_), aff(m) {}

  bool consistent(int i, int j) const {
    for (const auto& [u, v] : cur) {
      if (a.edge(u, i) != b.edge(v, j)) return false;
      if (a.edge(i, u) != b.edge(j, v)) return false;
    }
    return true;
  }

  void consider(double aff_sum) {
    if (!have_best || cur.size() > best_size ||
        (cur.size() == best_size &&
         (aff_sum > best_aff || (aff_sum == best_aff && cur < best_pairs)))) {
      have_best = true;
      best_size = cur.size();
      best_aff = aff_sum;
      best_pairs = cur;
    }
  }

  void dfs(int i, std::uint32_t used, double aff_sum) {
    int avail = b.n - std::popcount(used);
    int reach = std::min(a.n - i, avail);
    if (cur.size() + static_cast<std::size_t>(reach) < best_size) return;
    if (i == a.n) {
      consider(aff_sum);
      return;
    }
    for (int j = 0; j < b.n; ++j) {
      if ((used >> j) & 1u) continue;
      if (!consistent(i, j)) continue;
      cur.emplace_back(i, j);
      dfs(i + 1, used | (1u << j), aff_sum + aff[i][j]);
      cur.pop_back();
    }
    dfs(i + 1, used, aff_sum);
  }
};

}  // namespace detail

// Largest injective node matching whose pairs agree on every edge in both
// directions.  Ties on size are broken by total affinity, then by
// lexicographic pair order, so the result is deterministic.
inline Matching max_common_subgraph(const PlanGraph& g, const PlanGraph& gold,
                                    const NodeAffinity& node_affinity,
                                    int max_nodes = kDefaultMaxAlignNodes) {
  detail::AdjGraph a = detail::to_adj(g, max_nodes);
  detail::AdjGraph b = detail::to_adj(gold, max_nodes);
  std::vector<std::vector<double>> aff(a.n, std::vector<double>(b.n, 0.0));
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < b.n; ++j) aff[i][j] = node_affinity(g.nodes()[i], gold.nodes()[j]);
  detail::McsSearch search(a, b, aff);
  search.dfs(0, 0, 0.0);
  Matching m;
  m.pairs = std::move(search.best_pairs);
  return m;
}

// True iff `m` is injective, in range, and edge-consistent for g vs gold.
inline bool matching_is_valid(const Matching& m, const PlanGraph& g, const PlanGraph& gold) {
  std::vector<bool> used_g(g.node_count(), false), used_gold(gold.node_count(), false);
  for (const auto& [u, v] : m.pairs) {
    if (u < 0 || v < 0 || u >= static_cast<int>(g.node_count()) ||
        v >= static_cast<int>(gold.node_count()))
      return false;
    if (used_g[u] || used_gold[v]) return false;
    used_g[u] = used_gold[v] = true;
  }
  for (const auto& [u1, v1] : m.pairs)
    for (const auto& [u2, v2] : m.pairs) {
      if (g.has_edge(u1, u2) != gold.has_edge(v1, v2)) return false;
    }
  return true;
}

}  // namespace planscore

#pragma once

#include <algorithm>
#include <array>
#include <deque>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

#include "mapt/model.hpp"

namespace mapt {

// Partition ({label}, X_v - {label}) owned by `var`.
struct Partition {
  int var = 0;
  int label = 0;
};

struct SignedEdge {
  int p = 0, q = 0;  // partition node ids, p < q
  double weight = 0;
  bool negative = false;
};

struct SignedPartitionGraph {
  std::vector<Partition> nodes;
  std::vector<SignedEdge> edges;

  std::vector<std::vector<std::pair<int, int>>> adjacency() const {
    std::vector<std::vector<std::pair<int, int>>> adj(nodes.size());
    for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
      adj[edges[e].p].emplace_back(edges[e].q, e);
      adj[edges[e].q].emplace_back(edges[e].p, e);
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());
    return adj;
  }
};

struct FrustratedCycle {
  std::vector<int> partition_nodes;  // cycle order
  std::vector<int> vars;             // projected variable cycle, canonical
  int negative_count = 0;
};

// w = (min cost over pairs whose indicator bits differ) - (min over
// pairs whose bits agree); bit of x is [x == special label].
inline double edge_weight(const std::vector<double>& pair_costs, int du,
                          int dv, int special_u, int special_v) {
  double min_diff = std::numeric_limits<double>::infinity();
  double min_eq = std::numeric_limits<double>::infinity();
  for (int a = 0; a < du; ++a)
    for (int b = 0; b < dv; ++b) {
      bool bits_equal = (a == special_u) == (b == special_v);
      double c = pair_costs[a * dv + b];
      (bits_equal ? min_eq : min_diff) = std::min(bits_equal ? min_eq : min_diff, c);
    }
  return min_diff - min_eq;
}

inline SignedPartitionGraph build_signed_graph(const Relaxation& m,
                                               double eps) {
  if (eps <= 0) throw std::invalid_argument("eps must be > 0");
  SignedPartitionGraph g;
  std::vector<std::vector<int>> node_of(m.num_vars());
  for (int v = 0; v < m.num_vars(); ++v) {
    node_of[v].assign(m.domain_sizes[v], -1);
    if (m.domain_sizes[v] < 2) continue;  // partition needs both parts
    const auto& t = m.factors[v].costs;
    double lo = *std::min_element(t.begin(), t.end());
    for (int a = 0; a < m.domain_sizes[v]; ++a)
      if (t[a] <= lo + eps) {
        node_of[v][a] = static_cast<int>(g.nodes.size());
        g.nodes.push_back(Partition{v, a});
      }
  }
  for (int fid : m.pair_factor_ids()) {
    const Factor& f = m.factors[fid];
    int u = f.scope[0], v = f.scope[1];
    for (int a = 0; a < m.domain_sizes[u]; ++a) {
      if (node_of[u][a] < 0) continue;
      for (int b = 0; b < m.domain_sizes[v]; ++b) {
        if (node_of[v][b] < 0) continue;
        double w = edge_weight(f.costs, m.domain_sizes[u],
                               m.domain_sizes[v], a, b);
        if (std::abs(w) > eps) {
          SignedEdge e;
          e.p = std::min(node_of[u][a], node_of[v][b]);
          e.q = std::max(node_of[u][a], node_of[v][b]);
          e.weight = w;
          e.negative = w < -eps;
          g.edges.push_back(e);
        }
      }
    }
  }
  std::sort(g.edges.begin(), g.edges.end(),
            [](const SignedEdge& a, const SignedEdge& b) {
              return std::tie(a.p, a.q) < std::tie(b.p, b.q);
            });
  return g;
}

namespace detail {

// Lexicographically smallest rotation/reflection starting at the
// minimum element.
inline std::vector<int> canonical_cycle(std::vector<int> cyc) {
  const int k = static_cast<int>(cyc.size());
  std::vector<int> best;
  for (int rev = 0; rev < 2; ++rev) {
    for (int start = 0; start < k; ++start) {
      std::vector<int> cand(k);
      for (int i = 0; i < k; ++i) cand[i] = cyc[(start + i) % k];
      if (best.empty() || cand < best) best = std::move(cand);
    }
    std::reverse(cyc.begin(), cyc.end());
  }
  return best;
}

inline bool all_distinct(const std::vector<int>& v) {
  std::set<int> s(v.begin(), v.end());
  return s.size() == v.size();
}

// Fundamental cycle of non-tree edge (p,q) w.r.t. parent/depth arrays.
inline std::vector<int> tree_cycle(int p, int q,
                                   const std::vector<int>& parent,
                                   const std::vector<int>& depth) {
  std::vector<int> pa{p}, qa{q};
  int a = p, b = q;
  while (depth[a] > depth[b]) pa.push_back(a = parent[a]);
  while (depth[b] > depth[a]) qa.push_back(b = parent[b]);
  while (a != b) {
    pa.push_back(a = parent[a]);
    qa.push_back(b = parent[b]);
  }
  // pa ends at the LCA; qa too. Join p..lca + reverse(q..lca-1).
  std::vector<int> cyc(pa.begin(), pa.end());
  for (int i = static_cast<int>(qa.size()) - 2; i >= 0; --i)
    cyc.push_back(qa[i]);
  return cyc;
}

}  // namespace detail

// All frustrated fundamental cycles of one spanning BFS forest
// (per-component root = lowest partition id).
inline std::vector<FrustratedCycle> find_cycles_fr1(
    const SignedPartitionGraph& g) {
  const int n = static_cast<int>(g.nodes.size());
  auto adj = g.adjacency();
  std::vector<int> parent(n, -1), depth(n, -1), parity(n, 0);
  std::vector<int> parent_edge(n, -1);
  std::vector<char> visited(n, 0);
  for (int root = 0; root < n; ++root) {
    if (visited[root]) continue;
    visited[root] = 1;
    depth[root] = 0;
    std::deque<int> q{root};
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (auto [w, e] : adj[v]) {
        if (visited[w]) continue;
        visited[w] = 1;
        parent[w] = v;
        parent_edge[w] = e;
        depth[w] = depth[v] + 1;
        parity[w] = parity[v] ^ (g.edges[e].negative ? 1 : 0);
        q.push_back(w);
      }
    }
  }
  std::vector<FrustratedCycle> out;
  for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
    const SignedEdge& se = g.edges[e];
    if (parent_edge[se.p] == e || parent_edge[se.q] == e) continue;
    if (depth[se.p] < 0 || depth[se.q] < 0) continue;
    if ((parity[se.p] ^ parity[se.q] ^ (se.negative ? 1 : 0)) == 0) continue;
    std::vector<int> cyc = detail::tree_cycle(se.p, se.q, parent, depth);
    std::vector<int> vars;
    for (int node : cyc) vars.push_back(g.nodes[node].var);
    if (!detail::all_distinct(vars)) continue;
    FrustratedCycle fc;
    fc.partition_nodes = cyc;
    fc.vars = detail::canonical_cycle(vars);
    fc.negative_count = 0;
    // recount signs along the cycle for the parity invariant
    auto sign_of = [&](int a, int b) {
      for (auto [w, ei] : adj[a])
        if (w == b) return g.edges[ei].negative ? 1 : 0;
      return 0;
    };
    const int k = static_cast<int>(cyc.size());
    for (int i = 0; i < k; ++i)
      fc.negative_count += sign_of(cyc[i], cyc[(i + 1) % k]);
    out.push_back(std::move(fc));
  }
  return out;
}

// Depth-bounded BFS tree from every partition node; frustrated
// fundamental cycles collected and deduped by the canonical projected
// variable cycle.
inline std::vector<FrustratedCycle> find_cycles_fr(
    const SignedPartitionGraph& g, int d_max) {
  if (d_max < 1) throw std::invalid_argument("d_max must be >= 1");
  const int n = static_cast<int>(g.nodes.size());
  auto adj = g.adjacency();
  std::vector<FrustratedCycle> out;
  std::set<std::vector<int>> seen;
  std::vector<int> parent(n), depth(n), parity(n), parent_edge(n);
  for (int root = 0; root < n; ++root) {
    std::fill(depth.begin(), depth.end(), -1);
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(parent_edge.begin(), parent_edge.end(), -1);
    depth[root] = 0;
    parity[root] = 0;
    std::deque<int> q{root};
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      if (depth[v] == d_max) continue;
      for (auto [w, e] : adj[v]) {
        if (depth[w] >= 0) continue;
        depth[w] = depth[v] + 1;
        parent[w] = v;
        parent_edge[w] = e;
        parity[w] = parity[v] ^ (g.edges[e].negative ? 1 : 0);
        q.push_back(w);
      }
    }
    for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
      const SignedEdge& se = g.edges[e];
      if (depth[se.p] < 0 || depth[se.q] < 0) continue;
      if (parent_edge[se.p] == e || parent_edge[se.q] == e) continue;
      if ((parity[se.p] ^ parity[se.q] ^ (se.negative ? 1 : 0)) == 0)
        continue;
      std::vector<int> cyc = detail::tree_cycle(se.p, se.q, parent, depth);
      std::vector<int> vars;
      for (int node : cyc) vars.push_back(g.nodes[node].var);
      if (!detail::all_distinct(vars)) continue;
      std::vector<int> canon = detail::canonical_cycle(vars);
      if (!seen.insert(canon).second) continue;
      FrustratedCycle fc;
      fc.partition_nodes = cyc;
      fc.vars = canon;
      auto sign_of = [&](int a, int b) {
        for (auto [w, ei] : adj[a])
          if (w == b) return g.edges[ei].negative ? 1 : 0;
        return 0;
      };
      const int k = static_cast<int>(cyc.size());
      fc.negative_count = 0;
      for (int i = 0; i < k; ++i)
        fc.negative_count += sign_of(cyc[i], cyc[(i + 1) % k]);
      out.push_back(std::move(fc));
    }
  }
  std::sort(out.begin(), out.end(),
            [](const FrustratedCycle& a, const FrustratedCycle& b) {
              return std::make_pair(a.vars.size(), a.vars) <
                     std::make_pair(b.vars.size(), b.vars);
            });
  return out;
}

// Fan triangulation anchored at the first cycle vertex: k-2 triplets.
inline std::vector<std::array<int, 3>> triangulate(
    const std::vector<int>& cycle) {
  const int k = static_cast<int>(cycle.size());
  if (k < 3) throw std::invalid_argument("cycle must have >= 3 vertices");
  if (!detail::all_distinct(cycle))
    throw std::invalid_argument("cycle vertices must be distinct");
  std::vector<std::array<int, 3>> out;
  for (int i = 1; i + 1 < k; ++i)
    out.push_back({cycle[0], cycle[i], cycle[i + 1]});
  return out;
}

}  // namespace mapt

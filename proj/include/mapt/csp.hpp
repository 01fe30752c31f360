#pragma once

#include <algorithm>
#include <deque>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mapt/model.hpp"

namespace mapt {

// 2-CSP built from the pairwise part of a relaxation: a boolean mask
// per variable label and per pair entry. Value type; probes copy it.
struct CspInstance {
  std::vector<int> domain_sizes;
  std::vector<std::vector<char>> domains;  // Y_v

  struct Edge {
    int u = 0, v = 0;            // u < v
    std::vector<char> allowed;   // row-major over (x_u, x_v)
  };
  std::vector<Edge> edges;
  std::vector<char> active;  // ball membership; inactive vars keep no edges

  int num_vars() const { return static_cast<int>(domain_sizes.size()); }

  char& pair_mask(Edge& e, int a, int b) {
    return e.allowed[a * domain_sizes[e.v] + b];
  }
  char pair_mask(const Edge& e, int a, int b) const {
    return e.allowed[a * domain_sizes[e.v] + b];
  }

  bool domain_empty(int v) const {
    return std::none_of(domains[v].begin(), domains[v].end(),
                        [](char c) { return c != 0; });
  }

  std::vector<std::vector<std::pair<int, int>>> adjacency() const {
    std::vector<std::vector<std::pair<int, int>>> adj(num_vars());
    for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
      adj[edges[e].u].emplace_back(edges[e].v, e);
      adj[edges[e].v].emplace_back(edges[e].u, e);
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());
    return adj;
  }
};

// One label deletion: label `label` at `var`, removed while revising
// against neighbor `cause_var`. cause_set holds indices of the earlier
// deletions at cause_var that destroyed the initially-active supports
// (empty when every support was inactive from the start).
struct DeletionRecord {
  int var = 0;
  int label = 0;
  int cause_var = 0;
  std::vector<int> cause_set;
};

struct DeletionTrace {
  std::vector<DeletionRecord> records;
  bool wipeout = false;
  int wipeout_var = -1;
};

inline CspInstance build_csp(const Relaxation& m, double eps) {
  if (eps < 0) throw std::invalid_argument("eps must be >= 0");
  CspInstance inst;
  inst.domain_sizes = m.domain_sizes;
  inst.domains.resize(m.num_vars());
  inst.active.assign(m.num_vars(), 1);
  for (int v = 0; v < m.num_vars(); ++v) {
    const auto& t = m.factors[v].costs;  // singleton factor id == var id
    double lo = *std::min_element(t.begin(), t.end());
    inst.domains[v].resize(t.size());
    for (size_t a = 0; a < t.size(); ++a)
      inst.domains[v][a] = t[a] <= lo + eps ? 1 : 0;
  }
  for (int fid : m.pair_factor_ids()) {
    const Factor& f = m.factors[fid];
    CspInstance::Edge e;
    e.u = f.scope[0];
    e.v = f.scope[1];
    double lo = *std::min_element(f.costs.begin(), f.costs.end());
    e.allowed.resize(f.costs.size());
    for (size_t i = 0; i < f.costs.size(); ++i)
      e.allowed[i] = f.costs[i] <= lo + eps ? 1 : 0;
    inst.edges.push_back(std::move(e));
  }
  std::sort(inst.edges.begin(), inst.edges.end(),
            [](const CspInstance::Edge& a, const CspInstance::Edge& b) {
              return std::tie(a.u, a.v) < std::tie(b.u, b.v);
            });
  return inst;
}

// Induced instance on the BFS ball of radius d_max around r. Variables
// outside keep full domains but lose all incident edges.
inline CspInstance restrict_to_ball(const CspInstance& inst, int r,
                                    int d_max) {
  if (r < 0 || r >= inst.num_vars())
    throw std::invalid_argument("ball center out of range");
  if (d_max < 1) throw std::invalid_argument("d_max must be >= 1");
  auto adj = inst.adjacency();
  std::vector<int> dist(inst.num_vars(), -1);
  std::deque<int> q{r};
  dist[r] = 0;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    if (dist[v] == d_max) continue;
    for (auto [w, e] : adj[v]) {
      (void)e;
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        q.push_back(w);
      }
    }
  }
  CspInstance out = inst;
  out.edges.clear();
  for (const auto& e : inst.edges)
    if (dist[e.u] >= 0 && dist[e.v] >= 0) out.edges.push_back(e);
  for (int v = 0; v < inst.num_vars(); ++v) out.active[v] = dist[v] >= 0;
  return out;
}

inline CspInstance fix_label(const CspInstance& inst, int r, int s) {
  if (r < 0 || r >= inst.num_vars())
    throw std::invalid_argument("variable out of range");
  if (s < 0 || s >= inst.domain_sizes[r] || !inst.domains[r][s])
    throw std::invalid_argument("label not in current domain");
  CspInstance out = inst;
  std::fill(out.domains[r].begin(), out.domains[r].end(), 0);
  out.domains[r][s] = 1;
  return out;
}

struct Ac3Result {
  CspInstance closure;
  DeletionTrace trace;
};

// AC3 with a FIFO queue of directed edges seeded in ascending (u,v)
// order. Revising (u,v) first drops pair entries with a dead endpoint,
// then deletes unsupported labels of v, recording causes. Stops
// immediately on wipeout.
inline Ac3Result ac3(const CspInstance& input) {
  Ac3Result res;
  res.closure = input;
  CspInstance& inst = res.closure;
  const CspInstance initial = input;  // frozen masks for cause_set
  auto adj = inst.adjacency();

  // (deleted label at var) -> trace index, for cause lookups.
  std::vector<std::vector<int>> deletion_index(inst.num_vars());
  for (int v = 0; v < inst.num_vars(); ++v)
    deletion_index[v].assign(inst.domain_sizes[v], -1);

  std::deque<std::pair<int, int>> queue;  // directed (u,v): revise v
  std::vector<std::vector<char>> queued(inst.num_vars());
  for (int v = 0; v < inst.num_vars(); ++v)
    queued[v].assign(inst.num_vars(), 0);
  auto enqueue = [&](int u, int v) {
    if (!queued[u][v]) {
      queued[u][v] = 1;
      queue.emplace_back(u, v);
    }
  };
  for (const auto& e : inst.edges) {
    // both directions; edges are already sorted ascending by (u,v)
    enqueue(e.u, e.v);
  }
  for (const auto& e : inst.edges) enqueue(e.v, e.u);
  std::sort(queue.begin(), queue.end());

  std::vector<int> edge_of(inst.num_vars() * inst.num_vars(), -1);
  for (int e = 0; e < static_cast<int>(inst.edges.size()); ++e) {
    edge_of[inst.edges[e].u * inst.num_vars() + inst.edges[e].v] = e;
    edge_of[inst.edges[e].v * inst.num_vars() + inst.edges[e].u] = e;
  }

  while (!queue.empty()) {
    auto [u, v] = queue.front();
    queue.pop_front();
    queued[u][v] = 0;
    int eid = edge_of[u * inst.num_vars() + v];
    if (eid < 0) continue;
    CspInstance::Edge& e = inst.edges[eid];
    const CspInstance::Edge& e0 = initial.edges[eid];
    const bool v_is_second = e.v == v;
    const int du = inst.domain_sizes[u];
    const int dv = inst.domain_sizes[v];
    auto mask = [&](CspInstance::Edge& ed, int a, int b) -> char& {
      return v_is_second ? inst.pair_mask(ed, a, b) : inst.pair_mask(ed, b, a);
    };
    auto mask0 = [&](int a, int b) -> char {
      return v_is_second ? initial.pair_mask(e0, a, b)
                         : initial.pair_mask(e0, b, a);
    };
    // rule 1: drop pair entries whose endpoint label is gone
    for (int a = 0; a < du; ++a)
      for (int b = 0; b < dv; ++b)
        if (mask(e, a, b) && (!inst.domains[u][a] || !inst.domains[v][b]))
          mask(e, a, b) = 0;
    // rule 2: delete v-labels with no surviving support
    for (int b = 0; b < dv; ++b) {
      if (!inst.domains[v][b]) continue;
      bool supported = false;
      for (int a = 0; a < du && !supported; ++a)
        if (mask(e, a, b)) supported = true;
      if (supported) continue;
      inst.domains[v][b] = 0;
      DeletionRecord rec;
      rec.var = v;
      rec.label = b;
      rec.cause_var = u;
      for (int a = 0; a < du; ++a)
        if (deletion_index[u][a] >= 0 && mask0(a, b))
          rec.cause_set.push_back(deletion_index[u][a]);
      std::sort(rec.cause_set.begin(), rec.cause_set.end());
      deletion_index[v][b] = static_cast<int>(res.trace.records.size());
      res.trace.records.push_back(std::move(rec));
      if (inst.domain_empty(v)) {
        res.trace.wipeout = true;
        res.trace.wipeout_var = v;
        return res;
      }
      for (auto [w, we] : adj[v]) {
        (void)we;
        if (w != u) enqueue(v, w);
      }
    }
  }
  return res;
}

// Backward reachability from the wipeout record through cause_set
// links; keeps the reachable sub-trace in original order with indices
// renumbered.
inline DeletionTrace minimal_trace(const DeletionTrace& trace) {
  if (!trace.wipeout || trace.records.empty())
    throw std::invalid_argument("trace does not end in wipeout");
  const int K = static_cast<int>(trace.records.size());
  std::vector<char> keep(K, 0);
  // Roots: every deletion at the wiped-out variable (its whole domain
  // must empty), which for a fixed probe is just the final record.
  std::vector<int> stack;
  for (int i = 0; i < K; ++i)
    if (trace.records[i].var == trace.wipeout_var) {
      keep[i] = 1;
      stack.push_back(i);
    }
  keep[K - 1] = 1;
  stack.push_back(K - 1);
  while (!stack.empty()) {
    int i = stack.back();
    stack.pop_back();
    for (int j : trace.records[i].cause_set)
      if (!keep[j]) {
        keep[j] = 1;
        stack.push_back(j);
      }
  }
  DeletionTrace out;
  out.wipeout = trace.wipeout;
  out.wipeout_var = trace.wipeout_var;
  std::vector<int> remap(K, -1);
  for (int i = 0; i < K; ++i) {
    if (!keep[i]) continue;
    DeletionRecord rec = trace.records[i];
    for (int& j : rec.cause_set) j = remap[j];
    remap[i] = static_cast<int>(out.records.size());
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace mapt

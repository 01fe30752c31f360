#pragma once

#include <algorithm>
#include <functional>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "mapt/csp.hpp"
#include "mapt/frustrated.hpp"
#include "mapt/model.hpp"

namespace mapt {

struct OracleResult {
  double minimum = 0;
  Labeling argmin;
  long long enumerated = 0;
};

inline OracleResult brute_min(const Relaxation& m) {
  long long total = 1;
  for (int d : m.domain_sizes) {
    total *= d;
    if (total > 10'000'000) throw std::invalid_argument("instance too large");
  }
  OracleResult res;
  Labeling x(m.num_vars(), 0);
  res.minimum = std::numeric_limits<double>::infinity();
  for (long long i = 0; i < total; ++i) {
    double f = evaluate(m, x);
    ++res.enumerated;
    if (f < res.minimum) {
      res.minimum = f;
      res.argmin = x;
    }
    for (int v = m.num_vars() - 1; v >= 0; --v) {
      if (++x[v] < m.domain_sizes[v]) break;
      x[v] = 0;
    }
  }
  return res;
}

// Reference AC closure: full rescans of rules 1-2 until no change.
inline CspInstance naive_ac_fixpoint(const CspInstance& input) {
  CspInstance inst = input;
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& e : inst.edges) {
      const int du = inst.domain_sizes[e.u], dv = inst.domain_sizes[e.v];
      for (int a = 0; a < du; ++a)
        for (int b = 0; b < dv; ++b)
          if (inst.pair_mask(e, a, b) &&
              (!inst.domains[e.u][a] || !inst.domains[e.v][b])) {
            inst.pair_mask(e, a, b) = 0;
            changed = true;
          }
    }
    for (const auto& e : inst.edges) {
      const int du = inst.domain_sizes[e.u], dv = inst.domain_sizes[e.v];
      for (int a = 0; a < du; ++a) {
        if (!inst.domains[e.u][a]) continue;
        bool sup = false;
        for (int b = 0; b < dv && !sup; ++b)
          if (inst.pair_mask(e, a, b)) sup = true;
        if (!sup) {
          inst.domains[e.u][a] = 0;
          changed = true;
        }
      }
      for (int b = 0; b < dv; ++b) {
        if (!inst.domains[e.v][b]) continue;
        bool sup = false;
        for (int a = 0; a < du && !sup; ++a)
          if (inst.pair_mask(e, a, b)) sup = true;
        if (!sup) {
          inst.domains[e.v][b] = 0;
          changed = true;
        }
      }
    }
  }
  return inst;
}

// DFS enumeration of simple cycles up to max_len with odd negative
// parity, canonicalized and deduped.
inline std::vector<FrustratedCycle> all_frustrated_cycles(
    const SignedPartitionGraph& g, int max_len) {
  const int n = static_cast<int>(g.nodes.size());
  if (n > 20) throw std::invalid_argument("graph too large for enumeration");
  auto adj = g.adjacency();
  std::vector<FrustratedCycle> out;
  std::set<std::vector<int>> seen;
  std::vector<int> path;
  std::vector<char> on_path(n, 0);

  auto record = [&](const std::vector<int>& cyc, int neg) {
    std::vector<int> vars;
    for (int node : cyc) vars.push_back(g.nodes[node].var);
    if (!detail::all_distinct(vars)) return;
    std::vector<int> canon = detail::canonical_cycle(vars);
    if (!seen.insert(canon).second) return;
    FrustratedCycle fc;
    fc.partition_nodes = cyc;
    fc.vars = canon;
    fc.negative_count = neg;
    out.push_back(std::move(fc));
  };

  // classic rooted DFS; only close cycles back to the root, and only
  // explore nodes >= root so each node-set is found once
  std::function<void(int, int, int)> dfs = [&](int root, int v, int neg) {
    if (static_cast<int>(path.size()) > max_len) return;
    for (auto [w, e] : adj[v]) {
      int s = g.edges[e].negative ? 1 : 0;
      if (w == root && path.size() >= 3) {
        if ((neg + s) % 2 == 1) record(path, neg + s);
        continue;
      }
      if (w <= root || on_path[w]) continue;
      if (static_cast<int>(path.size()) == max_len) continue;
      on_path[w] = 1;
      path.push_back(w);
      dfs(root, w, neg + s);
      path.pop_back();
      on_path[w] = 0;
    }
  };
  for (int root = 0; root < n; ++root) {
    path = {root};
    std::fill(on_path.begin(), on_path.end(), 0);
    on_path[root] = 1;
    dfs(root, root, 0);
  }
  std::sort(out.begin(), out.end(),
            [](const FrustratedCycle& a, const FrustratedCycle& b) {
              return std::make_pair(a.vars.size(), a.vars) <
                     std::make_pair(b.vars.size(), b.vars);
            });
  return out;
}

// Cycle instance whose signed partition graph provably contains a
// frustrated cycle: per-vertex special labels, all unaries zero, and
// cut-type pair costs (cost 1 when the special-label indicators agree
// for "negative" edges, when they differ for "positive" ones). Odd
// cycle lengths use all-negative edges; even lengths flip one edge.
inline Relaxation gen_frustrated(int cycle_len, int labels,
                                 unsigned int seed) {
  if (cycle_len < 3) throw std::invalid_argument("cycle length must be >= 3");
  if (labels < 2) throw std::invalid_argument("need >= 2 labels");
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> pick(0, labels - 1);
  std::vector<int> special(cycle_len);
  for (int& a : special) a = pick(rng);

  std::vector<int> domains(cycle_len, labels);
  std::vector<std::vector<double>> unary(cycle_len,
                                         std::vector<double>(labels, 0.0));
  std::vector<std::tuple<int, int, std::vector<double>>> pairwise;
  for (int i = 0; i < cycle_len; ++i) {
    int u = i, v = (i + 1) % cycle_len;
    bool negative = cycle_len % 2 == 1 || i != 0;
    std::vector<double> t(labels * labels);
    for (int a = 0; a < labels; ++a)
      for (int b = 0; b < labels; ++b) {
        bool agree = (a == special[u]) == (b == special[v]);
        t[a * labels + b] = (agree == negative) ? 1.0 : 0.0;
      }
    pairwise.emplace_back(std::min(u, v), std::max(u, v),
                          u < v ? t : [&] {
                            std::vector<double> tt(labels * labels);
                            for (int a = 0; a < labels; ++a)
                              for (int b = 0; b < labels; ++b)
                                tt[b * labels + a] = t[a * labels + b];
                            return tt;
                          }());
  }
  return build_model(domains, unary, pairwise);
}

}  // namespace mapt

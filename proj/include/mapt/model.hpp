#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mapt {

using Labeling = std::vector<int>;

// A factor is a subset of variables (sorted ascending) with a dense
// row-major cost table over the joint labels of its scope.
struct Factor {
  std::vector<int> scope;
  std::vector<double> costs;
};

// Factor-graph relaxation: factors F plus the Hasse edges J between
// factors differing by exactly one variable. Singleton factor ids
// coincide with variable ids; factor ids are append-only.
class Relaxation {
 public:
  std::vector<int> domain_sizes;
  std::vector<Factor> factors;
  std::vector<std::pair<int, int>> hasse_edges;  // (parent id, child id)
  std::map<std::vector<int>, int> factor_index;

  int num_vars() const { return static_cast<int>(domain_sizes.size()); }

  int find_factor(std::vector<int> scope) const {
    std::sort(scope.begin(), scope.end());
    auto it = factor_index.find(scope);
    return it == factor_index.end() ? -1 : it->second;
  }

  int table_size(const std::vector<int>& scope) const {
    int n = 1;
    for (int v : scope) n *= domain_sizes[v];
    return n;
  }

  // Row-major index of the joint label (scope order, first variable is
  // the most significant digit).
  int table_index(const Factor& f, const Labeling& x) const {
    int idx = 0;
    for (int v : f.scope) idx = idx * domain_sizes[v] + x[v];
    return idx;
  }

  double& cost(int fid, const Labeling& x) {
    return factors[fid].costs[table_index(factors[fid], x)];
  }
  double cost(int fid, const Labeling& x) const {
    return factors[fid].costs[table_index(factors[fid], x)];
  }

  // Decompose a row-major table index into per-variable labels.
  std::vector<int> unrank(const std::vector<int>& scope, int idx) const {
    std::vector<int> labels(scope.size());
    for (int k = static_cast<int>(scope.size()) - 1; k >= 0; --k) {
      int d = domain_sizes[scope[k]];
      labels[k] = idx % d;
      idx /= d;
    }
    return labels;
  }

  // Index into the child's table of the restriction of the parent's
  // joint label `parent_idx`. Child scope must be a subset of parent's.
  int restrict_index(const std::vector<int>& parent_scope, int parent_idx,
                     const std::vector<int>& child_scope) const {
    std::vector<int> labels = unrank(parent_scope, parent_idx);
    int idx = 0;
    for (int cv : child_scope) {
      int pos = static_cast<int>(
          std::find(parent_scope.begin(), parent_scope.end(), cv) -
          parent_scope.begin());
      idx = idx * domain_sizes[cv] + labels[pos];
    }
    return idx;
  }

  std::vector<int> pair_factor_ids() const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(factors.size()); ++i)
      if (factors[i].scope.size() == 2) out.push_back(i);
    return out;
  }

  std::vector<int> triplet_factor_ids() const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(factors.size()); ++i)
      if (factors[i].scope.size() == 3) out.push_back(i);
    return out;
  }

  int add_factor(std::vector<int> scope, std::vector<double> costs) {
    std::sort(scope.begin(), scope.end());
    if (factor_index.count(scope))
      throw std::invalid_argument("duplicate factor scope");
    if (static_cast<int>(costs.size()) != table_size(scope))
      throw std::invalid_argument("cost table size mismatch");
    int id = static_cast<int>(factors.size());
    factors.push_back(Factor{scope, std::move(costs)});
    factor_index.emplace(std::move(scope), id);
    return id;
  }

  void add_hasse_edge(int parent, int child) {
    hasse_edges.emplace_back(parent, child);
  }
};

inline Relaxation build_model(
    const std::vector<int>& domain_sizes,
    const std::vector<std::vector<double>>& unary_costs,
    const std::vector<std::tuple<int, int, std::vector<double>>>&
        pairwise_costs) {
  Relaxation m;
  m.domain_sizes = domain_sizes;
  const int n = m.num_vars();
  if (static_cast<int>(unary_costs.size()) != n)
    throw std::invalid_argument("unary cost count mismatch");
  for (int v = 0; v < n; ++v) {
    if (domain_sizes[v] < 1) throw std::invalid_argument("empty domain");
    if (static_cast<int>(unary_costs[v].size()) != domain_sizes[v])
      throw std::invalid_argument("unary table size mismatch");
    m.add_factor({v}, unary_costs[v]);
  }
  for (const auto& [u, v, table] : pairwise_costs) {
    if (u == v) throw std::invalid_argument("self-loop edge");
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw std::invalid_argument("edge variable out of range");
    std::vector<int> scope{std::min(u, v), std::max(u, v)};
    if (m.factor_index.count(scope))
      throw std::invalid_argument("duplicate edge");
    std::vector<double> costs = table;
    if (u > v) {
      // Input table is row-major in (u,v) order; store in ascending
      // scope order.
      std::vector<double> t(table.size());
      int du = domain_sizes[u], dv = domain_sizes[v];
      for (int a = 0; a < du; ++a)
        for (int b = 0; b < dv; ++b) t[b * du + a] = table[a * dv + b];
      costs = std::move(t);
    }
    int id = m.add_factor(scope, std::move(costs));
    m.add_hasse_edge(id, scope[0]);
    m.add_hasse_edge(id, scope[1]);
  }
  return m;
}

inline double evaluate(const Relaxation& m, const Labeling& x) {
  if (static_cast<int>(x.size()) != m.num_vars())
    throw std::invalid_argument("labeling length mismatch");
  for (int v = 0; v < m.num_vars(); ++v)
    if (x[v] < 0 || x[v] >= m.domain_sizes[v])
      throw std::invalid_argument("label out of range");
  double sum = 0;
  for (int i = 0; i < static_cast<int>(m.factors.size()); ++i)
    sum += m.cost(i, x);
  return sum;
}

// Adds a zero-cost triplet factor, closing missing pair subsets with
// zero tables and inserting all new Hasse edges. Idempotent.
inline int add_triplet(Relaxation& m, std::array<int, 3> vars) {
  std::sort(vars.begin(), vars.end());
  if (vars[0] == vars[1] || vars[1] == vars[2])
    throw std::invalid_argument("triplet variables must be distinct");
  for (int v : vars)
    if (v < 0 || v >= m.num_vars())
      throw std::invalid_argument("triplet variable out of range");
  std::vector<int> scope(vars.begin(), vars.end());
  if (int id = m.find_factor(scope); id >= 0) return id;

  const std::array<std::pair<int, int>, 3> pairs = {
      std::make_pair(vars[0], vars[1]), std::make_pair(vars[0], vars[2]),
      std::make_pair(vars[1], vars[2])};
  std::array<int, 3> pair_ids{};
  for (int k = 0; k < 3; ++k) {
    std::vector<int> ps{pairs[k].first, pairs[k].second};
    int pid = m.find_factor(ps);
    if (pid < 0) {
      pid = m.add_factor(ps, std::vector<double>(m.table_size(ps), 0.0));
      m.add_hasse_edge(pid, ps[0]);
      m.add_hasse_edge(pid, ps[1]);
    }
    pair_ids[k] = pid;
  }
  int tid = m.add_factor(scope, std::vector<double>(m.table_size(scope), 0.0));
  for (int pid : pair_ids) m.add_hasse_edge(tid, pid);
  return tid;
}

inline double lower_bound(const Relaxation& m) {
  double sum = 0;
  for (const Factor& f : m.factors)
    sum += *std::min_element(f.costs.begin(), f.costs.end());
  return sum;
}

// Checks that J is exactly the Hasse diagram of the factor poset.
inline bool hasse_consistent(const Relaxation& m) {
  std::map<std::pair<int, int>, int> present;
  for (auto& e : m.hasse_edges) present[e]++;
  for (auto& [e, cnt] : present)
    if (cnt != 1) return false;
  for (int a = 0; a < static_cast<int>(m.factors.size()); ++a) {
    for (int b = 0; b < static_cast<int>(m.factors.size()); ++b) {
      if (a == b) continue;
      const auto& sa = m.factors[a].scope;
      const auto& sb = m.factors[b].scope;
      bool child = sa.size() == sb.size() + 1 &&
                   std::includes(sa.begin(), sa.end(), sb.begin(), sb.end());
      if (child != (present.count({a, b}) > 0)) return false;
    }
  }
  return true;
}

}  // namespace mapt

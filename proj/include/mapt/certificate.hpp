#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mapt/csp.hpp"
#include "mapt/model.hpp"
#include "mapt/reparam.hpp"

namespace mapt {

// Deletion DAG: one group per set of merged trace records. Every
// group's members share the owning variable; an edge (A, C) means
// deletions in A happened at the vertex that caused the deletions
// in C.
struct CertificateDag {
  std::vector<std::vector<int>> groups;  // member record indices, sorted
  std::vector<int> owner;                // variable of the deleted labels
  std::vector<int> cause;                // causing vertex
  std::set<std::pair<int, int>> edges;   // (from group, to group)
  int sink = -1;                         // group of the final record
};

inline CertificateDag build_dag(const DeletionTrace& trace) {
  if (!trace.wipeout || trace.records.empty())
    throw std::invalid_argument("trace does not end in wipeout");
  CertificateDag dag;
  const int K = static_cast<int>(trace.records.size());
  for (int i = 0; i < K; ++i) {
    dag.groups.push_back({i});
    dag.owner.push_back(trace.records[i].var);
    dag.cause.push_back(trace.records[i].cause_var);
  }
  for (int j = 0; j < K; ++j)
    for (int i = 0; i < j; ++i)
      if (trace.records[i].var == trace.records[j].cause_var)
        dag.edges.insert({i, j});
  dag.sink = K - 1;
  return dag;
}

namespace detail {

inline bool dag_acyclic(int n, const std::set<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> out(n);
  std::vector<int> indeg(n, 0);
  for (auto& [a, b] : edges) {
    out[a].push_back(b);
    ++indeg[b];
  }
  std::vector<int> stack;
  for (int i = 0; i < n; ++i)
    if (indeg[i] == 0) stack.push_back(i);
  int seen = 0;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    ++seen;
    for (int w : out[v])
      if (--indeg[w] == 0) stack.push_back(w);
  }
  return seen == n;
}

}  // namespace detail

// Greedy pairwise contraction to a fixpoint: two groups merge when
// they share both the owning variable and the causing vertex and the
// merged graph stays acyclic. Scan order: (owner id, earliest member).
inline CertificateDag contract(CertificateDag dag) {
  auto scan_key = [&](int g) {
    return std::make_pair(dag.owner[g], dag.groups[g].front());
  };
  bool changed = true;
  while (changed) {
    changed = false;
    const int n = static_cast<int>(dag.groups.size());
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return scan_key(a) < scan_key(b); });
    for (int x = 0; x < n && !changed; ++x)
      for (int y = x + 1; y < n && !changed; ++y) {
        int a = order[x], b = order[y];
        if (a == dag.sink || b == dag.sink) continue;
        if (dag.owner[a] != dag.owner[b] || dag.cause[a] != dag.cause[b])
          continue;
        // tentative merge of b into a
        std::set<std::pair<int, int>> merged;
        for (auto [p, q] : dag.edges) {
          if (p == b) p = a;
          if (q == b) q = a;
          if (p != q) merged.insert({p, q});
        }
        if (!detail::dag_acyclic(n, merged)) continue;
        dag.edges = std::move(merged);
        auto& ga = dag.groups[a];
        ga.insert(ga.end(), dag.groups[b].begin(), dag.groups[b].end());
        std::sort(ga.begin(), ga.end());
        // compact: drop group b, remap ids > b
        dag.groups.erase(dag.groups.begin() + b);
        dag.owner.erase(dag.owner.begin() + b);
        dag.cause.erase(dag.cause.begin() + b);
        std::set<std::pair<int, int>> remapped;
        for (auto [p, q] : dag.edges)
          remapped.insert({p > b ? p - 1 : p, q > b ? q - 1 : q});
        dag.edges = std::move(remapped);
        if (dag.sink > b) --dag.sink;
        changed = true;
      }
  }
  return dag;
}

// B(sink) = 1; B(A) = sum of B over out-neighbors, computed in reverse
// topological order. Requires an acyclic graph whose unique out-degree
// zero group is the sink.
inline std::vector<double> branching_factors(const CertificateDag& dag) {
  const int n = static_cast<int>(dag.groups.size());
  if (!detail::dag_acyclic(n, dag.edges))
    throw std::invalid_argument("deletion graph is cyclic");
  std::vector<std::vector<int>> out(n);
  std::vector<int> indeg(n, 0);
  for (auto& [a, b] : dag.edges) {
    out[a].push_back(b);
    ++indeg[b];
  }
  for (int g = 0; g < n; ++g)
    if (out[g].empty() && g != dag.sink)
      throw std::invalid_argument("deletion graph has a sink besides the wipeout group");
  if (dag.sink < 0 || !out[dag.sink].empty())
    throw std::invalid_argument("wipeout group must be the unique sink");
  std::vector<int> topo, stack;
  std::vector<int> indeg2 = indeg;
  for (int i = 0; i < n; ++i)
    if (indeg2[i] == 0) stack.push_back(i);
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    topo.push_back(v);
    for (int w : out[v])
      if (--indeg2[w] == 0) stack.push_back(w);
  }
  std::vector<double> B(n, 0.0);
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    int g = *it;
    if (g == dag.sink) {
      B[g] = 1.0;
    } else {
      for (int w : out[g]) B[g] += B[w];
    }
  }
  return B;
}

struct Certificate {
  MessageVector lambda;
  double gain = 0;           // guaranteed increase of theta_r(s)
  double max_branching = 1;  // over groups and virtual nodes
  CertificateDag dag;
};

namespace detail {

struct TableView {
  const Relaxation* m = nullptr;
  std::map<std::pair<int, int>, int> hasse_of;  // (parent, child) -> idx
  std::vector<double> factor_min;

  explicit TableView(const Relaxation& model) : m(&model) {
    for (int e = 0; e < static_cast<int>(model.hasse_edges.size()); ++e)
      hasse_of[model.hasse_edges[e]] = e;
    factor_min.reserve(model.factors.size());
    for (const Factor& f : model.factors)
      factor_min.push_back(
          *std::min_element(f.costs.begin(), f.costs.end()));
  }

  int pair_id(int u, int v) const {
    int id = m->find_factor({u, v});
    if (id < 0) throw std::invalid_argument("missing pair factor");
    return id;
  }
  int pair_entry(int fid, int var_a, int a, int b) const {
    // (a at var_a, b at the other scope variable)
    const auto& s = m->factors[fid].scope;
    return s[0] == var_a ? a * m->domain_sizes[s[1]] + b
                         : b * m->domain_sizes[s[1]] + a;
  }
  bool pair_active(int fid, int var_a, int a, int b, double eps) const {
    return m->factors[fid].costs[pair_entry(fid, var_a, a, b)] <=
           factor_min[fid] + eps;
  }
  bool unary_excluded(int v, int a, double eps) const {
    return m->factors[v].costs[a] > factor_min[v] + eps;
  }
  int edge_index(int parent, int child) const {
    auto it = hasse_of.find({parent, child});
    if (it == hasse_of.end())
      throw std::invalid_argument("missing containment edge");
    return it->second;
  }
};

}  // namespace detail

// Mechanized reparameterization witness: turns a wipeout trace into
// message updates whose application raises theta_r(s) by gain while
// preserving every factor minimum. Requires the triplets {r,u_i,v_i}
// of the trace to be present in the model.
inline Certificate build_certificate(const Relaxation& m,
                                     const DeletionTrace& trace,
                                     double eps) {
  if (eps <= 0) throw std::invalid_argument("eps must be > 0");
  Certificate cert;
  cert.dag = contract(build_dag(trace));
  const CertificateDag& dag = cert.dag;
  std::vector<double> B = branching_factors(dag);

  const DeletionRecord& last = trace.records.back();
  const int r = last.var, s = last.label, u_K = last.cause_var;
  detail::TableView view(m);

  const int n_groups = static_cast<int>(dag.groups.size());
  auto member_labels = [&](int g) {
    std::vector<int> labels;
    for (int i : dag.groups[g]) labels.push_back(trace.records[i].label);
    return labels;
  };
  std::vector<std::vector<int>> in_groups(n_groups);
  for (auto& [a, c] : dag.edges) in_groups[c].push_back(a);

  // Virtual nodes: labels thresholded away by their unary cost that
  // still form cost-active pairs with deleted labels. They are funded
  // out of the unary slack rather than by brackets of their own.
  struct VirtualNode {
    int var = 0, label = 0;
    std::vector<int> out_groups;
    double b = 0;
  };
  std::vector<VirtualNode> virtuals;
  std::map<std::pair<int, int>, int> virtual_of;
  const int pid_final = view.pair_id(r, u_K);
  for (int g = 0; g < n_groups; ++g) {
    const int u = dag.cause[g];
    if (u == r) continue;
    const int v = dag.owner[g];
    const std::vector<int> labels = member_labels(g);
    for (int b = 0; b < m.domain_sizes[u]; ++b) {
      if (!view.unary_excluded(u, b, eps)) continue;
      bool supports = false;
      if (g == dag.sink) {
        supports = view.pair_active(pid_final, u_K, b, s, eps);
      } else {
        int pid = view.pair_id(u, v);
        for (int c : labels)
          if (view.pair_active(pid, u, b, c, eps)) {
            supports = true;
            break;
          }
      }
      if (!supports) continue;
      auto [it, fresh] = virtual_of.try_emplace(
          {u, b}, static_cast<int>(virtuals.size()));
      if (fresh) virtuals.push_back(VirtualNode{u, b, {}, 0.0});
      virtuals[it->second].out_groups.push_back(g);
    }
  }
  double max_b = *std::max_element(B.begin(), B.end());
  for (auto& vn : virtuals) {
    for (int g : vn.out_groups) vn.b += B[g];
    max_b = std::max(max_b, vn.b);
  }
  cert.max_branching = max_b;
  const double f_s = eps / max_b;
  cert.gain = f_s;
  cert.lambda = MessageVector::zeros(m);
  auto add = [&](int parent_fid, int child_fid, int entry, double delta) {
    cert.lambda.components[view.edge_index(parent_fid, child_fid)][entry] +=
        delta;
  };

  for (int g = 0; g < n_groups; ++g) {
    if (g == dag.sink) continue;
    const int u = dag.cause[g], v = dag.owner[g];
    if (u == r) continue;  // funded by the inactive slack of (s, c)
    const double f_c = B[g] * f_s;
    const int tid = m.find_factor({r, u, v});
    if (tid < 0)
      throw std::invalid_argument("missing triplet factor for trace group");
    const int pid_uv = view.pair_id(u, v);
    const int pid_ru = view.pair_id(r, u);
    const int pid_rv = view.pair_id(r, v);
    const std::vector<int> labels = member_labels(g);

    std::vector<char> covered(m.domain_sizes[u], 0);
    for (int a : in_groups[g])
      for (int b : member_labels(a)) covered[b] = 1;
    for (const auto& vn : virtuals)
      if (vn.var == u &&
          std::find(vn.out_groups.begin(), vn.out_groups.end(), g) !=
              vn.out_groups.end())
        covered[vn.label] = 1;

    // move slack of inactive pairs up into the triplet
    for (int b = 0; b < m.domain_sizes[u]; ++b) {
      if (covered[b]) continue;
      for (int c : labels)
        if (!view.pair_active(pid_uv, u, b, c, eps))
          add(tid, pid_uv, view.pair_entry(pid_uv, u, b, c), -f_c);
    }
    // spend the budget of every causing group / virtual label
    for (int a : in_groups[g])
      for (int b : member_labels(a))
        add(tid, pid_ru, view.pair_entry(pid_ru, r, s, b), -f_c);
    for (const auto& vn : virtuals)
      if (vn.var == u && covered[vn.label])
        add(tid, pid_ru, view.pair_entry(pid_ru, r, s, vn.label), -f_c);
    // credit this group's own budget
    for (int c : labels)
      add(tid, pid_rv, view.pair_entry(pid_rv, r, s, c), f_c);
  }

  // fund virtual labels from their unary slack
  for (const auto& vn : virtuals) {
    const int pid = view.pair_id(r, vn.var);
    add(pid, vn.var, vn.label, -vn.b * f_s);
  }
  // collect the gain at theta_r(s)
  add(pid_final, r, s, f_s);
  return cert;
}

struct CertificateReport {
  bool minima_preserved = false;
  bool bound_gained = false;
  bool energy_preserved = false;
  double gain_observed = 0;
  std::string detail;

  bool passed() const {
    return minima_preserved && bound_gained && energy_preserved;
  }
  std::string summary() const {
    std::ostringstream os;
    os << (passed() ? "pass" : "FAIL") << ": minima "
       << (minima_preserved ? "ok" : "violated") << ", gain "
       << gain_observed << (bound_gained ? " ok" : " short") << ", energy "
       << (energy_preserved ? "ok" : "violated");
    if (!detail.empty()) os << " (" << detail << ")";
    return os.str();
  }
};

inline CertificateReport verify_certificate(const Relaxation& m,
                                            const MessageVector& lambda,
                                            int r, int s, double gain) {
  CertificateReport rep;
  const auto after = apply_messages(m, lambda);

  rep.minima_preserved = true;
  std::ostringstream detail;
  for (size_t f = 0; f < m.factors.size(); ++f) {
    double before = *std::min_element(m.factors[f].costs.begin(),
                                      m.factors[f].costs.end());
    double now = *std::min_element(after[f].begin(), after[f].end());
    if (now < before - 1e-9) {
      rep.minima_preserved = false;
      detail << "factor " << f << " min " << before << " -> " << now << "; ";
    }
  }

  rep.gain_observed = after[r][s] - m.factors[r].costs[s];
  rep.bound_gained = rep.gain_observed >= gain - 1e-9;

  auto energy_of = [&](const Labeling& x,
                       const std::vector<std::vector<double>>& costs) {
    double sum = 0;
    for (size_t f = 0; f < m.factors.size(); ++f)
      sum += costs[f][m.table_index(m.factors[f], x)];
    return sum;
  };
  std::vector<std::vector<double>> original;
  for (const Factor& f : m.factors) original.push_back(f.costs);
  long long total = 1;
  bool exhaustive = true;
  for (int d : m.domain_sizes) {
    total *= d;
    if (total > 100'000) {
      exhaustive = false;
      break;
    }
  }
  rep.energy_preserved = true;
  auto check = [&](const Labeling& x) {
    if (std::abs(energy_of(x, original) - energy_of(x, after)) > 1e-6)
      rep.energy_preserved = false;
  };
  if (exhaustive) {
    Labeling x(m.num_vars(), 0);
    for (long long i = 0; i < total; ++i) {
      check(x);
      for (int v = m.num_vars() - 1; v >= 0; --v) {
        if (++x[v] < m.domain_sizes[v]) break;
        x[v] = 0;
      }
    }
  } else {
    std::mt19937 rng(0);
    Labeling x(m.num_vars());
    for (int t = 0; t < 1000; ++t) {
      for (int v = 0; v < m.num_vars(); ++v)
        x[v] = std::uniform_int_distribution<int>(
            0, m.domain_sizes[v] - 1)(rng);
      check(x);
    }
  }
  rep.detail = detail.str();
  return rep;
}

struct CertifyOutcome {
  bool wipeout = false;
  Relaxation tightened;  // model plus the triplets the trace needs
  DeletionTrace trace;   // minimal wipeout derivation
  Certificate certificate;
  CertificateReport report;
};

// End-to-end witness for one (r, s): probe the raw CSP_eps (no prior
// closure, so every absent support is either recorded or thresholded
// by a unary cost), add the triplets the minimal trace names, then
// build and verify the certificate on the tightened model.
inline CertifyOutcome certify(const Relaxation& m, int r, int s,
                              double eps) {
  CertifyOutcome out;
  CspInstance csp = build_csp(m, eps);
  if (!csp.domains[r][s]) return out;
  Ac3Result ac = ac3(fix_label(csp, r, s));
  if (!ac.trace.wipeout) return out;
  out.wipeout = true;
  DeletionTrace trace = ac.trace;
  if (trace.wipeout_var != r) {
    DeletionRecord rec;
    rec.var = r;
    rec.label = s;
    rec.cause_var = trace.wipeout_var;
    for (int i = 0; i < static_cast<int>(trace.records.size()); ++i)
      if (trace.records[i].var == trace.wipeout_var)
        rec.cause_set.push_back(i);
    trace.records.push_back(std::move(rec));
  }
  out.trace = minimal_trace(trace);
  out.tightened = m;
  for (const auto& rec : out.trace.records) {
    std::array<int, 3> t{r, rec.cause_var, rec.var};
    std::sort(t.begin(), t.end());
    if (t[0] != t[1] && t[1] != t[2]) add_triplet(out.tightened, t);
  }
  out.certificate = build_certificate(out.tightened, out.trace, eps);
  out.report = verify_certificate(out.tightened, out.certificate.lambda, r,
                                  s, out.certificate.gain);
  return out;
}

}  // namespace mapt

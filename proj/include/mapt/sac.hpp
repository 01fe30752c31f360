#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <set>
#include <stdexcept>
#include <vector>

#include "mapt/csp.hpp"
#include "mapt/frustrated.hpp"
#include "mapt/model.hpp"

namespace mapt {

// Proposed clusters: genuine 3-variable sets plus pseudo-triplets
// {r,v} standing for edges touched during a probe. Pseudo-triplets
// take part in the disjointness test but are never counted or added
// as factors.
struct TripletSet {
  std::set<std::array<int, 3>> genuine;
  std::set<std::array<int, 2>> pseudo;

  bool empty() const { return genuine.empty() && pseudo.empty(); }

  bool disjoint_from(const TripletSet& o) const {
    for (const auto& t : genuine)
      if (o.genuine.count(t)) return false;
    for (const auto& p : pseudo)
      if (o.pseudo.count(p)) return false;
    return true;
  }

  void merge(const TripletSet& o) {
    genuine.insert(o.genuine.begin(), o.genuine.end());
    pseudo.insert(o.pseudo.begin(), o.pseudo.end());
  }

  void insert_cluster(int a, int b, int c) {
    std::array<int, 3> t{a, b, c};
    std::sort(t.begin(), t.end());
    if (t[0] == t[1]) {
      if (t[1] != t[2]) pseudo.insert({t[1], t[2]});
    } else if (t[1] == t[2]) {
      pseudo.insert({t[0], t[1]});
    } else {
      genuine.insert(t);
    }
  }
};

struct ProbeResult {
  bool wipeout = false;
  TripletSet fragment;        // A_rs
  DeletionTrace minimal;      // minimal wipeout derivation (if any)
  DeletionTrace full;         // raw AC trace (if wipeout)
};

// Fix r to s inside the depth-d_max ball and run AC. On wipeout away
// from r the trace is extended with an artificial record for s at r
// whose causing vertex is the wiped-out variable (so its cause set is
// the full emptied domain).
inline ProbeResult probe(const CspInstance& closure, int r, int s,
                         int d_max) {
  ProbeResult res;
  CspInstance inst = restrict_to_ball(closure, r, d_max);
  inst = fix_label(inst, r, s);
  Ac3Result ac = ac3(inst);
  if (!ac.trace.wipeout) return res;
  res.wipeout = true;
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
  res.full = trace;
  res.minimal = minimal_trace(trace);
  for (const auto& rec : res.minimal.records)
    res.fragment.insert_cluster(r, rec.cause_var, rec.var);
  return res;
}

struct NodeProbeInfo {
  int var = -1;
  TripletSet clusters;       // A_r
  std::vector<int> domain;   // Y_r after the global closure
  std::vector<int> failing;  // L_r
  bool saturated() const {
    return !domain.empty() && failing.size() == domain.size();
  }
};

struct FindResult {
  TripletSet selected;               // the returned A (includes any seed)
  std::vector<NodeProbeInfo> nodes;  // indexed by variable
  bool closure_wipeout = false;
};

// Algorithm: close CSP_eps, probe every (r, s), order nodes by
// (saturated first, then ascending genuine-cluster count, then id),
// then greedily keep per-node sets disjoint from the accumulator.
inline FindResult find_triplets(const Relaxation& m, double eps, int d_max,
                                const TripletSet& seed = {}) {
  if (eps <= 0) throw std::invalid_argument("eps must be > 0");
  FindResult out;
  out.selected = seed;
  CspInstance csp = build_csp(m, eps);
  Ac3Result closure = ac3(csp);
  if (closure.trace.wipeout) {
    out.closure_wipeout = true;
    return out;
  }
  const CspInstance& inst = closure.closure;
  out.nodes.resize(m.num_vars());
  for (int r = 0; r < m.num_vars(); ++r) {
    NodeProbeInfo& info = out.nodes[r];
    info.var = r;
    for (int s = 0; s < m.domain_sizes[r]; ++s) {
      if (!inst.domains[r][s]) continue;
      info.domain.push_back(s);
      ProbeResult pr = probe(inst, r, s, d_max);
      if (pr.wipeout && !pr.fragment.empty()) {
        info.failing.push_back(s);
        info.clusters.merge(pr.fragment);
      }
    }
  }
  std::vector<int> order;
  for (int r = 0; r < m.num_vars(); ++r)
    if (!out.nodes[r].clusters.empty()) order.push_back(r);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& na = out.nodes[a];
    const auto& nb = out.nodes[b];
    if (na.saturated() != nb.saturated()) return na.saturated();
    if (na.clusters.genuine.size() != nb.clusters.genuine.size())
      return na.clusters.genuine.size() < nb.clusters.genuine.size();
    return a < b;
  });
  for (int r : order)
    if (out.selected.disjoint_from(out.nodes[r].clusters))
      out.selected.merge(out.nodes[r].clusters);
  return out;
}

enum class CycleVariant { fr1, fr };

// Frustrated-cycle pipeline: cycles sorted ascending by length play
// the role of the per-node sets; a cycle's edges act as
// pseudo-triplets for the disjointness test.
inline FindResult fr_find_triplets(const Relaxation& m, double eps,
                                   int d_max, CycleVariant variant,
                                   const TripletSet& seed = {}) {
  if (eps <= 0) throw std::invalid_argument("eps must be > 0");
  FindResult out;
  out.selected = seed;
  SignedPartitionGraph g = build_signed_graph(m, eps);
  std::vector<FrustratedCycle> cycles = variant == CycleVariant::fr1
                                            ? find_cycles_fr1(g)
                                            : find_cycles_fr(g, d_max);
  std::sort(cycles.begin(), cycles.end(),
            [](const FrustratedCycle& a, const FrustratedCycle& b) {
              return std::make_pair(a.vars.size(), a.vars) <
                     std::make_pair(b.vars.size(), b.vars);
            });
  std::set<std::vector<int>> seen;
  for (const auto& cyc : cycles) {
    if (!seen.insert(cyc.vars).second) continue;
    TripletSet cand;
    for (const auto& t : triangulate(cyc.vars)) {
      std::array<int, 3> s = t;
      std::sort(s.begin(), s.end());
      cand.genuine.insert(s);
    }
    const int k = static_cast<int>(cyc.vars.size());
    for (int i = 0; i < k; ++i) {
      int u = cyc.vars[i], v = cyc.vars[(i + 1) % k];
      cand.pseudo.insert({std::min(u, v), std::max(u, v)});
    }
    if (out.selected.disjoint_from(cand)) out.selected.merge(cand);
  }
  return out;
}

struct ScheduleState {
  double eps = 0.1;
  int d_max = 3;
  std::vector<std::pair<double, int>> history;  // (eps_i, k_i)
};

// A finder maps (model, eps, d_max, seed accumulator) to a FindResult.
using TripletFinder =
    std::function<FindResult(const Relaxation&, double, int,
                             const TripletSet&)>;

inline TripletFinder sac_finder() {
  return [](const Relaxation& m, double eps, int d_max,
            const TripletSet& seed) {
    return find_triplets(m, eps, d_max, seed);
  };
}

inline TripletFinder fr_finder(CycleVariant variant) {
  return [variant](const Relaxation& m, double eps, int d_max,
                   const TripletSet& seed) {
    return fr_find_triplets(m, eps, d_max, variant, seed);
  };
}

namespace detail {

inline int count_new_triplets(const Relaxation& m, const TripletSet& a) {
  int k = 0;
  for (const auto& t : a.genuine)
    if (m.find_factor({t[0], t[1], t[2]}) < 0) ++k;
  return k;
}

}  // namespace detail

// One tightening stage: run the finder for eps_i = 2^-i * eps, seeding
// each round's accumulator with the previous round's result. Stop at
// the first i >= 1 with k_i < 2 k_{i-1} (returning the previous
// round's set and keeping eps at eps_{i-1}); when eps_i drops below
// 1e-6 first, bump d_max, reset eps to 0.1 and return the largest set
// found.
inline TripletSet schedule_step(ScheduleState& state, const Relaxation& m,
                                const TripletFinder& finder) {
  TripletSet prev;
  int k_prev = -1;
  const double eps0 = state.eps;
  for (int i = 0;; ++i) {
    double eps_i = std::ldexp(eps0, -i);
    if (eps_i < 1e-6) {
      state.d_max += 1;
      state.eps = 0.1;
      return prev;
    }
    TripletSet cur = finder(m, eps_i, state.d_max, prev).selected;
    int k = detail::count_new_triplets(m, cur);
    state.history.emplace_back(eps_i, k);
    if (i >= 1 && k < 2 * k_prev) {
      state.eps = std::ldexp(eps0, -(i - 1));
      return prev;
    }
    prev = std::move(cur);
    k_prev = k;
  }
}

}  // namespace mapt

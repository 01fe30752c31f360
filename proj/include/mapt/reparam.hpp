#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mapt/model.hpp"

namespace mapt {

// One message vector per Hasse edge, indexed like the model's
// hasse_edges list; component (alpha,beta) has length |X_beta|.
struct MessageVector {
  std::vector<std::vector<double>> components;

  static MessageVector zeros(const Relaxation& m) {
    MessageVector mv;
    mv.components.reserve(m.hasse_edges.size());
    for (auto& [parent, child] : m.hasse_edges) {
      (void)parent;
      mv.components.emplace_back(m.factors[child].costs.size(), 0.0);
    }
    return mv;
  }
};

// theta^lambda: child tables gain the incoming message, parent tables
// lose it on every consistent joint label. Energy of every labeling is
// preserved.
inline std::vector<std::vector<double>> apply_messages(
    const Relaxation& m, const MessageVector& lambda) {
  if (lambda.components.size() != m.hasse_edges.size())
    throw std::invalid_argument("message vector shape mismatch");
  std::vector<std::vector<double>> costs;
  costs.reserve(m.factors.size());
  for (const Factor& f : m.factors) costs.push_back(f.costs);
  for (size_t e = 0; e < m.hasse_edges.size(); ++e) {
    auto [parent, child] = m.hasse_edges[e];
    const auto& msg = lambda.components[e];
    if (msg.size() != m.factors[child].costs.size())
      throw std::invalid_argument("message component shape mismatch");
    auto& ct = costs[child];
    for (size_t i = 0; i < ct.size(); ++i) ct[i] += msg[i];
    auto& pt = costs[parent];
    const auto& ps = m.factors[parent].scope;
    const auto& cs = m.factors[child].scope;
    for (size_t i = 0; i < pt.size(); ++i)
      pt[i] -= msg[m.restrict_index(ps, static_cast<int>(i), cs)];
  }
  return costs;
}

namespace detail {

// Hasse edge indices sorted by (parent, child); the deterministic sweep
// order for diffusion.
inline std::vector<int> sweep_order(const Relaxation& m) {
  std::vector<int> order(m.hasse_edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return m.hasse_edges[a] < m.hasse_edges[b];
  });
  return order;
}

}  // namespace detail

// One min-sum-diffusion sweep over all Hasse edges in (parent, child)
// order. For each edge: pull the parent's min-marginal, average with
// the child, push the shift back. Phi is non-decreasing over the sweep.
inline void diffusion_pass(Relaxation& m) {
  const auto order = detail::sweep_order(m);
  std::vector<double> marg;
  std::vector<int> restrict_cache;
  for (int e : order) {
    auto [parent, child] = m.hasse_edges[e];
    Factor& pf = m.factors[parent];
    Factor& cf = m.factors[child];
    marg.assign(cf.costs.size(), std::numeric_limits<double>::infinity());
    restrict_cache.resize(pf.costs.size());
    for (size_t i = 0; i < pf.costs.size(); ++i) {
      int j = m.restrict_index(pf.scope, static_cast<int>(i), cf.scope);
      restrict_cache[i] = j;
      marg[j] = std::min(marg[j], pf.costs[i]);
    }
    for (size_t j = 0; j < cf.costs.size(); ++j)
      marg[j] = (marg[j] - cf.costs[j]) / 2;  // shift delta
    for (size_t j = 0; j < cf.costs.size(); ++j) cf.costs[j] += marg[j];
    for (size_t i = 0; i < pf.costs.size(); ++i)
      pf.costs[i] -= marg[restrict_cache[i]];
  }
}

struct DualResult {
  double final_bound = 0;
  int passes = 0;
  std::vector<double> trace;  // Phi after each pass
};

inline DualResult solve_dual(Relaxation& m, int max_passes,
                             double tolerance) {
  if (max_passes < 1) throw std::invalid_argument("max_passes must be >= 1");
  DualResult r;
  double prev = lower_bound(m);
  int stalled = 0;
  for (int p = 0; p < max_passes; ++p) {
    diffusion_pass(m);
    double phi = lower_bound(m);
    r.trace.push_back(phi);
    ++r.passes;
    // The first sweep can rearrange costs without moving the bound yet,
    // so only stop after two consecutive sub-tolerance passes.
    stalled = phi - prev < tolerance ? stalled + 1 : 0;
    if (stalled >= 2) break;
    prev = phi;
  }
  r.final_bound = r.trace.back();
  return r;
}

}  // namespace mapt

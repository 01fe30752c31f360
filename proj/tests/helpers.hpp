#pragma once

#include <random>
#include <tuple>
#include <vector>

#include "mapt/csp.hpp"
#include "mapt/model.hpp"

namespace mapt::testing {

// Frustrated binary 3-cycle: zero unaries, each edge costs 1 when the
// endpoint labels agree and 0 otherwise. True minimum is 1; the pairwise
// relaxation bound stays at 0.
inline Relaxation fc3() {
  std::vector<double> disagree{1, 0, 0, 1};
  return build_model({2, 2, 2}, {{0, 0}, {0, 0}, {0, 0}},
                     {{0, 1, disagree}, {0, 2, disagree}, {1, 2, disagree}});
}

// Random dense-ish model: n in [3,8], 2-4 labels, uniform [0,1] costs,
// each edge present with probability 1/2.
inline Relaxation random_model(unsigned seed) {
  std::mt19937 rng(seed);
  int n = std::uniform_int_distribution<int>(3, 8)(rng);
  std::vector<int> domains(n);
  for (int& d : domains) d = std::uniform_int_distribution<int>(2, 4)(rng);
  std::uniform_real_distribution<double> cost(0.0, 1.0);
  std::vector<std::vector<double>> unary(n);
  for (int v = 0; v < n; ++v) {
    unary[v].resize(domains[v]);
    for (double& c : unary[v]) c = cost(rng);
  }
  std::vector<std::tuple<int, int, std::vector<double>>> pairwise;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      if (std::uniform_real_distribution<double>(0, 1)(rng) > 0.5) continue;
      std::vector<double> t(static_cast<size_t>(domains[u]) * domains[v]);
      for (double& c : t) c = cost(rng);
      pairwise.emplace_back(u, v, std::move(t));
    }
  return build_model(domains, unary, pairwise);
}

// Random CSP instance with i.i.d. masks, independent of any cost model.
inline CspInstance random_csp(unsigned seed) {
  std::mt19937 rng(seed);
  CspInstance inst;
  int n = std::uniform_int_distribution<int>(3, 8)(rng);
  inst.domain_sizes.resize(n);
  for (int& d : inst.domain_sizes)
    d = std::uniform_int_distribution<int>(2, 4)(rng);
  inst.active.assign(n, 1);
  inst.domains.resize(n);
  std::bernoulli_distribution label_on(0.85), pair_on(0.7), edge_on(0.5);
  for (int v = 0; v < n; ++v) {
    inst.domains[v].resize(inst.domain_sizes[v]);
    for (char& c : inst.domains[v]) c = label_on(rng) ? 1 : 0;
  }
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      if (!edge_on(rng)) continue;
      CspInstance::Edge e;
      e.u = u;
      e.v = v;
      e.allowed.resize(static_cast<size_t>(inst.domain_sizes[u]) *
                       inst.domain_sizes[v]);
      for (char& c : e.allowed) c = pair_on(rng) ? 1 : 0;
      inst.edges.push_back(std::move(e));
    }
  return inst;
}

}  // namespace mapt::testing

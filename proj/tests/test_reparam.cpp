#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "mapt/model.hpp"
#include "mapt/oracle.hpp"
#include "mapt/reparam.hpp"

using namespace mapt;
using mapt::testing::fc3;
using mapt::testing::random_model;

namespace {

std::vector<Labeling> all_labelings(const Relaxation& m) {
  std::vector<Labeling> out;
  long long total = 1;
  for (int d : m.domain_sizes) total *= d;
  Labeling x(m.num_vars(), 0);
  for (long long i = 0; i < total; ++i) {
    out.push_back(x);
    for (int v = m.num_vars() - 1; v >= 0; --v) {
      if (++x[v] < m.domain_sizes[v]) break;
      x[v] = 0;
    }
  }
  return out;
}

double energy_under(const Relaxation& m,
                    const std::vector<std::vector<double>>& costs,
                    const Labeling& x) {
  double sum = 0;
  for (size_t f = 0; f < m.factors.size(); ++f)
    sum += costs[f][m.table_index(m.factors[f], x)];
  return sum;
}

}  // namespace

TEST_CASE("zero messages are the identity reparameterization") {
  Relaxation m = fc3();
  auto costs = apply_messages(m, MessageVector::zeros(m));
  for (size_t f = 0; f < m.factors.size(); ++f)
    CHECK(costs[f] == m.factors[f].costs);
}

TEST_CASE("a constant message telescopes between a pair and its endpoint") {
  Relaxation m = build_model({2, 2}, {{1, 2}, {0, 0}},
                             {{0, 1, {5, 6, 7, 8}}});
  MessageVector lambda = MessageVector::zeros(m);
  // hasse_edges = [(pair, 0), (pair, 1)]; push delta toward variable 0
  const double delta = 0.25;
  for (double& c : lambda.components[0]) c = delta;
  auto costs = apply_messages(m, lambda);
  CHECK(costs[0][0] == doctest::Approx(1 + delta));
  CHECK(costs[0][1] == doctest::Approx(2 + delta));
  int pid = m.find_factor({0, 1});
  for (int i = 0; i < 4; ++i)
    CHECK(costs[pid][i] == doctest::Approx(m.factors[pid].costs[i] - delta));
}

TEST_CASE("random messages preserve every labeling's energy") {
  Relaxation m = fc3();
  add_triplet(m, {0, 1, 2});
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> pick(-2, 2);
  MessageVector lambda = MessageVector::zeros(m);
  for (auto& comp : lambda.components)
    for (double& c : comp) c = pick(rng);
  auto costs = apply_messages(m, lambda);
  for (const Labeling& x : all_labelings(m))
    CHECK(energy_under(m, costs, x) == doctest::Approx(evaluate(m, x)).epsilon(1e-9));
}

TEST_CASE("apply_messages rejects mis-shaped input") {
  Relaxation m = fc3();
  MessageVector lambda = MessageVector::zeros(m);
  lambda.components.pop_back();
  CHECK_THROWS_AS(apply_messages(m, lambda), std::invalid_argument);
}

TEST_CASE("diffusion is a no-op at a fixed point") {
  Relaxation m = build_model({2, 2}, {{0, 0}, {0, 0}}, {{0, 1, {0, 0, 0, 0}}});
  std::vector<std::vector<double>> before;
  for (const Factor& f : m.factors) before.push_back(f.costs);
  diffusion_pass(m);
  for (size_t f = 0; f < m.factors.size(); ++f)
    for (size_t i = 0; i < before[f].size(); ++i)
      CHECK(m.factors[f].costs[i] == doctest::Approx(before[f][i]));
}

TEST_CASE("the untightened frustrated cycle is stuck at bound 0") {
  Relaxation m = fc3();
  for (int p = 0; p < 100; ++p) {
    diffusion_pass(m);
    CHECK(lower_bound(m) <= 1e-9);
  }
}

TEST_CASE("adding the triplet lets diffusion close the gap to 1") {
  Relaxation m = fc3();
  add_triplet(m, {0, 1, 2});
  DualResult r = solve_dual(m, 200, 1e-12);
  CHECK(r.final_bound == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.final_bound <= 1 + 1e-9);
}

TEST_CASE("solve_dual trace and stopping contract") {
  Relaxation one = fc3();
  CHECK(solve_dual(one, 1, 1e-9).trace.size() == 1);

  Relaxation zero =
      build_model({2, 2}, {{0, 0}, {0, 0}}, {{0, 1, {0, 0, 0, 0}}});
  DualResult rz = solve_dual(zero, 50, 1e-9);
  for (double phi : rz.trace) CHECK(phi == doctest::Approx(0.0));

  CHECK_THROWS_AS(solve_dual(zero, 0, 1e-9), std::invalid_argument);
}

TEST_CASE("per-pass monotonicity over randomized instances") {
  for (unsigned seed = 0; seed < 1000; ++seed) {
    Relaxation m = random_model(seed);
    double prev = lower_bound(m);
    for (int p = 0; p < 3; ++p) {
      diffusion_pass(m);
      double phi = lower_bound(m);
      CHECK(phi >= prev - 1e-9);
      prev = phi;
    }
  }
}

TEST_CASE("diffusion preserves energies and stays below the optimum") {
  for (unsigned seed = 0; seed < 30; ++seed) {
    Relaxation m = random_model(seed);
    OracleResult exact = brute_min(m);
    std::vector<Labeling> sample = all_labelings(m);
    std::vector<double> before;
    for (const Labeling& x : sample) before.push_back(evaluate(m, x));
    DualResult r = solve_dual(m, 60, 1e-10);
    CHECK(r.final_bound <= exact.minimum + 1e-6);
    for (size_t i = 0; i < sample.size(); ++i)
      CHECK(std::abs(evaluate(m, sample[i]) - before[i]) <=
            1e-8 * (1 + std::abs(before[i])));
  }
}

TEST_CASE("identical inputs give bit-identical traces") {
  Relaxation a = random_model(42), b = random_model(42);
  DualResult ra = solve_dual(a, 25, 1e-12);
  DualResult rb = solve_dual(b, 25, 1e-12);
  CHECK(ra.trace == rb.trace);
  for (size_t f = 0; f < a.factors.size(); ++f)
    CHECK(a.factors[f].costs == b.factors[f].costs);
}

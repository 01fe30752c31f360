#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "helpers.hpp"
#include "mapt/frustrated.hpp"
#include "mapt/model.hpp"
#include "mapt/oracle.hpp"

using namespace mapt;
using mapt::testing::fc3;
using mapt::testing::random_model;

namespace {

// fc3 with the pair costs flipped: agreeing labels are free, so all
// partition-graph edges come out positive.
Relaxation fc3_positive() {
  std::vector<double> agree{0, 1, 1, 0};
  return build_model({2, 2, 2}, {{0, 0}, {0, 0}, {0, 0}},
                     {{0, 1, agree}, {0, 2, agree}, {1, 2, agree}});
}

std::set<std::vector<int>> projected(const std::vector<FrustratedCycle>& cs) {
  std::set<std::vector<int>> out;
  for (const auto& c : cs) out.insert(c.vars);
  return out;
}

}  // namespace

TEST_CASE("edge_weight compares differing against agreeing indicator pairs") {
  std::vector<double> disagree{1, 0, 0, 1};
  CHECK(edge_weight(disagree, 2, 2, 0, 0) == doctest::Approx(-1));
  std::vector<double> constant{3, 3, 3, 3};
  CHECK(edge_weight(constant, 2, 2, 0, 0) == doctest::Approx(0));
  std::vector<double> cut{0, 5, 5, 0};  // crossing the cut costs 5
  CHECK(edge_weight(cut, 2, 2, 0, 0) == doctest::Approx(5));
}

TEST_CASE("edge_weight is symmetric under transposition") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> cost(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    int du = std::uniform_int_distribution<int>(2, 4)(rng);
    int dv = std::uniform_int_distribution<int>(2, 4)(rng);
    std::vector<double> t(du * dv), tt(du * dv);
    for (double& c : t) c = cost(rng);
    for (int a = 0; a < du; ++a)
      for (int b = 0; b < dv; ++b) tt[b * du + a] = t[a * dv + b];
    int su = std::uniform_int_distribution<int>(0, du - 1)(rng);
    int sv = std::uniform_int_distribution<int>(0, dv - 1)(rng);
    CHECK(edge_weight(t, du, dv, su, sv) ==
          doctest::Approx(edge_weight(tt, dv, du, sv, su)));
  }
}

TEST_CASE("build_signed_graph on the frustrated cycle") {
  SignedPartitionGraph g = build_signed_graph(fc3(), 0.5);
  CHECK(g.nodes.size() == 6);  // two partitions per variable
  CHECK(g.edges.size() == 12);
  // partitions singling out the same label repel (w = -1); partitions
  // singling out different labels attract (w = +1)
  int negative = 0;
  for (const SignedEdge& e : g.edges) {
    CHECK(std::abs(e.weight) == doctest::Approx(1));
    CHECK(e.negative == (e.weight < 0));
    negative += e.negative;
  }
  CHECK(negative == 6);
}

TEST_CASE("build_signed_graph drops weightless or sub-threshold edges") {
  Relaxation flat = build_model({2, 2}, {{0, 0}, {0, 0}},
                                {{0, 1, {0, 0, 0, 0}}});
  CHECK(build_signed_graph(flat, 0.1).edges.empty());
  CHECK(build_signed_graph(fc3(), 1.5).edges.empty());  // eps above |w|
}

TEST_CASE("find_cycles_fr1 detects the odd all-negative cycle") {
  SignedPartitionGraph g = build_signed_graph(fc3(), 0.5);
  std::vector<FrustratedCycle> cycles = find_cycles_fr1(g);
  REQUIRE_FALSE(cycles.empty());
  bool found = false;
  for (const auto& c : cycles) {
    CHECK(c.negative_count % 2 == 1);
    found |= c.vars == std::vector<int>{0, 1, 2};
  }
  CHECK(found);
}

TEST_CASE("find_cycles_fr1 finds nothing without frustration") {
  CHECK(find_cycles_fr1(build_signed_graph(fc3_positive(), 0.5)).empty());
  SignedPartitionGraph two;
  two.nodes = {Partition{0, 0}, Partition{1, 0}};
  two.edges.push_back(SignedEdge{0, 1, -1.0, true});
  CHECK(find_cycles_fr1(two).empty());
}

TEST_CASE("find_cycles_fr dedupes the cycle across all roots") {
  SignedPartitionGraph g = build_signed_graph(fc3(), 0.5);
  std::vector<FrustratedCycle> cycles = find_cycles_fr(g, 3);
  std::set<std::vector<int>> proj = projected(cycles);
  CHECK(proj.count({0, 1, 2}) == 1);
  for (const auto& c : cycles) CHECK(c.negative_count % 2 == 1);
}

TEST_CASE("find_cycles_fr respects the depth bound") {
  Relaxation nine = gen_frustrated(9, 2, 0);
  SignedPartitionGraph g = build_signed_graph(nine, 0.5);
  for (const auto& c : find_cycles_fr(g, 3))
    CHECK(c.vars.size() <= 7);  // 2 * d_max + 1
  bool found9 = false;
  for (const auto& c : find_cycles_fr(g, 5)) found9 |= c.vars.size() == 9;
  CHECK(found9);
}

TEST_CASE("fr1 and deep fr cycles are confirmed by exhaustive enumeration") {
  for (unsigned seed = 0; seed < 12; ++seed) {
    Relaxation m = seed % 2 ? gen_frustrated(3 + 2 * (seed % 3), 2, seed)
                            : random_model(seed);
    SignedPartitionGraph g = build_signed_graph(m, 0.1);
    if (g.nodes.size() > 20) continue;
    std::set<std::vector<int>> oracle =
        projected(all_frustrated_cycles(g, 11));
    for (const auto& c : find_cycles_fr1(g))
      if (c.vars.size() <= 11) CHECK(oracle.count(c.vars));
    for (const auto& c : find_cycles_fr(g, 5)) CHECK(oracle.count(c.vars));
  }
}

TEST_CASE("every labeling of a frustrated cycle leaves some edge inactive") {
  const double eps = 0.5;
  Relaxation m = fc3();
  for (int x0 = 0; x0 < 2; ++x0)
    for (int x1 = 0; x1 < 2; ++x1)
      for (int x2 = 0; x2 < 2; ++x2) {
        Labeling x{x0, x1, x2};
        bool violated = false;
        for (int fid : m.pair_factor_ids()) {
          const Factor& f = m.factors[fid];
          double lo = *std::min_element(f.costs.begin(), f.costs.end());
          if (m.cost(fid, x) > lo + eps) violated = true;
        }
        CHECK(violated);
      }
}

TEST_CASE("triangulate fans out from the first vertex") {
  CHECK(triangulate({4, 7, 9}) ==
        std::vector<std::array<int, 3>>{{4, 7, 9}});
  CHECK(triangulate({0, 1, 2, 3}) ==
        std::vector<std::array<int, 3>>{{0, 1, 2}, {0, 2, 3}});
  CHECK(triangulate({0, 1, 2, 3, 4}) ==
        std::vector<std::array<int, 3>>{{0, 1, 2}, {0, 2, 3}, {0, 3, 4}});
  CHECK_THROWS_AS(triangulate({0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(triangulate({0, 1, 0}), std::invalid_argument);
}

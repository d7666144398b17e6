#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "ntrack/dense_search.hpp"
#include "support/fixtures.hpp"
#include "support/uniform3.hpp"

using namespace ntrack;

namespace {

// Two nodes joined by one edge, unit self-loops: Theta((.5,.5)) = 1.25.
NonUniformHypergraph two_node_graph() {
  NonUniformHypergraph g(2, {1, 1});
  g.add_edge({0}, {1.0});
  g.add_edge({1}, {1.0});
  g.add_edge({0, 1}, {1.0});
  return g;
}

// Clique of four strong nodes (0..3) plus four weakly attached ones.
NonUniformHypergraph clique_plus_noise() {
  NonUniformHypergraph g(8, {1, 1});
  for (int v = 0; v < 8; ++v) g.add_edge({v}, {0.1});
  for (int i = 0; i < 8; ++i)
    for (int j = i + 1; j < 8; ++j)
      g.add_edge({i, j}, {i < 4 && j < 4 ? 1.0 : 0.01});
  return g;
}

IndicatorVector half_half() {
  IndicatorVector y;
  y.start_node = 0;
  y.index = {0, 1};
  y.y = {0.5, 0.5};
  y.alpha_hat = 2;
  return y;
}

}  // namespace

TEST_SUITE("dense_search") {

TEST_CASE("objective on the two-node fixture") {
  NonUniformHypergraph g = two_node_graph();
  WeightVector lambda{{{1.0}, {1.0}}};
  CHECK(objective(half_half(), g, lambda) == doctest::Approx(1.25));

  // Degenerate mass with no matching self-loop contributes nothing.
  NonUniformHypergraph bare(2, {1, 1});
  bare.add_edge({0, 1}, {1.0});
  IndicatorVector y = half_half();
  y.y = {1.0, 0.0};
  CHECK(objective(y, bare, lambda) == 0.0);
}

TEST_CASE("objective is linear in the weights") {
  std::mt19937_64 rng(101);
  NonUniformHypergraph g = testfix::random_graph(rng, 9, 4);
  WeightVector lambda = testfix::random_affinity_weights(rng, 4);
  WeightVector doubled = lambda;
  for (auto& row : doubled.per_degree)
    for (double& w : row) w *= 2.0;
  IndicatorVector y = testfix::random_feasible(rng, g, 0);
  CHECK(objective(y, g, doubled) ==
        doctest::Approx(2.0 * objective(y, g, lambda)));
}

TEST_CASE("objective rejects arity mismatches") {
  NonUniformHypergraph g = two_node_graph();
  WeightVector bad{{{1.0}, {1.0, 2.0}}};
  CHECK_THROWS_AS(objective(half_half(), g, bad), ValidationError);
}

TEST_CASE("reward at zero mass reduces to the self-loop term") {
  NonUniformHypergraph g = two_node_graph();
  WeightVector lambda{{{0.7}, {1.0}}};
  IndicatorVector y = half_half();
  y.y = {0.0, 0.0};  // not feasible, but reward is still a polynomial
  CHECK(reward(0, y, g, lambda) == doctest::Approx(0.7));
  CHECK(reward(1, y, g, lambda) == doctest::Approx(0.7));
}

TEST_CASE("reward matches central finite differences") {
  std::mt19937_64 rng(103);
  const double h = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    NonUniformHypergraph g = testfix::random_graph(rng, 10, 4);
    WeightVector lambda = testfix::random_affinity_weights(rng, 4);
    IndicatorVector y = testfix::random_feasible(rng, g, trial % 10);
    for (int rep = 0; rep < 5; ++rep) {
      const int i = static_cast<int>(rng() % y.index.size());
      IndicatorVector up = y, dn = y;
      up.y[static_cast<std::size_t>(i)] += h;
      dn.y[static_cast<std::size_t>(i)] -= h;
      const double fd =
          (objective(up, g, lambda) - objective(dn, g, lambda)) / (2.0 * h);
      CHECK(std::abs(reward(i, y, g, lambda) - fd) <= 1e-6);
    }
  }
}

TEST_CASE("pair curvature fixtures") {
  // Single pair term: -lambda2 * A(p,q) = -0.5.
  NonUniformHypergraph g(2, {1, 1});
  g.add_edge({0, 1}, {0.5});
  WeightVector lambda{{{1.0}, {1.0}}};
  CHECK(pair_curvature(0, 1, half_half(), g, lambda) == doctest::Approx(-0.5));

  // No shared tuple: 0 and 1 are both adjacent to 2 but not to each other,
  // so from start 2 the pair (0, 1) has zero curvature.
  NonUniformHypergraph path(3, {1, 1});
  path.add_edge({0, 2}, {1.0});
  path.add_edge({1, 2}, {1.0});
  IndicatorVector mid;
  mid.start_node = 2;
  mid.index = {0, 1, 2};
  mid.y = {0.25, 0.25, 0.5};
  CHECK(pair_curvature(0, 1, mid, path, lambda) == 0.0);

  // Degree-3 tuple: -lambda3 * A * y_r with y_r = 0.5.
  NonUniformHypergraph tri(3, {1, 1, 1});
  tri.add_edge({0, 1, 2}, {1.0});
  WeightVector l3{{{1.0}, {1.0}, {1.0}}};
  IndicatorVector y;
  y.start_node = 0;
  y.index = {0, 1, 2};
  y.y = {0.25, 0.25, 0.5};
  CHECK(pair_curvature(0, 1, y, tri, l3) == doctest::Approx(-0.5));
}

TEST_CASE("quadratic expansion predicts transfers exactly") {
  std::mt19937_64 rng(107);
  for (int trial = 0; trial < 50; ++trial) {
    NonUniformHypergraph g = testfix::random_graph(rng, 12, 4);
    WeightVector lambda = testfix::random_affinity_weights(rng, 4);
    IndicatorVector y = testfix::random_feasible(rng, g, trial % 12);
    const std::size_t m = y.index.size();
    if (m < 2) continue;
    const int p = static_cast<int>(rng() % m);
    int q = static_cast<int>(rng() % m);
    if (q == p) q = (q + 1) % static_cast<int>(m);

    const double cap = 1.0 / y.alpha_hat;
    const double eta = 0.9 * std::uniform_real_distribution<double>(0, 1)(rng) *
                       std::min(y.y[static_cast<std::size_t>(q)],
                                cap - y.y[static_cast<std::size_t>(p)]);
    const double predicted =
        pair_curvature(p, q, y, g, lambda) * eta * eta +
        (reward(p, y, g, lambda) - reward(q, y, g, lambda)) * eta;

    IndicatorVector moved = y;
    moved.y[static_cast<std::size_t>(p)] += eta;
    moved.y[static_cast<std::size_t>(q)] -= eta;
    const double actual =
        objective(moved, g, lambda) - objective(y, g, lambda);
    CHECK(std::abs(predicted - actual) <= 1e-12);
  }
}

TEST_CASE("step size branches") {
  // Box-limited from both sides: min(y_q, cap - y_p).
  CHECK(step_size(0.3, 0.2, 1.0, 0.0, 0.0, 2) == doctest::Approx(0.2));
  // Negative curvature caps at the unconstrained maximizer.
  CHECK(step_size(0.0, 0.4, 2.0, 1.0, -1.0, 2) == doctest::Approx(0.4));
  CHECK(step_size(0.0, 0.4, 2.0, 1.0, -10.0, 2) == doctest::Approx(0.05));
  // Nothing to transfer.
  CHECK(step_size(0.3, 0.0, 1.0, 0.0, -1.0, 2) == 0.0);
}

TEST_CASE("local maximizer finds the strong clique") {
  NonUniformHypergraph g = clique_plus_noise();
  WeightVector lambda{{{1.0}, {1.0}}};
  SearchOptions opts;
  for (int start = 0; start < 4; ++start) {
    SearchResult r = local_maximizer(g, lambda, start, opts);
    CHECK(r.feasible);
    CHECK(r.converged);
    CHECK(r.support == std::vector<int>{0, 1, 2, 3});
    CHECK_NOTHROW(r.y.validate());
  }
}

TEST_CASE("trace is monotone and feasible at every accepted step") {
  std::mt19937_64 rng(109);
  for (int trial = 0; trial < 25; ++trial) {
    NonUniformHypergraph g = testfix::random_graph(rng, 10, 4);
    WeightVector lambda = testfix::random_affinity_weights(rng, 4);
    std::vector<StepRecord> trace;
    SearchOptions opts;
    opts.trace = &trace;
    SearchResult r = local_maximizer(g, lambda, trial % 10, opts);
    if (!r.feasible) continue;
    CHECK_NOTHROW(r.y.validate());
    CHECK(r.iterations <= opts.iter_cap_factor *
                              std::max(static_cast<int>(r.y.index.size()) - 1,
                                       1));
    double prev = -1e300;
    for (const StepRecord& s : trace) {
      CHECK(s.theta >= prev - 1e-9);
      CHECK(s.eta >= 0.0);
      CHECK(s.p != s.q);
      prev = s.theta;
    }
    CHECK(std::find(r.support.begin(), r.support.end(), trial % 10) !=
          r.support.end());
  }
}

TEST_CASE("kkt certificate holds at convergence") {
  std::mt19937_64 rng(113);
  for (int trial = 0; trial < 25; ++trial) {
    NonUniformHypergraph g = testfix::random_graph(rng, 9, 4);
    WeightVector lambda = testfix::random_affinity_weights(rng, 4);
    SearchOptions opts;
    SearchResult r = local_maximizer(g, lambda, trial % 9, opts);
    if (!r.feasible || !r.converged) continue;
    KktReport k = kkt_certificate(r, g, lambda, opts);
    CHECK(k.ok);
    CHECK(k.max_violation <= 1e-6);
  }
}

TEST_CASE("singleton start is reported infeasible") {
  NonUniformHypergraph g(1, {1});
  g.add_edge({0}, {1.0});
  WeightVector lambda{{{1.0}}};
  SearchResult r = local_maximizer(g, lambda, 0, SearchOptions{});
  CHECK(!r.feasible);
  CHECK(!r.converged);
  CHECK(r.y.y == std::vector<double>{1.0});
  CHECK(r.support == std::vector<int>{0});
}

TEST_CASE("search_all: empty graph, disjoint cliques, dedup, determinism") {
  WeightVector lambda{{{1.0}, {1.0}}};
  NonUniformHypergraph empty(0, {1, 1});
  CHECK(search_all(empty, lambda, SearchOptions{}).empty());

  // Two disjoint triangles; every start lands on its own triangle.
  NonUniformHypergraph g(6, {1, 1});
  for (int v = 0; v < 6; ++v) g.add_edge({v}, {0.1});
  for (int base : {0, 3})
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        g.add_edge({base + i, base + j}, {1.0});
  // search_all only clears the flag on a capped run, so seed it to true.
  bool all_converged = true;
  std::vector<Structure> found =
      search_all(g, lambda, SearchOptions{}, &all_converged);
  CHECK(all_converged);
  REQUIRE(found.size() == 2);
  std::set<std::vector<int>> supports;
  for (const Structure& s : found) {
    supports.insert(s.support);
    CHECK(s.theta == doctest::Approx(uniform_support_objective(
                         g, lambda, s.support)));
  }
  CHECK(supports ==
        std::set<std::vector<int>>{{0, 1, 2}, {3, 4, 5}});

  SearchOptions threaded;
  threaded.threads = 4;
  std::vector<Structure> again = search_all(g, lambda, threaded);
  REQUIRE(again.size() == found.size());
  for (std::size_t i = 0; i < found.size(); ++i) {
    CHECK(again[i].support == found[i].support);
    CHECK(again[i].theta == found[i].theta);
  }
}

TEST_CASE("uniform support objective sums edges inside the support") {
  NonUniformHypergraph g = two_node_graph();
  WeightVector lambda{{{1.0}, {1.0}}};
  CHECK(uniform_support_objective(g, lambda, std::vector<int>{0, 1}) ==
        doctest::Approx(1.25));
  CHECK(uniform_support_objective(g, lambda, std::vector<int>{0}) ==
        doctest::Approx(1.0));
}

TEST_CASE("zeroing other degrees reproduces a 3-uniform solver bit-for-bit") {
  std::mt19937_64 rng(127);
  for (int trial = 0; trial < 12; ++trial) {
    // Only self-loops and degree-3 tuples; lambda nonzero at degree 3 only,
    // so both solvers optimize the same polynomial over the same index set.
    const int n = 8;
    NonUniformHypergraph g(n, {1, 1, 1});
    for (int v = 0; v < n; ++v) g.add_edge({v}, {0.0});
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    for (int t = 0; t < 3 * n; ++t) {
      int a = static_cast<int>(rng() % n);
      int b = static_cast<int>(rng() % n);
      int c = static_cast<int>(rng() % n);
      if (a == b || a == c || b == c) continue;
      g.add_edge({a, b, c}, {unit(rng)});
    }
    const double lambda3 = unit(rng) + 0.5;
    WeightVector lambda{{{0.0}, {0.0}, {lambda3}}};

    const int start = trial % n;
    if (g.neighbors(start).empty()) continue;

    std::vector<StepRecord> trace;
    SearchOptions opts;
    opts.full_recompute_every = 1;  // mirror recomputes from scratch per step
    opts.trace = &trace;
    SearchResult r = local_maximizer(g, lambda, start, opts);

    testfix::Uniform3Result ref =
        testfix::run_uniform3(g, lambda3, start, opts.alpha_hat, opts.tol,
                              opts.eps_part, opts.iter_cap_factor);
    CHECK(ref.index == r.y.index);
    REQUIRE(ref.trace.size() == trace.size());
    for (std::size_t k = 0; k < trace.size(); ++k) {
      CHECK(trace[k].p == ref.trace[k].p);
      CHECK(trace[k].q == ref.trace[k].q);
      CHECK(trace[k].eta == ref.trace[k].eta);    // bit-identical
      CHECK(trace[k].theta == ref.trace[k].theta);
    }
    CHECK(r.support == ref.support);
    CHECK(r.y.y == ref.y);
  }
}

}  // TEST_SUITE

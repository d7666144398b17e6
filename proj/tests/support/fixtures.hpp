#pragma once

// Shared test helpers: terse constructors for detections/tracklets, unit
// weight vectors, deterministic random hypergraphs and random feasible
// indicator states for the optimizer tests.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "ntrack/dense_search.hpp"
#include "ntrack/hypergraph.hpp"
#include "ntrack/types.hpp"

namespace testfix {

inline ntrack::Detection det(int frame, double cx, double cy,
                             double width = 10.0, double height = 10.0,
                             double conf = 1.0, std::int64_t id = -1) {
  return ntrack::Detection(frame, cx, cy, width, height, conf, id);
}

/// Length-1 tracklet at (cx, cy).
inline ntrack::Tracklet single(int node_id, int frame, double cx, double cy,
                               double width = 10.0, double height = 10.0,
                               double conf = 1.0) {
  return ntrack::Tracklet::from_detection(
      node_id, det(frame, cx, cy, width, height, conf));
}

/// All-ones weights for the given per-degree arity.
inline ntrack::WeightVector unit_weights(const std::vector<int>& arity) {
  ntrack::WeightVector w;
  for (int k : arity)
    w.per_degree.push_back(std::vector<double>(static_cast<std::size_t>(k), 1.0));
  return w;
}

/// Standard arity layout: 1 for every degree except 3 channels at degree 2.
inline std::vector<int> standard_arity(int max_degree) {
  std::vector<int> arity(static_cast<std::size_t>(max_degree), 1);
  if (max_degree >= 2) arity[1] = 3;
  return arity;
}

inline std::vector<double> random_affinity(std::mt19937_64& rng, int arity) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> a(static_cast<std::size_t>(arity));
  for (double& x : a) x = u(rng);
  return a;
}

/// Random positive weights over the standard arity layout, U(0.1, 2).
inline ntrack::WeightVector random_affinity_weights(std::mt19937_64& rng,
                                                    int max_degree) {
  std::uniform_real_distribution<double> u(0.1, 2.0);
  ntrack::WeightVector w;
  for (int k : standard_arity(max_degree)) {
    std::vector<double> row(static_cast<std::size_t>(k));
    for (double& x : row) x = u(rng);
    w.per_degree.push_back(std::move(row));
  }
  return w;
}

/// Random graph with self-loops on every node, Bernoulli(p2) pairs, and a
/// few random triples/quadruples per node (degrees up to max_degree). All
/// affinities are U(0,1); structure depends only on the rng state.
inline ntrack::NonUniformHypergraph random_graph(std::mt19937_64& rng, int n,
                                                 int max_degree,
                                                 double p2 = 0.5) {
  ntrack::NonUniformHypergraph g(n, standard_arity(max_degree));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> node(0, n - 1);
  for (int v = 0; v < n; ++v) g.add_edge({v}, random_affinity(rng, 1));
  if (max_degree >= 2) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (u(rng) < p2) g.add_edge({i, j}, random_affinity(rng, 3));
  }
  for (int d = 3; d <= max_degree; ++d) {
    if (n < d) break;
    const int tries = 2 * n;
    for (int t = 0; t < tries; ++t) {
      std::vector<int> tuple;
      while (static_cast<int>(tuple.size()) < d) {
        const int v = node(rng);
        if (std::find(tuple.begin(), tuple.end(), v) == tuple.end())
          tuple.push_back(v);
      }
      g.add_edge(std::move(tuple), random_affinity(rng, 1));
    }
  }
  return g;
}

/// Random feasible indicator over N(start) ∪ {start}: the uniform point
/// walked by random in-box transfers, so Σy stays 1 and 0 <= y <= 1/α̂
/// exactly. Requires |index| >= alpha_hat.
inline ntrack::IndicatorVector random_feasible(
    std::mt19937_64& rng, const ntrack::NonUniformHypergraph& g, int start,
    int alpha_hat = 2) {
  ntrack::IndicatorVector iv = ntrack::make_indicator(g, start, alpha_hat);
  const int m = static_cast<int>(iv.y.size());
  if (m < alpha_hat) return iv;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, m - 1);
  const double cap = 1.0 / static_cast<double>(alpha_hat);
  for (int step = 0; step < 4 * m; ++step) {
    const int p = pick(rng);
    const int q = pick(rng);
    if (p == q) continue;
    const double room = std::min(iv.y[static_cast<std::size_t>(q)],
                                 cap - iv.y[static_cast<std::size_t>(p)]);
    if (room <= 0.0) continue;
    const double eta = 0.9 * u(rng) * room;
    iv.y[static_cast<std::size_t>(p)] += eta;
    iv.y[static_cast<std::size_t>(q)] -= eta;
  }
  return iv;
}

}  // namespace testfix

#include "ntrack/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace ntrack {
namespace oracle {

namespace {

double weighted(const std::vector<double>& w, const AffinityVector& a,
                int degree) {
  if (w.size() != a.size())
    throw ValidationError("weight arity mismatch for degree " +
                          std::to_string(degree));
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * a[i];
  return acc;
}

std::vector<int> mask_to_support(std::uint32_t mask, int n) {
  std::vector<int> s;
  for (int v = 0; v < n; ++v)
    if (mask & (1u << v)) s.push_back(v);
  return s;
}

}  // namespace

std::optional<Structure> brute_force_dense(const NonUniformHypergraph& g,
                                           const WeightVector& lambda,
                                           int alpha_hat) {
  const int n = g.node_count();
  if (n > 16) throw ValidationError("brute_force_dense caps at 16 nodes");
  if (alpha_hat < 1) throw ValidationError("alpha_hat must be >= 1");

  struct Entry {
    std::uint32_t mask;
    int degree;
    double coeff;
  };
  std::vector<Entry> entries;
  for (int d = 1; d <= g.max_degree(); ++d)
    for (const auto& e : g.edges(d)) {
      std::uint32_t mask = 0;
      for (int v : e.nodes) mask |= 1u << v;
      entries.push_back({mask, d, weighted(lambda.weights(d), e.affinity, d)});
    }

  std::optional<Structure> best;
  std::vector<int> best_support;
  const std::uint32_t full = n == 32 ? ~0u : (1u << n) - 1u;
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    const int size = std::popcount(mask);
    if (size < alpha_hat) continue;
    const double frac = 1.0 / static_cast<double>(size);
    double theta = 0.0;
    for (const Entry& e : entries) {
      if ((e.mask & mask) != e.mask) continue;
      double mass = 1.0;
      for (int k = 0; k < e.degree; ++k) mass *= frac;
      theta += e.coeff * mass;
    }
    if (!best || theta > best->theta) {
      best = Structure{mask_to_support(mask, n), theta};
    } else if (theta == best->theta) {
      std::vector<int> support = mask_to_support(mask, n);
      if (support < best->support) best->support = std::move(support);
    }
  }
  return best;
}

PartitionResult brute_force_partitions(
    const NonUniformHypergraph& g,
    const std::function<double(const std::vector<int>&)>& score) {
  const int n = g.node_count();
  if (n > 8) throw ValidationError("brute_force_partitions caps at 8 nodes");

  // Degree-2 adjacency; clusters must be cliques of it.
  std::vector<std::uint32_t> adj(static_cast<std::size_t>(n), 0);
  for (const auto& e : g.edges(2)) {
    adj[static_cast<std::size_t>(e.nodes[0])] |= 1u << e.nodes[1];
    adj[static_cast<std::size_t>(e.nodes[1])] |= 1u << e.nodes[0];
  }

  PartitionResult best;
  best.score = -std::numeric_limits<double>::infinity();
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  std::vector<std::uint32_t> cluster_mask;

  auto recurse = [&](auto&& self, int v) -> void {
    if (v == n) {
      const double s = score(labels);
      if (s > best.score) {
        best.score = s;
        best.labels = labels;
      }
      return;
    }
    // Unassigned.
    labels[static_cast<std::size_t>(v)] = 0;
    self(self, v + 1);
    // Join an existing cluster when adjacent to all its members.
    for (std::size_t c = 0; c < cluster_mask.size(); ++c) {
      if ((cluster_mask[c] & adj[static_cast<std::size_t>(v)]) !=
          cluster_mask[c])
        continue;
      cluster_mask[c] |= 1u << v;
      labels[static_cast<std::size_t>(v)] = static_cast<int>(c) + 1;
      self(self, v + 1);
      cluster_mask[c] &= ~(1u << v);
    }
    // Open a new cluster (canonical: new labels in node order).
    cluster_mask.push_back(1u << v);
    labels[static_cast<std::size_t>(v)] = static_cast<int>(cluster_mask.size());
    self(self, v + 1);
    cluster_mask.pop_back();
    labels[static_cast<std::size_t>(v)] = 0;
  };
  recurse(recurse, 0);
  return best;
}

}  // namespace oracle
}  // namespace ntrack

#include "ntrack/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ntrack {

std::size_t NonUniformHypergraph::TupleHash::operator()(
    const std::vector<int>& t) const {
  // FNV-1a over the id bytes; equality is checked exactly by the set.
  std::uint64_t h = 14695981039346656037ull;
  for (int v : t) {
    auto u = static_cast<std::uint32_t>(v);
    for (int b = 0; b < 4; ++b) {
      h ^= (u >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  return static_cast<std::size_t>(h);
}

NonUniformHypergraph::NonUniformHypergraph(int node_count,
                                           std::vector<int> arity)
    : n_(node_count), arity_(std::move(arity)) {
  if (n_ < 0) throw ValidationError("node count must be >= 0");
  if (arity_.empty()) throw ValidationError("arity list must not be empty");
  for (int k : arity_)
    if (k < 1) throw ValidationError("affinity arity must be >= 1");
  edges_.resize(arity_.size());
  seen_.resize(arity_.size());
  incidence_.resize(static_cast<std::size_t>(n_));
  neighbors_.resize(static_cast<std::size_t>(n_));
}

NonUniformHypergraph NonUniformHypergraph::over(std::vector<Tracklet> tracklets,
                                                std::vector<int> arity) {
  NonUniformHypergraph g(static_cast<int>(tracklets.size()), std::move(arity));
  g.tracklets_.reserve(tracklets.size());
  for (std::size_t v = 0; v < tracklets.size(); ++v)
    g.tracklets_.push_back(tracklets[v].with_node_id(static_cast<int>(v)));
  return g;
}

int NonUniformHypergraph::arity_of(int degree) const {
  if (degree < 1 || degree > max_degree())
    throw ValidationError("degree out of range: " + std::to_string(degree));
  return arity_[static_cast<std::size_t>(degree - 1)];
}

void NonUniformHypergraph::check_node(int v) const {
  if (v < 0 || v >= n_)
    throw ValidationError("node id out of range: " + std::to_string(v));
}

bool NonUniformHypergraph::add_edge(std::vector<int> nodes,
                                    AffinityVector affinity) {
  const int d = static_cast<int>(nodes.size());
  if (d < 1 || d > max_degree())
    throw ValidationError("edge degree out of range: " + std::to_string(d));
  for (int v : nodes) check_node(v);
  std::sort(nodes.begin(), nodes.end());
  if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end())
    throw ValidationError("edge nodes must be distinct");
  if (static_cast<int>(affinity.size()) != arity_of(d))
    throw ValidationError("affinity arity mismatch for degree " +
                          std::to_string(d));
  for (double a : affinity)
    if (!std::isfinite(a)) throw ValidationError("affinity must be finite");

  auto& bucket = seen_[static_cast<std::size_t>(d - 1)];
  if (!bucket.insert(nodes).second) return false;

  auto& list = edges_[static_cast<std::size_t>(d - 1)];
  const int index = static_cast<int>(list.size());
  for (int v : nodes) {
    incidence_[static_cast<std::size_t>(v)].push_back({d, index});
    if (d >= 2) {
      auto& nb = neighbors_[static_cast<std::size_t>(v)];
      for (int u : nodes) {
        if (u == v) continue;
        auto it = std::lower_bound(nb.begin(), nb.end(), u);
        if (it == nb.end() || *it != u) nb.insert(it, u);
      }
    }
  }
  list.push_back(Edge{std::move(nodes), std::move(affinity)});
  return true;
}

const std::vector<NonUniformHypergraph::Edge>& NonUniformHypergraph::edges(
    int degree) const {
  if (degree < 1 || degree > max_degree())
    throw ValidationError("degree out of range: " + std::to_string(degree));
  return edges_[static_cast<std::size_t>(degree - 1)];
}

const NonUniformHypergraph::Edge& NonUniformHypergraph::edge(int degree,
                                                             int index) const {
  const auto& list = edges(degree);
  if (index < 0 || index >= static_cast<int>(list.size()))
    throw ValidationError("edge index out of range");
  return list[static_cast<std::size_t>(index)];
}

std::size_t NonUniformHypergraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& list : edges_) total += list.size();
  return total;
}

const std::vector<std::pair<int, int>>& NonUniformHypergraph::incident(
    int v) const {
  check_node(v);
  return incidence_[static_cast<std::size_t>(v)];
}

const std::vector<int>& NonUniformHypergraph::neighbors(int v) const {
  check_node(v);
  return neighbors_[static_cast<std::size_t>(v)];
}

const Tracklet& NonUniformHypergraph::tracklet(int v) const {
  check_node(v);
  if (!has_tracklets())
    throw ValidationError("hypergraph carries no tracklets");
  return tracklets_[static_cast<std::size_t>(v)];
}

}  // namespace ntrack

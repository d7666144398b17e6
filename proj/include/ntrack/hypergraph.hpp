#pragma once

#include <cstddef>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ntrack/types.hpp"

namespace ntrack {

/// Hypergraph with mixed edge degrees 1..D and per-degree affinity arity.
/// Node tuples are canonicalized (sorted ascending), must contain distinct
/// nodes, and are deduplicated. Degree-1 edges are self-loops.
class NonUniformHypergraph {
 public:
  struct Edge {
    std::vector<int> nodes;  // sorted ascending
    AffinityVector affinity;
  };

  /// arity[d-1] is the affinity arity for degree d; D = arity.size().
  NonUniformHypergraph(int node_count, std::vector<int> arity);

  /// Builds a graph whose node v carries tracklets[v] (node ids are the
  /// vector positions; the tracklets' own node_id fields are rewritten).
  static NonUniformHypergraph over(std::vector<Tracklet> tracklets,
                                   std::vector<int> arity);

  int node_count() const { return n_; }
  int max_degree() const { return static_cast<int>(arity_.size()); }
  const std::vector<int>& arity() const { return arity_; }
  int arity_of(int degree) const;

  /// Inserts an edge; returns false (and keeps the first copy) when the
  /// canonical tuple is already present. Affinity values must be finite.
  bool add_edge(std::vector<int> nodes, AffinityVector affinity);

  const std::vector<Edge>& edges(int degree) const;
  const Edge& edge(int degree, int index) const;
  std::size_t edge_count() const;
  std::size_t edge_count(int degree) const { return edges(degree).size(); }

  /// Incident (degree, edge index) pairs for a node, insertion order.
  const std::vector<std::pair<int, int>>& incident(int v) const;

  /// Nodes sharing at least one edge of any degree >= 2 with v, sorted
  /// ascending, v excluded.
  const std::vector<int>& neighbors(int v) const;

  bool has_tracklets() const { return !tracklets_.empty(); }
  const Tracklet& tracklet(int v) const;
  const std::vector<Tracklet>& tracklets() const { return tracklets_; }

 private:
  struct TupleHash {
    std::size_t operator()(const std::vector<int>& t) const;
  };

  void check_node(int v) const;

  int n_ = 0;
  std::vector<int> arity_;
  std::vector<Tracklet> tracklets_;
  std::vector<std::vector<Edge>> edges_;  // index d-1
  std::vector<std::unordered_set<std::vector<int>, TupleHash>> seen_;
  std::vector<std::vector<std::pair<int, int>>> incidence_;
  std::vector<std::vector<int>> neighbors_;
};

}  // namespace ntrack

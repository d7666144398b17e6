#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ntrack/dense_search.hpp"
#include "ntrack/hypergraph.hpp"
#include "ntrack/types.hpp"

namespace ntrack {
namespace oracle {

/// Exhaustive maximizer of the uniform-indicator objective over all node
/// subsets of size >= alpha_hat (|V| <= 16). Ties broken by
/// lexicographically smaller support. Empty optional when no feasible
/// support exists.
std::optional<Structure> brute_force_dense(const NonUniformHypergraph& g,
                                           const WeightVector& lambda,
                                           int alpha_hat);

/// Exhaustive argmax of score(labeling) over every partition of the nodes
/// into clusters and an unassigned remainder (|V| <= 8), where clusters
/// must be cliques of admissible degree-2 edges in g. The score callback
/// receives node labels (0 = unassigned, else 1..k).
struct PartitionResult {
  std::vector<int> labels;  // per node
  double score = 0.0;
};
PartitionResult brute_force_partitions(
    const NonUniformHypergraph& g,
    const std::function<double(const std::vector<int>&)>& score);

}  // namespace oracle
}  // namespace ntrack

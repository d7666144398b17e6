#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "ntrack/dense_search.hpp"
#include "ntrack/graph_builder.hpp"
#include "ntrack/hypergraph.hpp"
#include "ntrack/types.hpp"

namespace ntrack {

/// One training clip: a hypergraph over ground-truth-matched tracklets and
/// the reference clustering (node id -> identity cluster).
struct TrainingInstance {
  NonUniformHypergraph graph;
  Labeling ground_truth;
  std::vector<double> loss_weights;  // per node; empty means all 1

  void validate() const;  // every node labeled in ground_truth
};

/// S(Y): per-degree, per-channel sums of affinities over tuples fully
/// inside one cluster, each scaled by (1/|cluster|)^degree. Laid out like
/// WeightVector::flatten() for the graph's arity, so that
/// dot(lambda.flatten(), S(Y)) equals the tracking objective of Y.
std::vector<double> feature_map(const Labeling& y,
                                const NonUniformHypergraph& g);

/// dot(lambda, S(Y)).
double structured_score(const WeightVector& lambda, const Labeling& y,
                        const NonUniformHypergraph& g);

/// Weighted Hamming loss under greedy maximum-overlap cluster
/// correspondence. A node counts as an error unless it is unassigned in
/// both labelings or its two cluster labels correspond. weights may be
/// empty (all 1) or one entry per node.
double hamming_loss(const Labeling& y, const Labeling& y_star,
                    std::span<const double> weights);

/// Approximate argmax of structured_score + hamming_loss: dense search
/// with per-node loss bonuses on the degree-1 coefficients, scored against
/// a small candidate set (augmented / plain search results, each with and
/// without leftover singletons, the reference labeling, and the empty
/// labeling). Returns the best-scoring candidate.
Labeling separation_oracle(const WeightVector& lambda,
                           const TrainingInstance& inst,
                           const SearchOptions& search);

struct TrainOptions {
  double C = 1.0;
  double eps_stop = 1e-3;
  int max_rounds = 200;
  double qp_gap = 1e-8;  // relative duality-gap target for the inner QP
  SearchOptions search;
  std::ostream* log = nullptr;  // per-round progress lines
};

struct TrainResult {
  WeightVector lambda;
  std::vector<double> slack;  // per instance, at the returned lambda
  double total_slack = 0.0;
  int rounds = 0;
  bool converged = false;  // false when max_rounds was exhausted
  double qp_gap = 0.0;     // achieved duality gap of the last QP solve
};

/// Cutting-plane structural SVM: grow per-instance working sets from the
/// separation oracle, re-solving min 1/2|λ|² + C Σξ over them until no
/// constraint is violated by more than eps_stop.
TrainResult train(std::span<const TrainingInstance> instances,
                  const TrainOptions& opts);

struct ClipOptions {
  int clip_length = 14;     // frames per training clip
  double min_overlap = 0.5;  // IoU needed to adopt a ground-truth identity
};

/// Splits a sequence into non-overlapping clips, keeps detections whose
/// best ground-truth IoU exceeds min_overlap, labels them with that
/// identity, and builds one hypergraph per clip (clips with fewer than two
/// labeled detections are skipped).
std::vector<TrainingInstance> make_training_instances(
    std::span<const Detection> detections,
    std::span<const Detection> ground_truth, const MotionContext& ctx,
    const BuildConfig& build, const ClipOptions& clip);

}  // namespace ntrack

#pragma once

#include <span>
#include <vector>

#include "ntrack/affinity.hpp"
#include "ntrack/hypergraph.hpp"
#include "ntrack/types.hpp"

namespace ntrack {

struct BuildConfig {
  int max_degree = 4;
  // Pixels per frame; values <= 0 mean "not resolved yet" (see
  // resolve_max_velocity) and are rejected by validate().
  double max_velocity = 0.0;
  int max_frame_gap = 7;
  int knn_k = 8;                      // candidate successors kept per node
  int max_hyperedges_per_node = 64;   // per anchor, per degree
  HistogramLayout histogram;
  bool prune_zero_affinity = true;    // drop degree>=2 edges with all
                                      // channels <= zero_affinity_eps
  double zero_affinity_eps = 1e-6;
  int threads = 1;

  void validate() const;
};

/// True iff a and b do not overlap in time, the frame gap between them is
/// <= max_frame_gap, and the center distance between the earlier one's last
/// box and the later one's first box is <= max_velocity * gap. Order of the
/// arguments does not matter.
bool admissible_pair(const Tracklet& a, const Tracklet& b,
                     const BuildConfig& cfg);

/// 2x the 95th percentile of nearest-neighbor center displacement between
/// consecutive frames. Falls back to a practically unbounded velocity when
/// no consecutive-frame pair exists, and to a 1 px/frame floor for
/// stationary scenes, so the result is always a valid max_velocity.
double estimate_max_velocity(std::span<const Detection> detections);

/// Returns cfg with max_velocity filled in from the detections when it is
/// not already positive.
BuildConfig resolve_max_velocity(BuildConfig cfg,
                                 std::span<const Detection> detections);

/// Assembles the non-uniform hypergraph over the tracklets:
///   E_1: one self-loop per node (mean confidence);
///   E_2: each node's knn_k nearest admissible successors (edge_affinity);
///   E_d, 3 <= d <= max_degree: temporal chains grown depth-first over the
///        successor lists, all ordered pairs admissible, capped at
///        max_hyperedges_per_node per anchor and degree (hyperedge_affinity).
/// Deterministic: successor lists are ordered by (start frame, center
/// distance, node id) and anchors are merged in node order.
NonUniformHypergraph build_hypergraph(std::vector<Tracklet> tracklets,
                                      const MotionContext& ctx,
                                      const BuildConfig& cfg);

}  // namespace ntrack

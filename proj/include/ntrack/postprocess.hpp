#pragma once

#include <span>
#include <vector>

#include "ntrack/dense_search.hpp"
#include "ntrack/types.hpp"

namespace ntrack {

/// Greedy disjointification of searched structures: visit by descending
/// theta (ties by lexicographically smaller support), strip nodes already
/// claimed, drop structures left with fewer than alpha_hat nodes. Output
/// supports are pairwise disjoint.
std::vector<Structure> resolve_conflicts(std::vector<Structure> structures,
                                         int alpha_hat);

/// Concatenates the support's tracklets in start-frame order. A temporal
/// overlap here means the graph constraints were violated upstream, so it
/// propagates as TemporalOverlapError.
Tracklet stitch(std::span<const int> support,
                std::span<const Tracklet> tracklets);

/// Fills every frame gap between consecutive detections with linearly
/// interpolated boxes (confidence 0, flagged interpolated). Original
/// detections are preserved bit-exactly.
Tracklet interpolate_gaps(const Tracklet& t);

}  // namespace ntrack

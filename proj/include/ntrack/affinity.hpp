#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include "ntrack/types.hpp"

namespace ntrack {

/// Cosine similarity of two equal-length vectors. Throws ValidationError on
/// length mismatch or zero-norm input.
double cosine_similarity(std::span<const double> u, std::span<const double> v);
double cosine_similarity(std::span<const float> u, std::span<const float> v);

/// Concatenated per-channel HSV bin counts (H, S, V).
struct HistogramLayout {
  int h_bins = 8;
  int s_bins = 8;
  int v_bins = 4;
  int total() const { return h_bins + s_bins + v_bins; }
  void validate() const;
};

/// Color histogram normalized to unit L2 norm. An all-zero input cannot be
/// normalized and is flagged degenerate; comparisons against a degenerate
/// histogram fall back to the neutral affinity 0.5.
class Histogram {
 public:
  explicit Histogram(std::vector<double> bins);
  const std::vector<double>& bins() const { return bins_; }
  bool degenerate() const { return degenerate_; }

 private:
  std::vector<double> bins_;
  bool degenerate_ = false;
};

/// Frame-indexed view over tracked feature points. Membership of a point in
/// a box is evaluated at the box's frame with inclusive bounds.
class MotionContext {
 public:
  MotionContext() = default;
  explicit MotionContext(std::vector<PointTrajectory> trajectories);

  std::size_t trajectory_count() const { return trajs_.size(); }
  const std::vector<PointTrajectory>& trajectories() const { return trajs_; }

  /// Indexes (into trajectories()) of trajectories whose sample at
  /// box.frame lies inside the box. Sorted ascending.
  std::vector<int> through_box(const Detection& box) const;

  /// Trajectories passing through every box of the tracklet.
  std::vector<int> through_tracklet(const Tracklet& t) const;

 private:
  std::vector<PointTrajectory> trajs_;
  // frame -> (trajectory index, sample index), trajectory index ascending
  std::unordered_map<int, std::vector<std::pair<int, int>>> by_frame_;
};

/// Motion consistency score 1 - 2/(1 + exp(degree * shared / gamma_sum)),
/// where gamma_sum is the total area of the boxes involved. Defined as 0
/// when no trajectory is shared (covers gamma_sum == 0).
double motion_consistency(long shared, double gamma_sum, int degree);

/// Degree-1 affinity [rho(v)]: the tracklet's mean detection confidence.
AffinityVector self_loop_affinity(const Tracklet& v);

/// Degree-2 affinity [color, embedding, motion] for a temporally ordered
/// pair: a must end strictly before b starts. Color compares the histogram
/// of a's last box with b's first box; embedding likewise with
/// (1 + cosine)/2; motion counts trajectories shared by those two boxes.
/// Missing or degenerate color/embedding data yields the neutral 0.5.
AffinityVector edge_affinity(const Tracklet& a, const Tracklet& b,
                             const MotionContext& ctx);

/// Degree-d (d >= 3) affinity [motion]: trajectories must pass through
/// every box of every tracklet to count as shared.
AffinityVector hyperedge_affinity(std::span<const Tracklet> nodes,
                                  const MotionContext& ctx);

}  // namespace ntrack

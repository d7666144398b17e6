#pragma once

#include <span>
#include <vector>

#include "ntrack/types.hpp"

namespace ntrack {
namespace metrics {

/// Axis-aligned intersection-over-union of two detections' boxes.
double iou(const Detection& a, const Detection& b);

struct MotReport {
  bool mota_defined = false;
  double mota = 0.0;
  double motp_iou = 0.0;   // mean IoU over matched pairs (higher is better)
  double motp_norm = 0.0;  // mean (1 - IoU)/(1 - threshold) over matches,
                           // clamped to [0, 1] (lower is better)
  double mt = 0.0;         // fraction of GT trajectories covered >= 80%
  double ml = 0.0;         // fraction covered <= 20%
  long fp = 0;
  long fn = 0;
  long ids = 0;
  long fm = 0;
  long gt_total = 0;
  long matches = 0;
  int gt_trajectories = 0;
};

struct Idf1Report {
  double value = 0.0;
  long idtp = 0;
  long idfp = 0;
  long idfn = 0;
};

/// Per-frame matching at IoU >= iou_threshold with match persistence:
/// previous pairings are kept while still above the threshold, remaining
/// boxes are matched greedily by descending IoU. Identity switches count
/// against each ground-truth track's last known assignment.
MotReport clear_mot(std::span<const Detection> results,
                    std::span<const Detection> ground_truth,
                    double iou_threshold = 0.5);

/// Trajectory-level identity measure: one global bipartite assignment
/// between ground-truth and result trajectories minimizing ID mismatches;
/// IDF1 = 2*IDTP / (2*IDTP + IDFP + IDFN).
Idf1Report idf1(std::span<const Detection> results,
                std::span<const Detection> ground_truth,
                double iou_threshold = 0.5);

/// Minimum-cost assignment on a square matrix (returns column of each row).
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost);

}  // namespace metrics
}  // namespace ntrack

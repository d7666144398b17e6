#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ntrack {

/// Input validation failure (bad boxes, bad frame order, arity mismatch...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two tracklets share at least one frame where exactly one was expected
/// to precede the other.
class TemporalOverlapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A single detector response: center/size box on one frame.
struct Detection {
  int frame = 0;
  double cx = 0.0;
  double cy = 0.0;
  double width = 0.0;
  double height = 0.0;
  double confidence = 0.0;
  std::int64_t id = -1;
  bool interpolated = false;
  std::optional<std::vector<float>> embedding;
  std::optional<std::vector<float>> histogram;

  Detection() = default;
  Detection(int frame, double cx, double cy, double width, double height,
            double confidence, std::int64_t id = -1);

  double area() const { return width * height; }
  double left() const { return cx - width / 2.0; }
  double top() const { return cy - height / 2.0; }

  /// Inclusive axis-aligned containment test.
  bool contains(double x, double y) const {
    return x >= cx - width / 2.0 && x <= cx + width / 2.0 &&
           y >= cy - height / 2.0 && y <= cy + height / 2.0;
  }

  void validate() const;
};

/// A temporally ordered fragment of one object's trajectory. A lone
/// detection is a tracklet of length one. The score is always the mean
/// detection confidence and is recomputed whenever a tracklet is built.
class Tracklet {
 public:
  Tracklet(int node_id, std::vector<Detection> detections);
  static Tracklet from_detection(int node_id, Detection d);

  int node_id() const { return node_id_; }
  const std::vector<Detection>& detections() const { return dets_; }
  const Detection& first() const { return dets_.front(); }
  const Detection& last() const { return dets_.back(); }
  int start_frame() const { return dets_.front().frame; }
  int end_frame() const { return dets_.back().frame; }
  int length() const { return static_cast<int>(dets_.size()); }
  double score() const { return score_; }

  Tracklet with_node_id(int node_id) const;

 private:
  int node_id_ = -1;
  std::vector<Detection> dets_;
  double score_ = 0.0;
};

/// True when the frame spans of a and b do not intersect.
bool temporally_disjoint(const Tracklet& a, const Tracklet& b);

/// Joins two non-overlapping tracklets, a strictly before b. Frame gaps are
/// kept as-is; see interpolate_gaps for filling them. Throws
/// TemporalOverlapError when b does not start after a ends.
Tracklet concat_tracklets(const Tracklet& a, const Tracklet& b);

/// A tracked feature point's path, used for motion-consistency counts.
struct PointTrajectory {
  struct Sample {
    int frame = 0;
    double x = 0.0;
    double y = 0.0;
  };
  std::int64_t id = 0;
  std::vector<Sample> samples;

  void validate() const;  // >= 2 samples, strictly increasing frames
};

/// Affinity attached to one edge/hyperedge. Arity is 3 for degree 2
/// (color, embedding, motion) and 1 elsewhere by default; the hypergraph
/// header declares the arity per degree.
using AffinityVector = std::vector<double>;

/// Per-degree balancing weights. Entry d-1 must have the arity of the
/// degree-d affinity vectors it multiplies.
struct WeightVector {
  std::vector<std::vector<double>> per_degree;

  int max_degree() const { return static_cast<int>(per_degree.size()); }
  const std::vector<double>& weights(int degree) const;

  std::vector<double> flatten() const;
  static WeightVector from_flat(const std::vector<int>& arity,
                                const std::vector<double>& flat);
  /// Learned defaults shipped with the tracker (D=4, arity 1/3/1/1).
  static WeightVector defaults();

  void validate() const;
};

/// Assignment of detections to identities. Labels are contiguous 1..k;
/// detections absent from the map are unassigned.
struct Labeling {
  // (detection id -> label) pairs; kept sorted by detection id.
  std::vector<std::pair<std::int64_t, int>> assignment;
  int cluster_count = 0;

  int label_of(std::int64_t detection_id) const;  // 0 when unassigned
  void set(std::int64_t detection_id, int label);
  std::size_t assigned_count() const { return assignment.size(); }

  /// Remaps arbitrary labels to contiguous 1..k (order of first appearance
  /// by ascending detection id).
  static Labeling from_assignments(
      std::vector<std::pair<std::int64_t, int>> raw);

  void validate() const;
};

}  // namespace ntrack

#include "ntrack/types.hpp"

#include <algorithm>
#include <cmath>

namespace ntrack {

namespace {

bool finite(double x) { return std::isfinite(x); }

}  // namespace

Detection::Detection(int frame_, double cx_, double cy_, double width_,
                     double height_, double confidence_, std::int64_t id_)
    : frame(frame_),
      cx(cx_),
      cy(cy_),
      width(width_),
      height(height_),
      confidence(confidence_),
      id(id_) {
  validate();
}

void Detection::validate() const {
  if (frame < 0) throw ValidationError("detection frame must be >= 0");
  if (!finite(cx) || !finite(cy) || !finite(width) || !finite(height) ||
      !finite(confidence))
    throw ValidationError("detection fields must be finite");
  if (width <= 0.0 || height <= 0.0)
    throw ValidationError("detection box must have positive width and height");
  if (confidence < 0.0 || confidence > 1.0)
    throw ValidationError("detection confidence must lie in [0, 1]");
}

Tracklet::Tracklet(int node_id, std::vector<Detection> detections)
    : node_id_(node_id), dets_(std::move(detections)) {
  if (dets_.empty())
    throw ValidationError("tracklet needs at least one detection");
  double sum = 0.0;
  int prev_frame = -1;
  for (const Detection& d : dets_) {
    d.validate();
    if (d.frame <= prev_frame)
      throw ValidationError("tracklet frames must be strictly increasing");
    prev_frame = d.frame;
    sum += d.confidence;
  }
  score_ = sum / static_cast<double>(dets_.size());
}

Tracklet Tracklet::from_detection(int node_id, Detection d) {
  return Tracklet(node_id, std::vector<Detection>{std::move(d)});
}

Tracklet Tracklet::with_node_id(int node_id) const {
  Tracklet copy = *this;
  copy.node_id_ = node_id;
  return copy;
}

bool temporally_disjoint(const Tracklet& a, const Tracklet& b) {
  return a.end_frame() < b.start_frame() || b.end_frame() < a.start_frame();
}

Tracklet concat_tracklets(const Tracklet& a, const Tracklet& b) {
  if (a.end_frame() >= b.start_frame())
    throw TemporalOverlapError("cannot concatenate: tracklet starting at frame " +
                               std::to_string(b.start_frame()) +
                               " does not follow one ending at frame " +
                               std::to_string(a.end_frame()));
  std::vector<Detection> joined = a.detections();
  joined.insert(joined.end(), b.detections().begin(), b.detections().end());
  return Tracklet(a.node_id(), std::move(joined));
}

void PointTrajectory::validate() const {
  if (samples.size() < 2)
    throw ValidationError("point trajectory needs at least two samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!finite(samples[i].x) || !finite(samples[i].y))
      throw ValidationError("point trajectory samples must be finite");
    if (i > 0 && samples[i].frame <= samples[i - 1].frame)
      throw ValidationError("point trajectory frames must be strictly increasing");
  }
}

const std::vector<double>& WeightVector::weights(int degree) const {
  if (degree < 1 || degree > max_degree())
    throw ValidationError("no weights for degree " + std::to_string(degree));
  return per_degree[static_cast<std::size_t>(degree - 1)];
}

std::vector<double> WeightVector::flatten() const {
  std::vector<double> flat;
  for (const auto& w : per_degree) flat.insert(flat.end(), w.begin(), w.end());
  return flat;
}

WeightVector WeightVector::from_flat(const std::vector<int>& arity,
                                     const std::vector<double>& flat) {
  WeightVector out;
  std::size_t pos = 0;
  for (int k : arity) {
    if (k < 1) throw ValidationError("arity entries must be >= 1");
    if (pos + static_cast<std::size_t>(k) > flat.size())
      throw ValidationError("flat weight vector too short for declared arity");
    out.per_degree.emplace_back(flat.begin() + static_cast<long>(pos),
                                flat.begin() + static_cast<long>(pos + k));
    pos += static_cast<std::size_t>(k);
  }
  if (pos != flat.size())
    throw ValidationError("flat weight vector longer than declared arity");
  return out;
}

WeightVector WeightVector::defaults() {
  WeightVector w;
  w.per_degree = {{0.58535},
                  {0.15576, 3.0332, 0.34388},
                  {1.2879},
                  {0.22324}};
  return w;
}

void WeightVector::validate() const {
  if (per_degree.empty()) throw ValidationError("weight vector is empty");
  for (const auto& w : per_degree) {
    if (w.empty()) throw ValidationError("weight entry with zero arity");
    for (double x : w)
      if (!finite(x)) throw ValidationError("weights must be finite");
  }
}

int Labeling::label_of(std::int64_t detection_id) const {
  auto it = std::lower_bound(
      assignment.begin(), assignment.end(), detection_id,
      [](const auto& kv, std::int64_t id) { return kv.first < id; });
  if (it == assignment.end() || it->first != detection_id) return 0;
  return it->second;
}

void Labeling::set(std::int64_t detection_id, int label) {
  auto it = std::lower_bound(
      assignment.begin(), assignment.end(), detection_id,
      [](const auto& kv, std::int64_t id) { return kv.first < id; });
  if (it != assignment.end() && it->first == detection_id) {
    it->second = label;
  } else {
    assignment.insert(it, {detection_id, label});
  }
  cluster_count = std::max(cluster_count, label);
}

Labeling Labeling::from_assignments(
    std::vector<std::pair<std::int64_t, int>> raw) {
  std::sort(raw.begin(), raw.end());
  Labeling out;
  std::vector<std::pair<int, int>> remap;  // raw label -> contiguous label
  for (const auto& [det, lbl] : raw) {
    if (!out.assignment.empty() && out.assignment.back().first == det)
      throw ValidationError("detection labeled twice: " + std::to_string(det));
    auto it = std::find_if(remap.begin(), remap.end(),
                           [&](const auto& p) { return p.first == lbl; });
    int mapped;
    if (it == remap.end()) {
      mapped = static_cast<int>(remap.size()) + 1;
      remap.push_back({lbl, mapped});
    } else {
      mapped = it->second;
    }
    out.assignment.push_back({det, mapped});
  }
  out.cluster_count = static_cast<int>(remap.size());
  return out;
}

void Labeling::validate() const {
  std::vector<char> seen(static_cast<std::size_t>(cluster_count) + 1, 0);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (i > 0 && assignment[i].first <= assignment[i - 1].first)
      throw ValidationError("labeling must be sorted by detection id");
    int lbl = assignment[i].second;
    if (lbl < 1 || lbl > cluster_count)
      throw ValidationError("label out of range: " + std::to_string(lbl));
    seen[static_cast<std::size_t>(lbl)] = 1;
  }
  for (int l = 1; l <= cluster_count; ++l)
    if (!seen[static_cast<std::size_t>(l)])
      throw ValidationError("labels must be contiguous 1..k; missing " +
                            std::to_string(l));
}

}  // namespace ntrack

#include "ntrack/affinity.hpp"

#include <algorithm>
#include <cmath>

namespace ntrack {

namespace {

template <typename T>
double cosine_impl(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size())
    throw ValidationError("cosine similarity: length mismatch");
  if (u.empty()) throw ValidationError("cosine similarity: empty vectors");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = static_cast<double>(u[i]);
    const double b = static_cast<double>(v[i]);
    dot += a * b;
    nu += a * a;
    nv += b * b;
  }
  if (nu == 0.0 || nv == 0.0)
    throw ValidationError("cosine similarity: zero-norm vector");
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

constexpr double kNeutral = 0.5;

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// Intersection of two sorted int vectors.
std::vector<int> intersect(const std::vector<int>& a,
                           const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

double color_channel(const Detection& a, const Detection& b) {
  if (!a.histogram || !b.histogram) return kNeutral;
  Histogram ha(std::vector<double>(a.histogram->begin(), a.histogram->end()));
  Histogram hb(std::vector<double>(b.histogram->begin(), b.histogram->end()));
  if (ha.degenerate() || hb.degenerate()) return kNeutral;
  return clamp01(cosine_similarity(std::span<const double>(ha.bins()),
                                   std::span<const double>(hb.bins())));
}

double embedding_channel(const Detection& a, const Detection& b) {
  if (!a.embedding || !b.embedding) return kNeutral;
  double nu = 0.0, nv = 0.0;
  for (float x : *a.embedding) nu += static_cast<double>(x) * x;
  for (float x : *b.embedding) nv += static_cast<double>(x) * x;
  if (nu == 0.0 || nv == 0.0) return kNeutral;
  const double cos = cosine_similarity(std::span<const float>(*a.embedding),
                                       std::span<const float>(*b.embedding));
  return clamp01((1.0 + cos) / 2.0);
}

}  // namespace

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  return cosine_impl(u, v);
}

double cosine_similarity(std::span<const float> u, std::span<const float> v) {
  return cosine_impl(u, v);
}

void HistogramLayout::validate() const {
  if (h_bins < 1 || s_bins < 1 || v_bins < 1)
    throw ValidationError("histogram bin counts must be >= 1");
}

Histogram::Histogram(std::vector<double> bins) : bins_(std::move(bins)) {
  if (bins_.empty()) throw ValidationError("histogram must have bins");
  double norm2 = 0.0;
  for (double b : bins_) {
    if (!std::isfinite(b) || b < 0.0)
      throw ValidationError("histogram bins must be finite and >= 0");
    norm2 += b * b;
  }
  if (norm2 == 0.0) {
    degenerate_ = true;
    return;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& b : bins_) b *= inv;
}

MotionContext::MotionContext(std::vector<PointTrajectory> trajectories)
    : trajs_(std::move(trajectories)) {
  for (std::size_t t = 0; t < trajs_.size(); ++t) {
    trajs_[t].validate();
    const auto& samples = trajs_[t].samples;
    for (std::size_t s = 0; s < samples.size(); ++s)
      by_frame_[samples[s].frame].push_back(
          {static_cast<int>(t), static_cast<int>(s)});
  }
}

std::vector<int> MotionContext::through_box(const Detection& box) const {
  std::vector<int> out;
  auto it = by_frame_.find(box.frame);
  if (it == by_frame_.end()) return out;
  for (const auto& [t, s] : it->second) {
    const auto& p = trajs_[static_cast<std::size_t>(t)]
                        .samples[static_cast<std::size_t>(s)];
    if (box.contains(p.x, p.y)) out.push_back(t);
  }
  return out;  // ascending: by_frame_ entries are appended in t order
}

std::vector<int> MotionContext::through_tracklet(const Tracklet& t) const {
  std::vector<int> acc = through_box(t.detections().front());
  for (std::size_t i = 1; i < t.detections().size() && !acc.empty(); ++i)
    acc = intersect(acc, through_box(t.detections()[i]));
  return acc;
}

double motion_consistency(long shared, double gamma_sum, int degree) {
  if (shared < 0 || gamma_sum < 0.0 || degree < 2)
    throw ValidationError("motion consistency: bad counts");
  if (shared == 0) return 0.0;
  const double x =
      static_cast<double>(degree) * static_cast<double>(shared) / gamma_sum;
  return 1.0 - 2.0 / (1.0 + std::exp(x));
}

AffinityVector self_loop_affinity(const Tracklet& v) { return {v.score()}; }

AffinityVector edge_affinity(const Tracklet& a, const Tracklet& b,
                             const MotionContext& ctx) {
  if (a.end_frame() >= b.start_frame())
    throw ValidationError("edge affinity requires a to end before b starts");
  const Detection& last_a = a.last();
  const Detection& first_b = b.first();

  const std::vector<int> through_a = ctx.through_box(last_a);
  const std::vector<int> through_b = ctx.through_box(first_b);
  const long shared = static_cast<long>(intersect(through_a, through_b).size());
  // The sigmoid argument is 2ζ over the two boundary boxes' areas.
  const double gamma_sum = last_a.area() + first_b.area();

  return {color_channel(last_a, first_b), embedding_channel(last_a, first_b),
          motion_consistency(shared, gamma_sum, 2)};
}

AffinityVector hyperedge_affinity(std::span<const Tracklet> nodes,
                                  const MotionContext& ctx) {
  const int d = static_cast<int>(nodes.size());
  if (d < 3) throw ValidationError("hyperedge affinity needs degree >= 3");
  // d·ζ over the total area of every box of every member tracklet, where ζ
  // counts trajectories crossing all of them.
  double gamma_sum = 0.0;
  std::vector<int> acc;
  for (int i = 0; i < d; ++i) {
    const Tracklet& t = nodes[static_cast<std::size_t>(i)];
    for (const Detection& b : t.detections()) gamma_sum += b.area();
    std::vector<int> through = ctx.through_tracklet(t);
    if (i == 0)
      acc = std::move(through);
    else if (!acc.empty())
      acc = intersect(acc, through);
  }
  return {motion_consistency(static_cast<long>(acc.size()), gamma_sum, d)};
}

}  // namespace ntrack

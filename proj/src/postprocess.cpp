#include "ntrack/postprocess.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace ntrack {

std::vector<Structure> resolve_conflicts(std::vector<Structure> structures,
                                         int alpha_hat) {
  for (Structure& s : structures)
    std::sort(s.support.begin(), s.support.end());
  std::stable_sort(structures.begin(), structures.end(),
                   [](const Structure& a, const Structure& b) {
                     if (a.theta != b.theta) return a.theta > b.theta;
                     return a.support < b.support;
                   });
  std::unordered_set<int> claimed;
  std::vector<Structure> out;
  for (Structure& s : structures) {
    std::vector<int> kept;
    kept.reserve(s.support.size());
    for (int v : s.support)
      if (!claimed.count(v)) kept.push_back(v);
    if (static_cast<int>(kept.size()) < alpha_hat) continue;
    claimed.insert(kept.begin(), kept.end());
    out.push_back({std::move(kept), s.theta});
  }
  return out;
}

Tracklet stitch(std::span<const int> support,
                std::span<const Tracklet> tracklets) {
  if (support.empty()) throw ValidationError("cannot stitch an empty support");
  std::unordered_map<int, const Tracklet*> by_id;
  for (const Tracklet& t : tracklets) by_id[t.node_id()] = &t;

  std::vector<const Tracklet*> members;
  members.reserve(support.size());
  for (int v : support) {
    auto it = by_id.find(v);
    if (it == by_id.end())
      throw ValidationError("support references unknown node " +
                            std::to_string(v));
    members.push_back(it->second);
  }
  std::sort(members.begin(), members.end(),
            [](const Tracklet* a, const Tracklet* b) {
              return a->start_frame() < b->start_frame();
            });
  Tracklet joined = *members.front();
  for (std::size_t i = 1; i < members.size(); ++i)
    joined = concat_tracklets(joined, *members[i]);
  return joined;
}

Tracklet interpolate_gaps(const Tracklet& t) {
  const auto& dets = t.detections();
  std::vector<Detection> filled;
  filled.push_back(dets.front());
  for (std::size_t i = 1; i < dets.size(); ++i) {
    const Detection& a = dets[i - 1];
    const Detection& b = dets[i];
    const int gap = b.frame - a.frame;
    for (int f = a.frame + 1; f < b.frame; ++f) {
      const double w = static_cast<double>(f - a.frame) / gap;
      Detection d(f, a.cx + w * (b.cx - a.cx), a.cy + w * (b.cy - a.cy),
                  a.width + w * (b.width - a.width),
                  a.height + w * (b.height - a.height), 0.0);
      d.interpolated = true;
      filled.push_back(d);
    }
    filled.push_back(b);
  }
  return Tracklet(t.node_id(), std::move(filled));
}

}  // namespace ntrack

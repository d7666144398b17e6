#include "ntrack/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>
#include <utility>

#include "ntrack/metrics.hpp"
#include "ntrack/postprocess.hpp"

namespace ntrack {

void PipelineConfig::validate() const {
  // max_velocity <= 0 means "estimate from the data" at this level; swap in
  // a positive placeholder so BuildConfig::validate checks the other fields.
  BuildConfig b = build;
  if (b.max_velocity <= 0.0) b.max_velocity = 1.0;
  b.validate();
  search.validate();
  weights.validate();
  if (weights.max_degree() < 2)
    throw ValidationError("pipeline weights must cover degrees 1 and 2");
  if (tau < 2) throw ValidationError("window length tau must be >= 2");
  if (!(duplicate_iou >= 0.0 && duplicate_iou <= 1.0))
    throw ValidationError("duplicate_iou must be in [0, 1]");
}

namespace {

// Association-level admissibility between a target's tail and a short
// tracklet's head. The temporal horizon is the target's maximum possible
// staleness — (patience + 2) windows — rather than the in-window frame gap,
// so a target that sat out a window can still be recovered; the distance
// cap scales with the actual gap as usual.
// Per-frame decay applied to target-to-tracklet link affinities; see the
// association loop in process_window.
constexpr double kAssocGapDecay = 0.9;

bool assoc_admissible(const Tracklet& target, const Tracklet& tracklet,
                      const PipelineConfig& cfg) {
  const Detection& a = target.last();
  const Detection& b = tracklet.first();
  if (b.frame <= a.frame) return false;
  const long gap = b.frame - a.frame;
  const long horizon = static_cast<long>(cfg.patience() + 2) * cfg.tau;
  if (gap > horizon) return false;
  const double dist = std::hypot(b.cx - a.cx, b.cy - a.cy);
  return dist <= cfg.build.max_velocity * static_cast<double>(gap);
}

// Drops every trajectory that spends most of its life on top of a longer
// one. Crossings split detections between a target and a late-born
// doppelganger; once both are gap-filled they cover the same object twice.
constexpr double kCullIou = 0.5;       // per-frame overlap to count as shared
constexpr double kCullFraction = 0.5;  // life fraction shared before culling
std::vector<Trajectory> drop_duplicate_trajectories(
    std::vector<Trajectory> trajectories) {
  std::stable_sort(trajectories.begin(), trajectories.end(),
                   [](const Trajectory& a, const Trajectory& b) {
                     if (a.track.length() != b.track.length())
                       return a.track.length() > b.track.length();
                     return a.identity < b.identity;
                   });
  std::vector<Trajectory> kept;
  for (Trajectory& cand : trajectories) {
    bool duplicate = false;
    for (const Trajectory& ref : kept) {
      int shared = 0;
      for (const Detection& d : cand.track.detections()) {
        if (d.frame < ref.track.start_frame() ||
            d.frame > ref.track.end_frame())
          continue;
        // Gap-filled tracks hold exactly one box per frame of their span.
        const Detection& r = ref.track.detections()[static_cast<std::size_t>(
            d.frame - ref.track.start_frame())];
        if (metrics::iou(d, r) >= kCullIou) ++shared;
      }
      if (shared >= kCullFraction * cand.track.length()) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) kept.push_back(std::move(cand));
  }
  return kept;
}

// In-window tracking: detections -> unit tracklets -> hypergraph ->
// dense-structure search -> disjoint stitched tracklets plus unclaimed
// singletons, sorted by (start frame, node id).
std::vector<Tracklet> window_tracklets(std::span<const Detection> detections,
                                       const MotionContext& ctx,
                                       const PipelineConfig& cfg,
                                       int window_start, RunStats* stats,
                                       const GraphHook& hook) {
  std::vector<Tracklet> units;
  units.reserve(detections.size());
  for (std::size_t i = 0; i < detections.size(); ++i) {
    if (i > 0 && detections[i].frame < detections[i - 1].frame)
      throw ValidationError("window detections must be sorted by frame");
    units.push_back(
        Tracklet::from_detection(static_cast<int>(i), detections[i]));
  }

  NonUniformHypergraph g = build_hypergraph(units, ctx, cfg.build);
  if (hook) hook(window_start, g);

  bool converged = true;
  std::vector<Structure> structures =
      search_all(g, cfg.weights, cfg.search, &converged);
  if (stats && !converged) stats->all_converged = false;
  structures = resolve_conflicts(std::move(structures), cfg.search.alpha_hat);

  std::vector<Tracklet> shorts;
  std::vector<char> claimed(units.size(), 0);
  for (const Structure& s : structures) {
    shorts.push_back(stitch(s.support, units));
    for (int v : s.support) claimed[static_cast<std::size_t>(v)] = 1;
  }
  for (std::size_t v = 0; v < units.size(); ++v)
    if (!claimed[v]) shorts.push_back(units[v]);

  std::stable_sort(shorts.begin(), shorts.end(),
                   [](const Tracklet& a, const Tracklet& b) {
                     if (a.start_frame() != b.start_frame())
                       return a.start_frame() < b.start_frame();
                     return a.node_id() < b.node_id();
                   });
  return shorts;
}

}  // namespace

void process_window(TrackState& state, std::span<const Detection> detections,
                    const MotionContext& ctx, const PipelineConfig& cfg,
                    RunStats* stats, const GraphHook& hook) {
  if (cfg.tau < 2) throw ValidationError("window length tau must be >= 2");
  const int ws = state.window_start;
  for (const Detection& d : detections)
    if (d.frame < ws || d.frame >= ws + cfg.tau)
      throw ValidationError("detection at frame " + std::to_string(d.frame) +
                            " lies outside window [" + std::to_string(ws) +
                            ", " + std::to_string(ws + cfg.tau) + ")");
  if (stats) stats->windows += 1;

  std::vector<Tracklet> shorts;
  if (!detections.empty())
    shorts = window_tracklets(detections, ctx, cfg, ws, stats, hook);

  const int targets = static_cast<int>(state.active.size());
  const int n_short = static_cast<int>(shorts.size());
  std::vector<char> target_matched(static_cast<std::size_t>(targets), 0);
  std::vector<char> short_used(static_cast<std::size_t>(n_short), 0);

  if (targets > 0 && n_short > 0) {
    // Bipartite association graph: targets first, then short tracklets;
    // degree-2 only, with the usual three-channel pair affinity.
    std::vector<Tracklet> nodes;
    nodes.reserve(static_cast<std::size_t>(targets + n_short));
    for (const TrackState::Target& t : state.active) nodes.push_back(t.track);
    for (const Tracklet& s : shorts) nodes.push_back(s);
    NonUniformHypergraph ag =
        NonUniformHypergraph::over(std::move(nodes), {1, 3});

    for (int v = 0; v < targets + n_short; ++v)
      ag.add_edge({v}, self_loop_affinity(ag.tracklet(v)));

    const std::vector<double>& w2 = cfg.weights.weights(2);
    std::map<std::pair<int, int>, double> link_score;  // (target, short)
    for (int i = 0; i < targets; ++i) {
      for (int j = 0; j < n_short; ++j) {
        if (!assoc_admissible(state.active[static_cast<std::size_t>(i)].track,
                              shorts[static_cast<std::size_t>(j)], cfg))
          continue;
        AffinityVector a =
            edge_affinity(ag.tracklet(i), ag.tracklet(targets + j), ctx);
        // Pair affinities carry no temporal term, so a target whose tail
        // went stale frames ago can tie with one adjacent to the tracklet.
        // Decay per frame of gap so contiguous extensions win such ties.
        const int gap = shorts[static_cast<std::size_t>(j)].start_frame() -
                        state.active[static_cast<std::size_t>(i)]
                            .track.end_frame();
        const double decay = std::pow(kAssocGapDecay, gap - 1);
        for (double& x : a) x *= decay;
        double score = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) score += w2[k] * a[k];
        link_score[{i, j}] = score;
        ag.add_edge({i, targets + j}, std::move(a));
      }
    }

    WeightVector assoc_weights;
    assoc_weights.per_degree = {cfg.weights.weights(1), cfg.weights.weights(2)};
    bool converged = true;
    std::vector<Structure> structures =
        search_all(ag, assoc_weights, cfg.search, &converged);
    if (stats && !converged) stats->all_converged = false;
    structures =
        resolve_conflicts(std::move(structures), cfg.search.alpha_hat);

    for (const Structure& s : structures) {
      std::vector<int> in_targets;
      std::vector<int> in_shorts;
      for (int v : s.support)
        (v < targets ? in_targets : in_shorts).push_back(v);
      if (in_targets.empty() || in_shorts.empty()) continue;

      // A structure holding several targets is split: the target with the
      // largest total link affinity keeps the tracklets (ties to the
      // longest-lived identity, i.e. the smaller node id).
      int winner = in_targets.front();
      if (in_targets.size() > 1) {
        double best = -std::numeric_limits<double>::infinity();
        for (int i : in_targets) {
          double sum = 0.0;
          for (int v : in_shorts) {
            auto it = link_score.find({i, v - targets});
            if (it != link_score.end()) sum += it->second;
          }
          if (sum > best) {
            best = sum;
            winner = i;
          }
        }
      }

      // Supports are node-id sorted and short node ids follow start-frame
      // order, so this extends the winner chronologically. Tracklets that
      // cannot follow the tail (only possible in split structures) stay
      // unmatched and spawn identities below.
      TrackState::Target& target =
          state.active[static_cast<std::size_t>(winner)];
      for (int v : in_shorts) {
        const Tracklet& st = shorts[static_cast<std::size_t>(v - targets)];
        if (st.start_frame() <= target.track.end_frame()) continue;
        target.track = concat_tracklets(target.track, st);
        short_used[static_cast<std::size_t>(v - targets)] = 1;
        target_matched[static_cast<std::size_t>(winner)] = 1;
      }
    }
  }

  // Age unmatched targets, retiring the ones past their patience.
  std::vector<TrackState::Target> still_active;
  still_active.reserve(state.active.size());
  for (int i = 0; i < targets; ++i) {
    TrackState::Target& t = state.active[static_cast<std::size_t>(i)];
    if (target_matched[static_cast<std::size_t>(i)]) {
      t.unmatched_windows = 0;
      still_active.push_back(std::move(t));
    } else {
      t.unmatched_windows += 1;
      if (t.unmatched_windows > cfg.patience())
        state.finished.push_back({t.identity, std::move(t.track)});
      else
        still_active.push_back(std::move(t));
    }
  }
  state.active = std::move(still_active);

  // A leftover short that begins on top of an already-tracked target (in
  // time and space) is a stripped fragment of that target, not a new
  // object. "On top" temporally includes one window past the target's tail:
  // crossing-window fragments often start just after the tail detection.
  auto duplicates_active = [&](const Tracklet& s) {
    const Detection& head = s.first();
    for (const TrackState::Target& t : state.active) {
      if (head.frame < t.track.start_frame() ||
          head.frame > t.track.end_frame() + cfg.tau)
        continue;
      double best_iou = 0.0;
      int best_gap = std::numeric_limits<int>::max();
      for (const Detection& d : t.track.detections()) {
        const int gap = std::abs(d.frame - head.frame);
        if (gap > best_gap) continue;
        const double overlap = metrics::iou(d, head);
        best_iou = gap < best_gap ? overlap : std::max(best_iou, overlap);
        best_gap = gap;
      }
      if (best_iou >= cfg.duplicate_iou) return true;
    }
    return false;
  };

  // Remaining leftovers start new identities, in order of appearance.
  for (int j = 0; j < n_short; ++j) {
    if (short_used[static_cast<std::size_t>(j)]) continue;
    const Tracklet& s = shorts[static_cast<std::size_t>(j)];
    if (duplicates_active(s)) continue;
    state.active.push_back({state.next_identity++, s, 0});
  }

  state.window_start += cfg.tau;
}

std::vector<Trajectory> run_sequence(std::span<const Detection> detections,
                                     const MotionContext& ctx,
                                     const PipelineConfig& cfg,
                                     RunStats* stats, const GraphHook& hook) {
  cfg.validate();
  PipelineConfig run_cfg = cfg;

  std::vector<Detection> sorted(detections.begin(), detections.end());
  std::stable_sort(
      sorted.begin(), sorted.end(),
      [](const Detection& a, const Detection& b) { return a.frame < b.frame; });
  run_cfg.build = resolve_max_velocity(run_cfg.build, sorted);

  TrackState state;
  if (!sorted.empty()) {
    state.window_start = sorted.front().frame;
    const int last_frame = sorted.back().frame;
    std::size_t pos = 0;
    while (state.window_start <= last_frame) {
      const int end = state.window_start + run_cfg.tau;
      const std::size_t lo = pos;
      while (pos < sorted.size() && sorted[pos].frame < end) ++pos;
      process_window(state,
                     std::span<const Detection>(sorted).subspan(lo, pos - lo),
                     ctx, run_cfg, stats, hook);
    }
  }

  for (TrackState::Target& t : state.active)
    state.finished.push_back({t.identity, std::move(t.track)});
  state.active.clear();

  for (Trajectory& tr : state.finished) tr.track = interpolate_gaps(tr.track);
  std::vector<Trajectory> kept = drop_duplicate_trajectories(state.finished);
  std::sort(kept.begin(), kept.end(),
            [](const Trajectory& a, const Trajectory& b) {
              return a.identity < b.identity;
            });
  return kept;
}

std::vector<Detection> trajectories_to_rows(
    std::span<const Trajectory> trajectories) {
  std::vector<Detection> rows;
  for (const Trajectory& tr : trajectories) {
    for (Detection d : tr.track.detections()) {
      d.id = tr.identity;
      rows.push_back(std::move(d));
    }
  }
  std::sort(rows.begin(), rows.end(),
            [](const Detection& a, const Detection& b) {
              return std::tie(a.frame, a.id) < std::tie(b.frame, b.id);
            });
  return rows;
}

}  // namespace ntrack

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ntrack/affinity.hpp"
#include "ntrack/dense_search.hpp"
#include "ntrack/graph_builder.hpp"
#include "ntrack/types.hpp"

namespace ntrack {

struct PipelineConfig {
  BuildConfig build;
  SearchOptions search;
  WeightVector weights = WeightVector::defaults();
  int tau = 7;                // window length in frames
  int target_patience = -1;   // windows a target may stay unmatched;
                              // -1 means build.max_frame_gap
  // A leftover short tracklet normally starts a new identity. When its frame
  // span lies inside an active target's span and its head box overlaps that
  // target with IoU >= duplicate_iou, it is a redundant fragment of an
  // already-tracked object (conflict resolution strips such fragments off
  // crossing-window structures) and is dropped instead.
  double duplicate_iou = 0.3;
  void validate() const;
  int patience() const {
    return target_patience >= 0 ? target_patience : build.max_frame_gap;
  }
};

/// A finished track: persistent identity plus its detections.
struct Trajectory {
  int identity = 0;
  Tracklet track;
};

/// Carry-over state between windows.
struct TrackState {
  struct Target {
    int identity = 0;
    Tracklet track;
    int unmatched_windows = 0;
  };
  std::vector<Target> active;
  std::vector<Trajectory> finished;
  int next_identity = 1;
  int window_start = 0;  // first frame of the next window
};

struct RunStats {
  int windows = 0;
  bool all_converged = true;
};

/// Hook receiving each window's hypergraph (for --dump-graphs).
using GraphHook =
    std::function<void(int window_start, const NonUniformHypergraph&)>;

/// One near-online step over the detections of [state.window_start,
/// state.window_start + tau): in-window dense-structure search produces
/// short tracklets, a bipartite degree<=2 graph associates them with the
/// active targets, unmatched tracklets spawn identities, stale targets are
/// terminated. cfg.build.max_velocity must be resolved.
void process_window(TrackState& state, std::span<const Detection> detections,
                    const MotionContext& ctx, const PipelineConfig& cfg,
                    RunStats* stats = nullptr,
                    const GraphHook& hook = nullptr);

/// Folds process_window over consecutive tau-frame windows, then finishes
/// every target and fills frame gaps by linear interpolation. Returns
/// trajectories sorted by identity.
std::vector<Trajectory> run_sequence(std::span<const Detection> detections,
                                     const MotionContext& ctx,
                                     const PipelineConfig& cfg,
                                     RunStats* stats = nullptr,
                                     const GraphHook& hook = nullptr);

/// Flattens trajectories into result rows (id = identity), sorted by
/// (frame, id). Interpolated boxes keep confidence 0.
std::vector<Detection> trajectories_to_rows(
    std::span<const Trajectory> trajectories);

}  // namespace ntrack

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ntrack/dense_search.hpp"
#include "ntrack/graph_builder.hpp"
#include "ntrack/hypergraph.hpp"
#include "ntrack/metrics.hpp"
#include "ntrack/pipeline.hpp"
#include "ntrack/types.hpp"

namespace ntrack {
namespace io {

/// File/format failure; messages carry path and line number where known.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Provenance stamped into every text output's header comment (binary
/// feature files carry only their magic and shape).
struct FileMeta {
  std::string tool_version;
  std::string config_hash;
};
std::string header_line(const FileMeta& meta);

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double x);

/// FNV-1a 64-bit hash of a byte string, rendered as 16 lowercase hex chars.
/// Used for config hashes and other provenance stamps.
std::string hash_hex(std::string_view data);

// ---- MOTChallenge detections / results ------------------------------------
// CSV lines `frame,id,left,top,width,height,conf,x,y,z`; frames are 1-based
// on disk and 0-based in memory; left/top convert to centers internally.
// '#' comment lines are skipped; data frames must be non-decreasing.
std::vector<Detection> read_motchallenge(const std::string& path);
void write_motchallenge(const std::string& path,
                        std::span<const Detection> rows, const FileMeta& meta);

// ---- Binary per-detection features (NTEMB1 embeddings, NTHIS1 histograms) -
// Header: 6-byte magic, u32 count, u32 dim (little endian), then count rows
// of dim float32 values; row i belongs to the i-th detection row.
std::vector<std::vector<float>> read_embeddings(const std::string& path);
void write_embeddings(const std::string& path,
                      const std::vector<std::vector<float>>& rows);
std::vector<std::vector<float>> read_histograms(const std::string& path);
void write_histograms(const std::string& path,
                      const std::vector<std::vector<float>>& rows);
void attach_embeddings(std::vector<Detection>& detections,
                       const std::vector<std::vector<float>>& rows);
void attach_histograms(std::vector<Detection>& detections,
                       const std::vector<std::vector<float>>& rows);

// ---- Point trajectories ----------------------------------------------------
// CSV `trajectory_id,frame,x,y` sorted by (trajectory_id, frame); frames
// 1-based on disk.
std::vector<PointTrajectory> read_trajectories(const std::string& path);
void write_trajectories(const std::string& path,
                        std::span<const PointTrajectory> trajectories,
                        const FileMeta& meta);

// ---- Hypergraph dump -------------------------------------------------------
// Text: "NTGRAPH1", then `n D`, then the D arities, then one line per edge
// `d node_ids... affinity...`. Doubles use format_double, so a dump
// round-trips bit-exactly.
NonUniformHypergraph read_hypergraph(const std::string& path);
void write_hypergraph(const std::string& path, const NonUniformHypergraph& g,
                      const FileMeta& meta);

// ---- Weights ----------------------------------------------------------------
// One line per degree `d: v1 v2 ... vk`, preceded by a header comment with
// version and config hash.
struct WeightsFile {
  WeightVector weights;
  FileMeta meta;
};
WeightsFile read_weights(const std::string& path);
void write_weights(const std::string& path, const WeightVector& weights,
                   const FileMeta& meta);

// ---- Searched structures ----------------------------------------------------
// One line per structure: `k node_1 ... node_k theta`.
void write_structures(const std::string& path,
                      std::span<const Structure> structures,
                      const FileMeta& meta);

// ---- Config -----------------------------------------------------------------
/// Declarative configuration covering every tunable. JSON on disk; unknown
/// keys are rejected, missing keys keep their defaults.
struct Config {
  BuildConfig build;      // build.max_velocity <= 0 means estimate per run
  SearchOptions search;   // alpha_hat, tolerances
  int tau = 7;
  int target_patience = -1;  // windows; -1 means build.max_frame_gap
  double duplicate_iou = 0.3;  // leftover-fragment suppression threshold
  WeightVector weights = WeightVector::defaults();
  // learning
  double svm_c = 1.0;
  double eps_stop = 1e-3;
  int max_rounds = 200;
  double qp_gap = 1e-8;
  int clip_length = 14;
  double gt_min_overlap = 0.5;
  // metrics
  double iou_threshold = 0.5;
  int threads = 1;

  PipelineConfig pipeline() const;
  void validate() const;
};

Config read_config(const std::string& path);
void write_config(const std::string& path, const Config& cfg);
std::string config_json(const Config& cfg);  // canonical (sorted keys)
std::string config_hash(const Config& cfg);  // 16 hex chars (FNV-1a 64)

// ---- Evaluation report -------------------------------------------------------
void write_report(const std::string& path, const metrics::MotReport& mot,
                  const metrics::Idf1Report& idf1, const FileMeta& meta);
std::string report_table(const metrics::MotReport& mot,
                         const metrics::Idf1Report& idf1);

}  // namespace io
}  // namespace ntrack

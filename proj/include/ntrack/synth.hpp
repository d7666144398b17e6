#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ntrack/types.hpp"

namespace ntrack {
namespace synth {

/// One generated scenario: noisy detections (with embeddings attached and
/// kept row-aligned in `embeddings`), clean ground truth with identities,
/// and simulated feature-point trajectories riding on the targets.
struct Scenario {
  std::vector<Detection> detections;    // id = -1, jittered, dropout applied
  std::vector<Detection> ground_truth;  // id = 1..K, every lifetime frame
  std::vector<std::vector<float>> embeddings;  // row i <-> detections[i]
  std::vector<PointTrajectory> trajectories;
};

/// Available scenario names:
///   cross2      two crossing constant-velocity targets, 100 frames,
///               5% detection dropout;
///   cross4-occl four targets, one fully occluded for 10 frames
///               (ground truth keeps the occluded boxes);
///   parallel2   two well-separated parallel targets, 21 frames, no dropout;
///   vanish1     one target ends mid-sequence while another persists.
std::vector<std::string> scenario_names();

/// Deterministic generation: the same (name, seed) always produces the same
/// scenario. Throws ValidationError for unknown names.
Scenario generate_scenario(const std::string& name, std::uint64_t seed);

/// Provenance hash for generated files (scenario name + seed).
std::string scenario_hash(const std::string& name, std::uint64_t seed);

}  // namespace synth
}  // namespace ntrack

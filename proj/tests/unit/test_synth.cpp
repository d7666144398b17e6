#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "doctest.h"
#include "ntrack/synth.hpp"

using namespace ntrack;

TEST_SUITE("synth") {

TEST_CASE("scenario catalogue") {
  std::vector<std::string> names = synth::scenario_names();
  CHECK(std::count(names.begin(), names.end(), "cross2") == 1);
  CHECK(std::count(names.begin(), names.end(), "cross4-occl") == 1);
  CHECK(std::count(names.begin(), names.end(), "parallel2") == 1);
  CHECK(std::count(names.begin(), names.end(), "vanish1") == 1);
  CHECK_THROWS_AS(synth::generate_scenario("nope", 1), ValidationError);
}

TEST_CASE("generation is deterministic in (name, seed)") {
  for (const std::string& name : synth::scenario_names()) {
    synth::Scenario a = synth::generate_scenario(name, 42);
    synth::Scenario b = synth::generate_scenario(name, 42);
    REQUIRE(a.detections.size() == b.detections.size());
    for (std::size_t i = 0; i < a.detections.size(); ++i) {
      CHECK(a.detections[i].frame == b.detections[i].frame);
      CHECK(a.detections[i].cx == b.detections[i].cx);
      CHECK(a.detections[i].cy == b.detections[i].cy);
      CHECK(a.detections[i].confidence == b.detections[i].confidence);
    }
    CHECK(a.embeddings == b.embeddings);
    REQUIRE(a.ground_truth.size() == b.ground_truth.size());

    synth::Scenario c = synth::generate_scenario(name, 43);
    bool differs = a.detections.size() != c.detections.size();
    for (std::size_t i = 0; !differs && i < a.detections.size(); ++i)
      differs = a.detections[i].cx != c.detections[i].cx;
    CHECK(differs);

    CHECK(synth::scenario_hash(name, 42) == synth::scenario_hash(name, 42));
    CHECK(synth::scenario_hash(name, 42) != synth::scenario_hash(name, 43));
  }
}

TEST_CASE("ground truth covers every lifetime frame contiguously") {
  for (const std::string& name : synth::scenario_names()) {
    synth::Scenario sc = synth::generate_scenario(name, 7);
    std::map<std::int64_t, std::vector<int>> frames;
    for (const Detection& d : sc.ground_truth) {
      CHECK(d.id >= 1);
      CHECK(d.width > 0);
      CHECK(d.height > 0);
      frames[d.id].push_back(d.frame);
    }
    CHECK(frames.size() >= 1);
    for (auto& [id, fs] : frames) {
      std::sort(fs.begin(), fs.end());
      for (std::size_t i = 1; i < fs.size(); ++i)
        CHECK(fs[i] == fs[i - 1] + 1);  // no holes, no duplicates
    }
  }
}

TEST_CASE("detections stay row-aligned with embeddings") {
  for (const std::string& name : synth::scenario_names()) {
    synth::Scenario sc = synth::generate_scenario(name, 11);
    CHECK(sc.embeddings.size() == sc.detections.size());
    std::size_t dim = sc.embeddings.empty() ? 0 : sc.embeddings[0].size();
    for (const auto& row : sc.embeddings) CHECK(row.size() == dim);
    for (const Detection& d : sc.detections) {
      CHECK(d.id == -1);
      CHECK(d.frame >= 0);
      CHECK_NOTHROW(d.validate());
    }
    // Detections are a (jittered, possibly subsampled) view of the truth.
    CHECK(sc.detections.size() <= sc.ground_truth.size());
    CHECK(!sc.trajectories.empty());
    for (const PointTrajectory& t : sc.trajectories)
      CHECK_NOTHROW(t.validate());
  }
}

TEST_CASE("cross2 crosses and cross4-occl has a full occlusion hole") {
  synth::Scenario cross = synth::generate_scenario("cross2", 1);
  // Two identities whose x-order flips between the first and last frame.
  std::map<int, std::map<std::int64_t, double>> by_frame;
  for (const Detection& d : cross.ground_truth)
    by_frame[d.frame][d.id] = d.cx;
  const auto& first = by_frame.begin()->second;
  const auto& last = by_frame.rbegin()->second;
  REQUIRE(first.size() == 2);
  const bool before = first.at(1) < first.at(2);
  const bool after = last.at(1) < last.at(2);
  CHECK(before != after);

  synth::Scenario occl = synth::generate_scenario("cross4-occl", 1);
  std::map<std::int64_t, std::set<int>> gt_frames, det_frames;
  for (const Detection& d : occl.ground_truth) gt_frames[d.id].insert(d.frame);
  // Count detection frames per GT identity by nearest ground-truth box.
  for (const Detection& d : occl.detections) {
    double best = 1e18;
    std::int64_t best_id = -1;
    for (const Detection& g : occl.ground_truth) {
      if (g.frame != d.frame) continue;
      const double dx = g.cx - d.cx, dy = g.cy - d.cy;
      if (dx * dx + dy * dy < best) {
        best = dx * dx + dy * dy;
        best_id = g.id;
      }
    }
    det_frames[best_id].insert(d.frame);
  }
  // Some identity misses >= 10 consecutive frames that ground truth keeps.
  bool found_hole = false;
  for (const auto& [id, gf] : gt_frames) {
    const std::set<int>& df = det_frames[id];
    int run = 0, longest = 0;
    for (int f : gf) {
      run = df.count(f) ? 0 : run + 1;
      longest = std::max(longest, run);
    }
    if (longest >= 10) found_hole = true;
  }
  CHECK(found_hole);
}

}  // TEST_SUITE

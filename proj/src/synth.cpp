#include "ntrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "ntrack/io.hpp"

namespace ntrack {
namespace synth {

namespace {

struct TargetSpec {
  double x0, y0, vx, vy, w, h;
  int start, end;                     // inclusive lifetime
  int occl_start = 1, occl_end = 0;   // inclusive occlusion (empty default)

  bool alive(int f) const { return f >= start && f <= end; }
  bool occluded(int f) const { return f >= occl_start && f <= occl_end; }
  double cx(int f) const { return x0 + vx * (f - start); }
  double cy(int f) const { return y0 + vy * (f - start); }
};

struct ScenarioSpec {
  std::vector<TargetSpec> targets;
  double jitter = 1.0;
  double dropout = 0.0;
  int points_per_target = 12;
  int emb_dim = 16;
  double emb_noise = 0.1;
};

ScenarioSpec spec_for(const std::string& name) {
  ScenarioSpec s;
  if (name == "cross2") {
    // Two targets meeting near frame 50 with a small vertical offset, so
    // the boxes overlap heavily but never coincide.
    s.targets = {{100.0, 200.0, 4.0, 2.0, 30.0, 60.0, 0, 99},
                 {496.0, 404.0, -4.0, -2.0, 30.0, 60.0, 0, 99}};
    s.dropout = 0.05;
  } else if (name == "cross4-occl") {
    s.targets = {{100.0, 150.0, 4.0, 0.0, 30.0, 60.0, 0, 99},
                 {500.0, 250.0, -4.0, 0.0, 30.0, 60.0, 0, 99, 45, 54},
                 {100.0, 350.0, 3.5, 0.5, 30.0, 60.0, 0, 99},
                 {500.0, 450.0, -3.5, -0.5, 30.0, 60.0, 0, 99}};
    s.dropout = 0.05;
  } else if (name == "parallel2") {
    s.targets = {{100.0, 100.0, 3.0, 0.0, 30.0, 60.0, 0, 20},
                 {100.0, 400.0, 3.0, 0.0, 30.0, 60.0, 0, 20}};
    s.jitter = 0.5;
    s.points_per_target = 8;
  } else if (name == "vanish1") {
    s.targets = {{100.0, 100.0, 2.0, 1.0, 30.0, 60.0, 0, 20},
                 {400.0, 300.0, -2.0, 0.0, 30.0, 60.0, 0, 48}};
    s.jitter = 0.5;
    s.points_per_target = 8;
  } else {
    throw ValidationError("unknown scenario '" + name + "'");
  }
  return s;
}

std::vector<float> make_embedding(int target, const ScenarioSpec& s,
                                  std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(s.emb_dim), 0.0);
  v[static_cast<std::size_t>(target % s.emb_dim)] = 1.0;
  double norm2 = 0.0;
  for (double& x : v) {
    x += s.emb_noise * noise(rng);
    norm2 += x * x;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = static_cast<float>(v[i] * inv);
  return out;
}

}  // namespace

std::vector<std::string> scenario_names() {
  return {"cross2", "cross4-occl", "parallel2", "vanish1"};
}

Scenario generate_scenario(const std::string& name, std::uint64_t seed) {
  const ScenarioSpec spec = spec_for(name);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Scenario out;
  const int n_targets = static_cast<int>(spec.targets.size());

  // Per-point box-relative offsets, fixed over each point's lifetime.
  std::vector<std::vector<std::pair<double, double>>> offsets(
      static_cast<std::size_t>(n_targets));
  for (int t = 0; t < n_targets; ++t) {
    const TargetSpec& tg = spec.targets[static_cast<std::size_t>(t)];
    for (int k = 0; k < spec.points_per_target; ++k) {
      const double ox = (uni(rng) - 0.5) * tg.w / 2.0;
      const double oy = (uni(rng) - 0.5) * tg.h / 2.0;
      offsets[static_cast<std::size_t>(t)].emplace_back(ox, oy);
    }
  }

  int last_frame = 0;
  for (const TargetSpec& tg : spec.targets)
    last_frame = std::max(last_frame, tg.end);

  for (int f = 0; f <= last_frame; ++f) {
    for (int t = 0; t < n_targets; ++t) {
      const TargetSpec& tg = spec.targets[static_cast<std::size_t>(t)];
      if (!tg.alive(f)) continue;
      out.ground_truth.emplace_back(f, tg.cx(f), tg.cy(f), tg.w, tg.h, 1.0,
                                    t + 1);
      if (tg.occluded(f)) continue;
      if (uni(rng) < spec.dropout) continue;
      const double dx = gauss(rng) * spec.jitter;
      const double dy = gauss(rng) * spec.jitter;
      const double conf = 0.7 + 0.3 * uni(rng);
      Detection d(f, tg.cx(f) + dx, tg.cy(f) + dy, tg.w, tg.h, conf, -1);
      std::vector<float> emb = make_embedding(t, spec, rng);
      d.embedding = emb;
      out.detections.push_back(std::move(d));
      out.embeddings.push_back(std::move(emb));
    }
  }

  // Feature points ride the true centers; occlusions break their tracks
  // exactly as a point tracker would lose and re-seed them.
  std::int64_t next_id = 1;
  for (int t = 0; t < n_targets; ++t) {
    const TargetSpec& tg = spec.targets[static_cast<std::size_t>(t)];
    std::vector<std::pair<int, int>> segments;
    if (tg.occl_start <= tg.occl_end) {
      segments.emplace_back(tg.start, tg.occl_start - 1);
      segments.emplace_back(tg.occl_end + 1, tg.end);
    } else {
      segments.emplace_back(tg.start, tg.end);
    }
    for (int k = 0; k < spec.points_per_target; ++k) {
      const auto [ox, oy] =
          offsets[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
      for (const auto& [seg_start, seg_end] : segments) {
        if (seg_end - seg_start < 1) continue;  // a track needs >= 2 samples
        PointTrajectory traj;
        traj.id = next_id++;
        for (int f = seg_start; f <= seg_end; ++f)
          traj.samples.push_back({f, tg.cx(f) + ox, tg.cy(f) + oy});
        out.trajectories.push_back(std::move(traj));
      }
    }
  }
  return out;
}

std::string scenario_hash(const std::string& name, std::uint64_t seed) {
  return io::hash_hex("synth " + name + " seed " + std::to_string(seed));
}

}  // namespace synth
}  // namespace ntrack

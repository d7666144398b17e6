#include "ntrack/graph_builder.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <thread>
#include <tuple>

namespace ntrack {

namespace {

double center_distance(const Detection& a, const Detection& b) {
  const double dx = a.cx - b.cx;
  const double dy = a.cy - b.cy;
  return std::sqrt(dx * dx + dy * dy);
}

struct Successor {
  int node = -1;
  int start_frame = 0;
  double distance = 0.0;
};

// Candidate edge produced by one anchor's enumeration pass.
struct PendingEdge {
  std::vector<int> nodes;
  AffinityVector affinity;
};

bool all_below(const AffinityVector& a, double eps) {
  return std::all_of(a.begin(), a.end(), [&](double x) { return x <= eps; });
}

}  // namespace

void BuildConfig::validate() const {
  if (max_degree < 2) throw ValidationError("max_degree must be >= 2");
  if (max_velocity <= 0.0)
    throw ValidationError("max_velocity must be > 0 (resolve it first)");
  if (max_frame_gap < 1) throw ValidationError("max_frame_gap must be >= 1");
  if (knn_k < 1) throw ValidationError("knn_k must be >= 1");
  if (max_hyperedges_per_node < 1)
    throw ValidationError("max_hyperedges_per_node must be >= 1");
  if (zero_affinity_eps < 0.0)
    throw ValidationError("zero_affinity_eps must be >= 0");
  if (threads < 1) throw ValidationError("threads must be >= 1");
  histogram.validate();
}

bool admissible_pair(const Tracklet& a, const Tracklet& b,
                     const BuildConfig& cfg) {
  if (!temporally_disjoint(a, b)) return false;
  const Tracklet& first = a.end_frame() < b.start_frame() ? a : b;
  const Tracklet& second = a.end_frame() < b.start_frame() ? b : a;
  const int gap = second.start_frame() - first.end_frame();
  if (gap > cfg.max_frame_gap) return false;
  const double dist = center_distance(first.last(), second.first());
  return dist <= cfg.max_velocity * static_cast<double>(gap);
}

double estimate_max_velocity(std::span<const Detection> detections) {
  std::map<int, std::vector<const Detection*>> by_frame;
  for (const Detection& d : detections) by_frame[d.frame].push_back(&d);

  std::vector<double> displacements;
  for (auto it = by_frame.begin(); it != by_frame.end(); ++it) {
    auto next = by_frame.find(it->first + 1);
    if (next == by_frame.end()) continue;
    for (const Detection* d : it->second) {
      double best = std::numeric_limits<double>::infinity();
      for (const Detection* e : next->second)
        best = std::min(best, center_distance(*d, *e));
      displacements.push_back(best);
    }
  }
  if (displacements.empty()) return 1e9;
  std::sort(displacements.begin(), displacements.end());
  // Nearest-rank 95th percentile.
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(0.95 * static_cast<double>(displacements.size())));
  const double p95 = displacements[std::min(rank, displacements.size()) - 1];
  return std::max(2.0 * p95, 1.0);
}

BuildConfig resolve_max_velocity(BuildConfig cfg,
                                 std::span<const Detection> detections) {
  if (cfg.max_velocity <= 0.0)
    cfg.max_velocity = estimate_max_velocity(detections);
  return cfg;
}

NonUniformHypergraph build_hypergraph(std::vector<Tracklet> tracklets,
                                      const MotionContext& ctx,
                                      const BuildConfig& cfg) {
  cfg.validate();
  std::vector<int> arity(static_cast<std::size_t>(cfg.max_degree), 1);
  if (cfg.max_degree >= 2) arity[1] = 3;
  NonUniformHypergraph g =
      NonUniformHypergraph::over(std::move(tracklets), arity);
  const int n = g.node_count();
  if (n == 0) return g;

  // knn_k admissible successors per node: selected by center distance,
  // traversed by (start frame, distance, id).
  std::vector<std::vector<Successor>> successors(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    std::vector<Successor> cand;
    const Tracklet& tv = g.tracklet(v);
    for (int u = 0; u < n; ++u) {
      if (u == v) continue;
      const Tracklet& tu = g.tracklet(u);
      if (tu.start_frame() <= tv.end_frame()) continue;  // not a successor
      if (!admissible_pair(tv, tu, cfg)) continue;
      cand.push_back(
          {u, tu.start_frame(), center_distance(tv.last(), tu.first())});
    }
    std::sort(cand.begin(), cand.end(), [](const Successor& a, const Successor& b) {
      return std::tie(a.distance, a.start_frame, a.node) <
             std::tie(b.distance, b.start_frame, b.node);
    });
    if (static_cast<int>(cand.size()) > cfg.knn_k)
      cand.resize(static_cast<std::size_t>(cfg.knn_k));
    std::sort(cand.begin(), cand.end(), [](const Successor& a, const Successor& b) {
      return std::tie(a.start_frame, a.distance, a.node) <
             std::tie(b.start_frame, b.distance, b.node);
    });
    successors[static_cast<std::size_t>(v)] = std::move(cand);
  }

  // Per-anchor enumeration; anchors are independent, results are merged in
  // anchor order so the build is deterministic regardless of thread count.
  std::vector<std::vector<PendingEdge>> pending(static_cast<std::size_t>(n));
  auto enumerate_anchor = [&](int v) {
    auto& out = pending[static_cast<std::size_t>(v)];
    const Tracklet& tv = g.tracklet(v);

    for (const Successor& s : successors[static_cast<std::size_t>(v)]) {
      AffinityVector a = edge_affinity(tv, g.tracklet(s.node), ctx);
      if (cfg.prune_zero_affinity && all_below(a, cfg.zero_affinity_eps))
        continue;
      out.push_back({{v, s.node}, std::move(a)});
    }

    if (cfg.max_degree < 3) return;
    std::vector<int> budget(static_cast<std::size_t>(cfg.max_degree) + 1,
                            cfg.max_hyperedges_per_node);
    std::vector<int> chain{v};
    std::vector<const Tracklet*> chain_tracklets{&tv};

    auto budget_left_beyond = [&](int len) {
      for (int d = std::max(3, len + 1); d <= cfg.max_degree; ++d)
        if (budget[static_cast<std::size_t>(d)] > 0) return true;
      return false;
    };

    auto dfs = [&](auto&& self, int tail) -> void {
      const int len = static_cast<int>(chain.size());
      if (len == cfg.max_degree) return;
      if (!budget_left_beyond(len) &&
          (len < 3 || budget[static_cast<std::size_t>(len)] <= 0))
        return;
      for (const Successor& s : successors[static_cast<std::size_t>(tail)]) {
        const Tracklet& tu = g.tracklet(s.node);
        bool ok = true;
        for (const Tracklet* tc : chain_tracklets)
          if (!admissible_pair(*tc, tu, cfg)) {
            ok = false;
            break;
          }
        if (!ok) continue;
        chain.push_back(s.node);
        chain_tracklets.push_back(&tu);
        const int new_len = len + 1;
        if (new_len >= 3 && budget[static_cast<std::size_t>(new_len)] > 0) {
          std::vector<Tracklet> members;
          members.reserve(chain.size());
          for (const Tracklet* tc : chain_tracklets) members.push_back(*tc);
          AffinityVector a = hyperedge_affinity(members, ctx);
          if (!(cfg.prune_zero_affinity && all_below(a, cfg.zero_affinity_eps)))
            out.push_back({chain, std::move(a)});
          --budget[static_cast<std::size_t>(new_len)];
        }
        self(self, s.node);
        chain.pop_back();
        chain_tracklets.pop_back();
      }
    };
    dfs(dfs, v);
  };

  const int threads = std::min(cfg.threads, n);
  if (threads <= 1) {
    for (int v = 0; v < n; ++v) enumerate_anchor(v);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int v = next.fetch_add(1); v < n; v = next.fetch_add(1))
          enumerate_anchor(v);
      });
    for (auto& th : pool) th.join();
  }

  for (int v = 0; v < n; ++v)
    g.add_edge({v}, self_loop_affinity(g.tracklet(v)));
  for (int v = 0; v < n; ++v)
    for (PendingEdge& e : pending[static_cast<std::size_t>(v)])
      g.add_edge(std::move(e.nodes), std::move(e.affinity));
  return g;
}

}  // namespace ntrack

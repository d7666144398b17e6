#include "ntrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <tuple>

namespace ntrack {
namespace metrics {

namespace {

struct TrackStats {
  long present = 0;
  long matched = 0;
  bool ever_matched = false;
  bool in_gap = false;  // was matched, currently interrupted
  long fragments = 0;
};

void check_ids(std::span<const Detection> boxes, const char* what) {
  for (const Detection& d : boxes)
    if (d.id < 0)
      throw ValidationError(std::string(what) +
                            " boxes need nonnegative identities");
}

std::map<int, std::vector<const Detection*>> by_frame(
    std::span<const Detection> boxes) {
  std::map<int, std::vector<const Detection*>> out;
  for (const Detection& d : boxes) out[d.frame].push_back(&d);
  for (auto& [f, v] : out)
    std::sort(v.begin(), v.end(), [](const Detection* a, const Detection* b) {
      return a->id < b->id;
    });
  return out;
}

}  // namespace

double iou(const Detection& a, const Detection& b) {
  const double ax0 = a.cx - a.width / 2.0, ax1 = a.cx + a.width / 2.0;
  const double ay0 = a.cy - a.height / 2.0, ay1 = a.cy + a.height / 2.0;
  const double bx0 = b.cx - b.width / 2.0, bx1 = b.cx + b.width / 2.0;
  const double by0 = b.cy - b.height / 2.0, by1 = b.cy + b.height / 2.0;
  const double iw = std::min(ax1, bx1) - std::max(ax0, bx0);
  const double ih = std::min(ay1, by1) - std::max(ay0, by0);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

MotReport clear_mot(std::span<const Detection> results,
                    std::span<const Detection> ground_truth,
                    double iou_threshold) {
  check_ids(results, "result");
  check_ids(ground_truth, "ground truth");

  MotReport rep;
  rep.gt_total = static_cast<long>(ground_truth.size());
  if (ground_truth.empty()) {
    rep.mota_defined = false;
    rep.fp = static_cast<long>(results.size());
    return rep;
  }

  const auto gt_frames = by_frame(ground_truth);
  const auto res_frames = by_frame(results);

  std::map<std::int64_t, std::int64_t> last_match;  // gt id -> result id
  std::map<std::int64_t, TrackStats> stats;
  double iou_sum = 0.0;
  double norm_sum = 0.0;

  std::set<int> frames;
  for (const auto& [f, v] : gt_frames) frames.insert(f);
  for (const auto& [f, v] : res_frames) frames.insert(f);

  for (int frame : frames) {
    auto git = gt_frames.find(frame);
    auto rit = res_frames.find(frame);
    const auto empty = std::vector<const Detection*>{};
    const auto& gts = git == gt_frames.end() ? empty : git->second;
    const auto& ress = rit == res_frames.end() ? empty : rit->second;

    std::vector<char> gt_used(gts.size(), 0), res_used(ress.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;

    // Persistence pass: keep last frame's pairings while still valid.
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      auto lm = last_match.find(gts[gi]->id);
      if (lm == last_match.end()) continue;
      for (std::size_t ri = 0; ri < ress.size(); ++ri) {
        if (res_used[ri] || ress[ri]->id != lm->second) continue;
        if (iou(*gts[gi], *ress[ri]) >= iou_threshold) {
          pairs.push_back({gi, ri});
          gt_used[gi] = 1;
          res_used[ri] = 1;
        }
        break;
      }
    }

    // Greedy pass over the remainder, by descending IoU.
    struct Cand {
      double overlap;
      std::size_t gi, ri;
    };
    std::vector<Cand> cands;
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (gt_used[gi]) continue;
      for (std::size_t ri = 0; ri < ress.size(); ++ri) {
        if (res_used[ri]) continue;
        const double o = iou(*gts[gi], *ress[ri]);
        if (o >= iou_threshold) cands.push_back({o, gi, ri});
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      if (a.overlap != b.overlap) return a.overlap > b.overlap;
      return std::tie(a.gi, a.ri) < std::tie(b.gi, b.ri);
    });
    for (const Cand& c : cands) {
      if (gt_used[c.gi] || res_used[c.ri]) continue;
      gt_used[c.gi] = 1;
      res_used[c.ri] = 1;
      pairs.push_back({c.gi, c.ri});
    }

    for (const auto& [gi, ri] : pairs) {
      const Detection& g = *gts[gi];
      const Detection& r = *ress[ri];
      auto lm = last_match.find(g.id);
      if (lm != last_match.end() && lm->second != r.id) ++rep.ids;
      last_match[g.id] = r.id;
      const double o = iou(g, r);
      iou_sum += o;
      norm_sum += std::min(1.0, std::max(0.0, (1.0 - o) / (1.0 - iou_threshold)));
      ++rep.matches;
    }

    // Per-track bookkeeping for coverage and fragmentation.
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      TrackStats& ts = stats[gts[gi]->id];
      ++ts.present;
      if (gt_used[gi]) {
        ++ts.matched;
        if (ts.in_gap) {
          ++ts.fragments;
          ts.in_gap = false;
        }
        ts.ever_matched = true;
      } else {
        if (ts.ever_matched) ts.in_gap = true;
        ++rep.fn;
      }
    }
    for (std::size_t ri = 0; ri < ress.size(); ++ri)
      if (!res_used[ri]) ++rep.fp;
  }

  rep.mota_defined = true;
  rep.mota = 1.0 - static_cast<double>(rep.fn + rep.fp + rep.ids) /
                       static_cast<double>(rep.gt_total);
  rep.motp_iou = rep.matches > 0 ? iou_sum / static_cast<double>(rep.matches) : 0.0;
  rep.motp_norm =
      rep.matches > 0 ? norm_sum / static_cast<double>(rep.matches) : 0.0;

  rep.gt_trajectories = static_cast<int>(stats.size());
  int mt = 0, ml = 0;
  for (const auto& [id, ts] : stats) {
    const double cover =
        static_cast<double>(ts.matched) / static_cast<double>(ts.present);
    if (cover >= 0.8) ++mt;
    if (cover <= 0.2) ++ml;
    rep.fm += ts.fragments;
  }
  rep.mt = static_cast<double>(mt) / static_cast<double>(stats.size());
  rep.ml = static_cast<double>(ml) / static_cast<double>(stats.size());
  return rep;
}

std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  for (const auto& row : cost)
    if (static_cast<int>(row.size()) != n)
      throw ValidationError("hungarian needs a square matrix");
  if (n == 0) return {};

  // Shortest augmenting path assignment with potentials (1-indexed).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost[static_cast<std::size_t>(i0 - 1)]
                               [static_cast<std::size_t>(j - 1)] -
                           u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (p[static_cast<std::size_t>(j)] > 0)
      row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] =
          j - 1;
  return row_to_col;
}

Idf1Report idf1(std::span<const Detection> results,
                std::span<const Detection> ground_truth,
                double iou_threshold) {
  check_ids(results, "result");
  check_ids(ground_truth, "ground truth");

  Idf1Report rep;
  const long total = static_cast<long>(results.size() + ground_truth.size());
  if (total == 0) return rep;

  // Trajectories keyed by identity; per-frame boxes.
  auto group = [](std::span<const Detection> boxes) {
    std::map<std::int64_t, std::map<int, const Detection*>> out;
    for (const Detection& d : boxes) {
      auto [it, fresh] = out[d.id].try_emplace(d.frame, &d);
      if (!fresh)
        throw ValidationError("identity " + std::to_string(d.id) +
                              " has two boxes on frame " +
                              std::to_string(d.frame));
    }
    return out;
  };
  const auto gt = group(ground_truth);
  const auto res = group(results);
  const int ng = static_cast<int>(gt.size());
  const int nr = static_cast<int>(res.size());

  std::vector<const std::map<int, const Detection*>*> gts, ress;
  std::vector<long> glen, rlen;
  for (const auto& [id, traj] : gt) {
    gts.push_back(&traj);
    glen.push_back(static_cast<long>(traj.size()));
  }
  for (const auto& [id, traj] : res) {
    ress.push_back(&traj);
    rlen.push_back(static_cast<long>(traj.size()));
  }

  const int n = ng + nr;
  std::vector<std::vector<double>> cost(
      static_cast<std::size_t>(n),
      std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int i = 0; i < ng; ++i) {
    for (int j = 0; j < nr; ++j) {
      long overlap = 0;
      for (const auto& [frame, gbox] : *gts[static_cast<std::size_t>(i)]) {
        auto it = ress[static_cast<std::size_t>(j)]->find(frame);
        if (it == ress[static_cast<std::size_t>(j)]->end()) continue;
        if (iou(*gbox, *it->second) >= iou_threshold) ++overlap;
      }
      cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          static_cast<double>(glen[static_cast<std::size_t>(i)] - overlap) +
          static_cast<double>(rlen[static_cast<std::size_t>(j)] - overlap);
    }
    for (int j = nr; j < n; ++j)
      cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          static_cast<double>(glen[static_cast<std::size_t>(i)]);
  }
  for (int i = ng; i < n; ++i)
    for (int j = 0; j < nr; ++j)
      cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          static_cast<double>(rlen[static_cast<std::size_t>(j)]);

  const std::vector<int> assign = hungarian(cost);
  double total_cost = 0.0;
  for (int i = 0; i < n; ++i)
    total_cost +=
        cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];

  const long sum_len = static_cast<long>(ground_truth.size() + results.size());
  rep.idtp = (sum_len - static_cast<long>(std::llround(total_cost))) / 2;
  rep.idfn = static_cast<long>(ground_truth.size()) - rep.idtp;
  rep.idfp = static_cast<long>(results.size()) - rep.idtp;
  rep.value = 2.0 * static_cast<double>(rep.idtp) /
              static_cast<double>(2 * rep.idtp + rep.idfp + rep.idfn);
  return rep;
}

}  // namespace metrics
}  // namespace ntrack

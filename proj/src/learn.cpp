#include "ntrack/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "ntrack/metrics.hpp"
#include "ntrack/postprocess.hpp"

namespace ntrack {

namespace {

std::vector<int> node_labels(const Labeling& y, int n) {
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < n; ++v) labels[static_cast<std::size_t>(v)] = y.label_of(v);
  return labels;
}

std::span<const double> unit_weights(std::span<const double> weights, int n,
                                     std::vector<double>& storage) {
  if (!weights.empty()) {
    if (static_cast<int>(weights.size()) != n)
      throw ValidationError("loss weights must have one entry per node");
    return weights;
  }
  storage.assign(static_cast<std::size_t>(n), 1.0);
  return storage;
}

Labeling labeling_from_structures(const std::vector<Structure>& structures) {
  std::vector<std::pair<std::int64_t, int>> raw;
  int label = 0;
  for (const Structure& s : structures) {
    ++label;
    for (int v : s.support) raw.push_back({v, label});
  }
  return Labeling::from_assignments(std::move(raw));
}

Labeling with_leftover_singletons(const Labeling& base, int n) {
  std::vector<std::pair<std::int64_t, int>> raw(base.assignment.begin(),
                                                base.assignment.end());
  int next = base.cluster_count;
  for (int v = 0; v < n; ++v)
    if (base.label_of(v) == 0) raw.push_back({v, ++next});
  return Labeling::from_assignments(std::move(raw));
}

// Greedy single-node moves on the loss-augmented score. Every move keeps
// clusters cliques of the degree-2 adjacency, so refined labelings stay
// inside the feasible set of the exhaustive partition solver.
Labeling greedy_refine(const Labeling& seed, const NonUniformHypergraph& g,
                       const WeightVector& lambda, const Labeling& truth,
                       std::span<const double> w) {
  const int n = g.node_count();
  std::vector<char> adj(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
  for (const auto& e : g.edges(2)) {
    adj[static_cast<std::size_t>(e.nodes[0]) * static_cast<std::size_t>(n) +
        static_cast<std::size_t>(e.nodes[1])] = 1;
    adj[static_cast<std::size_t>(e.nodes[1]) * static_cast<std::size_t>(n) +
        static_cast<std::size_t>(e.nodes[0])] = 1;
  }

  std::vector<int> labels = node_labels(seed, n);
  auto as_labeling = [&](const std::vector<int>& ls) {
    std::vector<std::pair<std::int64_t, int>> raw;
    for (int v = 0; v < n; ++v)
      if (ls[static_cast<std::size_t>(v)] > 0)
        raw.push_back({v, ls[static_cast<std::size_t>(v)]});
    return Labeling::from_assignments(std::move(raw));
  };
  auto augmented = [&](const std::vector<int>& ls) {
    const Labeling y = as_labeling(ls);
    return structured_score(lambda, y, g) + hamming_loss(y, truth, w);
  };

  // v may join the cluster currently labeled `target` only when it is
  // pair-adjacent to every member (ignoring `skip`, used for swap moves).
  auto can_join = [&](int v, int target, int skip) {
    bool occupied = false;
    for (int u = 0; u < n; ++u) {
      if (u == v || u == skip || labels[static_cast<std::size_t>(u)] != target)
        continue;
      occupied = true;
      if (!adj[static_cast<std::size_t>(v) * static_cast<std::size_t>(n) +
               static_cast<std::size_t>(u)])
        return false;
    }
    return occupied;
  };

  double current = augmented(labels);
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool moved = false;

    // Single-node moves: unassign, join an existing cluster, open a new one.
    for (int v = 0; v < n; ++v) {
      int max_label = 0;
      for (int l : labels) max_label = std::max(max_label, l);
      const int from = labels[static_cast<std::size_t>(v)];
      double best = current + 1e-9;
      int best_target = from;
      for (int target = 0; target <= max_label + 1; ++target) {
        if (target == from) continue;
        if (target >= 1 && target <= max_label && !can_join(v, target, -1))
          continue;
        labels[static_cast<std::size_t>(v)] = target;
        const double cand = augmented(labels);
        labels[static_cast<std::size_t>(v)] = from;
        if (cand > best) {
          best = cand;
          best_target = target;
        }
      }
      if (best_target != from) {
        labels[static_cast<std::size_t>(v)] = best_target;
        current = best;
        moved = true;
      }
    }

    // Label swaps escape optima single moves cannot: exchanging two nodes
    // keeps both cluster sizes fixed, so the 1/|c|^d scaling cancels.
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        const int la = labels[static_cast<std::size_t>(a)];
        const int lb = labels[static_cast<std::size_t>(b)];
        if (la == lb) continue;
        if (lb >= 1 && !can_join(a, lb, b)) continue;
        if (la >= 1 && !can_join(b, la, a)) continue;
        labels[static_cast<std::size_t>(a)] = lb;
        labels[static_cast<std::size_t>(b)] = la;
        const double cand = augmented(labels);
        if (cand > current + 1e-9) {
          current = cand;
          moved = true;
        } else {
          labels[static_cast<std::size_t>(a)] = la;
          labels[static_cast<std::size_t>(b)] = lb;
        }
      }

    if (!moved) break;
  }
  return as_labeling(labels);
}

}  // namespace

void TrainingInstance::validate() const {
  const int n = graph.node_count();
  if (!loss_weights.empty() && static_cast<int>(loss_weights.size()) != n)
    throw ValidationError("loss weights must have one entry per node");
  for (int v = 0; v < n; ++v)
    if (ground_truth.label_of(v) == 0)
      throw ValidationError("training instance leaves node " +
                            std::to_string(v) + " unlabeled");
  ground_truth.validate();
}

std::vector<double> feature_map(const Labeling& y,
                                const NonUniformHypergraph& g) {
  const int n = g.node_count();
  const std::vector<int> labels = node_labels(y, n);
  std::vector<long> cluster_size(static_cast<std::size_t>(y.cluster_count) + 1, 0);
  for (int v = 0; v < n; ++v)
    if (labels[static_cast<std::size_t>(v)] > 0)
      ++cluster_size[static_cast<std::size_t>(labels[static_cast<std::size_t>(v)])];

  std::vector<int> offset(static_cast<std::size_t>(g.max_degree()) + 1, 0);
  int dim = 0;
  for (int d = 1; d <= g.max_degree(); ++d) {
    offset[static_cast<std::size_t>(d)] = dim;
    dim += g.arity_of(d);
  }

  std::vector<double> s(static_cast<std::size_t>(dim), 0.0);
  for (int d = 1; d <= g.max_degree(); ++d) {
    for (const auto& e : g.edges(d)) {
      const int c = labels[static_cast<std::size_t>(e.nodes[0])];
      if (c == 0) continue;
      bool inside = true;
      for (int v : e.nodes)
        if (labels[static_cast<std::size_t>(v)] != c) {
          inside = false;
          break;
        }
      if (!inside) continue;
      const double frac =
          1.0 / static_cast<double>(cluster_size[static_cast<std::size_t>(c)]);
      double mass = 1.0;
      for (int k = 0; k < d; ++k) mass *= frac;
      for (int ch = 0; ch < g.arity_of(d); ++ch)
        s[static_cast<std::size_t>(offset[static_cast<std::size_t>(d)] + ch)] +=
            e.affinity[static_cast<std::size_t>(ch)] * mass;
    }
  }
  return s;
}

double structured_score(const WeightVector& lambda, const Labeling& y,
                        const NonUniformHypergraph& g) {
  const std::vector<double> flat = lambda.flatten();
  const std::vector<double> s = feature_map(y, g);
  if (flat.size() != s.size())
    throw ValidationError("weight layout does not match graph arity");
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += flat[i] * s[i];
  return acc;
}

double hamming_loss(const Labeling& y, const Labeling& y_star,
                    std::span<const double> weights) {
  std::int64_t max_node = -1;
  for (const auto& [v, l] : y.assignment) max_node = std::max(max_node, v);
  for (const auto& [v, l] : y_star.assignment) max_node = std::max(max_node, v);
  const int n = weights.empty() ? static_cast<int>(max_node + 1)
                                : static_cast<int>(weights.size());
  std::vector<double> storage;
  const std::span<const double> w = unit_weights(weights, n, storage);

  // Overlap counts between clusters of y and clusters of y_star.
  std::map<std::pair<int, int>, long> overlap;
  for (int v = 0; v < n; ++v) {
    const int a = y.label_of(v);
    const int b = y_star.label_of(v);
    if (a > 0 && b > 0) ++overlap[{a, b}];
  }
  struct Entry {
    long count;
    int a, b;
  };
  std::vector<Entry> entries;
  for (const auto& [key, count] : overlap)
    entries.push_back({count, key.first, key.second});
  std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y2) {
    if (x.count != y2.count) return x.count > y2.count;
    return std::tie(x.a, x.b) < std::tie(y2.a, y2.b);
  });

  std::map<int, int> match;  // y cluster -> y_star cluster
  std::vector<char> star_used(static_cast<std::size_t>(y_star.cluster_count) + 1, 0);
  for (const Entry& e : entries) {
    if (match.count(e.a) || star_used[static_cast<std::size_t>(e.b)]) continue;
    match[e.a] = e.b;
    star_used[static_cast<std::size_t>(e.b)] = 1;
  }

  double loss = 0.0;
  for (int v = 0; v < n; ++v) {
    const int a = y.label_of(v);
    const int b = y_star.label_of(v);
    bool correct;
    if (a == 0 && b == 0) {
      correct = true;
    } else if (a == 0 || b == 0) {
      correct = false;
    } else {
      auto it = match.find(a);
      correct = it != match.end() && it->second == b;
    }
    if (!correct) loss += w[static_cast<std::size_t>(v)];
  }
  return loss;
}

Labeling separation_oracle(const WeightVector& lambda,
                           const TrainingInstance& inst,
                           const SearchOptions& search) {
  const int n = inst.graph.node_count();
  std::vector<double> storage;
  const std::span<const double> w =
      unit_weights(inst.loss_weights, n, storage);

  SearchOptions augmented = search;
  augmented.trace = nullptr;
  augmented.node_bonus.assign(w.begin(), w.end());
  SearchOptions plain = search;
  plain.trace = nullptr;
  plain.node_bonus.clear();

  auto run = [&](const SearchOptions& o) {
    return labeling_from_structures(resolve_conflicts(
        search_all(inst.graph, lambda, o), o.alpha_hat));
  };

  std::vector<Labeling> candidates;
  const Labeling aug = run(augmented);
  candidates.push_back(aug);
  candidates.push_back(with_leftover_singletons(aug, n));
  const Labeling flat = run(plain);
  candidates.push_back(flat);
  candidates.push_back(with_leftover_singletons(flat, n));
  candidates.push_back(inst.ground_truth);
  candidates.push_back(Labeling{});  // everything unassigned
  candidates.push_back(with_leftover_singletons(Labeling{}, n));

  // Local moves routinely beat the raw candidates; polish every distinct
  // seed and keep whichever labeling scores highest.
  auto value = [&](const Labeling& cand) {
    return structured_score(lambda, cand, inst.graph) +
           hamming_loss(cand, inst.ground_truth, w);
  };
  std::set<std::vector<std::pair<std::int64_t, int>>> seen;
  const std::size_t seeds = candidates.size();
  for (std::size_t i = 0; i < seeds; ++i) {
    if (!seen.insert(candidates[i].assignment).second) continue;
    candidates.push_back(
        greedy_refine(candidates[i], inst.graph, lambda, inst.ground_truth, w));
  }

  std::size_t pick = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double h = value(candidates[i]);
    if (h > best) {
      best = h;
      pick = i;
    }
  }
  return candidates[pick];
}

namespace {

struct Constraint {
  std::vector<double> g;  // S(Y*) - S(Y)
  double b = 0.0;         // Δ(Y, Y*)
};

struct QpSolution {
  std::vector<double> lambda;
  std::vector<double> xi;
  double gap = 0.0;
  double primal = 0.0;
};

// Dual coordinate ascent over max Σ α b - 1/2 |Σ α g|² with α >= 0 and
// Σ_k α_jk <= C per instance. Pairwise moves inside an instance handle
// the capped case.
QpSolution solve_qp(const std::vector<std::vector<Constraint>>& sets,
                    double C, int dim, double gap_tol) {
  std::vector<std::vector<double>> alpha;
  alpha.reserve(sets.size());
  for (const auto& ws : sets) alpha.emplace_back(ws.size(), 0.0);

  std::vector<double> lambda(static_cast<std::size_t>(dim), 0.0);
  auto rebuild_lambda = [&] {
    std::fill(lambda.begin(), lambda.end(), 0.0);
    for (std::size_t j = 0; j < sets.size(); ++j)
      for (std::size_t k = 0; k < sets[j].size(); ++k) {
        const double a = alpha[j][k];
        if (a == 0.0) continue;
        for (int i = 0; i < dim; ++i)
          lambda[static_cast<std::size_t>(i)] +=
              a * sets[j][k].g[static_cast<std::size_t>(i)];
      }
  };
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
  };

  QpSolution sol;
  auto evaluate = [&] {
    double lam2 = dot(lambda, lambda);
    double dual = -0.5 * lam2;
    for (std::size_t j = 0; j < sets.size(); ++j)
      for (std::size_t k = 0; k < sets[j].size(); ++k)
        dual += alpha[j][k] * sets[j][k].b;
    double primal = 0.5 * lam2;
    sol.xi.assign(sets.size(), 0.0);
    for (std::size_t j = 0; j < sets.size(); ++j) {
      double xi = 0.0;
      for (const Constraint& c : sets[j])
        xi = std::max(xi, c.b - dot(lambda, c.g));
      sol.xi[j] = xi;
      primal += C * xi;
    }
    sol.primal = primal;
    sol.gap = primal - dual;
    return sol.gap <= gap_tol * std::max(1.0, std::abs(primal));
  };

  const int max_sweeps = 20000;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (std::size_t j = 0; j < sets.size(); ++j) {
      double used = 0.0;
      for (double a : alpha[j]) used += a;
      for (std::size_t k = 0; k < sets[j].size(); ++k) {
        const Constraint& c = sets[j][k];
        const double gg = dot(c.g, c.g);
        const double grad = c.b - dot(lambda, c.g);
        double delta;
        if (gg > 0.0) {
          delta = grad / gg;
        } else {
          delta = grad > 0.0 ? C : -C;  // linear in alpha; run to a bound
        }
        delta = std::min(delta, C - used);
        delta = std::max(delta, -alpha[j][k]);
        if (delta == 0.0) continue;
        alpha[j][k] += delta;
        used += delta;
        for (int i = 0; i < dim; ++i)
          lambda[static_cast<std::size_t>(i)] +=
              delta * c.g[static_cast<std::size_t>(i)];
      }
      // Pairwise exchange keeps Σα fixed; needed once the cap binds.
      for (std::size_t k1 = 0; k1 < sets[j].size(); ++k1)
        for (std::size_t k2 = k1 + 1; k2 < sets[j].size(); ++k2) {
          std::vector<double> diff(static_cast<std::size_t>(dim));
          for (int i = 0; i < dim; ++i)
            diff[static_cast<std::size_t>(i)] =
                sets[j][k1].g[static_cast<std::size_t>(i)] -
                sets[j][k2].g[static_cast<std::size_t>(i)];
          const double dd = dot(diff, diff);
          const double grad =
              (sets[j][k1].b - sets[j][k2].b) - dot(lambda, diff);
          double delta;
          if (dd > 0.0)
            delta = grad / dd;
          else
            delta = grad > 0.0 ? C : -C;
          delta = std::min(delta, alpha[j][k2]);
          delta = std::max(delta, -alpha[j][k1]);
          if (delta == 0.0) continue;
          alpha[j][k1] += delta;
          alpha[j][k2] -= delta;
          for (int i = 0; i < dim; ++i)
            lambda[static_cast<std::size_t>(i)] +=
                delta * diff[static_cast<std::size_t>(i)];
        }
    }
    rebuild_lambda();
    if (evaluate()) break;
  }
  evaluate();
  sol.lambda = lambda;
  return sol;
}

}  // namespace

TrainResult train(std::span<const TrainingInstance> instances,
                  const TrainOptions& opts) {
  if (instances.empty())
    throw ValidationError("training needs at least one instance");
  for (const TrainingInstance& inst : instances) inst.validate();

  const std::vector<int> arity = instances.front().graph.arity();
  for (const TrainingInstance& inst : instances)
    if (inst.graph.arity() != arity)
      throw ValidationError("training instances must share the arity layout");
  int dim = 0;
  for (int k : arity) dim += k;

  std::vector<std::vector<Constraint>> sets(instances.size());
  std::vector<std::vector<double>> star_features;
  star_features.reserve(instances.size());
  for (const TrainingInstance& inst : instances)
    star_features.push_back(feature_map(inst.ground_truth, inst.graph));

  WeightVector lambda =
      WeightVector::from_flat(arity, std::vector<double>(
                                         static_cast<std::size_t>(dim), 0.0));
  TrainResult result;
  result.lambda = lambda;
  result.slack.assign(instances.size(), 0.0);

  QpSolution qp;
  qp.lambda.assign(static_cast<std::size_t>(dim), 0.0);
  qp.xi.assign(instances.size(), 0.0);

  for (int round = 1; round <= opts.max_rounds; ++round) {
    int added = 0;
    double max_violation = 0.0;
    for (std::size_t j = 0; j < instances.size(); ++j) {
      const TrainingInstance& inst = instances[j];
      const Labeling y = separation_oracle(lambda, inst, opts.search);
      std::vector<double> storage;
      const std::span<const double> w = unit_weights(
          inst.loss_weights, inst.graph.node_count(), storage);

      Constraint c;
      c.b = hamming_loss(y, inst.ground_truth, w);
      const std::vector<double> sy = feature_map(y, inst.graph);
      c.g.resize(static_cast<std::size_t>(dim));
      for (int i = 0; i < dim; ++i)
        c.g[static_cast<std::size_t>(i)] =
            star_features[j][static_cast<std::size_t>(i)] -
            sy[static_cast<std::size_t>(i)];

      double lam_g = 0.0;
      const std::vector<double> flat = lambda.flatten();
      for (int i = 0; i < dim; ++i)
        lam_g += flat[static_cast<std::size_t>(i)] *
                 c.g[static_cast<std::size_t>(i)];
      const double violation = c.b - lam_g - qp.xi[j];
      max_violation = std::max(max_violation, violation);
      if (violation > opts.eps_stop) {
        const bool dup = std::any_of(
            sets[j].begin(), sets[j].end(), [&](const Constraint& old) {
              return old.b == c.b && old.g == c.g;
            });
        if (!dup) {
          sets[j].push_back(std::move(c));
          ++added;
        }
      }
    }

    if (added == 0) {
      result.converged = true;
      result.rounds = round;
      if (opts.log)
        *opts.log << "round " << round << ": no violated constraints"
                  << " (max violation " << max_violation << ")\n";
      break;
    }

    qp = solve_qp(sets, opts.C, dim, opts.qp_gap);
    lambda = WeightVector::from_flat(arity, qp.lambda);
    result.rounds = round;
    double total_slack = 0.0;
    for (double xi : qp.xi) total_slack += xi;
    if (opts.log)
      *opts.log << "round " << round << ": added " << added
                << " constraint(s), max violation " << max_violation
                << ", total slack " << total_slack << ", qp gap " << qp.gap
                << "\n";
  }

  result.lambda = lambda;
  result.slack = qp.xi;
  result.total_slack = 0.0;
  for (double xi : qp.xi) result.total_slack += xi;
  result.qp_gap = qp.gap;
  return result;
}

std::vector<TrainingInstance> make_training_instances(
    std::span<const Detection> detections,
    std::span<const Detection> ground_truth, const MotionContext& ctx,
    const BuildConfig& build, const ClipOptions& clip) {
  if (clip.clip_length < 2)
    throw ValidationError("clip length must be >= 2");
  const BuildConfig resolved = resolve_max_velocity(build, detections);

  // Label detections with the best-overlap ground-truth identity.
  struct Labeled {
    Detection det;
    std::int64_t gt_id;
  };
  std::map<int, std::vector<const Detection*>> gt_by_frame;
  for (const Detection& g : ground_truth) gt_by_frame[g.frame].push_back(&g);

  std::vector<Labeled> labeled;
  for (const Detection& d : detections) {
    auto it = gt_by_frame.find(d.frame);
    if (it == gt_by_frame.end()) continue;
    double best = clip.min_overlap;
    std::int64_t best_id = -1;
    for (const Detection* g : it->second) {
      const double o = metrics::iou(d, *g);
      if (o > best) {
        best = o;
        best_id = g->id;
      }
    }
    if (best_id >= 0) labeled.push_back({d, best_id});
  }
  std::stable_sort(labeled.begin(), labeled.end(),
                   [](const Labeled& a, const Labeled& b) {
                     return a.det.frame < b.det.frame;
                   });

  std::vector<TrainingInstance> instances;
  if (labeled.empty()) return instances;
  const int last_frame = labeled.back().det.frame;
  for (int start = 0; start <= last_frame; start += clip.clip_length) {
    const int stop = start + clip.clip_length;  // exclusive
    std::vector<Tracklet> nodes;
    std::vector<std::pair<std::int64_t, int>> raw_labels;
    std::map<std::int64_t, int> id_to_label;
    for (const Labeled& l : labeled) {
      if (l.det.frame < start || l.det.frame >= stop) continue;
      const int node = static_cast<int>(nodes.size());
      nodes.push_back(Tracklet::from_detection(node, l.det));
      auto [it, fresh] =
          id_to_label.try_emplace(l.gt_id, static_cast<int>(id_to_label.size()) + 1);
      raw_labels.push_back({node, it->second});
    }
    if (nodes.size() < 2) continue;
    TrainingInstance inst{build_hypergraph(std::move(nodes), ctx, resolved),
                          Labeling::from_assignments(std::move(raw_labels)),
                          {}};
    instances.push_back(std::move(inst));
  }
  return instances;
}

}  // namespace ntrack

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "ntrack/dense_search.hpp"
#include "ntrack/learn.hpp"
#include "ntrack/oracle.hpp"
#include "support/fixtures.hpp"

using namespace ntrack;

namespace {

Labeling labels_of(std::vector<std::pair<std::int64_t, int>> raw) {
  return Labeling::from_assignments(std::move(raw));
}

// Two ground-truth clusters {0..3} and {4..7}: complete pair graph with an
// informative motion channel, plus within-cluster triples. Returns the
// graph; the reference labeling is two_clusters_truth().
NonUniformHypergraph two_cluster_graph(std::mt19937_64& rng) {
  NonUniformHypergraph g(8, {1, 3, 1});
  std::uniform_real_distribution<double> noise(0.0, 1.0);
  for (int v = 0; v < 8; ++v) g.add_edge({v}, {0.5});
  for (int i = 0; i < 8; ++i)
    for (int j = i + 1; j < 8; ++j) {
      const bool same = (i < 4) == (j < 4);
      g.add_edge({i, j}, {noise(rng), noise(rng), same ? 0.9 : 0.05});
    }
  for (int base : {0, 4})
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        for (int k = j + 1; k < 4; ++k)
          g.add_edge({base + i, base + j, base + k}, {0.8});
  return g;
}

Labeling two_clusters_truth() {
  return labels_of({{0, 1}, {1, 1}, {2, 1}, {3, 1},
                    {4, 2}, {5, 2}, {6, 2}, {7, 2}});
}

}  // namespace

TEST_SUITE("learn") {

TEST_CASE("feature map of a singleton labeling touches only degree 1") {
  std::mt19937_64 rng(501);
  NonUniformHypergraph g = testfix::random_graph(rng, 6, 3, 0.8);
  Labeling y = labels_of(
      {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}});
  std::vector<double> s = feature_map(y, g);
  REQUIRE(s.size() == 5);  // arity 1 + 3 + 1
  double selfsum = 0.0;
  for (const auto& e : g.edges(1)) selfsum += e.affinity[0];
  CHECK(s[0] == doctest::Approx(selfsum));
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] == 0.0);
}

TEST_CASE("weighted feature score equals the per-cluster objective") {
  std::mt19937_64 rng(503);
  for (int trial = 0; trial < 20; ++trial) {
    NonUniformHypergraph g = testfix::random_graph(rng, 9, 4, 0.7);
    WeightVector lambda = testfix::random_affinity_weights(rng, 4);

    // Random labeling: clusters of arbitrary nodes are fine here; the
    // feature map and the uniform-support objective must still agree.
    std::vector<std::pair<std::int64_t, int>> raw;
    std::vector<std::vector<int>> clusters(3);
    for (int v = 0; v < 9; ++v) {
      const int c = static_cast<int>(rng() % 4);  // 3 = unassigned
      if (c < 3) {
        clusters[static_cast<std::size_t>(c)].push_back(v);
        raw.push_back({v, c + 1});
      }
    }
    Labeling y = labels_of(std::move(raw));

    double expected = 0.0;
    for (const auto& c : clusters)
      if (!c.empty()) expected += uniform_support_objective(g, lambda, c);
    CHECK(std::abs(structured_score(lambda, y, g) - expected) <= 1e-9);
  }
}

TEST_CASE("merging clusters never lowers the degree-2 features") {
  std::mt19937_64 rng(509);
  NonUniformHypergraph g = testfix::random_graph(rng, 8, 2, 1.0);
  Labeling split = labels_of(
      {{0, 1}, {1, 1}, {2, 1}, {3, 1}, {4, 2}, {5, 2}, {6, 2}, {7, 2}});
  Labeling merged = labels_of(
      {{0, 1}, {1, 1}, {2, 1}, {3, 1}, {4, 1}, {5, 1}, {6, 1}, {7, 1}});
  std::vector<double> a = feature_map(split, g);
  std::vector<double> b = feature_map(merged, g);
  // Merging adds the 16 cross-pair tuples; with all affinities > 0 the raw
  // (unscaled) degree-2 sums can only grow, which we verify after undoing
  // the 1/|c|^2 scale (split clusters have size 4, merged has 8).
  for (std::size_t ch = 1; ch <= 3; ++ch)
    CHECK(b[ch] * 64.0 >= a[ch] * 16.0 - 1e-12);
}

TEST_CASE("hamming loss basics") {
  Labeling star = two_clusters_truth();
  CHECK(hamming_loss(star, star, {}) == 0.0);

  // One detection moved to a brand-new cluster.
  Labeling off = labels_of({{0, 1}, {1, 1}, {2, 1}, {3, 3},
                            {4, 2}, {5, 2}, {6, 2}, {7, 2}});
  CHECK(hamming_loss(off, star, {}) == doctest::Approx(1.0));

  // Wholesale label permutation is free.
  Labeling swapped = labels_of({{0, 2}, {1, 2}, {2, 2}, {3, 2},
                                {4, 1}, {5, 1}, {6, 1}, {7, 1}});
  CHECK(hamming_loss(swapped, star, {}) == 0.0);

  // Per-node weights scale the miscounted nodes.
  std::vector<double> w(8, 1.0);
  w[3] = 2.5;
  CHECK(hamming_loss(off, star, w) == doctest::Approx(2.5));

  // Symmetric under swapping the arguments.
  std::mt19937_64 rng(521);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::pair<std::int64_t, int>> ra, rb;
    for (int v = 0; v < 7; ++v) {
      if (rng() % 4) ra.push_back({v, static_cast<int>(rng() % 3) + 1});
      if (rng() % 4) rb.push_back({v, static_cast<int>(rng() % 3) + 1});
    }
    Labeling a = labels_of(std::move(ra));
    Labeling b = labels_of(std::move(rb));
    CHECK(hamming_loss(a, b, {}) == doctest::Approx(hamming_loss(b, a, {})));
  }
}

TEST_CASE("separation oracle never undercuts the reference labeling") {
  std::mt19937_64 rng(523);
  for (int trial = 0; trial < 10; ++trial) {
    TrainingInstance inst{two_cluster_graph(rng), two_clusters_truth(), {}};
    WeightVector lambda = testfix::random_affinity_weights(rng, 3);
    Labeling y = separation_oracle(lambda, inst, SearchOptions{});
    const double star = structured_score(lambda, inst.ground_truth, inst.graph);
    const double got = structured_score(lambda, y, inst.graph) +
                       hamming_loss(y, inst.ground_truth, {});
    CHECK(got >= star - 1e-12);
    for (const auto& [v, l] : y.assignment) {
      CHECK(v >= 0);
      CHECK(v < 8);
      CHECK(l >= 1);
    }
  }
}

TEST_CASE("oracle violation tracks the exhaustive partition maximum") {
  // Complete pair graphs keep every brute-force partition reachable by the
  // dense-search candidates, making the two solvers comparable.
  std::mt19937_64 rng(541);
  int sharp = 0;
  const int trials = 6;
  for (int trial = 0; trial < trials; ++trial) {
    NonUniformHypergraph g(6, {1, 3});
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int v = 0; v < 6; ++v) g.add_edge({v}, {u(rng)});
    for (int i = 0; i < 6; ++i)
      for (int j = i + 1; j < 6; ++j)
        g.add_edge({i, j}, {u(rng), u(rng), u(rng)});
    Labeling star = labels_of(
        {{0, 1}, {1, 1}, {2, 1}, {3, 2}, {4, 2}, {5, 2}});
    TrainingInstance inst{std::move(g), star, {}};
    WeightVector lambda = testfix::random_affinity_weights(rng, 2);

    const double base =
        structured_score(lambda, inst.ground_truth, inst.graph);
    Labeling y = separation_oracle(lambda, inst, SearchOptions{});
    const double oracle_viol =
        structured_score(lambda, y, inst.graph) +
        hamming_loss(y, inst.ground_truth, {}) - base;

    oracle::PartitionResult brute = oracle::brute_force_partitions(
        inst.graph, [&](const std::vector<int>& labels) {
          std::vector<std::pair<std::int64_t, int>> raw;
          for (std::size_t v = 0; v < labels.size(); ++v)
            if (labels[v] > 0)
              raw.push_back({static_cast<std::int64_t>(v), labels[v]});
          Labeling cand = labels_of(std::move(raw));
          return structured_score(lambda, cand, inst.graph) +
                 hamming_loss(cand, inst.ground_truth, {});
        });
    const double brute_viol = brute.score - base;

    CHECK(oracle_viol >= -1e-12);
    CHECK(oracle_viol <= brute_viol + 1e-9);
    if (brute_viol <= 1e-12 || oracle_viol >= 0.95 * brute_viol) ++sharp;
  }
  CHECK(sharp >= 4);
}

TEST_CASE("training on a cleanly separable instance drives slack to zero") {
  std::mt19937_64 rng(547);
  TrainingInstance inst{two_cluster_graph(rng), two_clusters_truth(), {}};
  TrainOptions opts;
  // Slack at the regularized optimum scales like |lambda|^2 / C, so a
  // soft C would leave residual slack even on separable data.
  opts.C = 1e6;
  opts.qp_gap = 1e-12;
  TrainResult r = train(std::vector<TrainingInstance>{inst}, opts);
  CHECK(r.converged);
  CHECK(r.total_slack <= 1e-3);
  REQUIRE(r.slack.size() == 1);
  CHECK(r.slack[0] >= 0.0);
  CHECK(r.qp_gap <= 1e-6);

  // The learned weights rank the reference labeling above hand and random
  // perturbations: merges, splits, swaps and dropped nodes.
  const double star = structured_score(r.lambda, inst.ground_truth, inst.graph);
  std::vector<Labeling> perturbed;
  perturbed.push_back(labels_of({{0, 1}, {1, 1}, {2, 1}, {3, 1},
                                 {4, 1}, {5, 1}, {6, 1}, {7, 1}}));
  perturbed.push_back(labels_of({{0, 1}, {1, 1}, {2, 2}, {3, 2},
                                 {4, 3}, {5, 3}, {6, 4}, {7, 4}}));
  perturbed.push_back(labels_of({{0, 1}, {1, 1}, {2, 1}, {3, 2},
                                 {4, 2}, {5, 2}, {6, 2}, {7, 1}}));
  perturbed.push_back(labels_of({{0, 1}, {1, 2}, {2, 3}, {3, 4},
                                 {4, 5}, {5, 6}, {6, 7}, {7, 8}}));
  perturbed.push_back(Labeling{});
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::pair<std::int64_t, int>> raw;
    for (int v = 0; v < 8; ++v)
      if (rng() % 5) raw.push_back({v, static_cast<int>(rng() % 3) + 1});
    Labeling cand = labels_of(std::move(raw));
    if (hamming_loss(cand, inst.ground_truth, {}) == 0.0) continue;
    perturbed.push_back(std::move(cand));
  }
  for (const Labeling& y : perturbed) {
    if (hamming_loss(y, inst.ground_truth, {}) == 0.0) continue;
    CHECK(structured_score(r.lambda, y, inst.graph) < star);
  }
}

TEST_CASE("doubling C never increases the total slack") {
  // Two instances over the same two-node graph with contradictory truths:
  // no weight vector satisfies both, so slack stays positive.
  NonUniformHypergraph g(2, {1, 1});
  g.add_edge({0}, {1.0});
  g.add_edge({1}, {1.0});
  g.add_edge({0, 1}, {1.0});
  TrainingInstance together{g, labels_of({{0, 1}, {1, 1}}), {}};
  TrainingInstance apart{g, labels_of({{0, 1}, {1, 2}}), {}};
  std::vector<TrainingInstance> insts;
  insts.push_back(std::move(together));
  insts.push_back(std::move(apart));

  TrainOptions opts;
  opts.C = 1.0;
  TrainResult low = train(insts, opts);
  opts.C = 2.0;
  TrainResult high = train(insts, opts);
  CHECK(low.total_slack > 0.01);
  CHECK(high.total_slack <= low.total_slack + 1e-6);
}

TEST_CASE("training rejects malformed input") {
  CHECK_THROWS_AS(train({}, TrainOptions{}), ValidationError);

  NonUniformHypergraph g(2, {1, 1});
  g.add_edge({0, 1}, {1.0});
  TrainingInstance unlabeled{g, labels_of({{0, 1}}), {}};
  CHECK_THROWS_AS(unlabeled.validate(), ValidationError);
  std::vector<TrainingInstance> insts;
  insts.push_back(std::move(unlabeled));
  CHECK_THROWS_AS(train(insts, TrainOptions{}), ValidationError);
}

TEST_CASE("clip splitting labels detections by ground-truth overlap") {
  // Two identities on separated rows over 28 frames -> two 14-frame clips;
  // one stray detection has no matching ground truth and is dropped.
  std::vector<Detection> dets, gt;
  for (int f = 0; f < 28; ++f) {
    dets.push_back(testfix::det(f, 2.0 * f, 0.0, 10, 10, 1.0, 2 * f));
    dets.push_back(testfix::det(f, 2.0 * f, 100.0, 10, 10, 1.0, 2 * f + 1));
    gt.push_back(testfix::det(f, 2.0 * f, 0.0, 10, 10, 1.0, 101));
    gt.push_back(testfix::det(f, 2.0 * f, 100.0, 10, 10, 1.0, 102));
  }
  dets.push_back(testfix::det(5, 500.0, 500.0, 10, 10, 1.0, 999));

  MotionContext ctx;
  BuildConfig build;
  build.max_velocity = 10.0;
  ClipOptions clip;
  std::vector<TrainingInstance> insts =
      make_training_instances(dets, gt, ctx, build, clip);
  REQUIRE(insts.size() == 2);
  for (const TrainingInstance& inst : insts) {
    CHECK(inst.graph.node_count() == 28);  // 14 frames x 2, stray dropped
    CHECK_NOTHROW(inst.validate());
    CHECK(inst.ground_truth.cluster_count == 2);
    // Same row iff same cluster.
    for (int u = 0; u < inst.graph.node_count(); ++u)
      for (int v = u + 1; v < inst.graph.node_count(); ++v) {
        const bool same_row = inst.graph.tracklet(u).first().cy ==
                              inst.graph.tracklet(v).first().cy;
        CHECK(same_row == (inst.ground_truth.label_of(u) ==
                           inst.ground_truth.label_of(v)));
      }
  }
}

}  // TEST_SUITE

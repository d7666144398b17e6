#pragma once

#include <span>
#include <vector>

#include "ntrack/hypergraph.hpp"
#include "ntrack/types.hpp"

namespace ntrack {

/// Relaxed cluster indicator over one start node's closed neighborhood.
struct IndicatorVector {
  int start_node = -1;
  std::vector<int> index;  // local -> global node id, sorted ascending
  std::vector<double> y;   // same length as index
  int alpha_hat = 2;

  int local_of(int global_id) const;  // -1 when absent
  /// Checks Σy = 1 within 1e-9 and 0 <= y_i <= 1/alpha_hat.
  void validate() const;
};

/// One accepted mass transfer: y[p] += eta, y[q] -= eta (global node ids);
/// theta is the objective after the step.
struct StepRecord {
  int p = -1;
  int q = -1;
  double eta = 0.0;
  double theta = 0.0;
};

struct SearchOptions {
  int alpha_hat = 2;
  double tol = 1e-7;        // reward comparison tolerance
  double eps_part = 1e-9;   // partition membership tolerance
  int iter_cap_factor = 50;  // cap = factor * |N(v_s)|
  int full_recompute_every = 1000;
  int threads = 1;  // parallel starts in search_all
  // Optional per-node addition to the degree-1 coefficient (empty or one
  // entry per graph node). Used for loss-augmented search during learning;
  // reported theta values include it.
  std::vector<double> node_bonus;
  // Optional log of accepted transfers (single-start runs only).
  std::vector<StepRecord>* trace = nullptr;

  void validate() const;
};

struct SearchResult {
  IndicatorVector y;
  double theta = 0.0;
  bool converged = false;
  // False when |N(v_s) ∪ {v_s}| < alpha_hat: the box constraint cannot
  // hold, y is left uniform and no step is attempted.
  bool feasible = true;
  int iterations = 0;
  std::vector<int> support;  // sorted global ids, start node included
};

/// A searched dense structure: support set plus its objective value.
struct Structure {
  std::vector<int> support;
  double theta = 0.0;
};

/// Uniform 1/|index| indicator over N(v_s) ∪ {v_s}.
IndicatorVector make_indicator(const NonUniformHypergraph& g, int start_node,
                               int alpha_hat);

/// Θ(y) = Σ_d λ_d · Σ_tuples A(tuple) Π y_i over tuples fully inside the
/// indicator's index set (dot product for vector affinities).
double objective(const IndicatorVector& y, const NonUniformHypergraph& g,
                 const WeightVector& lambda);

/// Reward φ_i = ∂Θ/∂y_i at y; i is a local index into y.index.
double reward(int i, const IndicatorVector& y, const NonUniformHypergraph& g,
              const WeightVector& lambda);

/// Pair curvature φ_pq: the quadratic coefficient of the objective change
/// when transferring mass from q to p; p, q are local indices.
double pair_curvature(int p, int q, const IndicatorVector& y,
                      const NonUniformHypergraph& g,
                      const WeightVector& lambda);

/// Updating step for a transfer y_p += η, y_q -= η. Requires φ_p >= φ_q
/// (callers swap). With curvature >= 0 the move is box-limited; with
/// curvature < 0 it is additionally capped by the unconstrained maximizer
/// (φ_q - φ_p) / (2 φ_pq).
double step_size(double y_p, double y_q, double phi_p, double phi_q,
                 double phi_pq, int alpha_hat);

/// Pairwise-update ascent from the uniform indicator over N(v_s) ∪ {v_s}.
/// The start node may gain mass but never donates it and is always part of
/// the extracted support. Support = {i : y_i >= 1/(2 * nonzero count)}.
SearchResult local_maximizer(const NonUniformHypergraph& g,
                             const WeightVector& lambda, int start_node,
                             const SearchOptions& opts);

/// One local_maximizer run per node; results reduced to supports,
/// deduplicated keeping the best theta. Deterministic for any thread count.
/// all_converged (optional) is cleared when any feasible start hit the
/// iteration cap.
std::vector<Structure> search_all(const NonUniformHypergraph& g,
                                  const WeightVector& lambda,
                                  const SearchOptions& opts,
                                  bool* all_converged = nullptr);

/// Θ of the discrete structure: y = 1/|support| on the support, 0 outside,
/// summing every edge of every degree fully inside the support.
double uniform_support_objective(const NonUniformHypergraph& g,
                                 const WeightVector& lambda,
                                 std::span<const int> support);

/// Optimality certificate at the partition level: a threshold `a` exists
/// with φ <= a on zero-mass nodes, φ = a on interior nodes and φ >= a on
/// box-capped nodes, all within tol and excluding the start node.
struct KktReport {
  double a = 0.0;
  double max_violation = 0.0;
  bool ok = false;
};
KktReport kkt_certificate(const SearchResult& result,
                          const NonUniformHypergraph& g,
                          const WeightVector& lambda,
                          const SearchOptions& opts);

}  // namespace ntrack

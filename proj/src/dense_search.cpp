#include "ntrack/dense_search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <thread>

namespace ntrack {

namespace {

double dot_checked(const std::vector<double>& w, const AffinityVector& a,
                   int degree) {
  if (w.size() != a.size())
    throw ValidationError("weight arity mismatch for degree " +
                          std::to_string(degree));
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * a[i];
  return acc;
}

// The local multilinear problem over N(v_s) ∪ {v_s}: per-node linear
// coefficients (self-loops plus any external bonus) and scalar-coefficient
// tuples for every degree>=2 edge fully inside the index set. All
// summations run in a fixed deterministic order (ascending tuple id,
// ascending member id) so repeated runs are bit-identical.
struct LocalProblem {
  struct Tuple {
    std::vector<int> members;  // local ids, ascending
    double coeff = 0.0;
  };

  int m = 0;
  int s = -1;  // local index of the start node
  int alpha_hat = 2;
  std::vector<int> index;  // local -> global, ascending
  std::vector<double> lin;
  std::vector<Tuple> tuples;
  std::vector<std::vector<int>> tuples_of;

  std::vector<double> y;
  std::vector<double> phi;
  double theta = 0.0;

  LocalProblem(const NonUniformHypergraph& g, const WeightVector& lambda,
               int start_node, std::span<const double> bonus) {
    const auto& nbr = g.neighbors(start_node);
    index.reserve(nbr.size() + 1);
    index = nbr;
    auto it = std::lower_bound(index.begin(), index.end(), start_node);
    index.insert(it, start_node);
    m = static_cast<int>(index.size());
    s = local_of(start_node);

    lin.assign(static_cast<std::size_t>(m), 0.0);
    tuples_of.resize(static_cast<std::size_t>(m));
    if (!bonus.empty()) {
      if (static_cast<int>(bonus.size()) != g.node_count())
        throw ValidationError("node bonus length must match node count");
      for (int i = 0; i < m; ++i)
        lin[static_cast<std::size_t>(i)] =
            bonus[static_cast<std::size_t>(index[static_cast<std::size_t>(i)])];
    }

    // Collect incident edges of all members once, in (degree, edge id)
    // order, keeping those fully inside the index set.
    std::vector<std::pair<int, int>> seen;
    for (int i = 0; i < m; ++i)
      for (const auto& de : g.incident(index[static_cast<std::size_t>(i)]))
        seen.push_back(de);
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());

    for (const auto& [d, ei] : seen) {
      const auto& e = g.edge(d, ei);
      if (d == 1) {
        const int li = local_of(e.nodes[0]);
        lin[static_cast<std::size_t>(li)] +=
            dot_checked(lambda.weights(1), e.affinity, 1);
        continue;
      }
      std::vector<int> locals;
      locals.reserve(e.nodes.size());
      bool inside = true;
      for (int v : e.nodes) {
        const int li = local_of(v);
        if (li < 0) {
          inside = false;
          break;
        }
        locals.push_back(li);
      }
      if (!inside) continue;
      const int t = static_cast<int>(tuples.size());
      for (int li : locals) tuples_of[static_cast<std::size_t>(li)].push_back(t);
      tuples.push_back({std::move(locals),
                        dot_checked(lambda.weights(d), e.affinity, d)});
    }

    y.assign(static_cast<std::size_t>(m), 0.0);
    phi.assign(static_cast<std::size_t>(m), 0.0);
  }

  int local_of(int global_id) const {
    auto it = std::lower_bound(index.begin(), index.end(), global_id);
    if (it == index.end() || *it != global_id) return -1;
    return static_cast<int>(it - index.begin());
  }

  double cap() const { return 1.0 / static_cast<double>(alpha_hat); }

  double product_except(const Tuple& t, int skip) const {
    double p = 1.0;
    for (int j : t.members)
      if (j != skip) p *= y[static_cast<std::size_t>(j)];
    return p;
  }

  double product_except_two(const Tuple& t, int skip1, int skip2) const {
    double p = 1.0;
    for (int j : t.members)
      if (j != skip1 && j != skip2) p *= y[static_cast<std::size_t>(j)];
    return p;
  }

  void recompute() {
    double th = 0.0;
    for (int i = 0; i < m; ++i) {
      phi[static_cast<std::size_t>(i)] = lin[static_cast<std::size_t>(i)];
      th += lin[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
    }
    for (const Tuple& t : tuples) {
      double full = 1.0;
      for (int j : t.members) full *= y[static_cast<std::size_t>(j)];
      th += t.coeff * full;
      for (int j : t.members)
        phi[static_cast<std::size_t>(j)] += t.coeff * product_except(t, j);
    }
    theta = th;
  }

  double curvature(int p, int q) const {
    double acc = 0.0;
    for (int t : tuples_of[static_cast<std::size_t>(p)]) {
      const Tuple& tp = tuples[static_cast<std::size_t>(t)];
      if (!std::binary_search(tp.members.begin(), tp.members.end(), q))
        continue;
      acc -= tp.coeff * product_except_two(tp, p, q);
    }
    return acc;
  }

  // Applies y[p] += eta, y[q] -= eta (exact snap at the box faces), updates
  // theta by the exact quadratic expansion and the affected rewards
  // incrementally.
  void transfer(int p, int q, double eta, double phi_pq) {
    theta += phi_pq * eta * eta +
             (phi[static_cast<std::size_t>(p)] - phi[static_cast<std::size_t>(q)]) * eta;

    const double old_p = y[static_cast<std::size_t>(p)];
    const double old_q = y[static_cast<std::size_t>(q)];
    y[static_cast<std::size_t>(p)] =
        (eta == cap() - old_p) ? cap() : old_p + eta;
    y[static_cast<std::size_t>(q)] = (eta == old_q) ? 0.0 : old_q - eta;

    const auto& tp = tuples_of[static_cast<std::size_t>(p)];
    const auto& tq = tuples_of[static_cast<std::size_t>(q)];
    std::size_t a = 0, b = 0;
    while (a < tp.size() || b < tq.size()) {
      int t;
      if (b >= tq.size() || (a < tp.size() && tp[a] <= tq[b])) {
        t = tp[a];
        if (b < tq.size() && tq[b] == t) ++b;
        ++a;
      } else {
        t = tq[b];
        ++b;
      }
      const Tuple& tu = tuples[static_cast<std::size_t>(t)];
      for (int i : tu.members) {
        double oldprod = 1.0, newprod = 1.0;
        for (int j : tu.members) {
          if (j == i) continue;
          newprod *= y[static_cast<std::size_t>(j)];
          oldprod *= (j == p) ? old_p : (j == q) ? old_q : y[static_cast<std::size_t>(j)];
        }
        phi[static_cast<std::size_t>(i)] += tu.coeff * (newprod - oldprod);
      }
    }
  }

  double mass() const {
    double sum = 0.0;
    for (double v : y) sum += v;
    return sum;
  }
};

LocalProblem make_problem(const NonUniformHypergraph& g,
                          const WeightVector& lambda,
                          const IndicatorVector& iv,
                          std::span<const double> bonus) {
  LocalProblem lp(g, lambda, iv.start_node, bonus);
  lp.alpha_hat = iv.alpha_hat;
  if (iv.index != lp.index)
    throw ValidationError(
        "indicator index set does not match the start node's neighborhood");
  if (iv.y.size() != iv.index.size())
    throw ValidationError("indicator y length mismatch");
  lp.y = iv.y;
  lp.recompute();
  return lp;
}

struct Move {
  int p = -1;
  int q = -1;
  double eta = 0.0;
  double curv = 0.0;
};

// Either the Algorithm-1 (argmax reward, argmin reward) transfer, or —
// when all eligible rewards are tied within tol — the first pair (in index
// order) with positive curvature whose move strictly improves theta.
std::optional<Move> find_move(const LocalProblem& lp, double tol,
                              double eps_part) {
  const double up_lim = lp.cap() - eps_part;
  int p = -1, q = -1;
  for (int i = 0; i < lp.m; ++i) {
    const double yi = lp.y[static_cast<std::size_t>(i)];
    if (yi < up_lim &&
        (p < 0 || lp.phi[static_cast<std::size_t>(i)] > lp.phi[static_cast<std::size_t>(p)]))
      p = i;
    if (i != lp.s && yi > eps_part &&
        (q < 0 || lp.phi[static_cast<std::size_t>(i)] < lp.phi[static_cast<std::size_t>(q)]))
      q = i;
  }

  if (p >= 0 && q >= 0 && p != q &&
      lp.phi[static_cast<std::size_t>(p)] > lp.phi[static_cast<std::size_t>(q)] + tol) {
    const double curv = lp.curvature(p, q);
    const double eta =
        step_size(lp.y[static_cast<std::size_t>(p)], lp.y[static_cast<std::size_t>(q)],
                  lp.phi[static_cast<std::size_t>(p)], lp.phi[static_cast<std::size_t>(q)],
                  curv, lp.alpha_hat);
    if (eta > 0.0) return Move{p, q, eta, curv};
  }

  // Tied-reward phase: a positive-curvature pair can still improve theta.
  for (int i = 0; i < lp.m; ++i) {
    if (lp.y[static_cast<std::size_t>(i)] >= up_lim) continue;
    for (int j = 0; j < lp.m; ++j) {
      if (j == i || j == lp.s) continue;
      if (lp.y[static_cast<std::size_t>(j)] <= eps_part) continue;
      const double di =
          lp.phi[static_cast<std::size_t>(i)] - lp.phi[static_cast<std::size_t>(j)];
      if (std::abs(di) > tol) continue;
      const double curv = lp.curvature(i, j);
      if (curv <= 0.0) continue;
      const double eta = std::min(lp.y[static_cast<std::size_t>(j)],
                                  lp.cap() - lp.y[static_cast<std::size_t>(i)]);
      if (eta <= 0.0) continue;
      if (curv * eta * eta + di * eta <= 0.0) continue;  // keep theta monotone
      return Move{i, j, eta, curv};
    }
  }
  return std::nullopt;
}

std::vector<int> extract_support(const LocalProblem& lp, double eps_part) {
  int nonzero = 0;
  for (double v : lp.y)
    if (v > eps_part) ++nonzero;
  const double theta_sup = 1.0 / (2.0 * static_cast<double>(std::max(nonzero, 1)));
  std::vector<int> support;
  for (int i = 0; i < lp.m; ++i)
    if (lp.y[static_cast<std::size_t>(i)] >= theta_sup ||
        i == lp.s)  // the start node is always part of its structure
      support.push_back(lp.index[static_cast<std::size_t>(i)]);
  return support;
}

}  // namespace

int IndicatorVector::local_of(int global_id) const {
  auto it = std::lower_bound(index.begin(), index.end(), global_id);
  if (it == index.end() || *it != global_id) return -1;
  return static_cast<int>(it - index.begin());
}

void IndicatorVector::validate() const {
  if (alpha_hat < 2) throw ValidationError("alpha_hat must be >= 2");
  if (index.size() != y.size())
    throw ValidationError("indicator index/y length mismatch");
  if (!std::is_sorted(index.begin(), index.end()) ||
      std::adjacent_find(index.begin(), index.end()) != index.end())
    throw ValidationError("indicator index must be sorted and unique");
  if (local_of(start_node) < 0)
    throw ValidationError("indicator must contain its start node");
  const double cap = 1.0 / static_cast<double>(alpha_hat);
  double sum = 0.0;
  for (double v : y) {
    if (v < -1e-9 || v > cap + 1e-9)
      throw ValidationError("indicator value outside [0, 1/alpha_hat]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("indicator mass must sum to 1");
}

void SearchOptions::validate() const {
  if (alpha_hat < 2) throw ValidationError("alpha_hat must be >= 2");
  if (tol <= 0.0 || eps_part <= 0.0)
    throw ValidationError("tolerances must be > 0");
  if (iter_cap_factor < 1) throw ValidationError("iter_cap_factor must be >= 1");
  if (full_recompute_every < 1)
    throw ValidationError("full_recompute_every must be >= 1");
  if (threads < 1) throw ValidationError("threads must be >= 1");
}

IndicatorVector make_indicator(const NonUniformHypergraph& g, int start_node,
                               int alpha_hat) {
  IndicatorVector iv;
  iv.start_node = start_node;
  iv.alpha_hat = alpha_hat;
  iv.index = g.neighbors(start_node);
  auto it = std::lower_bound(iv.index.begin(), iv.index.end(), start_node);
  iv.index.insert(it, start_node);
  iv.y.assign(iv.index.size(), 1.0 / static_cast<double>(iv.index.size()));
  return iv;
}

double objective(const IndicatorVector& iv, const NonUniformHypergraph& g,
                 const WeightVector& lambda) {
  return make_problem(g, lambda, iv, {}).theta;
}

double reward(int i, const IndicatorVector& iv, const NonUniformHypergraph& g,
              const WeightVector& lambda) {
  LocalProblem lp = make_problem(g, lambda, iv, {});
  if (i < 0 || i >= lp.m) throw ValidationError("reward index out of range");
  return lp.phi[static_cast<std::size_t>(i)];
}

double pair_curvature(int p, int q, const IndicatorVector& iv,
                      const NonUniformHypergraph& g,
                      const WeightVector& lambda) {
  LocalProblem lp = make_problem(g, lambda, iv, {});
  if (p < 0 || p >= lp.m || q < 0 || q >= lp.m || p == q)
    throw ValidationError("pair curvature needs two distinct valid indices");
  return lp.curvature(p, q);
}

double step_size(double y_p, double y_q, double phi_p, double phi_q,
                 double phi_pq, int alpha_hat) {
  if (phi_p < phi_q)
    throw ValidationError("step_size requires phi_p >= phi_q");
  const double cap = 1.0 / static_cast<double>(alpha_hat);
  double eta = std::min(y_q, cap - y_p);
  if (phi_pq < 0.0)
    eta = std::min(eta, (phi_q - phi_p) / (2.0 * phi_pq));
  return std::max(eta, 0.0);
}

SearchResult local_maximizer(const NonUniformHypergraph& g,
                             const WeightVector& lambda, int start_node,
                             const SearchOptions& opts) {
  opts.validate();
  lambda.validate();
  LocalProblem lp(g, lambda, start_node, opts.node_bonus);
  lp.alpha_hat = opts.alpha_hat;

  SearchResult res;
  res.y.start_node = start_node;
  res.y.alpha_hat = opts.alpha_hat;
  res.y.index = lp.index;

  lp.y.assign(static_cast<std::size_t>(lp.m),
              1.0 / static_cast<double>(lp.m));
  lp.recompute();

  if (lp.m < opts.alpha_hat) {
    // Box infeasible: 1/m already exceeds 1/alpha_hat. No step possible.
    res.y.y = lp.y;
    res.theta = lp.theta;
    res.feasible = false;
    res.converged = false;
    res.support = extract_support(lp, opts.eps_part);
    return res;
  }

  const int cap_iters = opts.iter_cap_factor * std::max(lp.m - 1, 1);
  int accepted = 0;
  bool converged = false;
  while (accepted < cap_iters) {
    std::optional<Move> mv = find_move(lp, opts.tol, opts.eps_part);
    if (!mv) {
      // Re-check on freshly recomputed rewards so the convergence
      // certificate holds on exact values, not incrementally drifted ones.
      lp.recompute();
      mv = find_move(lp, opts.tol, opts.eps_part);
      if (!mv) {
        converged = true;
        break;
      }
    }
    lp.transfer(mv->p, mv->q, mv->eta, mv->curv);
    ++accepted;
    if (opts.trace)
      opts.trace->push_back({lp.index[static_cast<std::size_t>(mv->p)],
                             lp.index[static_cast<std::size_t>(mv->q)],
                             mv->eta, lp.theta});
    if (accepted % opts.full_recompute_every == 0) lp.recompute();
    const double sum = lp.mass();
    if (std::abs(sum - 1.0) > 1e-9) {
      for (double& v : lp.y) v /= sum;
      lp.recompute();
    }
  }

  lp.recompute();
  res.y.y = lp.y;
  res.theta = lp.theta;
  res.converged = converged;
  res.iterations = accepted;
  res.support = extract_support(lp, opts.eps_part);
  return res;
}

std::vector<Structure> search_all(const NonUniformHypergraph& g,
                                  const WeightVector& lambda,
                                  const SearchOptions& opts,
                                  bool* all_converged) {
  opts.validate();
  const int n = g.node_count();
  std::vector<SearchResult> slots(static_cast<std::size_t>(n));

  SearchOptions run_opts = opts;
  run_opts.trace = nullptr;  // traces are meaningful per start only
  auto run = [&](int v) {
    slots[static_cast<std::size_t>(v)] = local_maximizer(g, lambda, v, run_opts);
  };

  const int threads = std::min(opts.threads, std::max(n, 1));
  if (threads <= 1 || n <= 1) {
    for (int v = 0; v < n; ++v) run(v);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int v = next.fetch_add(1); v < n; v = next.fetch_add(1)) run(v);
      });
    for (auto& th : pool) th.join();
  }

  std::vector<Structure> out;
  std::map<std::vector<int>, std::size_t> seen;
  for (int v = 0; v < n; ++v) {
    SearchResult& r = slots[static_cast<std::size_t>(v)];
    if (all_converged && r.feasible && !r.converged) *all_converged = false;
    if (!r.feasible) continue;
    auto [it, inserted] = seen.try_emplace(r.support, out.size());
    if (inserted)
      out.push_back({std::move(r.support), r.theta});
    else
      out[it->second].theta = std::max(out[it->second].theta, r.theta);
  }
  return out;
}

double uniform_support_objective(const NonUniformHypergraph& g,
                                 const WeightVector& lambda,
                                 std::span<const int> support) {
  std::vector<int> sorted(support.begin(), support.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.empty()) return 0.0;
  const double frac = 1.0 / static_cast<double>(sorted.size());
  double acc = 0.0;
  for (int d = 1; d <= g.max_degree(); ++d) {
    double mass = 1.0;
    for (int k = 0; k < d; ++k) mass *= frac;
    for (const auto& e : g.edges(d)) {
      if (!std::includes(sorted.begin(), sorted.end(), e.nodes.begin(),
                         e.nodes.end()))
        continue;
      acc += dot_checked(lambda.weights(d), e.affinity, d) * mass;
    }
  }
  return acc;
}

KktReport kkt_certificate(const SearchResult& result,
                          const NonUniformHypergraph& g,
                          const WeightVector& lambda,
                          const SearchOptions& opts) {
  LocalProblem lp = make_problem(g, lambda, result.y, opts.node_bonus);
  lp.alpha_hat = result.y.alpha_hat;

  const double cap = lp.cap();
  std::vector<int> zero, interior, capped;
  for (int i = 0; i < lp.m; ++i) {
    if (i == lp.s) continue;  // the start node is exempt from the test
    const double yi = lp.y[static_cast<std::size_t>(i)];
    if (yi <= opts.eps_part)
      zero.push_back(i);
    else if (yi >= cap - opts.eps_part)
      capped.push_back(i);
    else
      interior.push_back(i);
  }

  KktReport rep;
  if (!interior.empty()) {
    double best = -std::numeric_limits<double>::infinity();
    for (int i : interior) best = std::max(best, lp.phi[static_cast<std::size_t>(i)]);
    rep.a = best;
  } else {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int i : zero) lo = std::max(lo, lp.phi[static_cast<std::size_t>(i)]);
    for (int i : capped) hi = std::min(hi, lp.phi[static_cast<std::size_t>(i)]);
    if (zero.empty() && capped.empty())
      rep.a = 0.0;
    else if (zero.empty())
      rep.a = hi;
    else if (capped.empty())
      rep.a = lo;
    else
      rep.a = (lo + hi) / 2.0;
  }

  double viol = 0.0;
  for (int i : zero)
    viol = std::max(viol, lp.phi[static_cast<std::size_t>(i)] - rep.a);
  for (int i : interior)
    viol = std::max(viol, std::abs(lp.phi[static_cast<std::size_t>(i)] - rep.a));
  for (int i : capped)
    viol = std::max(viol, rep.a - lp.phi[static_cast<std::size_t>(i)]);
  rep.max_violation = std::max(viol, 0.0);
  rep.ok = rep.max_violation <= opts.tol;
  return rep;
}

}  // namespace ntrack

// Python bindings for the tracking core: hypergraph construction, dense
// structure search, the near-online pipeline, weight training, metrics and
// the synthetic scenario generator.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ntrack/affinity.hpp"
#include "ntrack/dense_search.hpp"
#include "ntrack/hypergraph.hpp"
#include "ntrack/io.hpp"
#include "ntrack/learn.hpp"
#include "ntrack/metrics.hpp"
#include "ntrack/pipeline.hpp"
#include "ntrack/synth.hpp"
#include "ntrack/types.hpp"
#include "ntrack/version.hpp"

namespace py = pybind11;
using namespace ntrack;

namespace {

using TrajectoryTuples = std::vector<std::vector<std::tuple<int, double, double>>>;

WeightVector weights_from(const std::vector<std::vector<double>>& rows) {
  WeightVector w;
  w.per_degree = rows;
  w.validate();
  return w;
}

SearchOptions options_from(int alpha_hat, double tol, int iter_cap_factor,
                           int threads) {
  SearchOptions opts;
  opts.alpha_hat = alpha_hat;
  opts.tol = tol;
  opts.iter_cap_factor = iter_cap_factor;
  opts.threads = threads;
  opts.validate();
  return opts;
}

std::vector<PointTrajectory> trajectories_from(const TrajectoryTuples& raw) {
  std::vector<PointTrajectory> out;
  out.reserve(raw.size());
  std::int64_t next_id = 1;
  for (const auto& samples : raw) {
    PointTrajectory t;
    t.id = next_id++;
    for (const auto& [frame, x, y] : samples)
      t.samples.push_back({frame, x, y});
    t.validate();
    out.push_back(std::move(t));
  }
  return out;
}

py::dict report_dict(const metrics::MotReport& mot,
                     const metrics::Idf1Report& idf) {
  py::dict d;
  d["mota"] = mot.mota_defined ? py::cast(mot.mota) : py::none();
  d["motp_iou"] = mot.motp_iou;
  d["motp_norm"] = mot.motp_norm;
  d["mt"] = mot.mt;
  d["ml"] = mot.ml;
  d["fp"] = mot.fp;
  d["fn"] = mot.fn;
  d["ids"] = mot.ids;
  d["fm"] = mot.fm;
  d["gt_total"] = mot.gt_total;
  d["matches"] = mot.matches;
  d["gt_trajectories"] = mot.gt_trajectories;
  d["idf1"] = idf.value;
  d["idtp"] = idf.idtp;
  d["idfp"] = idf.idfp;
  d["idfn"] = idf.idfn;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ntrack, m) {
  m.doc() = "Multi-object tracking by dense-structure search on a "
            "non-uniform hypergraph";
  m.attr("__version__") = kVersion;

  py::register_exception<ValidationError>(m, "ValidationError",
                                          PyExc_ValueError);
  py::register_exception<io::IoError>(m, "IoError", PyExc_OSError);

  py::class_<Detection>(m, "Detection")
      .def(py::init<int, double, double, double, double, double,
                    std::int64_t>(),
           py::arg("frame"), py::arg("cx"), py::arg("cy"), py::arg("width"),
           py::arg("height"), py::arg("confidence") = 1.0,
           py::arg("id") = -1)
      .def_readwrite("frame", &Detection::frame)
      .def_readwrite("cx", &Detection::cx)
      .def_readwrite("cy", &Detection::cy)
      .def_readwrite("width", &Detection::width)
      .def_readwrite("height", &Detection::height)
      .def_readwrite("confidence", &Detection::confidence)
      .def_readwrite("id", &Detection::id)
      .def_readwrite("interpolated", &Detection::interpolated)
      .def_readwrite("embedding", &Detection::embedding)
      .def_readwrite("histogram", &Detection::histogram)
      .def("area", &Detection::area)
      .def("__repr__", [](const Detection& d) {
        std::ostringstream os;
        os << "Detection(frame=" << d.frame << ", cx=" << d.cx
           << ", cy=" << d.cy << ", width=" << d.width
           << ", height=" << d.height << ", confidence=" << d.confidence
           << ", id=" << d.id << ")";
        return os.str();
      });

  py::class_<NonUniformHypergraph>(m, "Hypergraph")
      .def(py::init<int, std::vector<int>>(), py::arg("node_count"),
           py::arg("arity"),
           "arity[d-1] is the affinity vector length for degree d")
      .def("node_count", &NonUniformHypergraph::node_count)
      .def("max_degree", &NonUniformHypergraph::max_degree)
      .def("arity_of", &NonUniformHypergraph::arity_of, py::arg("degree"))
      .def("add_edge", &NonUniformHypergraph::add_edge, py::arg("nodes"),
           py::arg("affinity"),
           "Returns False when the canonical tuple already exists")
      .def("edge_count",
           py::overload_cast<>(&NonUniformHypergraph::edge_count, py::const_))
      .def("edge_count",
           py::overload_cast<int>(&NonUniformHypergraph::edge_count,
                                  py::const_),
           py::arg("degree"))
      .def(
          "edges",
          [](const NonUniformHypergraph& g, int degree) {
            std::vector<std::pair<std::vector<int>, std::vector<double>>> out;
            for (const auto& e : g.edges(degree))
              out.push_back({e.nodes, e.affinity});
            return out;
          },
          py::arg("degree"),
          "List of (nodes, affinity) pairs in insertion order")
      .def("neighbors", &NonUniformHypergraph::neighbors, py::arg("node"),
           "Nodes sharing any edge of degree >= 2 with the given node");

  m.def("default_weights",
        [] { return WeightVector::defaults().per_degree; },
        "Shipped per-degree weights (D = 4, arity 1/3/1/1)");

  m.def(
      "search_all",
      [](const NonUniformHypergraph& g,
         const std::vector<std::vector<double>>& weights, int alpha_hat,
         double tol, int iter_cap_factor, int threads) {
        bool all_converged = true;
        std::vector<Structure> found =
            search_all(g, weights_from(weights),
                       options_from(alpha_hat, tol, iter_cap_factor, threads),
                       &all_converged);
        py::list out;
        for (const Structure& s : found) {
          py::dict d;
          d["support"] = s.support;
          d["theta"] = s.theta;
          out.append(d);
        }
        return py::make_tuple(out, all_converged);
      },
      py::arg("graph"), py::arg("weights"), py::arg("alpha_hat") = 2,
      py::arg("tol") = 1e-7, py::arg("iter_cap_factor") = 50,
      py::arg("threads") = 1,
      "Dense-structure search from every start node; returns "
      "([{support, theta}, ...], all_converged)");

  m.def(
      "local_maximizer",
      [](const NonUniformHypergraph& g,
         const std::vector<std::vector<double>>& weights, int start,
         int alpha_hat, double tol, int iter_cap_factor) {
        SearchResult r =
            local_maximizer(g, weights_from(weights), start,
                            options_from(alpha_hat, tol, iter_cap_factor, 1));
        py::dict d;
        d["support"] = r.support;
        d["theta"] = r.theta;
        d["converged"] = r.converged;
        d["feasible"] = r.feasible;
        d["iterations"] = r.iterations;
        d["index"] = r.y.index;
        d["y"] = r.y.y;
        return d;
      },
      py::arg("graph"), py::arg("weights"), py::arg("start"),
      py::arg("alpha_hat") = 2, py::arg("tol") = 1e-7,
      py::arg("iter_cap_factor") = 50,
      "Pairwise-ascent run from one start node");

  m.def(
      "support_objective",
      [](const NonUniformHypergraph& g,
         const std::vector<std::vector<double>>& weights,
         const std::vector<int>& support) {
        return uniform_support_objective(g, weights_from(weights), support);
      },
      py::arg("graph"), py::arg("weights"), py::arg("support"),
      "Objective of the uniform indicator over a discrete support");

  m.def(
      "track",
      [](std::vector<Detection> detections, const TrajectoryTuples& points,
         const std::vector<std::vector<float>>& embeddings,
         const std::string& config_path, int threads) {
        io::Config cfg = config_path.empty() ? io::Config{}
                                             : io::read_config(config_path);
        if (threads > 0) cfg.threads = threads;
        if (!embeddings.empty()) io::attach_embeddings(detections, embeddings);
        MotionContext ctx(trajectories_from(points));
        RunStats stats;
        std::vector<Trajectory> tracks =
            run_sequence(detections, ctx, cfg.pipeline(), &stats);
        return py::make_tuple(trajectories_to_rows(tracks),
                              stats.all_converged);
      },
      py::arg("detections"), py::arg("points") = TrajectoryTuples{},
      py::arg("embeddings") = std::vector<std::vector<float>>{},
      py::arg("config_path") = std::string(), py::arg("threads") = 0,
      "Near-online tracking; returns (result rows, all_converged). Points "
      "are per-trajectory lists of (frame, x, y) samples.");

  m.def(
      "evaluate",
      [](const std::vector<Detection>& results,
         const std::vector<Detection>& gt, double iou) {
        return report_dict(metrics::clear_mot(results, gt, iou),
                           metrics::idf1(results, gt, iou));
      },
      py::arg("results"), py::arg("gt"), py::arg("iou") = 0.5,
      "CLEAR-MOT and identity-F1 report as a dict");

  m.def(
      "synthesize",
      [](const std::string& scenario, std::uint64_t seed) {
        synth::Scenario sc = synth::generate_scenario(scenario, seed);
        py::dict d;
        d["detections"] = sc.detections;
        d["ground_truth"] = sc.ground_truth;
        d["embeddings"] = sc.embeddings;
        TrajectoryTuples points;
        for (const PointTrajectory& t : sc.trajectories) {
          std::vector<std::tuple<int, double, double>> samples;
          for (const auto& s : t.samples)
            samples.push_back({s.frame, s.x, s.y});
          points.push_back(std::move(samples));
        }
        d["trajectories"] = points;
        return d;
      },
      py::arg("scenario"), py::arg("seed") = 1,
      "Generate a synthetic scenario (cross2, cross4-occl, parallel2, "
      "vanish1)");

  m.def("scenario_names", &synth::scenario_names);

  m.def(
      "train_weights",
      [](std::vector<std::pair<NonUniformHypergraph, std::vector<int>>>
             instances,
         double C, double eps_stop, int max_rounds, double qp_gap) {
        std::vector<TrainingInstance> built;
        for (auto& [graph, labels] : instances) {
          if (static_cast<int>(labels.size()) != graph.node_count())
            throw ValidationError("labels must have one entry per node");
          std::vector<std::pair<std::int64_t, int>> raw;
          for (std::size_t v = 0; v < labels.size(); ++v)
            raw.push_back({static_cast<std::int64_t>(v), labels[v]});
          built.push_back(TrainingInstance{
              std::move(graph), Labeling::from_assignments(std::move(raw)),
              {}});
        }
        TrainOptions opts;
        opts.C = C;
        opts.eps_stop = eps_stop;
        opts.max_rounds = max_rounds;
        opts.qp_gap = qp_gap;
        TrainResult r = train(built, opts);
        py::dict d;
        d["weights"] = r.lambda.per_degree;
        d["total_slack"] = r.total_slack;
        d["rounds"] = r.rounds;
        d["converged"] = r.converged;
        return d;
      },
      py::arg("instances"), py::arg("C") = 1.0, py::arg("eps_stop") = 1e-3,
      py::arg("max_rounds") = 200, py::arg("qp_gap") = 1e-8,
      "Cutting-plane training; instances are (graph, per-node labels) "
      "pairs with labels 1..k");

  m.def(
      "structured_score",
      [](const std::vector<std::vector<double>>& weights,
         const std::vector<int>& labels, const NonUniformHypergraph& g) {
        std::vector<std::pair<std::int64_t, int>> raw;
        for (std::size_t v = 0; v < labels.size(); ++v)
          if (labels[v] > 0)
            raw.push_back({static_cast<std::int64_t>(v), labels[v]});
        return structured_score(weights_from(weights),
                                Labeling::from_assignments(std::move(raw)), g);
      },
      py::arg("weights"), py::arg("labels"), py::arg("graph"),
      "Linear score of a labeling (label 0 = unassigned)");
}

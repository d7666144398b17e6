// ntrack command-line front end: track / search / learn / eval / synth.
// Exit codes: 0 success, 2 usage error, 3 input format error,
// 4 non-convergence (partial output is still written).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ntrack/graph_builder.hpp"
#include "ntrack/io.hpp"
#include "ntrack/learn.hpp"
#include "ntrack/metrics.hpp"
#include "ntrack/oracle.hpp"
#include "ntrack/pipeline.hpp"
#include "ntrack/synth.hpp"
#include "ntrack/version.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitFormat = 3;
constexpr int kExitNoConverge = 4;

struct TrackArgs {
  std::string det, emb, pts, config, out, dump_graphs;
  int threads = 0;
};

struct SearchArgs {
  std::string graph, weights, out;
  int alpha_hat = 2;
  int threads = 0;
  bool brute_force = false;
};

struct LearnArgs {
  std::string train_dir, config, out_weights;
  int threads = 0;
};

struct EvalArgs {
  std::string results, gt, report;
  double iou = 0.5;
};

struct SynthArgs {
  std::string scenario, out_dir;
  unsigned long long seed = 1;
};

int run_track(const TrackArgs& a) {
  std::vector<ntrack::Detection> dets = ntrack::io::read_motchallenge(a.det);
  if (!a.emb.empty())
    ntrack::io::attach_embeddings(dets, ntrack::io::read_embeddings(a.emb));
  ntrack::MotionContext ctx(a.pts.empty()
                                ? std::vector<ntrack::PointTrajectory>{}
                                : ntrack::io::read_trajectories(a.pts));
  ntrack::io::Config cfg =
      a.config.empty() ? ntrack::io::Config{} : ntrack::io::read_config(a.config);
  if (a.threads > 0) cfg.threads = a.threads;
  const ntrack::io::FileMeta meta{ntrack::kVersion, ntrack::io::config_hash(cfg)};

  ntrack::GraphHook hook;
  if (!a.dump_graphs.empty()) {
    fs::create_directories(a.dump_graphs);
    hook = [&](int window_start, const ntrack::NonUniformHypergraph& g) {
      char name[32];
      std::snprintf(name, sizeof name, "window_%06d.graph", window_start);
      ntrack::io::write_hypergraph(a.dump_graphs + "/" + name, g, meta);
    };
  }

  ntrack::RunStats stats;
  std::vector<ntrack::Trajectory> trajectories =
      ntrack::run_sequence(dets, ctx, cfg.pipeline(), &stats, hook);
  ntrack::io::write_motchallenge(
      a.out, ntrack::trajectories_to_rows(trajectories), meta);
  if (!stats.all_converged) {
    std::cerr << "warning: search hit its iteration cap in at least one "
                 "window; results written anyway\n";
    return kExitNoConverge;
  }
  return kExitOk;
}

int run_search(const SearchArgs& a) {
  ntrack::NonUniformHypergraph g = ntrack::io::read_hypergraph(a.graph);
  ntrack::io::WeightsFile wf = ntrack::io::read_weights(a.weights);
  const ntrack::io::FileMeta meta{
      ntrack::kVersion, wf.meta.config_hash.empty()
                            ? ntrack::io::config_hash(ntrack::io::Config{})
                            : wf.meta.config_hash};

  std::vector<ntrack::Structure> structures;
  bool converged = true;
  if (a.brute_force) {
    std::optional<ntrack::Structure> best =
        ntrack::oracle::brute_force_dense(g, wf.weights, a.alpha_hat);
    if (best) structures.push_back(std::move(*best));
  } else {
    ntrack::SearchOptions opts;
    opts.alpha_hat = a.alpha_hat;
    if (a.threads > 0) opts.threads = a.threads;
    structures = ntrack::search_all(g, wf.weights, opts, &converged);
  }
  ntrack::io::write_structures(a.out, structures, meta);
  return converged ? kExitOk : kExitNoConverge;
}

int run_learn(const LearnArgs& a) {
  ntrack::io::Config cfg = ntrack::io::read_config(a.config);
  if (a.threads > 0) cfg.threads = a.threads;

  const std::string det_path = a.train_dir + "/det.txt";
  const std::string gt_path = a.train_dir + "/gt.txt";
  std::vector<ntrack::Detection> dets = ntrack::io::read_motchallenge(det_path);
  std::vector<ntrack::Detection> gt = ntrack::io::read_motchallenge(gt_path);
  const std::string emb_path = a.train_dir + "/emb.bin";
  if (fs::exists(emb_path))
    ntrack::io::attach_embeddings(dets, ntrack::io::read_embeddings(emb_path));
  const std::string pts_path = a.train_dir + "/pts.txt";
  ntrack::MotionContext ctx(fs::exists(pts_path)
                                ? ntrack::io::read_trajectories(pts_path)
                                : std::vector<ntrack::PointTrajectory>{});

  ntrack::BuildConfig build = cfg.build;
  build.threads = cfg.threads;
  build = ntrack::resolve_max_velocity(build, dets);
  ntrack::ClipOptions clip{cfg.clip_length, cfg.gt_min_overlap};
  std::vector<ntrack::TrainingInstance> instances =
      ntrack::make_training_instances(dets, gt, ctx, build, clip);
  if (instances.empty())
    throw ntrack::io::IoError(a.train_dir +
                              ": no usable training clips (need >= 2 "
                              "ground-truth-matched detections per clip)");
  std::cout << "training on " << instances.size() << " clips\n";

  ntrack::TrainOptions opts;
  opts.C = cfg.svm_c;
  opts.eps_stop = cfg.eps_stop;
  opts.max_rounds = cfg.max_rounds;
  opts.qp_gap = cfg.qp_gap;
  opts.search = cfg.search;
  opts.search.threads = cfg.threads;
  opts.log = &std::cout;

  ntrack::TrainResult result = ntrack::train(instances, opts);
  ntrack::io::write_weights(a.out_weights, result.lambda,
                            {ntrack::kVersion, ntrack::io::config_hash(cfg)});
  std::cout << "rounds " << result.rounds << " total_slack "
            << ntrack::io::format_double(result.total_slack) << "\n";
  if (!result.converged) {
    std::cerr << "warning: cutting-plane training stopped at the round "
                 "limit; weights written anyway\n";
    return kExitNoConverge;
  }
  return kExitOk;
}

int run_eval(const EvalArgs& a) {
  std::vector<ntrack::Detection> results =
      ntrack::io::read_motchallenge(a.results);
  std::vector<ntrack::Detection> gt = ntrack::io::read_motchallenge(a.gt);
  ntrack::metrics::MotReport mot = ntrack::metrics::clear_mot(results, gt, a.iou);
  ntrack::metrics::Idf1Report idf = ntrack::metrics::idf1(results, gt, a.iou);
  ntrack::io::Config cfg;
  cfg.iou_threshold = a.iou;
  ntrack::io::write_report(a.report, mot, idf,
                           {ntrack::kVersion, ntrack::io::config_hash(cfg)});
  std::cout << ntrack::io::report_table(mot, idf);
  return kExitOk;
}

int run_synth(const SynthArgs& a) {
  ntrack::synth::Scenario sc =
      ntrack::synth::generate_scenario(a.scenario, a.seed);
  fs::create_directories(a.out_dir);
  const ntrack::io::FileMeta meta{
      ntrack::kVersion, ntrack::synth::scenario_hash(a.scenario, a.seed)};
  ntrack::io::write_motchallenge(a.out_dir + "/det.txt", sc.detections, meta);
  ntrack::io::write_motchallenge(a.out_dir + "/gt.txt", sc.ground_truth, meta);
  ntrack::io::write_embeddings(a.out_dir + "/emb.bin", sc.embeddings);
  ntrack::io::write_trajectories(a.out_dir + "/pts.txt", sc.trajectories,
                                 meta);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ntrack " + std::string(ntrack::kVersion) +
               " - multi-object tracking by dense-structure search on a "
               "non-uniform hypergraph"};
  app.require_subcommand(1);

  TrackArgs track_args;
  CLI::App* track = app.add_subcommand(
      "track", "Track a detection file and write MOTChallenge results");
  track->add_option("--det", track_args.det, "detections (MOTChallenge CSV)")
      ->required();
  track->add_option("--emb", track_args.emb,
                    "per-detection embeddings (NTEMB1 binary)");
  track->add_option("--pts", track_args.pts,
                    "feature-point trajectories (CSV)");
  track->add_option("--config", track_args.config, "JSON config file");
  track->add_option("--out", track_args.out, "output results file")
      ->required();
  track->add_option("--dump-graphs", track_args.dump_graphs,
                    "directory for per-window hypergraph dumps");
  track->add_option("--threads", track_args.threads,
                    "worker threads (overrides config)");

  SearchArgs search_args;
  CLI::App* search = app.add_subcommand(
      "search", "Dense-structure search on a hypergraph dump");
  search->add_option("--graph", search_args.graph, "hypergraph dump file")
      ->required();
  search->add_option("--weights", search_args.weights, "weights file")
      ->required();
  search->add_option("--alpha-hat", search_args.alpha_hat,
                     "minimum structure size (default 2)");
  search->add_option("--out", search_args.out, "output structures file")
      ->required();
  search->add_option("--threads", search_args.threads, "worker threads");
  search->add_flag("--brute-force", search_args.brute_force)->group("");

  LearnArgs learn_args;
  CLI::App* learn = app.add_subcommand(
      "learn", "Train per-degree weights with a structural SVM");
  learn
      ->add_option("--train-dir", learn_args.train_dir,
                   "directory with det.txt, gt.txt and optional emb.bin, "
                   "pts.txt")
      ->required();
  learn->add_option("--config", learn_args.config, "JSON config file")
      ->required();
  learn->add_option("--out-weights", learn_args.out_weights,
                    "output weights file")
      ->required();
  learn->add_option("--threads", learn_args.threads,
                    "worker threads (overrides config)");

  EvalArgs eval_args;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "Score results against ground truth");
  eval_cmd->add_option("--results", eval_args.results, "tracker results file")
      ->required();
  eval_cmd->add_option("--gt", eval_args.gt, "ground-truth file")->required();
  eval_cmd->add_option("--iou", eval_args.iou,
                       "IoU match threshold (default 0.5)");
  eval_cmd->add_option("--report", eval_args.report, "output report (JSON)")
      ->required();

  SynthArgs synth_args;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "Generate a synthetic tracking scenario");
  synth_cmd
      ->add_option("--scenario", synth_args.scenario,
                   "one of: cross2, cross4-occl, parallel2, vanish1")
      ->required()
      ->check(CLI::IsMember(ntrack::synth::scenario_names()));
  synth_cmd->add_option("--seed", synth_args.seed, "RNG seed (default 1)");
  synth_cmd->add_option("--out-dir", synth_args.out_dir, "output directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*track) return run_track(track_args);
    if (*search) return run_search(search_args);
    if (*learn) return run_learn(learn_args);
    if (*eval_cmd) return run_eval(eval_args);
    if (*synth_cmd) return run_synth(synth_args);
  } catch (const ntrack::io::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const ntrack::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "ntrack/io.hpp"
#include "support/fixtures.hpp"

using namespace ntrack;
namespace fs = std::filesystem;

namespace {

// Unique scratch directory per process, wiped lazily by the OS tmp reaper.
fs::path scratch() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() /
                 ("ntrack-io-test-" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string path_of(const std::string& name) {
  return (scratch() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

void spit(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
}

io::FileMeta meta() { return {"0.0.test", "0123456789abcdef"}; }

}  // namespace

TEST_SUITE("io") {

TEST_CASE("format_double round-trips exactly") {
  std::mt19937_64 rng(601);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 2000; ++i) {
    double x = u(rng);
    if (i % 7 == 0) x = x / 1e9;
    if (i % 11 == 0) x = x * 1e12;
    CHECK(std::stod(io::format_double(x)) == x);
  }
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(io::format_double(1.0) == "1");
  CHECK(io::format_double(-0.0).size() <= 2);
}

TEST_CASE("hash_hex is stable FNV-1a") {
  CHECK(io::hash_hex("") == "cbf29ce484222325");
  CHECK(io::hash_hex("a") == "af63dc4c8601ec8c");
  CHECK(io::hash_hex("hello") == io::hash_hex("hello"));
  CHECK(io::hash_hex("hello") != io::hash_hex("hellp"));
  CHECK(io::hash_hex("x").size() == 16);
}

TEST_CASE("MOT rows round-trip byte-identically") {
  // Friendly grid values: left/top/center conversions stay exact.
  std::vector<Detection> rows;
  for (int f = 0; f < 3; ++f)
    for (int i = 0; i < 2; ++i)
      rows.push_back(testfix::det(f, 10.0 * f + 100.0 * i, 50.0 + 0.25 * f,
                                  12.0, 24.0, 0.875, i + 1));
  const std::string p1 = path_of("a.csv");
  const std::string p2 = path_of("b.csv");
  io::write_motchallenge(p1, rows, meta());
  std::vector<Detection> back = io::read_motchallenge(p1);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].frame == rows[i].frame);
    CHECK(back[i].cx == rows[i].cx);
    CHECK(back[i].cy == rows[i].cy);
    CHECK(back[i].width == rows[i].width);
    CHECK(back[i].height == rows[i].height);
    CHECK(back[i].confidence == rows[i].confidence);
    CHECK(back[i].id == rows[i].id);
  }
  io::write_motchallenge(p2, back, meta());
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("MOT reader rejects malformed rows") {
  const std::string p = path_of("bad.csv");
  spit(p, "1,1,0,0,10,10,1,-1,-1,-1\n0,1,0,0,10,10,1,-1,-1,-1\n");
  CHECK_THROWS_AS(io::read_motchallenge(p), io::IoError);  // frame order
  spit(p, "1,1,0,0,10,10\n");
  CHECK_THROWS_AS(io::read_motchallenge(p), io::IoError);  // missing fields
  spit(p, "1,1,0,0,10,oops,1,-1,-1,-1\n");
  CHECK_THROWS_AS(io::read_motchallenge(p), io::IoError);  // non-numeric
  CHECK_THROWS_AS(io::read_motchallenge(path_of("missing.csv")), io::IoError);

  // Comments and 1-based frames are handled.
  spit(p, "# header\n3,7,0,0,10,10,0.5,-1,-1,-1\n");
  std::vector<Detection> rows = io::read_motchallenge(p);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].frame == 2);
  CHECK(rows[0].id == 7);
  CHECK(rows[0].cx == 5.0);
}

TEST_CASE("embedding and histogram files round-trip") {
  std::vector<std::vector<float>> rows = {
      {1.0f, 2.0f, 3.0f}, {0.25f, -0.5f, 4.0f}, {0.0f, 0.0f, 1.0f}};
  const std::string p = path_of("e.bin");
  io::write_embeddings(p, rows);
  CHECK(io::read_embeddings(p) == rows);

  const std::string h = path_of("h.bin");
  io::write_histograms(h, rows);
  CHECK(io::read_histograms(h) == rows);

  // Magic mismatch: a histogram file is not an embedding file.
  CHECK_THROWS_AS(io::read_embeddings(h), io::IoError);
  CHECK_THROWS_AS(io::read_histograms(p), io::IoError);

  // Truncated payload.
  std::string raw = slurp(p);
  spit(p, raw.substr(0, raw.size() - 3));
  CHECK_THROWS_AS(io::read_embeddings(p), io::IoError);
}

TEST_CASE("feature attachment requires one row per detection") {
  std::vector<Detection> dets = {testfix::det(0, 0, 0),
                                 testfix::det(1, 5, 0)};
  std::vector<std::vector<float>> rows = {{1.0f}, {2.0f}};
  io::attach_embeddings(dets, rows);
  CHECK(dets[0].embedding.has_value());
  CHECK((*dets[1].embedding)[0] == 2.0f);
  rows.pop_back();
  CHECK_THROWS_AS(io::attach_embeddings(dets, rows), io::IoError);
  CHECK_THROWS_AS(io::attach_histograms(dets, rows), io::IoError);
}

TEST_CASE("point trajectories round-trip") {
  std::vector<PointTrajectory> ts(2);
  ts[0].id = 3;
  ts[0].samples = {{0, 1.5, 2.5}, {1, 2.0, 3.0}};
  ts[1].id = 9;
  ts[1].samples = {{4, -1.0, 0.25}, {5, 0.0, 0.5}, {6, 1.0, 0.75}};
  const std::string p = path_of("t.csv");
  io::write_trajectories(p, ts, meta());
  std::vector<PointTrajectory> back = io::read_trajectories(p);
  REQUIRE(back.size() == 2);
  CHECK(back[0].id == 3);
  CHECK(back[1].samples.size() == 3);
  CHECK(back[1].samples[2].x == 1.0);
  CHECK(back[1].samples[0].frame == 4);

  const std::string p2 = path_of("t2.csv");
  io::write_trajectories(p2, back, meta());
  CHECK(slurp(p) == slurp(p2));

  spit(p, "1,2,0,0\n1,1,0,0\n");  // frames must increase per trajectory
  CHECK_THROWS_AS(io::read_trajectories(p), io::IoError);
}

TEST_CASE("hypergraph dump round-trips bit-exactly") {
  std::mt19937_64 rng(607);
  NonUniformHypergraph g = testfix::random_graph(rng, 7, 4);
  const std::string p1 = path_of("g1.txt");
  const std::string p2 = path_of("g2.txt");
  io::write_hypergraph(p1, g, meta());
  NonUniformHypergraph back = io::read_hypergraph(p1);
  CHECK(back.node_count() == g.node_count());
  CHECK(back.arity() == g.arity());
  for (int d = 1; d <= g.max_degree(); ++d) {
    REQUIRE(back.edge_count(d) == g.edge_count(d));
    for (std::size_t i = 0; i < g.edge_count(d); ++i) {
      CHECK(back.edge(d, static_cast<int>(i)).nodes ==
            g.edge(d, static_cast<int>(i)).nodes);
      CHECK(back.edge(d, static_cast<int>(i)).affinity ==
            g.edge(d, static_cast<int>(i)).affinity);
    }
  }
  io::write_hypergraph(p2, back, meta());
  CHECK(slurp(p1) == slurp(p2));

  spit(p1, "NTGRAPH9\n");
  CHECK_THROWS_AS(io::read_hypergraph(p1), io::IoError);
  spit(p1, "NTGRAPH1\n2 2\n1 3\n2 0 3 0.5 0.5 0.5\n");  // node 3 of 2
  CHECK_THROWS_AS(io::read_hypergraph(p1), io::IoError);
}

TEST_CASE("weights files carry provenance and round-trip") {
  WeightVector w = WeightVector::defaults();
  const std::string p = path_of("w.txt");
  io::write_weights(p, w, {"1.2.3", "deadbeefdeadbeef"});
  io::WeightsFile back = io::read_weights(p);
  CHECK(back.weights.per_degree == w.per_degree);
  CHECK(back.meta.tool_version == "1.2.3");
  CHECK(back.meta.config_hash == "deadbeefdeadbeef");

  spit(p, "1: 0.5\n3: 0.5\n");  // degree 2 missing
  CHECK_THROWS_AS(io::read_weights(p), io::IoError);
}

TEST_CASE("structure dumps are stable") {
  std::vector<Structure> s = {{{0, 2, 5}, 1.5}, {{1, 3}, 0.25}};
  const std::string p = path_of("s.txt");
  io::write_structures(p, s, meta());
  const std::string body = slurp(p);
  CHECK(body.find("3 0 2 5 1.5") != std::string::npos);
  CHECK(body.find("2 1 3 0.25") != std::string::npos);
}

TEST_CASE("config JSON is canonical and hash-stable") {
  io::Config cfg;
  const std::string j1 = io::config_json(cfg);
  const std::string j2 = io::config_json(cfg);
  CHECK(j1 == j2);
  CHECK(io::config_hash(cfg).size() == 16);
  CHECK(io::config_hash(cfg) == io::hash_hex(j1));

  io::Config other;
  other.tau = 9;
  CHECK(io::config_hash(other) != io::config_hash(cfg));

  const std::string p = path_of("c.json");
  io::write_config(p, cfg);
  io::Config back = io::read_config(p);
  CHECK(io::config_hash(back) == io::config_hash(cfg));
  CHECK(back.tau == cfg.tau);
  CHECK(back.weights.per_degree == cfg.weights.per_degree);
  CHECK(back.search.alpha_hat == cfg.search.alpha_hat);

  // Partial configs keep defaults; unknown keys are rejected.
  spit(p, "{\"pipeline\": {\"tau\": 5}}\n");
  CHECK(io::read_config(p).tau == 5);
  CHECK(io::read_config(p).clip_length == 14);
  spit(p, "{\"pipeline\": {\"tav\": 5}}\n");
  CHECK_THROWS_AS(io::read_config(p), io::IoError);
  spit(p, "{\"taw\": 5}\n");
  CHECK_THROWS_AS(io::read_config(p), io::IoError);
  spit(p, "{\"pipeline\": {\"tau\": \"seven\"}}\n");
  CHECK_THROWS_AS(io::read_config(p), io::IoError);
}

TEST_CASE("default weights match the shipped values") {
  const WeightVector w = WeightVector::defaults();
  REQUIRE(w.max_degree() == 4);
  CHECK(w.per_degree[0] == std::vector<double>{0.58535});
  CHECK(w.per_degree[1] == std::vector<double>{0.15576, 3.0332, 0.34388});
  CHECK(w.per_degree[2] == std::vector<double>{1.2879});
  CHECK(w.per_degree[3] == std::vector<double>{0.22324});
}

TEST_CASE("report output contains both MOTP variants") {
  metrics::MotReport mot;
  mot.mota_defined = true;
  mot.mota = 0.8;
  mot.motp_iou = 0.9;
  mot.motp_norm = 0.2;
  mot.gt_total = 10;
  metrics::Idf1Report id;
  id.value = 2.0 / 3.0;
  const std::string table = io::report_table(mot, id);
  CHECK(table.find("MOTA") != std::string::npos);
  CHECK(table.find("IDF1") != std::string::npos);
  CHECK(table.find("0.8") != std::string::npos);

  const std::string p = path_of("r.json");
  io::write_report(p, mot, id, meta());
  const std::string body = slurp(p);
  CHECK(body.find("\"mota\"") != std::string::npos);
  CHECK(body.find("\"motp_iou\"") != std::string::npos);
  CHECK(body.find("\"motp_norm\"") != std::string::npos);
  CHECK(body.find("\"idf1\"") != std::string::npos);

  metrics::MotReport undefined;
  io::write_report(p, undefined, id, meta());
  CHECK(slurp(p).find("null") != std::string::npos);
}

}  // TEST_SUITE

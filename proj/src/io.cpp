#include "ntrack/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string_view>
#include <utility>

#include "json.hpp"
#include "ntrack/version.hpp"

namespace ntrack {
namespace io {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, int line,
                       const std::string& msg) {
  throw IoError(path + ":" + std::to_string(line) + ": " + msg);
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(s.substr(start)));
      return out;
    }
    out.push_back(trim(s.substr(start, pos - start)));
    start = pos + 1;
  }
}

long long parse_int(std::string_view tok, const std::string& path, int line,
                    const char* what) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    fail(path, line, std::string("bad ") + what + " '" + std::string(tok) +
                         "' (expected integer)");
  return v;
}

double parse_num(std::string_view tok, const std::string& path, int line,
                 const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    fail(path, line, std::string("bad ") + what + " '" + std::string(tok) +
                         "' (expected number)");
  return v;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError(path + ": cannot open for writing");
  return out;
}

void finish_out(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError(path + ": write failed");
}

std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw IoError(path + ": cannot open");
  return in;
}

// If the comment is a provenance header ("# ntrack <ver> config <hash>"),
// record it.
void scan_meta(std::string_view line, FileMeta& meta) {
  std::vector<std::string_view> tok = split_ws(line);
  if (tok.size() == 5 && tok[0] == "#" && tok[1] == "ntrack" &&
      tok[3] == "config") {
    meta.tool_version = std::string(tok[2]);
    meta.config_hash = std::string(tok[4]);
  }
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

// ---- binary feature files --------------------------------------------------

constexpr std::size_t kMagicLen = 6;
constexpr std::size_t kFeatureHeaderLen = kMagicLen + 8;

std::vector<std::vector<float>> read_feature_file(const std::string& path,
                                                  const char* magic) {
  std::ifstream in = open_in(path, /*binary=*/true);
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (data.size() < kFeatureHeaderLen)
    throw IoError(path + ": truncated header");
  if (data.compare(0, kMagicLen, magic) != 0)
    throw IoError(path + ": bad magic (expected " + std::string(magic) + ")");
  const auto* p = reinterpret_cast<const unsigned char*>(data.data());
  auto get_u32 = [&](std::size_t off) {
    return static_cast<std::uint32_t>(p[off]) |
           static_cast<std::uint32_t>(p[off + 1]) << 8 |
           static_cast<std::uint32_t>(p[off + 2]) << 16 |
           static_cast<std::uint32_t>(p[off + 3]) << 24;
  };
  const std::uint64_t count = get_u32(kMagicLen);
  const std::uint64_t dim = get_u32(kMagicLen + 4);
  const std::uint64_t expected = kFeatureHeaderLen + 4 * count * dim;
  if (data.size() != expected)
    throw IoError(path + ": size mismatch (expected " +
                  std::to_string(expected) + " bytes for " +
                  std::to_string(count) + "x" + std::to_string(dim) +
                  ", got " + std::to_string(data.size()) + ")");
  std::vector<std::vector<float>> rows(count);
  std::size_t off = kFeatureHeaderLen;
  for (auto& row : rows) {
    row.resize(dim);
    for (std::uint64_t k = 0; k < dim; ++k, off += 4)
      row[k] = std::bit_cast<float>(get_u32(off));
  }
  return rows;
}

void write_feature_file(const std::string& path, const char* magic,
                        const std::vector<std::vector<float>>& rows) {
  const std::size_t dim = rows.empty() ? 0 : rows.front().size();
  for (const auto& row : rows)
    if (row.size() != dim)
      throw IoError(path + ": rows must share one dimension");
  std::string data;
  data.reserve(kFeatureHeaderLen + 4 * rows.size() * dim);
  data.append(magic, kMagicLen);
  auto put_u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
      data.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  put_u32(static_cast<std::uint32_t>(rows.size()));
  put_u32(static_cast<std::uint32_t>(dim));
  for (const auto& row : rows)
    for (float x : row) put_u32(std::bit_cast<std::uint32_t>(x));
  std::ofstream out = open_out(path, /*binary=*/true);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  finish_out(out, path);
}

// ---- config plumbing -------------------------------------------------------

// Pulls `key` out of a working copy of the object, so leftovers can be
// reported as unknown keys.
template <typename T>
void take(json& obj, const char* key, T& out, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw IoError(path + ": key '" + key + "': " + e.what());
  }
  obj.erase(it);
}

void reject_unknown(const json& obj, const char* scope,
                    const std::string& path) {
  if (obj.empty()) return;
  throw IoError(path + ": unknown key '" + obj.begin().key() + "' in " +
                scope);
}

json histogram_json(const HistogramLayout& h) {
  return json{{"h_bins", h.h_bins}, {"s_bins", h.s_bins}, {"v_bins", h.v_bins}};
}

json build_json(const BuildConfig& b) {
  return json{{"max_degree", b.max_degree},
              {"max_velocity", b.max_velocity},
              {"max_frame_gap", b.max_frame_gap},
              {"knn_k", b.knn_k},
              {"max_hyperedges_per_node", b.max_hyperedges_per_node},
              {"histogram", histogram_json(b.histogram)},
              {"prune_zero_affinity", b.prune_zero_affinity},
              {"zero_affinity_eps", b.zero_affinity_eps}};
}

json search_json(const SearchOptions& s) {
  return json{{"alpha_hat", s.alpha_hat},
              {"tol", s.tol},
              {"eps_part", s.eps_part},
              {"iter_cap_factor", s.iter_cap_factor},
              {"full_recompute_every", s.full_recompute_every}};
}

json config_to_json(const Config& cfg) {
  json j;
  j["build"] = build_json(cfg.build);
  j["search"] = search_json(cfg.search);
  j["pipeline"] = json{{"tau", cfg.tau},
                       {"target_patience", cfg.target_patience},
                       {"duplicate_iou", cfg.duplicate_iou}};
  j["learn"] = json{{"svm_c", cfg.svm_c},
                    {"eps_stop", cfg.eps_stop},
                    {"max_rounds", cfg.max_rounds},
                    {"qp_gap", cfg.qp_gap},
                    {"clip_length", cfg.clip_length},
                    {"gt_min_overlap", cfg.gt_min_overlap}};
  j["metrics"] = json{{"iou_threshold", cfg.iou_threshold}};
  j["threads"] = cfg.threads;
  j["weights"] = cfg.weights.per_degree;
  return j;
}

Config config_from_json(json j, const std::string& path) {
  if (!j.is_object()) throw IoError(path + ": config must be a JSON object");
  Config cfg;

  json build = j.value("build", json::object());
  j.erase("build");
  if (!build.is_object()) throw IoError(path + ": 'build' must be an object");
  take(build, "max_degree", cfg.build.max_degree, path);
  take(build, "max_velocity", cfg.build.max_velocity, path);
  take(build, "max_frame_gap", cfg.build.max_frame_gap, path);
  take(build, "knn_k", cfg.build.knn_k, path);
  take(build, "max_hyperedges_per_node", cfg.build.max_hyperedges_per_node,
       path);
  take(build, "prune_zero_affinity", cfg.build.prune_zero_affinity, path);
  take(build, "zero_affinity_eps", cfg.build.zero_affinity_eps, path);
  json hist = build.value("histogram", json::object());
  build.erase("histogram");
  if (!hist.is_object())
    throw IoError(path + ": 'build.histogram' must be an object");
  take(hist, "h_bins", cfg.build.histogram.h_bins, path);
  take(hist, "s_bins", cfg.build.histogram.s_bins, path);
  take(hist, "v_bins", cfg.build.histogram.v_bins, path);
  reject_unknown(hist, "build.histogram", path);
  reject_unknown(build, "build", path);

  json search = j.value("search", json::object());
  j.erase("search");
  if (!search.is_object())
    throw IoError(path + ": 'search' must be an object");
  take(search, "alpha_hat", cfg.search.alpha_hat, path);
  take(search, "tol", cfg.search.tol, path);
  take(search, "eps_part", cfg.search.eps_part, path);
  take(search, "iter_cap_factor", cfg.search.iter_cap_factor, path);
  take(search, "full_recompute_every", cfg.search.full_recompute_every, path);
  reject_unknown(search, "search", path);

  json pipeline = j.value("pipeline", json::object());
  j.erase("pipeline");
  if (!pipeline.is_object())
    throw IoError(path + ": 'pipeline' must be an object");
  take(pipeline, "tau", cfg.tau, path);
  take(pipeline, "target_patience", cfg.target_patience, path);
  take(pipeline, "duplicate_iou", cfg.duplicate_iou, path);
  reject_unknown(pipeline, "pipeline", path);

  json learn = j.value("learn", json::object());
  j.erase("learn");
  if (!learn.is_object()) throw IoError(path + ": 'learn' must be an object");
  take(learn, "svm_c", cfg.svm_c, path);
  take(learn, "eps_stop", cfg.eps_stop, path);
  take(learn, "max_rounds", cfg.max_rounds, path);
  take(learn, "qp_gap", cfg.qp_gap, path);
  take(learn, "clip_length", cfg.clip_length, path);
  take(learn, "gt_min_overlap", cfg.gt_min_overlap, path);
  reject_unknown(learn, "learn", path);

  json met = j.value("metrics", json::object());
  j.erase("metrics");
  if (!met.is_object())
    throw IoError(path + ": 'metrics' must be an object");
  take(met, "iou_threshold", cfg.iou_threshold, path);
  reject_unknown(met, "metrics", path);

  take(j, "threads", cfg.threads, path);
  take(j, "weights", cfg.weights.per_degree, path);
  reject_unknown(j, "config", path);

  try {
    cfg.validate();
  } catch (const ValidationError& e) {
    throw IoError(path + ": " + e.what());
  }
  return cfg;
}

}  // namespace

std::string header_line(const FileMeta& meta) {
  return "# ntrack " + meta.tool_version + " config " + meta.config_hash;
}

std::string hash_hex(std::string_view data) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(data)));
  return buf;
}

std::string format_double(double x) {
  if (x == 0.0) return std::signbit(x) ? "-0" : "0";
  char buf[40];
  if (std::nearbyint(x) == x && std::fabs(x) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.0f", x);
    return buf;
  }
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    const double back = std::strtod(buf, nullptr);
    if (back == x) return buf;
  }
  return buf;  // %.17g always round-trips
}

// ---- MOTChallenge ----------------------------------------------------------

std::vector<Detection> read_motchallenge(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<Detection> out;
  std::string line;
  int line_no = 0;
  long long prev_frame = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string_view> f = split(line, ',');
    if (f.size() != 10)
      fail(path, line_no,
           "expected 10 comma-separated fields, got " +
               std::to_string(f.size()));
    const long long frame = parse_int(f[0], path, line_no, "frame");
    if (frame < 1) fail(path, line_no, "frames are 1-based on disk");
    if (frame < prev_frame)
      fail(path, line_no, "frames must be non-decreasing");
    prev_frame = frame;
    const long long id = parse_int(f[1], path, line_no, "id");
    const double left = parse_num(f[2], path, line_no, "left");
    const double top = parse_num(f[3], path, line_no, "top");
    const double width = parse_num(f[4], path, line_no, "width");
    const double height = parse_num(f[5], path, line_no, "height");
    const double conf = parse_num(f[6], path, line_no, "confidence");
    for (int k = 7; k < 10; ++k) parse_num(f[k], path, line_no, "world coord");
    try {
      out.emplace_back(static_cast<int>(frame - 1), left + width / 2.0,
                       top + height / 2.0, width, height, conf, id);
    } catch (const ValidationError& e) {
      fail(path, line_no, e.what());
    }
  }
  return out;
}

void write_motchallenge(const std::string& path,
                        std::span<const Detection> rows,
                        const FileMeta& meta) {
  std::ofstream out = open_out(path);
  out << header_line(meta) << "\n";
  int prev_frame = std::numeric_limits<int>::min();
  for (const Detection& d : rows) {
    if (d.frame < prev_frame)
      throw IoError(path + ": rows must be sorted by frame");
    prev_frame = d.frame;
    out << (d.frame + 1) << ',' << d.id << ',' << format_double(d.left())
        << ',' << format_double(d.top()) << ',' << format_double(d.width)
        << ',' << format_double(d.height) << ','
        << format_double(d.confidence) << ",-1,-1,-1\n";
  }
  finish_out(out, path);
}

// ---- binary features ---------------------------------------------------------

std::vector<std::vector<float>> read_embeddings(const std::string& path) {
  return read_feature_file(path, "NTEMB1");
}

void write_embeddings(const std::string& path,
                      const std::vector<std::vector<float>>& rows) {
  write_feature_file(path, "NTEMB1", rows);
}

std::vector<std::vector<float>> read_histograms(const std::string& path) {
  return read_feature_file(path, "NTHIS1");
}

void write_histograms(const std::string& path,
                      const std::vector<std::vector<float>>& rows) {
  write_feature_file(path, "NTHIS1", rows);
}

void attach_embeddings(std::vector<Detection>& detections,
                       const std::vector<std::vector<float>>& rows) {
  if (rows.size() != detections.size())
    throw IoError("embedding count " + std::to_string(rows.size()) +
                  " does not match detection count " +
                  std::to_string(detections.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    detections[i].embedding = rows[i];
}

void attach_histograms(std::vector<Detection>& detections,
                       const std::vector<std::vector<float>>& rows) {
  if (rows.size() != detections.size())
    throw IoError("histogram count " + std::to_string(rows.size()) +
                  " does not match detection count " +
                  std::to_string(detections.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    detections[i].histogram = rows[i];
}

// ---- point trajectories ------------------------------------------------------

std::vector<PointTrajectory> read_trajectories(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<PointTrajectory> out;
  PointTrajectory current;
  bool open = false;
  std::string line;
  int line_no = 0;
  long long prev_id = 0;

  auto close = [&](int at_line) {
    try {
      current.validate();
    } catch (const ValidationError& e) {
      fail(path, at_line, std::string("trajectory ") +
                              std::to_string(current.id) + ": " + e.what());
    }
    out.push_back(std::move(current));
    current = PointTrajectory{};
  };

  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string_view> f = split(line, ',');
    if (f.size() != 4)
      fail(path, line_no,
           "expected 4 comma-separated fields, got " + std::to_string(f.size()));
    const long long tid = parse_int(f[0], path, line_no, "trajectory id");
    const long long frame = parse_int(f[1], path, line_no, "frame");
    if (frame < 1) fail(path, line_no, "frames are 1-based on disk");
    const double x = parse_num(f[2], path, line_no, "x");
    const double y = parse_num(f[3], path, line_no, "y");
    if (open && tid != prev_id) {
      if (tid < prev_id)
        fail(path, line_no, "rows must be sorted by (trajectory id, frame)");
      close(line_no);
      open = false;
    }
    if (!open) {
      current.id = tid;
      open = true;
    }
    current.samples.push_back({static_cast<int>(frame - 1), x, y});
    prev_id = tid;
  }
  if (open) close(line_no);
  return out;
}

void write_trajectories(const std::string& path,
                        std::span<const PointTrajectory> trajectories,
                        const FileMeta& meta) {
  std::ofstream out = open_out(path);
  out << header_line(meta) << "\n";
  long long prev_id = std::numeric_limits<long long>::min();
  for (const PointTrajectory& t : trajectories) {
    t.validate();
    if (t.id <= prev_id)
      throw IoError(path + ": trajectories must have increasing ids");
    prev_id = t.id;
    for (const PointTrajectory::Sample& s : t.samples)
      out << t.id << ',' << (s.frame + 1) << ',' << format_double(s.x) << ','
          << format_double(s.y) << "\n";
  }
  finish_out(out, path);
}

// ---- hypergraph dump ---------------------------------------------------------

NonUniformHypergraph read_hypergraph(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  int line_no = 0;

  auto next_data = [&](const char* what) -> std::string {
    while (std::getline(in, line)) {
      ++line_no;
      strip_cr(line);
      if (line.empty() || line[0] == '#') continue;
      return line;
    }
    fail(path, line_no, std::string("unexpected end of file (wanted ") + what +
                            ")");
  };

  if (next_data("magic") != "NTGRAPH1")
    fail(path, line_no, "bad magic (expected NTGRAPH1)");

  std::vector<std::string_view> head = split_ws(next_data("node/degree line"));
  if (head.size() != 2)
    fail(path, line_no, "expected '<node count> <max degree>'");
  const long long n = parse_int(head[0], path, line_no, "node count");
  const long long max_d = parse_int(head[1], path, line_no, "max degree");
  if (n < 0 || max_d < 1) fail(path, line_no, "bad graph dimensions");

  std::vector<std::string_view> ar = split_ws(next_data("arity line"));
  if (static_cast<long long>(ar.size()) != max_d)
    fail(path, line_no,
         "expected " + std::to_string(max_d) + " per-degree arities");
  std::vector<int> arity;
  for (auto tok : ar)
    arity.push_back(
        static_cast<int>(parse_int(tok, path, line_no, "arity")));

  NonUniformHypergraph g(static_cast<int>(n), arity);
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string_view> tok = split_ws(line);
    if (tok.empty()) continue;
    const int d =
        static_cast<int>(parse_int(tok[0], path, line_no, "edge degree"));
    if (d < 1 || d > g.max_degree()) fail(path, line_no, "edge degree out of range");
    const std::size_t want = 1 + static_cast<std::size_t>(d) +
                             static_cast<std::size_t>(g.arity_of(d));
    if (tok.size() != want)
      fail(path, line_no,
           "expected " + std::to_string(want) + " tokens for a degree-" +
               std::to_string(d) + " edge, got " + std::to_string(tok.size()));
    std::vector<int> nodes;
    for (int k = 0; k < d; ++k)
      nodes.push_back(
          static_cast<int>(parse_int(tok[1 + k], path, line_no, "node id")));
    AffinityVector aff;
    for (int k = 0; k < g.arity_of(d); ++k)
      aff.push_back(parse_num(tok[1 + d + k], path, line_no, "affinity"));
    try {
      if (!g.add_edge(std::move(nodes), std::move(aff)))
        fail(path, line_no, "duplicate edge");
    } catch (const ValidationError& e) {
      fail(path, line_no, e.what());
    }
  }
  return g;
}

void write_hypergraph(const std::string& path, const NonUniformHypergraph& g,
                      const FileMeta& meta) {
  std::ofstream out = open_out(path);
  out << "NTGRAPH1\n" << header_line(meta) << "\n";
  out << g.node_count() << ' ' << g.max_degree() << "\n";
  for (int d = 1; d <= g.max_degree(); ++d)
    out << g.arity_of(d) << (d == g.max_degree() ? "\n" : " ");
  for (int d = 1; d <= g.max_degree(); ++d) {
    for (const auto& e : g.edges(d)) {
      out << d;
      for (int v : e.nodes) out << ' ' << v;
      for (double a : e.affinity) out << ' ' << format_double(a);
      out << "\n";
    }
  }
  finish_out(out, path);
}

// ---- weights -----------------------------------------------------------------

WeightsFile read_weights(const std::string& path) {
  std::ifstream in = open_in(path);
  WeightsFile wf;
  std::string line;
  int line_no = 0;
  int expect_degree = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      scan_meta(line, wf.meta);
      continue;
    }
    const std::size_t colon = line.find(':');
    if (colon == std::string::npos)
      fail(path, line_no, "expected '<degree>: <values>'");
    const long long d = parse_int(trim(std::string_view(line).substr(0, colon)),
                                  path, line_no, "degree");
    if (d != expect_degree)
      fail(path, line_no, "expected degree " + std::to_string(expect_degree) +
                              ", got " + std::to_string(d));
    std::vector<std::string_view> vals =
        split_ws(std::string_view(line).substr(colon + 1));
    if (vals.empty())
      fail(path, line_no, "degree " + std::to_string(d) + " has no values");
    std::vector<double> w;
    for (auto tok : vals) w.push_back(parse_num(tok, path, line_no, "weight"));
    wf.weights.per_degree.push_back(std::move(w));
    ++expect_degree;
  }
  try {
    wf.weights.validate();
  } catch (const ValidationError& e) {
    throw IoError(path + ": " + e.what());
  }
  return wf;
}

void write_weights(const std::string& path, const WeightVector& weights,
                   const FileMeta& meta) {
  weights.validate();
  std::ofstream out = open_out(path);
  out << header_line(meta) << "\n";
  for (int d = 1; d <= weights.max_degree(); ++d) {
    out << d << ':';
    for (double w : weights.weights(d)) out << ' ' << format_double(w);
    out << "\n";
  }
  finish_out(out, path);
}

// ---- structures ----------------------------------------------------------------

void write_structures(const std::string& path,
                      std::span<const Structure> structures,
                      const FileMeta& meta) {
  std::ofstream out = open_out(path);
  out << header_line(meta) << "\n";
  for (const Structure& s : structures) {
    out << s.support.size();
    for (int v : s.support) out << ' ' << v;
    out << ' ' << format_double(s.theta) << "\n";
  }
  finish_out(out, path);
}

// ---- config --------------------------------------------------------------------

PipelineConfig Config::pipeline() const {
  PipelineConfig p;
  p.build = build;
  p.build.threads = threads;
  p.search = search;
  p.search.threads = threads;
  p.weights = weights;
  p.tau = tau;
  p.target_patience = target_patience;
  p.duplicate_iou = duplicate_iou;
  return p;
}

void Config::validate() const {
  pipeline().validate();
  if (!(svm_c > 0.0)) throw ValidationError("svm_c must be positive");
  if (!(eps_stop >= 0.0)) throw ValidationError("eps_stop must be >= 0");
  if (max_rounds < 1) throw ValidationError("max_rounds must be >= 1");
  if (!(qp_gap > 0.0)) throw ValidationError("qp_gap must be positive");
  if (clip_length < 2) throw ValidationError("clip_length must be >= 2");
  if (!(gt_min_overlap >= 0.0 && gt_min_overlap < 1.0))
    throw ValidationError("gt_min_overlap must be in [0, 1)");
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0))
    throw ValidationError("iou_threshold must be in (0, 1)");
  if (threads < 1) throw ValidationError("threads must be >= 1");
}

Config read_config(const std::string& path) {
  std::ifstream in = open_in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  return config_from_json(std::move(j), path);
}

void write_config(const std::string& path, const Config& cfg) {
  std::ofstream out = open_out(path);
  out << config_json(cfg) << "\n";
  finish_out(out, path);
}

std::string config_json(const Config& cfg) {
  return config_to_json(cfg).dump(2);
}

std::string config_hash(const Config& cfg) { return hash_hex(config_json(cfg)); }

// ---- report --------------------------------------------------------------------

void write_report(const std::string& path, const metrics::MotReport& mot,
                  const metrics::Idf1Report& idf1, const FileMeta& meta) {
  json j;
  j["tool_version"] = meta.tool_version;
  j["config_hash"] = meta.config_hash;
  if (mot.mota_defined)
    j["mota"] = mot.mota;
  else
    j["mota"] = nullptr;
  j["motp_iou"] = mot.motp_iou;
  j["motp_norm"] = mot.motp_norm;
  j["mt"] = mot.mt;
  j["ml"] = mot.ml;
  j["fp"] = mot.fp;
  j["fn"] = mot.fn;
  j["ids"] = mot.ids;
  j["fm"] = mot.fm;
  j["gt_total"] = mot.gt_total;
  j["matches"] = mot.matches;
  j["gt_trajectories"] = mot.gt_trajectories;
  j["idf1"] = idf1.value;
  j["idtp"] = idf1.idtp;
  j["idfp"] = idf1.idfp;
  j["idfn"] = idf1.idfn;
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
  finish_out(out, path);
}

std::string report_table(const metrics::MotReport& mot,
                         const metrics::Idf1Report& idf1) {
  std::ostringstream os;
  char buf[64];
  auto row_f = [&](const char* name, double v) {
    std::snprintf(buf, sizeof buf, "%-12s %.6f\n", name, v);
    os << buf;
  };
  auto row_i = [&](const char* name, long long v) {
    std::snprintf(buf, sizeof buf, "%-12s %lld\n", name, v);
    os << buf;
  };
  if (mot.mota_defined)
    row_f("MOTA", mot.mota);
  else
    os << "MOTA         undefined (empty ground truth)\n";
  row_f("MOTP(IoU)", mot.motp_iou);
  row_f("MOTP(norm)", mot.motp_norm);
  row_f("IDF1", idf1.value);
  row_f("MT", mot.mt);
  row_f("ML", mot.ml);
  row_i("FP", mot.fp);
  row_i("FN", mot.fn);
  row_i("IDS", mot.ids);
  row_i("FM", mot.fm);
  row_i("GT", mot.gt_total);
  row_i("IDTP", idf1.idtp);
  row_i("IDFP", idf1.idfp);
  row_i("IDFN", idf1.idfn);
  return os.str();
}

}  // namespace io
}  // namespace ntrack

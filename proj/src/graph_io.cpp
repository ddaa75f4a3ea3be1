#include "rac/graph_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "rac/errors.hpp"
#include "rac/worker_pool.hpp"

namespace rac {
namespace {

std::string at(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  text = trim(text);
  if (text.empty()) return false;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(Metric metric) { return metric == Metric::kL2 ? "l2" : "cosine"; }

Metric parse_metric(const std::string& name) {
  if (name == "l2") return Metric::kL2;
  if (name == "cosine") return Metric::kCosine;
  throw ContractViolation("unknown metric '" + name + "'");
}

double distance(const PointSet& points, std::size_t i, std::size_t j) {
  if (i > j) std::swap(i, j);
  const auto a = points.point(i);
  const auto b = points.point(j);
  if (points.metric == Metric::kL2) {
    double sum = 0.0;
    for (std::size_t d = 0; d < points.dim; ++d) {
      const double diff = a[d] - b[d];
      sum += diff * diff;
    }
    return std::sqrt(sum);
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t d = 0; d < points.dim; ++d) {
    dot += a[d] * b[d];
    na += a[d] * a[d];
    nb += b[d] * b[d];
  }
  if (na == 0.0 || nb == 0.0) {
    throw ContractViolation("cosine distance undefined for zero vector (point " +
                            std::to_string(na == 0.0 ? i : j) + ")");
  }
  return std::clamp(1.0 - dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 2.0);
}

DissimilarityGraph parse_edge_list(std::istream& in, const std::string& source_name) {
  struct Seen {
    double weight;
    std::size_t line;
  };
  std::unordered_map<std::uint64_t, Seen> seen;
  std::vector<Edge> edges;
  std::size_t max_id = 0;
  bool any = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split(text, '\t');
    ClusterId u = 0;
    ClusterId v = 0;
    double w = 0.0;
    if (fields.size() != 3 || !parse_number(fields[0], u) || !parse_number(fields[1], v) ||
        !parse_number(fields[2], w)) {
      throw IoError(at(source_name, lineno) + "malformed edge line, expected u<TAB>v<TAB>w");
    }
    if (u == v) throw IoError(at(source_name, lineno) + "self-loop on node " + std::to_string(u));
    if (!std::isfinite(w) || w < 0.0) {
      throw IoError(at(source_name, lineno) + "weight must be finite and non-negative");
    }
    const std::uint64_t key = (static_cast<std::uint64_t>(std::min(u, v)) << 32) | std::max(u, v);
    auto [it, inserted] = seen.emplace(key, Seen{w, lineno});
    if (!inserted) {
      if (it->second.weight != w) {
        throw IoError(at(source_name, lineno) + "pair (" + std::to_string(u) + ", " + std::to_string(v) +
                      ") repeats line " + std::to_string(it->second.line) + " with a different weight");
      }
      continue;
    }
    edges.push_back({u, v, w});
    max_id = std::max<std::size_t>(max_id, std::max(u, v));
    any = true;
  }
  GraphBuilder builder(any ? max_id + 1 : 0);
  for (const Edge& e : edges) builder.add_edge(e.u, e.v, e.weight);
  return std::move(builder).build();
}

DissimilarityGraph load_edge_list(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_edge_list(in, path.string());
}

void write_edge_list(const DissimilarityGraph& graph, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (const Edge& e : graph.edges()) out << e.u << '\t' << e.v << '\t' << format_double(e.weight) << '\n';
  finish(out, path);
}

PointSet parse_vectors(std::istream& in, const std::string& source_name, Metric metric) {
  std::vector<std::pair<ClusterId, std::vector<double>>> rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split(text, '\t');
    ClusterId id = 0;
    if (fields.size() != 2 || !parse_number(fields[0], id)) {
      throw IoError(at(source_name, lineno) + "malformed vector line, expected id<TAB>c1,c2,...");
    }
    std::vector<double> coords;
    for (std::string_view c : split(fields[1], ',')) {
      double x = 0.0;
      if (!parse_number(c, x) || !std::isfinite(x)) {
        throw IoError(at(source_name, lineno) + "bad coordinate '" + std::string(c) + "'");
      }
      coords.push_back(x);
    }
    if (rows.empty()) dim = coords.size();
    if (coords.size() != dim) {
      throw IoError(at(source_name, lineno) + "expected " + std::to_string(dim) + " coordinates, got " +
                    std::to_string(coords.size()));
    }
    rows.emplace_back(id, std::move(coords));
  }
  PointSet points;
  points.dim = dim;
  points.metric = metric;
  points.coords.assign(rows.size() * dim, 0.0);
  std::vector<bool> filled(rows.size(), false);
  for (const auto& [id, coords] : rows) {
    if (id >= rows.size() || filled[id]) {
      throw IoError(source_name + ": ids must be 0..n-1, each exactly once (offending id " +
                    std::to_string(id) + ")");
    }
    filled[id] = true;
    std::copy(coords.begin(), coords.end(), points.coords.begin() + static_cast<std::ptrdiff_t>(id * dim));
  }
  return points;
}

PointSet load_vectors(const std::filesystem::path& path, Metric metric) {
  auto in = open_in(path);
  return parse_vectors(in, path.string(), metric);
}

void write_vectors(const PointSet& points, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < points.size(); ++i) {
    out << i << '\t';
    const auto p = points.point(i);
    for (std::size_t d = 0; d < points.dim; ++d) out << (d ? "," : "") << format_double(p[d]);
    out << '\n';
  }
  finish(out, path);
}

DissimilarityGraph build_knn_graph(const PointSet& points, std::size_t k, std::size_t workers) {
  const std::size_t n = points.size();
  if (k == 0 || k >= n) {
    throw ContractViolation("build_knn_graph: need 0 < k < n (k=" + std::to_string(k) +
                            ", n=" + std::to_string(n) + ")");
  }
  std::vector<std::vector<Adjacent>> nearest(n);
  auto closer = [](const Adjacent& a, const Adjacent& b) {
    return a.weight != b.weight ? a.weight < b.weight : a.id < b.id;
  };
  WorkerPool pool(workers);
  pool.for_ranges(n, [&](std::size_t, std::size_t begin, std::size_t end) {
    // Max-heap of the k best (distance, id) seen so far.
    std::vector<Adjacent> heap;
    heap.reserve(k + 1);
    for (std::size_t i = begin; i < end; ++i) {
      heap.clear();
      const auto a = points.point(i);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        double d;
        if (points.metric == Metric::kL2) {
          // Same operation order as distance(), so the value is bit-identical.
          const auto b = points.point(j);
          double sum = 0.0;
          for (std::size_t c = 0; c < points.dim; ++c) {
            const double diff = a[c] - b[c];
            sum += diff * diff;
          }
          if (heap.size() == k && sum > heap.front().weight * heap.front().weight * (1.0 + 1e-12)) continue;
          d = std::sqrt(sum);
        } else {
          d = distance(points, i, j);
        }
        const Adjacent cand{static_cast<ClusterId>(j), d};
        if (heap.size() < k) {
          heap.push_back(cand);
          std::push_heap(heap.begin(), heap.end(), closer);
        } else if (closer(cand, heap.front())) {
          std::pop_heap(heap.begin(), heap.end(), closer);
          heap.back() = cand;
          std::push_heap(heap.begin(), heap.end(), closer);
        }
      }
      std::sort_heap(heap.begin(), heap.end(), closer);
      nearest[i] = heap;
    }
  });
  GraphBuilder builder(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const Adjacent& a : nearest[i]) builder.add_edge(static_cast<ClusterId>(i), a.id, a.weight);
  }
  return std::move(builder).build();
}

DissimilarityGraph build_epsilon_graph(const PointSet& points, double eps) {
  if (!(eps > 0.0)) throw ContractViolation("build_epsilon_graph: eps must be positive");
  const std::size_t n = points.size();
  GraphBuilder builder(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distance(points, i, j);
      if (d <= eps) builder.add_edge(static_cast<ClusterId>(i), static_cast<ClusterId>(j), d);
    }
  }
  return std::move(builder).build();
}

DissimilarityGraph build_complete_graph(const PointSet& points) {
  const std::size_t n = points.size();
  GraphBuilder builder(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      builder.add_edge(static_cast<ClusterId>(i), static_cast<ClusterId>(j), distance(points, i, j));
    }
  }
  return std::move(builder).build();
}

void write_dendrogram(const Dendrogram& d, std::ostream& out) {
  out << "#rac-dendrogram v1 n=" << d.n_points << '\n';
  std::size_t seq = 0;
  for (const MergeEvent& m : d.merges) {
    out << ++seq << '\t' << m.round << '\t' << m.left << '\t' << m.right << '\t' << m.result << '\t'
        << format_double(m.dissimilarity) << '\t' << m.result_size << '\n';
  }
}

void write_dendrogram(const Dendrogram& d, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_dendrogram(d, out);
  finish(out, path);
}

Dendrogram read_dendrogram(std::istream& in, const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line)) throw IoError(source_name + ": empty dendrogram file");
  constexpr std::string_view kHeader = "#rac-dendrogram v1 n=";
  const std::string_view header = trim(line);
  Dendrogram d;
  if (header.substr(0, kHeader.size()) != kHeader ||
      !parse_number(header.substr(kHeader.size()), d.n_points)) {
    throw IoError(at(source_name, 1) + "missing '#rac-dendrogram v1 n=<n>' header");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    const auto f = split(text, '\t');
    MergeEvent m;
    std::size_t seq = 0;
    if (f.size() != 7 || !parse_number(f[0], seq) || !parse_number(f[1], m.round) ||
        !parse_number(f[2], m.left) || !parse_number(f[3], m.right) || !parse_number(f[4], m.result) ||
        !parse_number(f[5], m.dissimilarity) || !parse_number(f[6], m.result_size)) {
      throw IoError(at(source_name, lineno) + "malformed merge line");
    }
    if (seq != d.merges.size() + 1) throw IoError(at(source_name, lineno) + "merge sequence out of order");
    d.merges.push_back(m);
  }
  return d;
}

Dendrogram read_dendrogram(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_dendrogram(in, path.string());
}

nlohmann::ordered_json round_record(const RoundStats& s, bool timings, const RoundTransport* transport) {
  nlohmann::ordered_json j;
  j["record"] = "round";
  j["round"] = s.round;
  j["clusters_before"] = s.clusters_before;
  j["merges"] = s.merges;
  j["alpha"] = s.alpha;
  j["nn_updates"] = s.nn_updates;
  j["beta_per_merge"] = s.beta_per_merge;
  if (!timings) return j;
  j["find_rnn_seconds"] = s.find_rnn_seconds;
  j["merge_seconds"] = s.merge_seconds;
  j["nn_update_seconds"] = s.nn_update_seconds;
  if (transport) {
    nlohmann::ordered_json kinds;
    for (std::size_t k = 0; k < kMessageKinds; ++k) {
      const KindCounters& c = transport->by_kind[k];
      nlohmann::ordered_json entry;
      entry["messages"] = c.messages;
      entry["remote_messages"] = c.remote_messages;
      entry["remote_bytes"] = c.remote_bytes;
      kinds[std::string(to_string(static_cast<MessageKind>(k)))] = entry;
    }
    j["transport"] = kinds;
    j["remote_messages"] = transport->remote_messages;
    j["remote_bytes"] = transport->remote_bytes;
  }
  return j;
}

RoundStats round_stats_from_record(const nlohmann::ordered_json& j) {
  RoundStats s = make_round_stats(j.at("round").get<std::uint32_t>(), j.at("clusters_before").get<std::uint64_t>(),
                                  j.at("merges").get<std::uint64_t>(), j.at("nn_updates").get<std::uint64_t>());
  s.alpha = j.at("alpha").get<double>();
  s.beta_per_merge = j.at("beta_per_merge").get<double>();
  s.find_rnn_seconds = j.value("find_rnn_seconds", 0.0);
  s.merge_seconds = j.value("merge_seconds", 0.0);
  s.nn_update_seconds = j.value("nn_update_seconds", 0.0);
  return s;
}

void write_stats(std::ostream& out, std::span<const RoundStats> rounds, bool timings,
                 const TransportStats* transport) {
  for (std::size_t i = 0; i < rounds.size(); ++i) {
    const RoundTransport* rt =
        transport && i < transport->rounds.size() ? &transport->rounds[i] : nullptr;
    out << round_record(rounds[i], timings, rt).dump() << '\n';
  }
}

void write_stats(const std::filesystem::path& path, std::span<const RoundStats> rounds, bool timings,
                 const TransportStats* transport) {
  auto out = open_out(path);
  write_stats(out, rounds, timings, transport);
  finish(out, path);
}

std::vector<RoundStats> read_stats(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<RoundStats> rounds;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::ordered_json::exception& e) {
      throw IoError(at(path.string(), lineno) + e.what());
    }
    if (j.value("record", "") == "round") rounds.push_back(round_stats_from_record(j));
  }
  return rounds;
}

nlohmann::ordered_json summary_record(std::span<const RoundStats> rounds) {
  double find = 0.0;
  double merge = 0.0;
  double nn = 0.0;
  std::uint64_t merges = 0;
  std::uint64_t updates = 0;
  for (const RoundStats& s : rounds) {
    find += s.find_rnn_seconds;
    merge += s.merge_seconds;
    nn += s.nn_update_seconds;
    merges += s.merges;
    updates += s.nn_updates;
  }
  nlohmann::ordered_json j;
  j["record"] = "summary";
  j["rounds"] = rounds.size();
  j["merges"] = merges;
  j["nn_updates"] = updates;
  nlohmann::ordered_json wall;
  wall["find reciprocal nearest neighbors"] = find;
  wall["merge"] = merge;
  wall["update nearest neighbors"] = nn;
  j["wall_seconds"] = wall;
  return j;
}

}  // namespace rac

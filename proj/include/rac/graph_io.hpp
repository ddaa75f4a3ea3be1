#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rac/dendrogram.hpp"
#include "rac/graph.hpp"
#include "rac/rac.hpp"
#include "rac/shard.hpp"

namespace rac {

enum class Metric { kL2, kCosine };
std::string to_string(Metric metric);
Metric parse_metric(const std::string& name);

// Dense row-major point coordinates.
struct PointSet {
  std::size_t dim = 0;
  std::vector<double> coords;
  Metric metric = Metric::kL2;

  std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
  std::span<const double> point(std::size_t i) const { return {coords.data() + i * dim, dim}; }
};

// l2, or cosine distance 1 - cos clamped to [0, 2]. Symmetric bit-for-bit.
double distance(const PointSet& points, std::size_t i, std::size_t j);

// Edge list: `u<TAB>v<TAB>w` per line, `#` comments. Errors carry path:line.
DissimilarityGraph load_edge_list(const std::filesystem::path& path);
DissimilarityGraph parse_edge_list(std::istream& in, const std::string& source_name);
void write_edge_list(const DissimilarityGraph& graph, const std::filesystem::path& path);

// Vectors: `id<TAB>c1,c2,...,cd`; ids must cover 0..n-1 exactly once.
PointSet load_vectors(const std::filesystem::path& path, Metric metric);
PointSet parse_vectors(std::istream& in, const std::string& source_name, Metric metric);
void write_vectors(const PointSet& points, const std::filesystem::path& path);

// Exact brute-force kNN graph, ties by lower id, symmetrized by union.
DissimilarityGraph build_knn_graph(const PointSet& points, std::size_t k, std::size_t workers = 1);
DissimilarityGraph build_epsilon_graph(const PointSet& points, double eps);
DissimilarityGraph build_complete_graph(const PointSet& points);

// `#rac-dendrogram v1 n=<n>` header, then
// `seq<TAB>round<TAB>left<TAB>right<TAB>result<TAB>dissimilarity<TAB>size`.
void write_dendrogram(const Dendrogram& d, std::ostream& out);
void write_dendrogram(const Dendrogram& d, const std::filesystem::path& path);
Dendrogram read_dendrogram(std::istream& in, const std::string& source_name);
Dendrogram read_dendrogram(const std::filesystem::path& path);

// Stats: one JSON object per line. Round records hold the deterministic
// counters; with `timings` they also carry phase wall times and, when
// present, transport counters.
nlohmann::ordered_json round_record(const RoundStats& stats, bool timings, const RoundTransport* transport);
RoundStats round_stats_from_record(const nlohmann::ordered_json& record);
void write_stats(std::ostream& out, std::span<const RoundStats> rounds, bool timings,
                 const TransportStats* transport);
void write_stats(const std::filesystem::path& path, std::span<const RoundStats> rounds, bool timings,
                 const TransportStats* transport);
std::vector<RoundStats> read_stats(const std::filesystem::path& path);

// Summary record with per-phase wall totals.
nlohmann::ordered_json summary_record(std::span<const RoundStats> rounds);

}  // namespace rac

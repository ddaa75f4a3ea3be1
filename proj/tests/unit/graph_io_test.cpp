#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "rac/errors.hpp"
#include "rac/graph_io.hpp"
#include "rac/hac.hpp"
#include "rac/theory.hpp"
#include "test_util.hpp"

namespace rac {
namespace {

std::string error_of(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_edge_list(in, "g.tsv");
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

TEST(EdgeList, ParsesCommentsAndDuplicates) {
  std::istringstream in("# header\n0\t1\t0.5\n\n2\t1\t1.5\n1\t0\t0.5\n");
  const auto g = parse_edge_list(in, "g.tsv");
  EXPECT_EQ(g.num_nodes(), 3u);
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_EQ(g.weight(1, 2), 1.5);
}

TEST(EdgeList, ErrorsNameTheLine) {
  EXPECT_NE(error_of("0\t1\t0.5\n0\t1\n").find("g.tsv:2"), std::string::npos);
  EXPECT_NE(error_of("3\t3\t1\n").find("g.tsv:1"), std::string::npos);
  EXPECT_NE(error_of("0\t1\t-1\n").find("g.tsv:1"), std::string::npos);
  EXPECT_NE(error_of("0\t1\tnan\n").find("g.tsv:1"), std::string::npos);
  EXPECT_NE(error_of("0\t1\tx\n").find("g.tsv:1"), std::string::npos);
  EXPECT_NE(error_of("0\t1\t1\n1\t0\t2\n").find("repeats line 1"), std::string::npos);
}

TEST(EdgeList, FileRoundTrip) {
  auto rng = substream(41, "edge-roundtrip");
  const auto g = testing::random_graph(60, 0.2, rng);
  const auto path = std::filesystem::temp_directory_path() / "rac_edges_roundtrip.tsv";
  write_edge_list(g, path);
  const auto back = load_edge_list(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.edges(), g.edges());
}

TEST(EdgeList, MissingFileIsIoError) {
  EXPECT_THROW(load_edge_list("/nonexistent/rac/edges.tsv"), IoError);
}

TEST(Vectors, ParseAndErrors) {
  std::istringstream in("1\t3,4\n0\t0,0\n");
  const PointSet p = parse_vectors(in, "v.tsv", Metric::kL2);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p.dim, 2u);
  EXPECT_DOUBLE_EQ(distance(p, 0, 1), 5.0);

  std::istringstream gap("0\t1,2\n2\t3,4\n");
  EXPECT_ANY_THROW(parse_vectors(gap, "v.tsv", Metric::kL2));
  std::istringstream ragged("0\t1,2\n1\t3\n");
  EXPECT_ANY_THROW(parse_vectors(ragged, "v.tsv", Metric::kL2));
}

TEST(Distance, CosineIsClampedAndSymmetric) {
  PointSet p{2, {1, 0, 0, 2, -3, 0, 0, 0}, Metric::kCosine};
  EXPECT_DOUBLE_EQ(distance(p, 0, 1), 1.0);
  EXPECT_DOUBLE_EQ(distance(p, 0, 2), 2.0);
  EXPECT_EQ(distance(p, 1, 2), distance(p, 2, 1));
  EXPECT_ANY_THROW(distance(p, 0, 3));
}

TEST(Knn, MatchesBruteForceSort) {
  const PointSet p = random_points(150, 3, 42);
  const std::size_t k = 5;
  const auto g = build_knn_graph(p, k, 2);
  // Oracle: full sort per row, keep the k smallest (dist, id), then union.
  GraphBuilder b(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::vector<std::pair<double, ClusterId>> row;
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (j != i) row.emplace_back(distance(p, i, j), static_cast<ClusterId>(j));
    }
    std::sort(row.begin(), row.end());
    for (std::size_t r = 0; r < k; ++r) {
      if (!g.weight(static_cast<ClusterId>(i), row[r].second)) {
        ADD_FAILURE() << i << " misses " << row[r].second;
      }
      b.add_edge(static_cast<ClusterId>(i), row[r].second, row[r].first);
    }
  }
  EXPECT_EQ(std::move(b).build().edges(), g.edges());
}

TEST(Knn, WorkersDoNotMatter) {
  const PointSet p = random_points(200, 4, 43);
  EXPECT_EQ(build_knn_graph(p, 7, 1).edges(), build_knn_graph(p, 7, 3).edges());
}

TEST(Epsilon, KeepsPairsWithinRadius) {
  PointSet p{1, {0, 1, 2.5, 10}, Metric::kL2};
  const auto g = build_epsilon_graph(p, 1.5);
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_TRUE(g.weight(0, 1));
  EXPECT_TRUE(g.weight(1, 2));
  EXPECT_EQ(build_complete_graph(p).num_edges(), 6u);
}

TEST(DendrogramIo, RoundTripIsExact) {
  const auto g = random_dense_graph(40, 44);
  const Dendrogram d = hac_run(g, Linkage::kAverage);
  std::stringstream ss;
  write_dendrogram(d, ss);
  EXPECT_EQ(ss.str().rfind("#rac-dendrogram v1 n=40\n", 0), 0u);
  EXPECT_EQ(read_dendrogram(ss, "d"), d);
}

TEST(DendrogramIo, RejectsBadHeader) {
  std::istringstream in("#something else\n");
  EXPECT_ANY_THROW(read_dendrogram(in, "d"));
}

TEST(Stats, RoundRecordRoundTrip) {
  const RoundStats s = make_round_stats(3, 10, 2, 5);
  const auto j = round_record(s, false, nullptr);
  EXPECT_EQ(j["record"], "round");
  EXPECT_FALSE(j.contains("merge_seconds"));
  const RoundStats back = round_stats_from_record(j);
  EXPECT_EQ(back.round, 3u);
  EXPECT_EQ(back.merges, 2u);
  EXPECT_DOUBLE_EQ(back.alpha, 0.4);
  EXPECT_DOUBLE_EQ(back.beta_per_merge, 2.5);
}

TEST(Stats, KeysAreStable) {
  const RoundStats s = make_round_stats(1, 4, 2, 4);
  EXPECT_EQ(round_record(s, false, nullptr).dump(),
            R"({"record":"round","round":1,"clusters_before":4,"merges":2,"alpha":1.0,)"
            R"("nn_updates":4,"beta_per_merge":2.0})");
  const auto with_timing = round_record(s, true, nullptr);
  EXPECT_TRUE(with_timing.contains("find_rnn_seconds"));
  const auto summary = summary_record(std::vector<RoundStats>{s, s});
  EXPECT_EQ(summary["rounds"], 2);
  EXPECT_EQ(summary["merges"], 4);
  EXPECT_TRUE(summary["wall_seconds"].contains("update nearest neighbors"));
}

TEST(Stats, FileRoundTrip) {
  const auto g = random_dense_graph(50, 45);
  const RacResult r = rac_run(g, Linkage::kComplete);
  const auto path = std::filesystem::temp_directory_path() / "rac_stats_roundtrip.jsonl";
  write_stats(path, r.rounds, true, nullptr);
  const auto back = read_stats(path);
  std::filesystem::remove(path);
  ASSERT_EQ(back.size(), r.rounds.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].merges, r.rounds[i].merges);
    EXPECT_EQ(back[i].nn_updates, r.rounds[i].nn_updates);
  }
}

}  // namespace
}  // namespace rac

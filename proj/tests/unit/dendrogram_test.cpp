#include <gtest/gtest.h>

#include "rac/dendrogram.hpp"
#include "rac/errors.hpp"

namespace rac {
namespace {

MergeEvent merge(ClusterId a, ClusterId b, double w, std::uint64_t size, std::uint32_t round = 1) {
  return {a, b, std::min(a, b), w, round, size};
}

// ((0,1),(2,3)) then 4 joins.
Dendrogram sample() {
  Dendrogram d;
  d.n_points = 5;
  d.merges = {merge(0, 1, 1.0, 2), merge(2, 3, 2.0, 2), merge(0, 2, 5.0, 4, 2), merge(0, 4, 9.0, 5, 3)};
  return d;
}

TEST(Dendrogram, ValidateAcceptsSample) { EXPECT_NO_THROW(validate_dendrogram(sample())); }

TEST(Dendrogram, ValidateRejectsBrokenReplays) {
  Dendrogram d = sample();
  d.merges[2].result = 2;
  EXPECT_THROW(validate_dendrogram(d), InternalError);

  d = sample();
  d.merges[2].right = 3;  // 3 was merged into 2
  EXPECT_THROW(validate_dendrogram(d), InternalError);

  d = sample();
  d.merges[3].result_size = 4;
  EXPECT_THROW(validate_dendrogram(d), InternalError);

  d = sample();
  d.merges[0].right = 7;
  EXPECT_THROW(validate_dendrogram(d), InternalError);
}

TEST(Dendrogram, HeightAndRoots) {
  EXPECT_EQ(dendrogram_height(sample()), 3u);
  EXPECT_EQ(count_roots(sample()), 1u);
  Dendrogram forest;
  forest.n_points = 4;
  forest.merges = {merge(0, 1, 1.0, 2)};
  EXPECT_EQ(dendrogram_height(forest), 1u);
  EXPECT_EQ(count_roots(forest), 3u);
  EXPECT_EQ(dendrogram_height(Dendrogram{3, {}}), 0u);
}

TEST(Dendrogram, CanonicalIgnoresOrderAndOrientation) {
  Dendrogram a = sample();
  Dendrogram b = sample();
  std::swap(b.merges[0], b.merges[1]);
  std::swap(b.merges[2].left, b.merges[2].right);
  b.merges[3].dissimilarity = 100.0;
  EXPECT_TRUE(same_hierarchy(a, b));
  EXPECT_FALSE(first_difference(a, b).has_value());
}

TEST(Dendrogram, FirstDifferenceNamesTheMerge) {
  Dendrogram a = sample();
  Dendrogram b;
  b.n_points = 5;
  b.merges = {merge(0, 1, 1.0, 2), merge(2, 3, 2.0, 2), merge(2, 4, 3.0, 3), merge(0, 2, 5.0, 5)};
  const auto diff = first_difference(a, b);
  ASSERT_TRUE(diff.has_value());
  EXPECT_NE(diff->find("only in left"), std::string::npos);
  EXPECT_NE(diff->find("only in right"), std::string::npos);
  EXPECT_FALSE(same_hierarchy(a, b));
}

TEST(Dendrogram, LeafSets) {
  const auto sets = merge_leaf_sets(sample());
  ASSERT_EQ(sets.size(), 4u);
  EXPECT_EQ(sets[2], (std::vector<ClusterId>{0, 1, 2, 3}));
  EXPECT_EQ(sets[3], (std::vector<ClusterId>{0, 1, 2, 3, 4}));
}

TEST(FlatClusters, CutsByDissimilarity) {
  const Dendrogram d = sample();
  EXPECT_EQ(flat_clusters(d, 5).size(), 5u);
  const auto two = flat_clusters(d, 2);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0], (std::vector<ClusterId>{0, 1, 2, 3}));
  EXPECT_EQ(two[1], (std::vector<ClusterId>{4}));
  const auto three = flat_clusters(d, 3);
  EXPECT_EQ(three[0], (std::vector<ClusterId>{0, 1}));
  EXPECT_EQ(three[1], (std::vector<ClusterId>{2, 3}));
  EXPECT_EQ(flat_clusters(d, 1).size(), 1u);
}

TEST(FlatClusters, ChildrenBeforeParentsEvenIfCheaper) {
  // Non-monotone heights: the parent is cheaper than one child.
  Dendrogram d;
  d.n_points = 3;
  d.merges = {merge(0, 1, 4.0, 2), merge(0, 2, 1.0, 3)};
  const auto two = flat_clusters(d, 2);
  EXPECT_EQ(two[0], (std::vector<ClusterId>{0, 1}));
}

TEST(FlatClusters, Errors) {
  const Dendrogram d = sample();
  EXPECT_THROW(flat_clusters(d, 0), ContractViolation);
  EXPECT_THROW(flat_clusters(d, 6), ContractViolation);
  Dendrogram forest;
  forest.n_points = 4;
  forest.merges = {merge(0, 1, 1.0, 2)};
  try {
    flat_clusters(forest, 2);
    FAIL() << "expected ContractViolation";
  } catch (const ContractViolation& e) {
    EXPECT_NE(std::string(e.what()).find("smallest achievable k is 3"), std::string::npos);
  }
}

}  // namespace
}  // namespace rac

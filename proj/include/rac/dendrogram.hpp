#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rac/types.hpp"

namespace rac {

// One merge. The result takes the lower child id, so every cluster id is the
// smallest point id it contains.
struct MergeEvent {
  ClusterId left = 0;
  ClusterId right = 0;
  ClusterId result = 0;
  double dissimilarity = 0.0;
  std::uint32_t round = 1;
  std::uint64_t result_size = 2;

  friend bool operator==(const MergeEvent&, const MergeEvent&) = default;
};

// Merge forest over points 0..n_points-1. `merges` is kept in sequence order:
// replaying it front to back is always valid.
struct Dendrogram {
  std::size_t n_points = 0;
  std::vector<MergeEvent> merges;

  friend bool operator==(const Dendrogram&, const Dendrogram&) = default;
};

// Identity of a merge independent of engine and sequence: the two children,
// each named by (smallest leaf, leaf count). Within one hierarchy that pair
// names a leaf set uniquely, so comparing these equals comparing leaf sets.
struct CanonicalMerge {
  ClusterId first_min;
  std::uint64_t first_size;
  ClusterId second_min;
  std::uint64_t second_size;

  auto operator<=>(const CanonicalMerge&) const = default;
};

// Throws InternalError unless the merges replay as a valid forest: children
// active and distinct, result = min child, result_size additive.
void validate_dendrogram(const Dendrogram& d);

std::size_t dendrogram_height(const Dendrogram& d);

std::size_t count_roots(const Dendrogram& d);

// Sorted canonical merge set.
std::vector<CanonicalMerge> canonical_merges(const Dendrogram& d);

bool same_hierarchy(const Dendrogram& a, const Dendrogram& b);

// Human-readable description of the first canonical merge present in one
// dendrogram but not the other; nullopt when the hierarchies agree.
std::optional<std::string> first_difference(const Dendrogram& a, const Dendrogram& b);

// Flat partition with exactly k clusters obtained by replaying merges in
// increasing dissimilarity order (ties by min id, max id; a merge never runs
// before the merges forming its children). Each cluster is sorted; clusters
// are ordered by their smallest point.
std::vector<std::vector<ClusterId>> flat_clusters(const Dendrogram& d, std::size_t k);

// Leaf sets of every internal node, indexed like d.merges.
std::vector<std::vector<ClusterId>> merge_leaf_sets(const Dendrogram& d);

}  // namespace rac

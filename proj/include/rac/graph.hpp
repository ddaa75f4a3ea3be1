#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rac/types.hpp"

namespace rac {

struct Edge {
  ClusterId u;
  ClusterId v;
  double weight;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Adjacent {
  ClusterId id;
  double weight;
};

// Immutable weighted undirected graph over point ids 0..n-1, stored as CSR.
// A missing pair means the dissimilarity is undefined.
class DissimilarityGraph {
 public:
  DissimilarityGraph() = default;

  std::size_t num_nodes() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_edges() const { return edges_.size(); }

  std::span<const Adjacent> neighbors(ClusterId u) const {
    return {adjacent_.data() + offsets_[u], adjacent_.data() + offsets_[u + 1]};
  }
  std::optional<double> weight(ClusterId u, ClusterId v) const;

  // Canonical edge list: u < v, sorted by (u, v).
  const std::vector<Edge>& edges() const { return edges_; }

 private:
  friend class GraphBuilder;

  std::vector<std::size_t> offsets_;
  std::vector<Adjacent> adjacent_;
  std::vector<Edge> edges_;
};

// Collects edges in any orientation. build() deduplicates (u,v)/(v,u) pairs
// with equal weight and rejects conflicting duplicates.
class GraphBuilder {
 public:
  explicit GraphBuilder(std::size_t num_nodes) : num_nodes_(num_nodes) {}

  // Throws ContractViolation on self-loops, out-of-range ids, and negative or
  // non-finite weights.
  void add_edge(ClusterId u, ClusterId v, double weight);
  void grow(std::size_t num_nodes);

  DissimilarityGraph build() &&;

 private:
  std::size_t num_nodes_;
  std::vector<Edge> edges_;
};

DissimilarityGraph complete_graph(std::size_t n, std::span<const double> upper_triangle);

}  // namespace rac

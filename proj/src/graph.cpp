#include "rac/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rac/errors.hpp"

namespace rac {

std::optional<double> DissimilarityGraph::weight(ClusterId u, ClusterId v) const {
  if (u >= num_nodes() || v >= num_nodes()) return std::nullopt;
  auto row = neighbors(u);
  auto it = std::lower_bound(row.begin(), row.end(), v,
                             [](const Adjacent& a, ClusterId id) { return a.id < id; });
  if (it == row.end() || it->id != v) return std::nullopt;
  return it->weight;
}

void GraphBuilder::add_edge(ClusterId u, ClusterId v, double weight) {
  if (u == v) {
    throw ContractViolation("self-loop on node " + std::to_string(u));
  }
  if (!std::isfinite(weight) || weight < 0.0) {
    throw ContractViolation("edge weight must be finite and non-negative, got " +
                            std::to_string(weight));
  }
  if (u >= num_nodes_ || v >= num_nodes_) {
    throw ContractViolation("edge endpoint out of range");
  }
  if (u > v) std::swap(u, v);
  edges_.push_back({u, v, weight});
}

void GraphBuilder::grow(std::size_t num_nodes) { num_nodes_ = std::max(num_nodes_, num_nodes); }

DissimilarityGraph GraphBuilder::build() && {
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  std::vector<Edge> unique;
  unique.reserve(edges_.size());
  for (const Edge& e : edges_) {
    if (!unique.empty() && unique.back().u == e.u && unique.back().v == e.v) {
      if (unique.back().weight != e.weight) {
        throw ContractViolation("conflicting weights for pair (" + std::to_string(e.u) + ", " +
                                std::to_string(e.v) + ")");
      }
      continue;
    }
    unique.push_back(e);
  }
  edges_.clear();
  edges_.shrink_to_fit();

  DissimilarityGraph g;
  std::vector<std::size_t> degree(num_nodes_, 0);
  for (const Edge& e : unique) {
    ++degree[e.u];
    ++degree[e.v];
  }
  g.offsets_.assign(num_nodes_ + 1, 0);
  for (std::size_t i = 0; i < num_nodes_; ++i) g.offsets_[i + 1] = g.offsets_[i] + degree[i];
  g.adjacent_.resize(g.offsets_.back());
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  // Edges are sorted by (u, v), so each row fills in increasing id order
  // for the u side; the v side needs a final sort.
  for (const Edge& e : unique) {
    g.adjacent_[cursor[e.u]++] = {e.v, e.weight};
    g.adjacent_[cursor[e.v]++] = {e.u, e.weight};
  }
  for (std::size_t i = 0; i < num_nodes_; ++i) {
    std::sort(g.adjacent_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]),
              g.adjacent_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]),
              [](const Adjacent& a, const Adjacent& b) { return a.id < b.id; });
  }
  g.edges_ = std::move(unique);
  return g;
}

DissimilarityGraph complete_graph(std::size_t n, std::span<const double> upper_triangle) {
  if (upper_triangle.size() != n * (n - 1) / 2) {
    throw ContractViolation("complete_graph: expected n(n-1)/2 weights");
  }
  GraphBuilder builder(n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      builder.add_edge(static_cast<ClusterId>(i), static_cast<ClusterId>(j), upper_triangle[k++]);
    }
  }
  return std::move(builder).build();
}

}  // namespace rac

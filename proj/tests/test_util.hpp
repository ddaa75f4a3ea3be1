#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "rac/graph.hpp"
#include "rac/theory.hpp"

namespace rac::testing {

// Random graph where each pair is present with probability `density`.
inline DissimilarityGraph random_graph(std::size_t n, double density, std::mt19937_64& rng) {
  GraphBuilder b(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (uniform01(rng) < density) {
        b.add_edge(static_cast<ClusterId>(i), static_cast<ClusterId>(j), uniform01(rng));
      }
    }
  }
  return std::move(b).build();
}

// Weights drawn from a handful of values so ties are common.
inline DissimilarityGraph tied_graph(std::size_t n, double density, int levels, std::mt19937_64& rng) {
  GraphBuilder b(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (uniform01(rng) < density) {
        const auto level = static_cast<int>(uniform01(rng) * levels);
        b.add_edge(static_cast<ClusterId>(i), static_cast<ClusterId>(j), 1.0 + level);
      }
    }
  }
  return std::move(b).build();
}

inline bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

// Merge dissimilarities in sequence order never drop by more than `slack`.
inline bool monotone(const Dendrogram& d, double slack) {
  for (std::size_t i = 1; i < d.merges.size(); ++i) {
    if (d.merges[i].dissimilarity < d.merges[i - 1].dissimilarity - slack) return false;
  }
  return true;
}

}  // namespace rac::testing

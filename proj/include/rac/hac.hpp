#pragma once

#include <cstddef>
#include <queue>
#include <vector>

#include "rac/dendrogram.hpp"
#include "rac/graph.hpp"
#include "rac/neighbor_map.hpp"
#include "rac/types.hpp"

namespace rac {

// Sequential HAC: always merges the globally smallest pair under the
// (weight, lo id, hi id) order. Exposed as a stepping engine so tests can
// audit the cache between merges or force a merge by hand.
class HacEngine {
 public:
  HacEngine(const DissimilarityGraph& graph, Linkage linkage);

  // Merges the next pair. Returns false once no pair has a defined dissimilarity.
  bool step();
  void run();

  // Merges a and b immediately, regardless of the queue order.
  void merge(ClusterId a, ClusterId b);

  const Dendrogram& dendrogram() const { return dendrogram_; }
  Dendrogram take_dendrogram() && { return std::move(dendrogram_); }

  bool is_active(ClusterId id) const { return active_[id]; }
  std::vector<ClusterId> active_clusters() const;
  const NeighborMap& neighbors(ClusterId id) const { return neighbors_[id]; }
  const std::vector<ClusterId>& members(ClusterId id) const { return members_[id]; }

 private:
  struct Candidate {
    PairKey key;
    std::uint32_t version_lo;
    std::uint32_t version_hi;
    friend bool operator>(const Candidate& a, const Candidate& b) { return a.key > b.key; }
  };

  void push(ClusterId a, ClusterId b, double weight);

  Linkage linkage_;
  std::vector<NeighborMap> neighbors_;
  std::vector<std::vector<ClusterId>> members_;
  std::vector<bool> active_;
  std::vector<std::uint32_t> version_;
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> queue_;
  Dendrogram dendrogram_;
};

Dendrogram hac_run(const DissimilarityGraph& graph, Linkage linkage);

// Recomputes every cluster dissimilarity from the point-level definition at
// every step. Refuses instances above kNaiveMaxPoints.
inline constexpr std::size_t kNaiveMaxPoints = 512;
Dendrogram hac_naive(const DissimilarityGraph& graph, Linkage linkage);

}  // namespace rac

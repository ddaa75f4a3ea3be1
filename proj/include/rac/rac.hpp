#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rac/dendrogram.hpp"
#include "rac/graph.hpp"
#include "rac/neighbor_map.hpp"
#include "rac/types.hpp"
#include "rac/worker_pool.hpp"

namespace rac {

struct ClusterState {
  ClusterId id = 0;
  std::uint64_t size = 1;
  NeighborMap neighbors;
  std::optional<ClusterId> nn;
  bool will_merge = false;
  bool active = true;
};

// A reciprocal nearest neighbor pair; lo < hi. lo owns the merge and the result.
struct MergePair {
  ClusterId lo;
  ClusterId hi;

  friend bool operator==(const MergePair&, const MergePair&) = default;
};

struct RoundStats {
  std::uint32_t round = 0;
  std::uint64_t clusters_before = 0;
  std::uint64_t merges = 0;
  double alpha = 0.0;  // 2 * merges / clusters_before
  std::uint64_t nn_updates = 0;
  double beta_per_merge = 0.0;  // nn_updates / merges
  double find_rnn_seconds = 0.0;
  double merge_seconds = 0.0;
  double nn_update_seconds = 0.0;
};

RoundStats make_round_stats(std::uint32_t round, std::uint64_t clusters_before,
                            std::uint64_t merges, std::uint64_t nn_updates);

struct RacOptions {
  std::size_t workers = 1;
  // Verify map symmetry and nn caches after every round (O(total degree)).
  bool check_invariants = false;
};

struct RacResult {
  Dendrogram dendrogram;
  std::vector<RoundStats> rounds;
};

// Round-synchronous reciprocal agglomerative clustering over shared memory.
// Each phase runs on the worker pool over contiguous id ranges with a barrier
// after it; cross-range writes only happen through buffered symmetric updates
// applied in their own sub-phase by the owner of the target range.
class RacEngine {
 public:
  RacEngine(const DissimilarityGraph& graph, Linkage linkage, RacOptions options = {});

  // Sets will_merge on every cluster whose nn points back at it and returns
  // the merging pairs in increasing lo order.
  std::vector<MergePair> find_reciprocal_nearest_neighbors();

  // Merges the pairs returned by the find phase: builds each result's
  // neighborhood, deletes the higher ids and pushes symmetric updates.
  void update_cluster_dissimilarities(std::span<const MergePair> merges);

  // Rescans the neighborhood of every cluster that merged or whose nn merged.
  // Returns the number of rescans.
  std::size_t update_nearest_neighbors();

  // One full round with timing. Returns false when no pair merges.
  bool run_round();
  void run();

  // Throws InternalError on asymmetric maps or a stale nn cache.
  void check_invariants() const;

  const ClusterState& cluster(ClusterId id) const { return clusters_[id]; }
  std::size_t num_points() const { return clusters_.size(); }
  std::size_t active_count() const { return active_; }
  std::uint32_t rounds_completed() const { return round_; }
  const Dendrogram& dendrogram() const { return dendrogram_; }
  const std::vector<RoundStats>& rounds() const { return rounds_; }
  RacResult take_result() &&;

 private:
  struct PendingUpdate {
    ClusterId target;
    ClusterId merged;
    ClusterId removed;
    Link link;
  };

  Linkage linkage_;
  RacOptions options_;
  WorkerPool pool_;
  std::vector<ClusterState> clusters_;
  std::size_t active_ = 0;
  std::uint32_t round_ = 0;
  Dendrogram dendrogram_;
  std::vector<RoundStats> rounds_;
  // outbox_[producer][target range]
  std::vector<std::vector<std::vector<PendingUpdate>>> outbox_;
  // Set during the merge phase for non-merging clusters whose nn merged.
  std::vector<std::uint8_t> nn_stale_;
};

RacResult rac_run(const DissimilarityGraph& graph, Linkage linkage, RacOptions options = {});

}  // namespace rac

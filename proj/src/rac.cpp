#include "rac/rac.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <sstream>

#include "rac/errors.hpp"
#include "rac/merge_step.hpp"

namespace rac {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool bitwise_equal(const Link& a, const Link& b) {
  return std::memcmp(&a.weight, &b.weight, sizeof(double)) == 0 && a.pairs == b.pairs;
}

}  // namespace

RoundStats make_round_stats(std::uint32_t round, std::uint64_t clusters_before,
                            std::uint64_t merges, std::uint64_t nn_updates) {
  RoundStats s;
  s.round = round;
  s.clusters_before = clusters_before;
  s.merges = merges;
  s.alpha = clusters_before == 0 ? 0.0
                                 : 2.0 * static_cast<double>(merges) / static_cast<double>(clusters_before);
  s.nn_updates = nn_updates;
  s.beta_per_merge = merges == 0 ? 0.0 : static_cast<double>(nn_updates) / static_cast<double>(merges);
  return s;
}

RacEngine::RacEngine(const DissimilarityGraph& graph, Linkage linkage, RacOptions options)
    : linkage_(linkage),
      options_(options),
      pool_(options.workers),
      clusters_(graph.num_nodes()),
      active_(graph.num_nodes()),
      outbox_(pool_.size(), std::vector<std::vector<PendingUpdate>>(pool_.size())),
      nn_stale_(graph.num_nodes(), 0) {
  dendrogram_.n_points = graph.num_nodes();
  pool_.for_ranges(clusters_.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto id = static_cast<ClusterId>(i);
      ClusterState& c = clusters_[i];
      c.id = id;
      std::vector<NeighborMap::Entry> entries;
      entries.reserve(graph.neighbors(id).size());
      for (const Adjacent& adj : graph.neighbors(id)) entries.push_back({adj.id, Link{adj.weight, 1}});
      c.neighbors = NeighborMap(std::move(entries));
      c.nn = c.neighbors.argmin(id);
    }
  });
}

std::vector<MergePair> RacEngine::find_reciprocal_nearest_neighbors() {
  std::vector<std::vector<MergePair>> found(pool_.size());
  if (active_ > 1) {
    pool_.for_ranges(clusters_.size(), [&](std::size_t w, std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        ClusterState& c = clusters_[i];
        if (!c.active) continue;
        c.will_merge = c.nn && clusters_[*c.nn].nn == c.id;
        if (c.will_merge && c.id < *c.nn) found[w].push_back({c.id, *c.nn});
      }
    });
  }
  std::vector<MergePair> pairs;
  for (auto& part : found) pairs.insert(pairs.end(), part.begin(), part.end());
  return pairs;
}

void RacEngine::update_cluster_dissimilarities(std::span<const MergePair> merges) {
  for (const MergePair& m : merges) {
    const ClusterState& lo = clusters_[m.lo];
    const ClusterState& hi = clusters_[m.hi];
    if (!(m.lo < m.hi && lo.active && hi.active && lo.will_merge && hi.will_merge &&
          lo.nn == m.hi && hi.nn == m.lo)) {
      throw ContractViolation("update_cluster_dissimilarities: pair is not a flagged reciprocal pair");
    }
  }
  const std::uint32_t round = round_ + 1;
  const std::size_t workers = pool_.size();
  const std::size_t n = clusters_.size();
  auto partner_of = [&](ClusterId x) {
    const ClusterState& c = clusters_[x];
    return c.will_merge ? *c.nn : x;
  };

  // Sub-phase 1: every pair builds its merged neighborhood from read-only state.
  std::vector<NeighborMap> merged(merges.size());
  pool_.for_ranges(merges.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const MergePair& m = merges[i];
      merged[i] = merged_neighborhood(linkage_, m.lo, m.hi, clusters_[m.lo].neighbors,
                                      clusters_[m.hi].neighbors, partner_of);
    }
  });

  const std::size_t first_event = dendrogram_.merges.size();
  for (const MergePair& m : merges) {
    const ClusterState& lo = clusters_[m.lo];
    dendrogram_.merges.push_back(MergeEvent{m.lo, m.hi, m.lo, lo.neighbors.find(m.hi)->weight, round,
                                            lo.size + clusters_[m.hi].size});
  }

  // Sub-phase 2: owners install results, delete the higher ids and buffer the
  // symmetric updates by target range.
  pool_.for_ranges(merges.size(), [&](std::size_t w, std::size_t begin, std::size_t end) {
    auto& out = outbox_[w];
    for (auto& bucket : out) bucket.clear();
    for (std::size_t i = begin; i < end; ++i) {
      const MergePair& m = merges[i];
      ClusterState& lo = clusters_[m.lo];
      ClusterState& hi = clusters_[m.hi];
      lo.size = dendrogram_.merges[first_event + i].result_size;
      lo.neighbors = std::move(merged[i]);
      hi.active = false;
      hi.neighbors.clear();
      for (const auto& [target, link] : lo.neighbors) {
        const std::size_t range = target * workers / std::max<std::size_t>(n, 1);
        out[std::min(range, workers - 1)].push_back({target, m.lo, m.hi, link});
      }
    }
  });
  active_ -= merges.size();

  // Sub-phase 3: each worker applies the updates aimed at clusters it owns,
  // in producer order.
  pool_.run([&](std::size_t w) {
    // Mark clusters whose nn merged before any update can point nn at a
    // merged cluster.
    for (std::size_t p = 0; p < workers; ++p) {
      for (const PendingUpdate& u : outbox_[p][w]) {
        const ClusterState& x = clusters_[u.target];
        if (!x.will_merge && x.nn && clusters_[*x.nn].will_merge) nn_stale_[u.target] = 1;
      }
    }
    for (std::size_t p = 0; p < workers; ++p) {
      for (const PendingUpdate& u : outbox_[p][w]) {
        ClusterState& x = clusters_[u.target];
        if (!x.active) throw InternalError("symmetric update aimed at deleted cluster");
        if (x.will_merge) {
          // Both owners of a merging-merging pair computed this value.
          const auto mine = x.neighbors.find(u.merged);
          if (!mine || !bitwise_equal(*mine, u.link)) {
            std::ostringstream os;
            os << "duplicate cross-merge computation disagrees between " << u.merged << " and "
               << u.target;
            throw InternalError(os.str());
          }
          continue;
        }
        x.neighbors.erase(u.removed);
        x.neighbors.upsert(u.merged, u.link);
        if (x.nn && !nn_stale_[u.target]) {
          const auto current = x.neighbors.find(*x.nn);
          if (PairKey::make(u.link.weight, x.id, u.merged) <
              PairKey::make(current->weight, x.id, *x.nn)) {
            x.nn = u.merged;
          }
        }
      }
    }
  });
  round_ = round;
}

std::size_t RacEngine::update_nearest_neighbors() {
  std::vector<std::size_t> counts(pool_.size(), 0);
  pool_.for_ranges(clusters_.size(), [&](std::size_t w, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      ClusterState& c = clusters_[i];
      if (!c.active) continue;
      if (c.will_merge || nn_stale_[i]) {
        c.nn = c.neighbors.argmin(c.id);
        nn_stale_[i] = 0;
        ++counts[w];
      }
    }
  });
  std::size_t total = 0;
  for (std::size_t k : counts) total += k;
  return total;
}

bool RacEngine::run_round() {
  const std::uint64_t before = active_;
  auto t0 = Clock::now();
  const auto pairs = find_reciprocal_nearest_neighbors();
  const double t_find = seconds_since(t0);
  if (pairs.empty()) return false;

  t0 = Clock::now();
  update_cluster_dissimilarities(pairs);
  const double t_merge = seconds_since(t0);

  t0 = Clock::now();
  const std::size_t updates = update_nearest_neighbors();
  const double t_nn = seconds_since(t0);

  RoundStats s = make_round_stats(round_, before, pairs.size(), updates);
  s.find_rnn_seconds = t_find;
  s.merge_seconds = t_merge;
  s.nn_update_seconds = t_nn;
  rounds_.push_back(s);
  if (options_.check_invariants) check_invariants();
  return true;
}

void RacEngine::run() {
  while (run_round()) {
  }
}

void RacEngine::check_invariants() const {
  for (const ClusterState& c : clusters_) {
    if (!c.active) {
      if (!c.neighbors.empty()) throw InternalError("deleted cluster kept neighbors");
      continue;
    }
    for (const auto& [other, link] : c.neighbors) {
      const ClusterState& o = clusters_[other];
      const auto back = o.active ? o.neighbors.find(c.id) : std::nullopt;
      if (!back || !bitwise_equal(*back, link)) {
        std::ostringstream os;
        os << "asymmetric neighbor maps between " << c.id << " and " << other;
        throw InternalError(os.str());
      }
    }
    if (c.nn != c.neighbors.argmin(c.id)) {
      throw InternalError("stale nearest neighbor cache for cluster " + std::to_string(c.id));
    }
  }
}

RacResult RacEngine::take_result() && {
  return RacResult{std::move(dendrogram_), std::move(rounds_)};
}

RacResult rac_run(const DissimilarityGraph& graph, Linkage linkage, RacOptions options) {
  RacEngine engine(graph, linkage, options);
  engine.run();
  return std::move(engine).take_result();
}

}  // namespace rac

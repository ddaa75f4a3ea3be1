#include "rac/shard.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "rac/errors.hpp"
#include "rac/merge_step.hpp"
#include "rac/worker_pool.hpp"

namespace rac {

ShardIndex assign_shard(ClusterId id, ShardIndex num_shards) {
  if (num_shards < 1) throw ContractViolation("assign_shard: need at least one shard");
  return static_cast<ShardIndex>(id % num_shards);
}

std::string_view to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::kNNQuery:
      return "NNQuery";
    case MessageKind::kNNReply:
      return "NNReply";
    case MessageKind::kNeighborhoodRequest:
      return "NeighborhoodRequest";
    case MessageKind::kNeighborhoodReply:
      return "NeighborhoodReply";
    case MessageKind::kDissimilarityUpdate:
      return "DissimilarityUpdate";
    case MessageKind::kDeleteNotice:
      return "DeleteNotice";
  }
  return "unknown";
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::kFindRnn:
      return "find_reciprocal_nearest_neighbors";
    case Phase::kMerge:
      return "merge";
    case Phase::kNNUpdate:
      return "update_nearest_neighbors";
  }
  return "unknown";
}

MessageKind kind_of(const Payload& payload) { return static_cast<MessageKind>(payload.index()); }

std::size_t payload_bytes(const Payload& payload, Linkage linkage) {
  constexpr std::size_t kTag = 1;
  constexpr std::size_t kWord = 8;
  const std::size_t link_bytes = kWord + (linkage == Linkage::kAverage ? kWord : 0);
  switch (kind_of(payload)) {
    case MessageKind::kNNQuery:
    case MessageKind::kNeighborhoodRequest:
      return kTag + 2 * kWord;
    case MessageKind::kNNReply:
      return kTag + 3 * kWord;
    case MessageKind::kNeighborhoodReply: {
      const auto& reply = std::get<NeighborhoodReply>(payload);
      return kTag + 3 * kWord + reply.entries.size() * (kWord + link_bytes);
    }
    case MessageKind::kDissimilarityUpdate:
      return kTag + 3 * kWord + link_bytes;
    case MessageKind::kDeleteNotice:
      return kTag + kWord;
  }
  return 0;
}

std::array<KindCounters, kMessageKinds> TransportStats::totals() const {
  std::array<KindCounters, kMessageKinds> out{};
  for (const RoundTransport& r : rounds) {
    for (std::size_t k = 0; k < kMessageKinds; ++k) {
      out[k].messages += r.by_kind[k].messages;
      out[k].remote_messages += r.by_kind[k].remote_messages;
      out[k].remote_bytes += r.by_kind[k].remote_bytes;
    }
  }
  return out;
}

std::uint64_t TransportStats::total_remote_messages() const {
  std::uint64_t total = 0;
  for (const RoundTransport& r : rounds) total += r.remote_messages;
  return total;
}

Transport::Transport(ShardIndex num_shards, Linkage linkage, std::ostream* log)
    : num_shards_(num_shards),
      linkage_(linkage),
      log_(log),
      outboxes_(num_shards),
      inboxes_(num_shards) {
  if (num_shards < 1) throw ContractViolation("Transport: need at least one shard");
  current_.shard_seconds.assign(num_shards, {});
}

void Transport::send(ShardIndex source, ShardIndex destination, Payload payload) {
  outboxes_[source].push_back(Message{source, destination, std::move(payload)});
}

void Transport::flush_barrier(std::uint32_t round, std::string_view phase) {
  for (auto& inbox : inboxes_) inbox.clear();
  // (source, destination, kind) -> (count, bytes), for the log.
  std::map<std::tuple<ShardIndex, ShardIndex, std::size_t>, std::pair<std::uint64_t, std::uint64_t>> batches;
  for (ShardIndex s = 0; s < num_shards_; ++s) {
    for (Message& m : outboxes_[s]) {
      const auto kind = static_cast<std::size_t>(kind_of(m.payload));
      const std::size_t bytes = payload_bytes(m.payload, linkage_);
      KindCounters& c = current_.by_kind[kind];
      ++c.messages;
      if (m.source != m.destination) {
        ++c.remote_messages;
        c.remote_bytes += bytes;
        ++current_.remote_messages;
        current_.remote_bytes += bytes;
      }
      if (log_) {
        auto& b = batches[{m.source, m.destination, kind}];
        ++b.first;
        b.second += bytes;
      }
      inboxes_[m.destination].push_back(std::move(m));
    }
    outboxes_[s].clear();
  }
  if (log_) {
    for (const auto& [key, value] : batches) {
      const auto& [src, dst, kind] = key;
      *log_ << round << '\t' << phase << '\t' << src << '\t' << dst << '\t'
            << to_string(static_cast<MessageKind>(kind)) << '\t' << value.first << '\t'
            << value.second << '\n';
    }
  }
}

void Transport::begin_round(std::uint32_t round) {
  current_ = RoundTransport{};
  current_.round = round;
  current_.shard_seconds.assign(num_shards_, {});
}

RoundTransport Transport::take_round() { return std::move(current_); }

namespace {

using Clock = std::chrono::steady_clock;

bool bitwise_equal(const Link& a, const Link& b) {
  return std::memcmp(&a.weight, &b.weight, sizeof(double)) == 0 && a.pairs == b.pairs;
}

struct ShardCluster {
  ClusterState state;
  bool nn_dirty = false;
};

// Exclusive owner of the clusters with id % num_shards == index.
class Shard {
 public:
  Shard(ShardIndex index, ShardIndex num_shards, const DissimilarityGraph& graph)
      : index_(index), num_shards_(num_shards) {
    const std::size_t n = graph.num_nodes();
    for (std::size_t id = index; id < n; id += num_shards) {
      ShardCluster c;
      c.state.id = static_cast<ClusterId>(id);
      std::vector<NeighborMap::Entry> entries;
      for (const Adjacent& adj : graph.neighbors(c.state.id)) entries.push_back({adj.id, Link{adj.weight, 1}});
      c.state.neighbors = NeighborMap(std::move(entries));
      c.state.nn = c.state.neighbors.argmin(c.state.id);
      clusters_.push_back(std::move(c));
    }
  }

  ShardIndex index() const { return index_; }
  bool owns(ClusterId id) const { return assign_shard(id, num_shards_) == index_; }

  // Every access to cluster state goes through here; a foreign id means some
  // code path bypassed the transport.
  ShardCluster& local(ClusterId id) {
    if (!owns(id)) {
      throw InternalError("shard " + std::to_string(index_) + " accessed cluster " +
                          std::to_string(id) + " owned by shard " +
                          std::to_string(assign_shard(id, num_shards_)));
    }
    return clusters_[id / num_shards_];
  }

  std::vector<ShardCluster>& clusters() { return clusters_; }

  std::size_t active_count() const {
    return static_cast<std::size_t>(std::count_if(clusters_.begin(), clusters_.end(),
                                                  [](const ShardCluster& c) { return c.state.active; }));
  }

  // Per-round scratch.
  std::vector<MergePair> owned_pairs;
  std::unordered_map<ClusterId, NeighborhoodReply> remote_partners;
  std::unordered_map<ClusterId, ClusterId> remote_partner_of;
  std::vector<MergeEvent> events;
  std::uint64_t nn_updates = 0;
  std::uint64_t updates_applied = 0;
  std::uint64_t deletes_applied = 0;

 private:
  ShardIndex index_;
  ShardIndex num_shards_;
  std::vector<ShardCluster> clusters_;
};

class ShardedRunner {
 public:
  ShardedRunner(const DissimilarityGraph& graph, Linkage linkage, const ShardOptions& options)
      : linkage_(linkage),
        num_shards_(options.num_shards),
        pool_(static_cast<std::size_t>(options.num_shards) * std::max<std::size_t>(1, options.workers_per_shard)),
        transport_(options.num_shards, linkage, options.transport_log) {
    result_.dendrogram.n_points = graph.num_nodes();
    shards_.reserve(num_shards_);
    for (ShardIndex s = 0; s < num_shards_; ++s) shards_.emplace_back(s, num_shards_, graph);
  }

  ShardedResult run() {
    while (round()) {
    }
    return std::move(result_);
  }

 private:
  template <typename Fn>
  void each_shard(Phase phase, Fn&& fn) {
    auto& seconds = transport_.current().shard_seconds;
    pool_.for_tasks(shards_.size(), [&](std::size_t s) {
      const auto t0 = Clock::now();
      fn(shards_[s]);
      seconds[s][static_cast<std::size_t>(phase)] += std::chrono::duration<double>(Clock::now() - t0).count();
    });
  }

  void send(const Shard& from, ClusterId about, Payload payload) {
    transport_.send(from.index(), assign_shard(about, num_shards_), std::move(payload));
  }

  bool round() {
    const std::uint32_t round = round_ + 1;
    transport_.begin_round(round);
    std::uint64_t before = 0;
    for (const Shard& s : shards_) before += s.active_count();

    auto t0 = Clock::now();
    const std::uint64_t merges = find_phase(round);
    const double t_find = std::chrono::duration<double>(Clock::now() - t0).count();
    if (merges == 0) return false;

    t0 = Clock::now();
    merge_phase(round, merges);
    const double t_merge = std::chrono::duration<double>(Clock::now() - t0).count();

    t0 = Clock::now();
    const std::uint64_t updates = nn_phase(round);
    const double t_nn = std::chrono::duration<double>(Clock::now() - t0).count();

    RoundStats stats = make_round_stats(round, before, merges, updates);
    stats.find_rnn_seconds = t_find;
    stats.merge_seconds = t_merge;
    stats.nn_update_seconds = t_nn;
    result_.rounds.push_back(stats);
    result_.transport.rounds.push_back(transport_.take_round());
    round_ = round;
    return true;
  }

  std::uint64_t find_phase(std::uint32_t round) {
    each_shard(Phase::kFindRnn, [&](Shard& shard) {
      shard.owned_pairs.clear();
      for (ShardCluster& c : shard.clusters()) {
        c.state.will_merge = false;
        c.nn_dirty = false;
        if (!c.state.active || !c.state.nn) continue;
        const ClusterId nn = *c.state.nn;
        if (shard.owns(nn)) {
          c.state.will_merge = shard.local(nn).state.nn == c.state.id;
        } else {
          send(shard, nn, NNQuery{c.state.id, nn});
        }
      }
    });
    transport_.flush_barrier(round, "find/nn-query");

    each_shard(Phase::kFindRnn, [&](Shard& shard) {
      for (const Message& m : transport_.inbox(shard.index())) {
        const auto& q = std::get<NNQuery>(m.payload);
        const ShardCluster& target = shard.local(q.target);
        if (!target.state.active) throw InternalError("NNQuery for deleted cluster");
        transport_.send(shard.index(), m.source, NNReply{q.asker, q.target, *target.state.nn});
      }
    });
    transport_.flush_barrier(round, "find/nn-reply");

    each_shard(Phase::kFindRnn, [&](Shard& shard) {
      for (const Message& m : transport_.inbox(shard.index())) {
        const auto& r = std::get<NNReply>(m.payload);
        shard.local(r.asker).state.will_merge = r.value == r.asker;
      }
      for (ShardCluster& c : shard.clusters()) {
        if (c.state.active && c.state.will_merge && c.state.id < *c.state.nn) {
          shard.owned_pairs.push_back({c.state.id, *c.state.nn});
        }
      }
    });
    std::uint64_t merges = 0;
    for (const Shard& s : shards_) merges += s.owned_pairs.size();
    return merges;
  }

  void merge_phase(std::uint32_t round, std::uint64_t merges) {
    // Fetch the neighborhoods of remote higher-id partners.
    each_shard(Phase::kMerge, [&](Shard& shard) {
      shard.remote_partners.clear();
      shard.remote_partner_of.clear();
      shard.events.clear();
      for (const MergePair& p : shard.owned_pairs) {
        if (!shard.owns(p.hi)) send(shard, p.hi, NeighborhoodRequest{p.lo, p.hi});
      }
    });
    transport_.flush_barrier(round, "merge/neighborhood-request");

    each_shard(Phase::kMerge, [&](Shard& shard) {
      for (const Message& m : transport_.inbox(shard.index())) {
        const auto& req = std::get<NeighborhoodRequest>(m.payload);
        const ClusterState& hi = shard.local(req.target).state;
        if (!hi.active || !hi.will_merge || hi.nn != req.owner) {
          throw InternalError("NeighborhoodRequest for a cluster that is not merging with the requester");
        }
        transport_.send(shard.index(), m.source,
                        NeighborhoodReply{req.target, req.owner, hi.size, hi.neighbors.entries()});
      }
    });
    transport_.flush_barrier(round, "merge/neighborhood-reply");

    // Ask for the merge status of every remote cluster in a merged neighborhood.
    each_shard(Phase::kMerge, [&](Shard& shard) {
      for (const Message& m : transport_.inbox(shard.index())) {
        auto reply = std::get<NeighborhoodReply>(m.payload);
        const ClusterId target = reply.target;
        shard.remote_partners.emplace(target, std::move(reply));
      }
      std::unordered_set<ClusterId> asked;
      auto ask = [&](ClusterId owner, ClusterId x) {
        if (shard.owns(x) || !asked.insert(x).second) return;
        send(shard, x, NNQuery{owner, x});
      };
      for (const MergePair& p : shard.owned_pairs) {
        for (const auto& [x, link] : shard.local(p.lo).state.neighbors) {
          if (x != p.hi) ask(p.lo, x);
        }
        if (shard.owns(p.hi)) {
          for (const auto& [x, link] : shard.local(p.hi).state.neighbors) {
            if (x != p.lo) ask(p.lo, x);
          }
        } else {
          for (const auto& [x, link] : shard.remote_partners.at(p.hi).entries) {
            if (x != p.lo) ask(p.lo, x);
          }
        }
      }
    });
    transport_.flush_barrier(round, "merge/status-query");

    each_shard(Phase::kMerge, [&](Shard& shard) {
      for (const Message& m : transport_.inbox(shard.index())) {
        const auto& q = std::get<NNQuery>(m.payload);
        const ClusterState& x = shard.local(q.target).state;
        if (!x.active) throw InternalError("status query for deleted cluster");
        transport_.send(shard.index(), m.source,
                        NNReply{q.asker, q.target, x.will_merge ? *x.nn : q.target});
      }
    });
    transport_.flush_barrier(round, "merge/status-reply");

    // Owners compute merged neighborhoods, install them and push updates.
    each_shard(Phase::kMerge, [&](Shard& shard) {
      for (const Message& m : transport_.inbox(shard.index())) {
        const auto& r = std::get<NNReply>(m.payload);
        shard.remote_partner_of[r.target] = r.value;
      }
      auto partner_of = [&](ClusterId x) {
        if (shard.owns(x)) {
          const ClusterState& c = shard.local(x).state;
          return c.will_merge ? *c.nn : x;
        }
        return shard.remote_partner_of.at(x);
      };
      for (const MergePair& p : shard.owned_pairs) {
        ClusterState& lo = shard.local(p.lo).state;
        NeighborMap remote_map;
        std::uint64_t hi_size = 0;
        const NeighborMap* hi_map = nullptr;
        if (shard.owns(p.hi)) {
          const ClusterState& hi = shard.local(p.hi).state;
          hi_map = &hi.neighbors;
          hi_size = hi.size;
        } else {
          const NeighborhoodReply& reply = shard.remote_partners.at(p.hi);
          remote_map = NeighborMap(reply.entries);
          hi_map = &remote_map;
          hi_size = reply.size;
        }
        NeighborMap merged = merged_neighborhood(linkage_, p.lo, p.hi, lo.neighbors, *hi_map, partner_of);
        shard.events.push_back(
            MergeEvent{p.lo, p.hi, p.lo, lo.neighbors.find(p.hi)->weight, round, lo.size + hi_size});
        lo.size += hi_size;
        lo.neighbors = std::move(merged);
        send(shard, p.hi, DeleteNotice{p.hi});
        for (const auto& [x, link] : lo.neighbors) {
          send(shard, x, DissimilarityUpdate{x, p.lo, p.hi, link});
        }
      }
    });
    transport_.flush_barrier(round, "merge/update");

    each_shard(Phase::kMerge, [&](Shard& shard) {
      shard.updates_applied = 0;
      shard.deletes_applied = 0;
      const auto inbox = transport_.inbox(shard.index());
      for (const Message& m : inbox) {
        if (const auto* del = std::get_if<DeleteNotice>(&m.payload)) {
          ClusterState& hi = shard.local(del->target).state;
          if (!hi.active || !hi.will_merge || !(del->target > *hi.nn)) {
            throw InternalError("DeleteNotice for cluster " + std::to_string(del->target) +
                                " which is not a merging higher id");
          }
          hi.active = false;
          hi.neighbors.clear();
          ++shard.deletes_applied;
        }
      }
      // A cluster whose nn merged rescans later; mark those before applying
      // so the shortcut below never compares against a merged nn.
      for (const Message& m : inbox) {
        if (const auto* u = std::get_if<DissimilarityUpdate>(&m.payload)) {
          ShardCluster& x = shard.local(u->target);
          if (x.state.nn && (*x.state.nn == u->merged || *x.state.nn == u->removed)) x.nn_dirty = true;
        }
      }
      for (const Message& m : inbox) {
        const auto* u = std::get_if<DissimilarityUpdate>(&m.payload);
        if (!u) continue;
        ShardCluster& x = shard.local(u->target);
        if (!x.state.active) {
          throw InternalError("DissimilarityUpdate references deleted cluster " + std::to_string(u->target));
        }
        ++shard.updates_applied;
        if (x.state.will_merge) {
          const auto mine = x.state.neighbors.find(u->merged);
          if (!mine || !bitwise_equal(*mine, u->link)) {
            throw InternalError("duplicate cross-merge computation disagrees between " +
                                std::to_string(u->merged) + " and " + std::to_string(u->target));
          }
          continue;
        }
        x.state.neighbors.erase(u->removed);
        x.state.neighbors.upsert(u->merged, u->link);
        if (!x.nn_dirty && x.state.nn) {
          const auto current = x.state.neighbors.find(*x.state.nn);
          if (PairKey::make(u->link.weight, x.state.id, u->merged) <
              PairKey::make(current->weight, x.state.id, *x.state.nn)) {
            x.state.nn = u->merged;
          }
        }
      }
    });

    // Conservation checks.
    RoundTransport& rt = transport_.current();
    const auto count = [&](MessageKind k) { return rt.by_kind[static_cast<std::size_t>(k)].messages; };
    std::uint64_t applied = 0;
    std::uint64_t deleted = 0;
    for (const Shard& s : shards_) {
      applied += s.updates_applied;
      deleted += s.deletes_applied;
    }
    rt.updates_applied = applied;
    if (count(MessageKind::kNeighborhoodRequest) != count(MessageKind::kNeighborhoodReply)) {
      throw InternalError("neighborhood requests and replies do not pair up");
    }
    if (count(MessageKind::kDeleteNotice) != merges || deleted != merges) {
      throw InternalError("delete notices do not match merges");
    }
    if (applied != count(MessageKind::kDissimilarityUpdate)) {
      throw InternalError("dissimilarity updates lost or duplicated");
    }

    std::vector<MergeEvent> events;
    for (Shard& s : shards_) events.insert(events.end(), s.events.begin(), s.events.end());
    std::sort(events.begin(), events.end(),
              [](const MergeEvent& a, const MergeEvent& b) { return a.left < b.left; });
    result_.dendrogram.merges.insert(result_.dendrogram.merges.end(), events.begin(), events.end());
  }

  std::uint64_t nn_phase(std::uint32_t round) {
    each_shard(Phase::kNNUpdate, [&](Shard& shard) {
      shard.nn_updates = 0;
      for (ShardCluster& c : shard.clusters()) {
        if (!c.state.active) continue;
        if (c.state.will_merge || c.nn_dirty) {
          c.state.nn = c.state.neighbors.argmin(c.state.id);
          ++shard.nn_updates;
        }
      }
    });
    transport_.flush_barrier(round, "nn-update");
    std::uint64_t total = 0;
    for (const Shard& s : shards_) total += s.nn_updates;
    return total;
  }

  Linkage linkage_;
  ShardIndex num_shards_;
  WorkerPool pool_;
  Transport transport_;
  std::vector<Shard> shards_;
  std::uint32_t round_ = 0;
  ShardedResult result_;
};

}  // namespace

ShardedResult run_sharded(const DissimilarityGraph& graph, Linkage linkage, ShardOptions options) {
  if (options.num_shards < 1) throw ContractViolation("run_sharded: need at least one shard");
  ShardedRunner runner(graph, linkage, options);
  return runner.run();
}

}  // namespace rac

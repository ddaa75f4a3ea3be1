#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "rac/dendrogram.hpp"
#include "rac/graph.hpp"
#include "rac/neighbor_map.hpp"
#include "rac/rac.hpp"
#include "rac/types.hpp"

namespace rac {

using ShardIndex = std::uint32_t;

// Partition function: id mod num_shards. A merge result keeps the lower id
// and therefore stays on that id's shard.
ShardIndex assign_shard(ClusterId id, ShardIndex num_shards);

enum class MessageKind : std::uint8_t {
  kNNQuery,
  kNNReply,
  kNeighborhoodRequest,
  kNeighborhoodReply,
  kDissimilarityUpdate,
  kDeleteNotice,
};
inline constexpr std::size_t kMessageKinds = 6;
std::string_view to_string(MessageKind kind);

// "What is target's nn?" in the find phase; "is target merging, and with whom?"
// in the merge phase.
struct NNQuery {
  ClusterId asker;
  ClusterId target;
};
// value is target's nn (find phase) or target's merge partner, target itself
// when it does not merge (merge phase).
struct NNReply {
  ClusterId asker;
  ClusterId target;
  ClusterId value;
};
struct NeighborhoodRequest {
  ClusterId owner;
  ClusterId target;
};
struct NeighborhoodReply {
  ClusterId target;
  ClusterId owner;
  std::uint64_t size;
  std::vector<NeighborMap::Entry> entries;
};
struct DissimilarityUpdate {
  ClusterId target;
  ClusterId merged;
  ClusterId removed;
  Link link;
};
struct DeleteNotice {
  ClusterId target;
};

using Payload = std::variant<NNQuery, NNReply, NeighborhoodRequest, NeighborhoodReply,
                             DissimilarityUpdate, DeleteNotice>;

struct Message {
  ShardIndex source;
  ShardIndex destination;
  Payload payload;
};

MessageKind kind_of(const Payload& payload);

// Wire size: 1 byte kind tag, 8 bytes per id, weight and size. Pair counts
// travel with links (as a size) only under average linkage.
std::size_t payload_bytes(const Payload& payload, Linkage linkage);

enum class Phase : std::uint8_t { kFindRnn, kMerge, kNNUpdate };
inline constexpr std::size_t kPhases = 3;
std::string_view to_string(Phase phase);

struct KindCounters {
  std::uint64_t messages = 0;         // including shard-local loopback
  std::uint64_t remote_messages = 0;  // source != destination
  std::uint64_t remote_bytes = 0;
};

struct RoundTransport {
  std::uint32_t round = 0;
  std::array<KindCounters, kMessageKinds> by_kind{};
  std::uint64_t remote_bytes = 0;
  std::uint64_t remote_messages = 0;
  std::uint64_t updates_applied = 0;
  // shard_seconds[shard][phase]
  std::vector<std::array<double, kPhases>> shard_seconds;
};

struct TransportStats {
  std::vector<RoundTransport> rounds;

  std::array<KindCounters, kMessageKinds> totals() const;
  std::uint64_t total_remote_messages() const;
};

// In-memory message fabric between shards. Each shard appends only to its own
// outbox; nothing becomes visible to a receiver until flush_barrier() moves
// every outbox into the destination inboxes (grouped by destination, ordered
// by source shard then send order).
class Transport {
 public:
  Transport(ShardIndex num_shards, Linkage linkage, std::ostream* log = nullptr);

  ShardIndex num_shards() const { return num_shards_; }

  void send(ShardIndex source, ShardIndex destination, Payload payload);

  void flush_barrier(std::uint32_t round, std::string_view phase);

  std::span<const Message> inbox(ShardIndex shard) const { return inboxes_[shard]; }

  void begin_round(std::uint32_t round);
  RoundTransport& current() { return current_; }
  RoundTransport take_round();

 private:
  ShardIndex num_shards_;
  Linkage linkage_;
  std::ostream* log_;
  std::vector<std::vector<Message>> outboxes_;
  std::vector<std::vector<Message>> inboxes_;
  RoundTransport current_;
};

struct ShardOptions {
  ShardIndex num_shards = 1;
  std::size_t workers_per_shard = 1;
  std::ostream* transport_log = nullptr;
};

struct ShardedResult {
  Dendrogram dendrogram;
  std::vector<RoundStats> rounds;
  TransportStats transport;
};

// Same round loop as rac_run with clusters partitioned over shards. Shards read
// only their own clusters; all remote information arrives as batched messages.
ShardedResult run_sharded(const DissimilarityGraph& graph, Linkage linkage, ShardOptions options = {});

}  // namespace rac

#pragma once

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include "rac/types.hpp"

namespace rac {

// Cluster -> Link map kept as a vector sorted by id. Neighborhoods are small
// and scanned far more often than they are edited.
class NeighborMap {
 public:
  using Entry = std::pair<ClusterId, Link>;

  NeighborMap() = default;
  explicit NeighborMap(std::vector<Entry> sorted_entries) : entries_(std::move(sorted_entries)) {}

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  const std::vector<Entry>& entries() const { return entries_; }

  std::optional<Link> find(ClusterId id) const {
    auto it = lower(id);
    if (it == entries_.end() || it->first != id) return std::nullopt;
    return it->second;
  }

  void upsert(ClusterId id, Link link) {
    auto it = lower(id);
    if (it != entries_.end() && it->first == id) {
      it->second = link;
    } else {
      entries_.insert(it, {id, link});
    }
  }

  bool erase(ClusterId id) {
    auto it = lower(id);
    if (it == entries_.end() || it->first != id) return false;
    entries_.erase(it);
    return true;
  }

  void clear() {
    entries_.clear();
    entries_.shrink_to_fit();
  }

  // Nearest neighbor of `self` under the (weight, lo id, hi id) order.
  std::optional<ClusterId> argmin(ClusterId self) const {
    std::optional<ClusterId> best;
    PairKey best_key{};
    for (const auto& [id, link] : entries_) {
      const PairKey key = PairKey::make(link.weight, self, id);
      if (!best || key < best_key) {
        best = id;
        best_key = key;
      }
    }
    return best;
  }

 private:
  std::vector<Entry>::const_iterator lower(ClusterId id) const {
    return std::lower_bound(entries_.begin(), entries_.end(), id,
                            [](const Entry& e, ClusterId x) { return e.first < x; });
  }
  std::vector<Entry>::iterator lower(ClusterId id) {
    return std::lower_bound(entries_.begin(), entries_.end(), id,
                            [](const Entry& e, ClusterId x) { return e.first < x; });
  }

  std::vector<Entry> entries_;
};

// Visits the union of two neighbor maps in id order as (id, link in a, link in b).
template <typename Fn>
void for_each_union(const NeighborMap& a, const NeighborMap& b, Fn&& fn) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      fn(ia->first, std::optional<Link>(ia->second), std::optional<Link>());
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      fn(ib->first, std::optional<Link>(), std::optional<Link>(ib->second));
      ++ib;
    } else {
      fn(ia->first, std::optional<Link>(ia->second), std::optional<Link>(ib->second));
      ++ia;
      ++ib;
    }
  }
}

}  // namespace rac

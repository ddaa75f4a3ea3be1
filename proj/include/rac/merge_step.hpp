#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "rac/linkage.hpp"
#include "rac/neighbor_map.hpp"

namespace rac {

// Neighborhood of lo u hi after a round in which they merge. partner_of(x)
// returns the cluster x merges with this round, or x itself if it does not
// merge. A neighbor pair (L, H) merging in the same round appears once, keyed
// by L, with the value from cross_merge_link; a higher-id neighbor that is
// being deleted never appears.
template <typename PartnerFn>
NeighborMap merged_neighborhood(Linkage linkage, ClusterId lo, ClusterId hi,
                                const NeighborMap& lo_map, const NeighborMap& hi_map,
                                PartnerFn&& partner_of) {
  std::vector<NeighborMap::Entry> entries;
  entries.reserve(lo_map.size() + hi_map.size());
  bool unsorted = false;
  for_each_union(lo_map, hi_map,
                 [&](ClusterId x, const std::optional<Link>& via_lo, const std::optional<Link>& via_hi) {
                   if (x == lo || x == hi) return;
                   const ClusterId partner = partner_of(x);
                   if (partner == x) {
                     entries.push_back({x, *combine_links(linkage, via_lo, via_hi)});
                     return;
                   }
                   const ClusterId other_lo = std::min(x, partner);
                   const ClusterId other_hi = std::max(x, partner);
                   if (x == other_hi && (lo_map.find(other_lo) || hi_map.find(other_lo))) {
                     return;  // emitted when the union reached other_lo
                   }
                   if (x == other_hi) unsorted = true;
                   std::optional<Link> cross[2][2];
                   if (lo < other_lo) {
                     cross[0][0] = lo_map.find(other_lo);
                     cross[0][1] = lo_map.find(other_hi);
                     cross[1][0] = hi_map.find(other_lo);
                     cross[1][1] = hi_map.find(other_hi);
                   } else {
                     cross[0][0] = lo_map.find(other_lo);
                     cross[0][1] = hi_map.find(other_lo);
                     cross[1][0] = lo_map.find(other_hi);
                     cross[1][1] = hi_map.find(other_hi);
                   }
                   entries.push_back({other_lo, *cross_merge_link(linkage, cross)});
                 });
  if (unsorted) {
    std::sort(entries.begin(), entries.end(),
              [](const NeighborMap::Entry& a, const NeighborMap::Entry& b) { return a.first < b.first; });
  }
  return NeighborMap(std::move(entries));
}

}  // namespace rac

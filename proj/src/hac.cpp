#include "rac/hac.hpp"

#include <algorithm>
#include <string>

#include "rac/errors.hpp"
#include "rac/linkage.hpp"

namespace rac {

HacEngine::HacEngine(const DissimilarityGraph& graph, Linkage linkage)
    : linkage_(linkage),
      neighbors_(graph.num_nodes()),
      members_(graph.num_nodes()),
      active_(graph.num_nodes(), true),
      version_(graph.num_nodes(), 0) {
  dendrogram_.n_points = graph.num_nodes();
  for (ClusterId u = 0; u < graph.num_nodes(); ++u) {
    members_[u] = {u};
    std::vector<NeighborMap::Entry> entries;
    entries.reserve(graph.neighbors(u).size());
    for (const Adjacent& adj : graph.neighbors(u)) entries.push_back({adj.id, Link{adj.weight, 1}});
    neighbors_[u] = NeighborMap(std::move(entries));
  }
  for (const Edge& e : graph.edges()) push(e.u, e.v, e.weight);
}

void HacEngine::push(ClusterId a, ClusterId b, double weight) {
  const PairKey key = PairKey::make(weight, a, b);
  queue_.push({key, version_[key.lo], version_[key.hi]});
}

bool HacEngine::step() {
  while (!queue_.empty()) {
    const Candidate top = queue_.top();
    queue_.pop();
    if (!active_[top.key.lo] || !active_[top.key.hi]) continue;
    if (version_[top.key.lo] != top.version_lo || version_[top.key.hi] != top.version_hi) continue;
    merge(top.key.lo, top.key.hi);
    return true;
  }
  return false;
}

void HacEngine::run() {
  while (step()) {
  }
}

void HacEngine::merge(ClusterId a, ClusterId b) {
  if (a == b || !active_[a] || !active_[b]) {
    throw ContractViolation("HacEngine::merge: need two distinct active clusters");
  }
  const auto link = neighbors_[a].find(b);
  if (!link) throw ContractViolation("HacEngine::merge: clusters have no defined dissimilarity");

  const ClusterId keep = std::min(a, b);
  const ClusterId gone = std::max(a, b);

  std::vector<NeighborMap::Entry> merged;
  for_each_union(neighbors_[keep], neighbors_[gone],
                 [&](ClusterId c, const std::optional<Link>& lk, const std::optional<Link>& lg) {
                   if (c == keep || c == gone) return;
                   merged.push_back({c, *combine_links(linkage_, lk, lg)});
                 });

  const std::uint64_t size = members_[keep].size() + members_[gone].size();
  dendrogram_.merges.push_back(MergeEvent{a, b, keep, link->weight, 1, size});
  dendrogram_.merges.back().round = static_cast<std::uint32_t>(dendrogram_.merges.size());

  active_[gone] = false;
  neighbors_[gone].clear();
  members_[keep].insert(members_[keep].end(), members_[gone].begin(), members_[gone].end());
  std::sort(members_[keep].begin(), members_[keep].end());
  members_[gone].clear();
  members_[gone].shrink_to_fit();
  ++version_[keep];

  neighbors_[keep] = NeighborMap(std::move(merged));
  for (const auto& [c, lk] : neighbors_[keep]) {
    neighbors_[c].erase(gone);
    neighbors_[c].upsert(keep, lk);
    push(keep, c, lk.weight);
  }
}

std::vector<ClusterId> HacEngine::active_clusters() const {
  std::vector<ClusterId> out;
  for (ClusterId i = 0; i < active_.size(); ++i) {
    if (active_[i]) out.push_back(i);
  }
  return out;
}

Dendrogram hac_run(const DissimilarityGraph& graph, Linkage linkage) {
  HacEngine engine(graph, linkage);
  engine.run();
  return std::move(engine).take_dendrogram();
}

Dendrogram hac_naive(const DissimilarityGraph& graph, Linkage linkage) {
  const std::size_t n = graph.num_nodes();
  if (n > kNaiveMaxPoints) {
    throw ContractViolation("hac_naive: instance has " + std::to_string(n) +
                            " points; the naive oracle is capped at " +
                            std::to_string(kNaiveMaxPoints));
  }
  std::vector<std::vector<ClusterId>> members(n);
  std::vector<bool> active(n, true);
  for (ClusterId i = 0; i < n; ++i) members[i] = {i};

  Dendrogram d;
  d.n_points = n;
  while (true) {
    std::optional<PairKey> best;
    for (ClusterId a = 0; a < n; ++a) {
      if (!active[a]) continue;
      for (ClusterId b = a + 1; b < n; ++b) {
        if (!active[b]) continue;
        const auto w = direct_linkage(linkage, members[a], members[b], graph);
        if (!w) continue;
        const PairKey key{*w, a, b};
        if (!best || key < *best) best = key;
      }
    }
    if (!best) break;
    const ClusterId keep = best->lo;
    const ClusterId gone = best->hi;
    members[keep].insert(members[keep].end(), members[gone].begin(), members[gone].end());
    std::sort(members[keep].begin(), members[keep].end());
    members[gone].clear();
    active[gone] = false;
    d.merges.push_back(MergeEvent{keep, gone, keep, best->weight,
                                  static_cast<std::uint32_t>(d.merges.size() + 1),
                                  members[keep].size()});
  }
  return d;
}

}  // namespace rac

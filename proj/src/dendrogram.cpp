#include "rac/dendrogram.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <sstream>
#include <tuple>

#include "rac/errors.hpp"

namespace rac {
namespace {

// Replays the merge list and, for every merge, reports which earlier merge
// (if any) produced each child.
struct Replay {
  std::vector<std::ptrdiff_t> left_source;
  std::vector<std::ptrdiff_t> right_source;
  std::vector<std::uint64_t> left_size;
  std::vector<std::uint64_t> right_size;
};

Replay replay(const Dendrogram& d) {
  const std::size_t n = d.n_points;
  std::vector<std::uint64_t> size(n, 1);
  std::vector<bool> active(n, true);
  std::vector<std::ptrdiff_t> last_merge(n, -1);
  Replay r;
  r.left_source.reserve(d.merges.size());
  r.right_source.reserve(d.merges.size());
  r.left_size.reserve(d.merges.size());
  r.right_size.reserve(d.merges.size());

  for (std::size_t i = 0; i < d.merges.size(); ++i) {
    const MergeEvent& m = d.merges[i];
    auto fail = [&](const std::string& why) {
      std::ostringstream os;
      os << "invalid dendrogram at merge " << i << " (" << m.left << ", " << m.right << "): " << why;
      throw InternalError(os.str());
    };
    if (m.left >= n || m.right >= n) fail("id out of range");
    if (m.left == m.right) fail("children coincide");
    if (!active[m.left] || !active[m.right]) fail("child already merged away");
    if (m.result != std::min(m.left, m.right)) fail("result is not the lower child id");
    if (m.result_size != size[m.left] + size[m.right]) fail("result_size is not additive");
    r.left_source.push_back(last_merge[m.left]);
    r.right_source.push_back(last_merge[m.right]);
    r.left_size.push_back(size[m.left]);
    r.right_size.push_back(size[m.right]);
    const ClusterId other = std::max(m.left, m.right);
    active[other] = false;
    size[m.result] = m.result_size;
    last_merge[m.result] = static_cast<std::ptrdiff_t>(i);
  }
  return r;
}

}  // namespace

void validate_dendrogram(const Dendrogram& d) { (void)replay(d); }

std::size_t dendrogram_height(const Dendrogram& d) {
  const Replay r = replay(d);
  std::vector<std::size_t> height(d.merges.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < d.merges.size(); ++i) {
    std::size_t h = 0;
    if (r.left_source[i] >= 0) h = std::max(h, height[static_cast<std::size_t>(r.left_source[i])]);
    if (r.right_source[i] >= 0) h = std::max(h, height[static_cast<std::size_t>(r.right_source[i])]);
    height[i] = h + 1;
    best = std::max(best, height[i]);
  }
  return best;
}

std::size_t count_roots(const Dendrogram& d) { return d.n_points - d.merges.size(); }

std::vector<CanonicalMerge> canonical_merges(const Dendrogram& d) {
  const Replay r = replay(d);
  std::vector<CanonicalMerge> out;
  out.reserve(d.merges.size());
  for (std::size_t i = 0; i < d.merges.size(); ++i) {
    const MergeEvent& m = d.merges[i];
    if (m.left < m.right) {
      out.push_back({m.left, r.left_size[i], m.right, r.right_size[i]});
    } else {
      out.push_back({m.right, r.right_size[i], m.left, r.left_size[i]});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool same_hierarchy(const Dendrogram& a, const Dendrogram& b) {
  return a.n_points == b.n_points && canonical_merges(a) == canonical_merges(b);
}

std::optional<std::string> first_difference(const Dendrogram& a, const Dendrogram& b) {
  std::ostringstream os;
  if (a.n_points != b.n_points) {
    os << "point counts differ: " << a.n_points << " vs " << b.n_points;
    return os.str();
  }
  const auto ca = canonical_merges(a);
  const auto cb = canonical_merges(b);
  std::vector<CanonicalMerge> only_a;
  std::vector<CanonicalMerge> only_b;
  std::set_difference(ca.begin(), ca.end(), cb.begin(), cb.end(), std::back_inserter(only_a));
  std::set_difference(cb.begin(), cb.end(), ca.begin(), ca.end(), std::back_inserter(only_b));
  if (only_a.empty() && only_b.empty()) return std::nullopt;
  auto describe = [&](const CanonicalMerge& m) {
    os << "{cluster(min=" << m.first_min << ", size=" << m.first_size << "), cluster(min="
       << m.second_min << ", size=" << m.second_size << ")}";
  };
  if (!only_a.empty()) {
    os << "first merge only in left: ";
    describe(only_a.front());
    if (!only_b.empty()) os << "; ";
  }
  if (!only_b.empty()) {
    os << "first merge only in right: ";
    describe(only_b.front());
  }
  return os.str();
}

std::vector<std::vector<ClusterId>> flat_clusters(const Dendrogram& d, std::size_t k) {
  if (k == 0 || k > d.n_points) {
    throw ContractViolation("flat_clusters: k must be in [1, " + std::to_string(d.n_points) + "]");
  }
  const std::size_t roots = count_roots(d);
  if (k < roots) {
    throw ContractViolation("flat_clusters: dendrogram is a forest with " + std::to_string(roots) +
                            " trees; the smallest achievable k is " + std::to_string(roots));
  }
  const Replay r = replay(d);
  const std::size_t m = d.merges.size();

  // A merge becomes ready once the merges producing its children have run.
  std::vector<int> pending(m, 0);
  std::vector<std::vector<std::size_t>> dependents(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::ptrdiff_t src : {r.left_source[i], r.right_source[i]}) {
      if (src >= 0) {
        ++pending[i];
        dependents[static_cast<std::size_t>(src)].push_back(i);
      }
    }
  }
  using Entry = std::tuple<double, ClusterId, ClusterId, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> ready;
  auto push = [&](std::size_t i) {
    const MergeEvent& e = d.merges[i];
    ready.emplace(e.dissimilarity, std::min(e.left, e.right), std::max(e.left, e.right), i);
  };
  for (std::size_t i = 0; i < m; ++i) {
    if (pending[i] == 0) push(i);
  }

  std::vector<ClusterId> parent(d.n_points);
  std::iota(parent.begin(), parent.end(), ClusterId{0});
  auto find = [&](ClusterId x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  std::size_t clusters = d.n_points;
  while (clusters > k && !ready.empty()) {
    const std::size_t i = std::get<3>(ready.top());
    ready.pop();
    const MergeEvent& e = d.merges[i];
    const ClusterId a = find(e.left);
    const ClusterId b = find(e.right);
    parent[std::max(a, b)] = std::min(a, b);
    --clusters;
    for (std::size_t dep : dependents[i]) {
      if (--pending[dep] == 0) push(dep);
    }
  }

  std::vector<std::vector<ClusterId>> by_root(d.n_points);
  for (ClusterId p = 0; p < d.n_points; ++p) by_root[find(p)].push_back(p);
  std::vector<std::vector<ClusterId>> out;
  out.reserve(k);
  for (auto& members : by_root) {
    if (!members.empty()) out.push_back(std::move(members));
  }
  return out;
}

std::vector<std::vector<ClusterId>> merge_leaf_sets(const Dendrogram& d) {
  validate_dendrogram(d);
  std::vector<std::vector<ClusterId>> current(d.n_points);
  for (ClusterId p = 0; p < d.n_points; ++p) current[p] = {p};
  std::vector<std::vector<ClusterId>> out;
  out.reserve(d.merges.size());
  for (const MergeEvent& m : d.merges) {
    std::vector<ClusterId> leaves;
    std::merge(current[m.left].begin(), current[m.left].end(), current[m.right].begin(),
               current[m.right].end(), std::back_inserter(leaves));
    current[std::max(m.left, m.right)].clear();
    current[m.result] = leaves;
    out.push_back(std::move(leaves));
  }
  return out;
}

}  // namespace rac

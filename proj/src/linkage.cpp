#include "rac/linkage.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <unordered_set>
#include <vector>

#include "rac/errors.hpp"

namespace rac {

std::string_view to_string(Linkage linkage) {
  switch (linkage) {
    case Linkage::kSingle:
      return "single";
    case Linkage::kComplete:
      return "complete";
    case Linkage::kAverage:
      return "average";
  }
  return "unknown";
}

Linkage parse_linkage(std::string_view name) {
  if (name == "single") return Linkage::kSingle;
  if (name == "complete") return Linkage::kComplete;
  if (name == "average") return Linkage::kAverage;
  throw ContractViolation("unknown linkage '" + std::string(name) + "'");
}

std::optional<Link> direct_link(Linkage linkage, std::span<const ClusterId> a,
                                std::span<const ClusterId> b, const DissimilarityGraph& base) {
  if (a.empty() || b.empty()) throw ContractViolation("direct_linkage: empty cluster");
  std::unordered_set<ClusterId> in_a(a.begin(), a.end());
  for (ClusterId id : b) {
    if (in_a.count(id)) {
      throw ContractViolation("direct_linkage: clusters overlap at point " + std::to_string(id));
    }
  }

  double acc = linkage == Linkage::kSingle ? std::numeric_limits<double>::infinity()
               : linkage == Linkage::kComplete ? -std::numeric_limits<double>::infinity()
                                                : 0.0;
  std::uint64_t present = 0;
  for (ClusterId x : a) {
    for (ClusterId y : b) {
      auto w = base.weight(x, y);
      if (!w) continue;
      ++present;
      switch (linkage) {
        case Linkage::kSingle:
          acc = std::min(acc, *w);
          break;
        case Linkage::kComplete:
          acc = std::max(acc, *w);
          break;
        case Linkage::kAverage:
          acc += *w;
          break;
      }
    }
  }
  if (present == 0) return std::nullopt;
  if (linkage == Linkage::kAverage) acc /= static_cast<double>(present);
  return Link{acc, present};
}

std::optional<double> direct_linkage(Linkage linkage, std::span<const ClusterId> a,
                                     std::span<const ClusterId> b, const DissimilarityGraph& base) {
  auto link = direct_link(linkage, a, b, base);
  if (!link) return std::nullopt;
  return link->weight;
}

std::optional<double> lance_williams_update(Linkage linkage, std::optional<double> w_ac,
                                            std::optional<double> w_bc, std::uint64_t size_a,
                                            std::uint64_t size_b) {
  if (size_a < 1 || size_b < 1) {
    throw ContractViolation("lance_williams_update: cluster sizes must be >= 1");
  }
  if (!w_ac) return w_bc;
  if (!w_bc) return w_ac;
  switch (linkage) {
    case Linkage::kSingle:
      return std::min(*w_ac, *w_bc);
    case Linkage::kComplete:
      return std::max(*w_ac, *w_bc);
    case Linkage::kAverage: {
      const double sa = static_cast<double>(size_a);
      const double sb = static_cast<double>(size_b);
      return (sa * *w_ac + sb * *w_bc) / (sa + sb);
    }
  }
  return std::nullopt;
}

std::optional<Link> combine_links(Linkage linkage, const std::optional<Link>& ac,
                                  const std::optional<Link>& bc) {
  if (!ac) return bc;
  if (!bc) return ac;
  auto w = lance_williams_update(linkage, ac->weight, bc->weight, ac->pairs, bc->pairs);
  return Link{*w, ac->pairs + bc->pairs};
}

std::optional<Link> cross_merge_link(Linkage linkage, const std::optional<Link> (&cross)[2][2]) {
  const auto to_y1 = combine_links(linkage, cross[0][0], cross[1][0]);
  const auto to_y2 = combine_links(linkage, cross[0][1], cross[1][1]);
  return combine_links(linkage, to_y1, to_y2);
}

bool check_reducibility(Linkage linkage, std::span<const ClusterId> a,
                        std::span<const ClusterId> b, std::span<const ClusterId> c,
                        const DissimilarityGraph& base) {
  std::vector<ClusterId> ab(a.begin(), a.end());
  ab.insert(ab.end(), b.begin(), b.end());
  const auto w_ab_c = direct_linkage(linkage, ab, c, base);
  const auto w_ac = direct_linkage(linkage, a, c, base);
  const auto w_bc = direct_linkage(linkage, b, c, base);
  if (!w_ab_c) return !w_ac && !w_bc;
  double floor = std::numeric_limits<double>::infinity();
  if (w_ac) floor = std::min(floor, *w_ac);
  if (w_bc) floor = std::min(floor, *w_bc);
  return *w_ab_c >= floor - 1e-12;
}

}  // namespace rac

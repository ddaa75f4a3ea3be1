#pragma once

#include <compare>
#include <cstdint>
#include <string_view>

namespace rac {

using ClusterId = std::uint32_t;

enum class Linkage : std::uint8_t { kSingle, kComplete, kAverage };

std::string_view to_string(Linkage linkage);
Linkage parse_linkage(std::string_view name);

// Cached dissimilarity between two clusters. `pairs` is the number of point
// pairs across the two clusters that carry a base weight; average linkage
// weights its update by it (equal to |A||B| on complete graphs).
struct Link {
  double weight = 0.0;
  std::uint64_t pairs = 1;

  friend bool operator==(const Link&, const Link&) = default;
};

// Total order used for every dissimilarity comparison: weight first, then the
// unordered id pair. Makes HAC and RAC deterministic under ties.
struct PairKey {
  double weight;
  ClusterId lo;
  ClusterId hi;

  static PairKey make(double weight, ClusterId a, ClusterId b) {
    return a < b ? PairKey{weight, a, b} : PairKey{weight, b, a};
  }

  friend bool operator<(const PairKey& x, const PairKey& y) {
    if (x.weight != y.weight) return x.weight < y.weight;
    if (x.lo != y.lo) return x.lo < y.lo;
    return x.hi < y.hi;
  }
  friend bool operator>(const PairKey& x, const PairKey& y) { return y < x; }
  friend bool operator==(const PairKey&, const PairKey&) = default;
};

}  // namespace rac

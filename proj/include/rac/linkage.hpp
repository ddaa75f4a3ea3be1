#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "rac/graph.hpp"
#include "rac/types.hpp"

namespace rac {

/// Linkage value over the point pairs of A x B that carry an edge.
/// Average linkage divides by the number of present pairs. Returns nullopt
/// when no pair has an edge. Throws ContractViolation if A and B overlap or
/// either is empty.
std::optional<double> direct_linkage(Linkage linkage, std::span<const ClusterId> a,
                                     std::span<const ClusterId> b, const DissimilarityGraph& base);

/// Same as direct_linkage but also reports the number of present pairs.
std::optional<Link> direct_link(Linkage linkage, std::span<const ClusterId> a,
                                std::span<const ClusterId> b, const DissimilarityGraph& base);

/// Lance-Williams update W(A u B, C) from W(A,C) and W(B,C). Absent sides
/// contribute nothing: single takes the min of present values, complete the
/// max, average the size-weighted mean of present values.
std::optional<double> lance_williams_update(Linkage linkage, std::optional<double> w_ac,
                                            std::optional<double> w_bc, std::uint64_t size_a,
                                            std::uint64_t size_b);

/// Update used by the engines: the Lance-Williams rule weighted by present
/// pair counts, so the cached value always equals direct_link.
std::optional<Link> combine_links(Linkage linkage, const std::optional<Link>& ac,
                                  const std::optional<Link>& bc);

/// W(X1 u X2, Y1 u Y2) for two pairs merged in the same round, from the four
/// cached cross links cross[i][j] = W(Xi, Yj). Callers order X as the pair with
/// the lower id and each pair as (lower, higher) so that both owners evaluate
/// the identical expression and obtain bitwise-identical results.
std::optional<Link> cross_merge_link(Linkage linkage,
                                     const std::optional<Link> (&cross)[2][2]);

/// W(A u B, C) >= min(W(A,C), W(B,C)) - 1e-12 under direct_linkage.
bool check_reducibility(Linkage linkage, std::span<const ClusterId> a,
                        std::span<const ClusterId> b, std::span<const ClusterId> c,
                        const DissimilarityGraph& base);

}  // namespace rac

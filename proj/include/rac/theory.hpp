#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rac/dendrogram.hpp"
#include "rac/graph.hpp"
#include "rac/graph_io.hpp"
#include "rac/rac.hpp"
#include "rac/types.hpp"

namespace rac {

// Independent generator for (seed, stream name, index); every random quantity
// in the theory lab and the synthetic generators is drawn from one of these.
std::mt19937_64 substream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

// Uniform double in [0, 1) built from the top 53 bits, identical on every
// standard library.
double uniform01(std::mt19937_64& rng);

// ---- Synthetic inputs ------------------------------------------------------

// Complete graph with iid uniform(0, 1) weights.
DissimilarityGraph random_dense_graph(std::size_t n, std::uint64_t seed);
// n iid uniform points in [0, 1]^dim.
PointSet random_points(std::size_t n, std::size_t dim, std::uint64_t seed);

// ---- Exponential-round construction ---------------------------------------

// Largest n for which the 2^n points still have strictly increasing gaps in
// double precision.
inline constexpr unsigned kNegativeExampleMaxN = 10;
inline constexpr unsigned kNegativeExampleVerifyMaxN = 8;

// 1-D points P_k = (k+1) + eps (k+1)^2, eps = 2^-4n, k = 0..2^n-1.
PointSet gen_negative_example(unsigned n);

struct NegativeExampleReport {
  std::size_t height = 0;
  std::size_t rounds = 0;
  // Per round, the number of merges with a singleton child.
  std::vector<std::size_t> singleton_merges;
  RacResult result;
};

// Average-linkage RAC on the complete graph of gen_negative_example(n).
// Throws InternalError naming the round if height != n, rounds < 2^(n-1), or
// a round has two merges involving singleton points.
NegativeExampleReport verify_negative_example(unsigned n, std::size_t workers = 1);

// ---- Stable trees ---------------------------------------------------------

inline constexpr std::size_t kStableCheckMaxPoints = 16;

// Exhaustive check that every proper part A of a node X is strictly closer to
// X \ A than to any non-empty B inside a node disjoint from X. Absent
// dissimilarities count as +infinity.
bool is_stable_tree(const DissimilarityGraph& base, const Dendrogram& tree, Linkage linkage);

struct StableInstance {
  PointSet points;
  Dendrogram expected;  // balanced tree, one level per round
};

// 2^depth points in the plane. Sibling subtrees of diameter D are placed at
// least separation * max(D, 1) apart in a random direction.
StableInstance gen_stable_instance(unsigned branching, unsigned depth, double separation,
                                   std::uint64_t seed);

// ---- Stopping-time process ------------------------------------------------

using DecaySampler = std::function<std::uint64_t(std::uint64_t x, std::mt19937_64& rng)>;

struct DecayProcessConfig {
  std::uint64_t n = 0;
  double alpha = 0.0;
  DecaySampler z_sampler;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct NamedSampler {
  std::string name;
  double alpha;
  DecaySampler sampler;
};

// all-but-one (Z = X-1), halving (Z = max(1, floor(X/2))), uniform (Z on
// 1..X-1), binomial (Z = max(1, Bin(X-1, 0.3))), each with a valid alpha.
std::vector<NamedSampler> decay_samplers();
NamedSampler decay_sampler(const std::string& name);

struct DecayResult {
  std::vector<std::uint32_t> taus;  // per trial
  double mean = 0.0;
  double p50 = 0.0;
  double p99 = 0.0;
  double bound = 0.0;  // log n / log(1 / (1 - alpha))
};

// Throws ContractViolation if the sampler leaves 1 <= Z <= X-1.
DecayResult sim_decay_process(const DecayProcessConfig& cfg);

double decay_bound(std::uint64_t n, double alpha);

// ---- Random merge models --------------------------------------------------

struct MergeModelResult {
  std::vector<std::vector<RoundStats>> trials;
  double mean_rounds = 0.0;
  double p50_rounds = 0.0;
  double p99_rounds = 0.0;
  // Mean of merges / clusters_before over rounds (all trials) that start
  // with more than two clusters.
  double mean_merge_fraction = 0.0;
  double min_merge_fraction = 0.0;
  // merges / clusters_before of round 1, averaged over trials.
  double first_round_merge_fraction = 0.0;
};

// Sorted iid uniform points on [0, 1]; single-linkage RAC on the path of gaps.
MergeModelResult sim_grid_single_linkage(std::size_t n, std::size_t trials, std::uint64_t seed,
                                         std::size_t workers = 1);

// Random bounded-degree graph with iid uniform weights: d = 1 perfect
// matching, d = 2 cycle, d >= 3 configuration model with self-loops and
// repeated pairs dropped.
DissimilarityGraph random_bounded_degree_graph(std::size_t n, unsigned d, std::mt19937_64& rng);

// Single-linkage RAC on random_bounded_degree_graph.
MergeModelResult sim_bounded_degree_graph(std::size_t n, unsigned d, std::size_t trials,
                                          std::uint64_t seed, std::size_t workers = 1);

// ---- Merge probability ----------------------------------------------------

struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static Rational make(std::uint64_t num, std::uint64_t den);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string to_string() const;
  friend bool operator==(const Rational&, const Rational&) = default;
};

// Clusters 0..k-1 with inter-cluster edges (multi-edges allowed).
struct ClusterPartitionGraph {
  std::size_t num_clusters = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;

  std::uint64_t d_between(std::uint32_t i, std::uint32_t j) const;
  std::uint64_t d_total(std::uint32_t i) const;
  std::uint64_t max_degree() const;
};

// triangle, path, cycle, star (k clusters) or multi-edge (two clusters
// joined by k edges).
ClusterPartitionGraph partition_shape(const std::string& shape, std::size_t k);

inline constexpr std::size_t kMergeProbMaxEdges = 9;

using MergeProbTable = std::map<std::pair<std::uint32_t, std::uint32_t>, Rational>;

// Over all m! orderings of the edges, the fraction in which the smallest edge
// touching C_i or C_j joins them. Keys are (i, j), i < j, with d_ij > 0.
MergeProbTable merge_prob_exhaustive(const ClusterPartitionGraph& g);

// d_ij / (d_i + d_j - d_ij).
Rational merge_prob_formula(std::uint64_t d_ij, std::uint64_t d_i, std::uint64_t d_j);
// d_ij / (d_i + d_j + d_ij), the variant that double counts; kept for reports.
Rational merge_prob_additive_denominator(std::uint64_t d_ij, std::uint64_t d_i, std::uint64_t d_j);

}  // namespace rac

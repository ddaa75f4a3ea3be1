#include "rac/theory.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>

#include "rac/errors.hpp"
#include "rac/worker_pool.hpp"

namespace rac {
namespace {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

MergeModelResult summarize(std::vector<std::vector<RoundStats>> trials) {
  MergeModelResult r;
  std::vector<double> rounds;
  std::vector<double> fractions;
  std::vector<double> first;
  for (const auto& t : trials) {
    rounds.push_back(static_cast<double>(t.size()));
    if (!t.empty()) first.push_back(static_cast<double>(t[0].merges) / static_cast<double>(t[0].clusters_before));
    for (const RoundStats& s : t) {
      if (s.clusters_before > 2) {
        fractions.push_back(static_cast<double>(s.merges) / static_cast<double>(s.clusters_before));
      }
    }
  }
  r.trials = std::move(trials);
  r.mean_rounds = mean_of(rounds);
  r.p50_rounds = quantile(rounds, 0.5);
  r.p99_rounds = quantile(rounds, 0.99);
  r.mean_merge_fraction = mean_of(fractions);
  r.first_round_merge_fraction = mean_of(first);
  r.min_merge_fraction = fractions.empty() ? 0.0 : *std::min_element(fractions.begin(), fractions.end());
  return r;
}

void fisher_yates(std::vector<std::uint32_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(v[i - 1], v[std::min(j, i - 1)]);
  }
}

}  // namespace

std::mt19937_64 substream(std::uint64_t seed, std::string_view name, std::uint64_t index) {
  const std::uint64_t h = fnv1a(name);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h),    static_cast<std::uint32_t>(h >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

DissimilarityGraph random_dense_graph(std::size_t n, std::uint64_t seed) {
  auto rng = substream(seed, "random-dense");
  std::vector<double> upper(n < 2 ? 0 : n * (n - 1) / 2);
  for (double& w : upper) w = uniform01(rng);
  return complete_graph(n, upper);
}

PointSet random_points(std::size_t n, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ContractViolation("random_points: dim must be positive");
  auto rng = substream(seed, "random-points");
  PointSet points;
  points.dim = dim;
  points.coords.resize(n * dim);
  for (double& x : points.coords) x = uniform01(rng);
  return points;
}

PointSet gen_negative_example(unsigned n) {
  if (n == 0 || n > kNegativeExampleMaxN) {
    throw ContractViolation("gen_negative_example: n must be in 1.." + std::to_string(kNegativeExampleMaxN) +
                            " (gaps stop being strictly increasing in double precision beyond that)");
  }
  const double eps = std::ldexp(1.0, -4 * static_cast<int>(n));
  const std::size_t count = std::size_t{1} << n;
  PointSet points;
  points.dim = 1;
  points.coords.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto x = static_cast<double>(k + 1);
    points.coords[k] = x + eps * x * x;
  }
  return points;
}

NegativeExampleReport verify_negative_example(unsigned n, std::size_t workers) {
  if (n == 0 || n > kNegativeExampleVerifyMaxN) {
    throw ContractViolation("verify_negative_example: n must be in 1.." +
                            std::to_string(kNegativeExampleVerifyMaxN));
  }
  const PointSet points = gen_negative_example(n);
  NegativeExampleReport report;
  report.result = rac_run(build_complete_graph(points), Linkage::kAverage, {.workers = workers});
  report.height = dendrogram_height(report.result.dendrogram);
  report.rounds = report.result.rounds.size();
  report.singleton_merges.assign(report.rounds, 0);

  std::vector<std::uint64_t> size(points.size(), 1);
  for (const MergeEvent& m : report.result.dendrogram.merges) {
    if (size[m.left] == 1 || size[m.right] == 1) {
      std::size_t& count = report.singleton_merges.at(m.round - 1);
      if (++count > 1) {
        throw InternalError("negative example n=" + std::to_string(n) + ": round " + std::to_string(m.round) +
                            " has two merges involving singleton points");
      }
    }
    size[m.result] = m.result_size;
  }
  if (report.height != n) {
    throw InternalError("negative example n=" + std::to_string(n) + ": height " +
                        std::to_string(report.height) + " != " + std::to_string(n));
  }
  const std::size_t min_rounds = std::size_t{1} << (n - 1);
  if (report.rounds < min_rounds) {
    throw InternalError("negative example n=" + std::to_string(n) + ": " + std::to_string(report.rounds) +
                        " rounds < " + std::to_string(min_rounds));
  }
  return report;
}

bool is_stable_tree(const DissimilarityGraph& base, const Dendrogram& tree, Linkage linkage) {
  const std::size_t n = tree.n_points;
  if (n > kStableCheckMaxPoints) {
    throw ContractViolation("is_stable_tree: refusing n=" + std::to_string(n) + " (exhaustive check caps at " +
                            std::to_string(kStableCheckMaxPoints) + ")");
  }
  if (base.num_nodes() != n) throw ContractViolation("is_stable_tree: graph and tree sizes differ");
  validate_dendrogram(tree);

  constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> w(n * n, kAbsent);
  for (const Edge& e : base.edges()) w[e.u * n + e.v] = w[e.v * n + e.u] = e.weight;

  // Same present-pair semantics as direct_linkage; +inf when nothing is present.
  auto link = [&](std::uint32_t a, std::uint32_t b) {
    double acc = linkage == Linkage::kSingle ? std::numeric_limits<double>::infinity()
                 : linkage == Linkage::kComplete ? -std::numeric_limits<double>::infinity()
                                                 : 0.0;
    std::size_t present = 0;
    for (std::uint32_t ra = a; ra; ra &= ra - 1) {
      const auto i = static_cast<std::size_t>(std::countr_zero(ra));
      for (std::uint32_t rb = b; rb; rb &= rb - 1) {
        const double x = w[i * n + static_cast<std::size_t>(std::countr_zero(rb))];
        if (std::isnan(x)) continue;
        ++present;
        if (linkage == Linkage::kSingle) acc = std::min(acc, x);
        else if (linkage == Linkage::kComplete) acc = std::max(acc, x);
        else acc += x;
      }
    }
    if (present == 0) return std::numeric_limits<double>::infinity();
    return linkage == Linkage::kAverage ? acc / static_cast<double>(present) : acc;
  };

  std::vector<std::uint32_t> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back(std::uint32_t{1} << i);
  for (const auto& leaves : merge_leaf_sets(tree)) {
    std::uint32_t mask = 0;
    for (ClusterId id : leaves) mask |= std::uint32_t{1} << id;
    nodes.push_back(mask);
  }

  for (std::uint32_t x : nodes) {
    if (std::popcount(x) < 2) continue;
    for (std::uint32_t y : nodes) {
      if (x & y) continue;
      // Proper non-empty subsets of x, non-empty subsets of y.
      for (std::uint32_t a = (x - 1) & x; a; a = (a - 1) & x) {
        const double inside = link(a, x & ~a);
        for (std::uint32_t b = y; b; b = (b - 1) & y) {
          if (!(inside < link(a, b))) return false;
        }
      }
    }
  }
  return true;
}

StableInstance gen_stable_instance(unsigned branching, unsigned depth, double separation, std::uint64_t seed) {
  if (branching != 2) throw ContractViolation("gen_stable_instance: only branching 2 is supported");
  if (depth < 1 || depth > 16) throw ContractViolation("gen_stable_instance: depth must be in 1..16");
  if (!(separation >= 3.0)) throw ContractViolation("gen_stable_instance: separation must be >= 3");

  auto rng = substream(seed, "stable-instance");
  using P = std::array<double, 2>;
  auto diameter = [](const std::vector<P>& pts) {
    double d = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        d = std::max(d, std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]));
      }
    }
    return d;
  };
  auto build = [&](auto&& self, unsigned level) -> std::vector<P> {
    if (level == 0) return {P{0.0, 0.0}};
    std::vector<P> left = self(self, level - 1);
    std::vector<P> right = self(self, level - 1);
    const double dl = diameter(left);
    const double dr = diameter(right);
    const double gap = separation * std::max(std::max(dl, dr), 1.0) * (1.0 + uniform01(rng));
    const double theta = 2.0 * std::numbers::pi * uniform01(rng);
    // Every point lies within its subtree diameter of the subtree's first
    // point, so any cross pair is at least `gap` apart.
    const double reach = dl + dr + gap;
    const double ox = left[0][0] + reach * std::cos(theta) - right[0][0];
    const double oy = left[0][1] + reach * std::sin(theta) - right[0][1];
    for (P& p : right) left.push_back({p[0] + ox, p[1] + oy});
    return left;
  };
  const std::vector<P> pts = build(build, depth);

  StableInstance inst;
  inst.points.dim = 2;
  for (const P& p : pts) inst.points.coords.insert(inst.points.coords.end(), p.begin(), p.end());
  inst.expected.n_points = pts.size();
  for (unsigned r = 1; r <= depth; ++r) {
    const std::size_t half = std::size_t{1} << (r - 1);
    for (std::size_t start = 0; start < pts.size(); start += 2 * half) {
      double sum = 0.0;
      for (std::size_t i = start; i < start + half; ++i) {
        for (std::size_t j = start + half; j < start + 2 * half; ++j) sum += distance(inst.points, i, j);
      }
      MergeEvent m;
      m.left = static_cast<ClusterId>(start);
      m.right = static_cast<ClusterId>(start + half);
      m.result = m.left;
      m.dissimilarity = sum / static_cast<double>(half * half);
      m.round = r;
      m.result_size = 2 * half;
      inst.expected.merges.push_back(m);
    }
  }
  return inst;
}

double decay_bound(std::uint64_t n, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ContractViolation("decay_bound: alpha must be in (0, 1)");
  if (n <= 1) return 0.0;
  return std::log(static_cast<double>(n)) / std::log(1.0 / (1.0 - alpha));
}

std::vector<NamedSampler> decay_samplers() {
  return {
      {"all-but-one", 0.5, [](std::uint64_t x, std::mt19937_64&) { return x - 1; }},
      {"halving", 1.0 / 3.0, [](std::uint64_t x, std::mt19937_64&) { return std::max<std::uint64_t>(1, x / 2); }},
      {"uniform", 0.4,
       [](std::uint64_t x, std::mt19937_64& rng) {
         return 1 + static_cast<std::uint64_t>(uniform01(rng) * static_cast<double>(x - 1));
       }},
      {"binomial", 0.25,
       [](std::uint64_t x, std::mt19937_64& rng) {
         std::binomial_distribution<std::uint64_t> bin(x - 1, 0.3);
         return std::max<std::uint64_t>(1, bin(rng));
       }},
  };
}

NamedSampler decay_sampler(const std::string& name) {
  for (NamedSampler& s : decay_samplers()) {
    if (s.name == name) return s;
  }
  throw ContractViolation("unknown decay sampler '" + name + "'");
}

DecayResult sim_decay_process(const DecayProcessConfig& cfg) {
  if (!cfg.z_sampler) throw ContractViolation("sim_decay_process: no sampler");
  if (cfg.n == 0) throw ContractViolation("sim_decay_process: n must be positive");
  DecayResult r;
  r.bound = decay_bound(cfg.n, cfg.alpha);
  r.taus.assign(cfg.trials, 0);
  WorkerPool pool(cfg.workers);
  pool.for_tasks(cfg.trials, [&](std::size_t t) {
    auto rng = substream(cfg.seed, "decay", t);
    std::uint64_t x = cfg.n;
    std::uint32_t tau = 0;
    while (x > 1) {
      const std::uint64_t z = cfg.z_sampler(x, rng);
      if (z < 1 || z > x - 1) {
        throw ContractViolation("decay sampler returned Z=" + std::to_string(z) + " for X=" + std::to_string(x));
      }
      x -= z;
      ++tau;
    }
    r.taus[t] = tau;
  });
  std::vector<double> values(r.taus.begin(), r.taus.end());
  r.mean = mean_of(values);
  r.p50 = quantile(values, 0.5);
  r.p99 = quantile(values, 0.99);
  return r;
}

MergeModelResult sim_grid_single_linkage(std::size_t n, std::size_t trials, std::uint64_t seed,
                                         std::size_t workers) {
  if (n < 2) throw ContractViolation("sim_grid_single_linkage: n must be >= 2");
  std::vector<std::vector<RoundStats>> out(trials);
  WorkerPool pool(workers);
  pool.for_tasks(trials, [&](std::size_t t) {
    auto rng = substream(seed, "grid", t);
    std::vector<double> x(n);
    for (double& v : x) v = uniform01(rng);
    std::sort(x.begin(), x.end());
    GraphBuilder b(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      b.add_edge(static_cast<ClusterId>(i), static_cast<ClusterId>(i + 1), x[i + 1] - x[i]);
    }
    out[t] = rac_run(std::move(b).build(), Linkage::kSingle).rounds;
  });
  return summarize(std::move(out));
}

DissimilarityGraph random_bounded_degree_graph(std::size_t n, unsigned d, std::mt19937_64& rng) {
  if (d == 0 || n < 2 || (n * d) % 2 != 0) {
    throw ContractViolation("random_bounded_degree_graph: need d >= 1, n >= 2 and n*d even");
  }
  if (d == 2 && n < 3) throw ContractViolation("random_bounded_degree_graph: a cycle needs n >= 3");
  GraphBuilder b(n);
  if (d == 1) {
    for (std::size_t i = 0; i < n; i += 2) {
      b.add_edge(static_cast<ClusterId>(i), static_cast<ClusterId>(i + 1), uniform01(rng));
    }
  } else if (d == 2) {
    for (std::size_t i = 0; i < n; ++i) {
      b.add_edge(static_cast<ClusterId>(i), static_cast<ClusterId>((i + 1) % n), uniform01(rng));
    }
  } else {
    std::vector<std::uint32_t> stubs;
    stubs.reserve(n * d);
    for (std::size_t i = 0; i < n; ++i) stubs.insert(stubs.end(), d, static_cast<std::uint32_t>(i));
    fisher_yates(stubs, rng);
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
      const auto u = std::min(stubs[i], stubs[i + 1]);
      const auto v = std::max(stubs[i], stubs[i + 1]);
      if (u == v || !seen.emplace(u, v).second) continue;
      b.add_edge(u, v, uniform01(rng));
    }
  }
  return std::move(b).build();
}

MergeModelResult sim_bounded_degree_graph(std::size_t n, unsigned d, std::size_t trials, std::uint64_t seed,
                                          std::size_t workers) {
  std::vector<std::vector<RoundStats>> out(trials);
  WorkerPool pool(workers);
  pool.for_tasks(trials, [&](std::size_t t) {
    auto rng = substream(seed, "bounded-degree", t);
    out[t] = rac_run(random_bounded_degree_graph(n, d, rng), Linkage::kSingle).rounds;
  });
  return summarize(std::move(out));
}

Rational Rational::make(std::uint64_t num, std::uint64_t den) {
  if (den == 0) throw ContractViolation("Rational: zero denominator");
  const std::uint64_t g = std::gcd(num, den);
  return g == 0 ? Rational{0, 1} : Rational{num / g, den / g};
}

std::string Rational::to_string() const { return std::to_string(num) + "/" + std::to_string(den); }

std::uint64_t ClusterPartitionGraph::d_between(std::uint32_t i, std::uint32_t j) const {
  return static_cast<std::uint64_t>(std::count_if(edges.begin(), edges.end(), [&](const auto& e) {
    return (e.first == i && e.second == j) || (e.first == j && e.second == i);
  }));
}

std::uint64_t ClusterPartitionGraph::d_total(std::uint32_t i) const {
  return static_cast<std::uint64_t>(
      std::count_if(edges.begin(), edges.end(), [&](const auto& e) { return e.first == i || e.second == i; }));
}

std::uint64_t ClusterPartitionGraph::max_degree() const {
  std::uint64_t d = 0;
  for (std::uint32_t i = 0; i < num_clusters; ++i) d = std::max(d, d_total(i));
  return d;
}

ClusterPartitionGraph partition_shape(const std::string& shape, std::size_t k) {
  ClusterPartitionGraph g;
  auto need = [&](std::size_t lo) {
    if (k < lo) throw ContractViolation("partition shape '" + shape + "' needs k >= " + std::to_string(lo));
  };
  if (shape == "triangle") {
    g.num_clusters = 3;
    g.edges = {{0, 1}, {1, 2}, {0, 2}};
  } else if (shape == "path") {
    need(2);
    g.num_clusters = k;
    for (std::uint32_t i = 0; i + 1 < k; ++i) g.edges.emplace_back(i, i + 1);
  } else if (shape == "cycle") {
    need(3);
    g.num_clusters = k;
    for (std::uint32_t i = 0; i < k; ++i) g.edges.emplace_back(i, static_cast<std::uint32_t>((i + 1) % k));
  } else if (shape == "star") {
    need(2);
    g.num_clusters = k;
    for (std::uint32_t i = 1; i < k; ++i) g.edges.emplace_back(0, i);
  } else if (shape == "multi-edge") {
    need(1);
    g.num_clusters = 2;
    g.edges.assign(k, {0, 1});
  } else {
    throw ContractViolation("unknown partition shape '" + shape + "'");
  }
  return g;
}

MergeProbTable merge_prob_exhaustive(const ClusterPartitionGraph& g) {
  const std::size_t m = g.edges.size();
  if (m > kMergeProbMaxEdges) {
    throw ContractViolation("merge_prob_exhaustive: refusing m=" + std::to_string(m) + " edges (cap " +
                            std::to_string(kMergeProbMaxEdges) + ")");
  }
  if (g.num_clusters > 32) throw ContractViolation("merge_prob_exhaustive: at most 32 clusters");
  for (const auto& [u, v] : g.edges) {
    if (u == v || u >= g.num_clusters || v >= g.num_clusters) {
      throw ContractViolation("merge_prob_exhaustive: edges must join two distinct clusters in range");
    }
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (const auto& [u, v] : g.edges) pairs.emplace_back(std::min(u, v), std::max(u, v));
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  std::vector<std::uint32_t> endpoint_mask(m);
  for (std::size_t e = 0; e < m; ++e) {
    endpoint_mask[e] = (std::uint32_t{1} << g.edges[e].first) | (std::uint32_t{1} << g.edges[e].second);
  }
  std::vector<std::uint64_t> hits(pairs.size(), 0);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t orderings = 0;
  do {
    ++orderings;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const std::uint32_t want = (std::uint32_t{1} << pairs[p].first) | (std::uint32_t{1} << pairs[p].second);
      for (std::size_t e : order) {
        if (endpoint_mask[e] & want) {
          hits[p] += endpoint_mask[e] == want;
          break;
        }
      }
    }
  } while (std::next_permutation(order.begin(), order.end()));

  MergeProbTable table;
  for (std::size_t p = 0; p < pairs.size(); ++p) table[pairs[p]] = Rational::make(hits[p], orderings);
  return table;
}

namespace {
void check_counts(std::uint64_t d_ij, std::uint64_t d_i, std::uint64_t d_j) {
  if (d_ij < 1 || d_i < d_ij || d_j < d_ij) {
    throw ContractViolation("merge probability needs d_ij >= 1, d_i >= d_ij, d_j >= d_ij (got " +
                            std::to_string(d_ij) + ", " + std::to_string(d_i) + ", " + std::to_string(d_j) + ")");
  }
}
}  // namespace

Rational merge_prob_formula(std::uint64_t d_ij, std::uint64_t d_i, std::uint64_t d_j) {
  check_counts(d_ij, d_i, d_j);
  return Rational::make(d_ij, d_i + d_j - d_ij);
}

Rational merge_prob_additive_denominator(std::uint64_t d_ij, std::uint64_t d_i, std::uint64_t d_j) {
  check_counts(d_ij, d_i, d_j);
  return Rational::make(d_ij, d_i + d_j + d_ij);
}

}  // namespace rac

// Acceptance runner: one PASS/FAIL line per criterion.
//
//   rac_acceptance            report mode, exit 0 once every criterion ran
//   rac_acceptance --strict   exit 1 if any hard criterion failed
//   rac_acceptance --only 3,7 run a subset

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "rac/cli.hpp"
#include "rac/dendrogram.hpp"
#include "rac/errors.hpp"
#include "rac/graph_io.hpp"
#include "rac/hac.hpp"
#include "rac/linkage.hpp"
#include "rac/rac.hpp"
#include "rac/shard.hpp"
#include "rac/theory.hpp"
#include "test_util.hpp"

namespace {

using namespace rac;
using rac::testing::close_rel;
using rac::testing::monotone;

// Tolerances and sizes, fixed here so every run checks the same thing.
constexpr std::uint64_t kSeed = 20240611;
constexpr int kDenseInstances = 200;
constexpr std::size_t kDenseMaxN = 256;
constexpr int kKnnInstances = 30;
constexpr int kNaiveInstances = 100;
constexpr std::size_t kNaiveMaxN = 64;
constexpr double kCacheRelTol = 1e-9;
constexpr int kReducibilityTriples = 10'000;
constexpr double kMonotoneSlack = 1e-12;
constexpr unsigned kNegativeMaxN = 7;
constexpr int kStableInstances = 20;
constexpr std::size_t kGridN = 1024;
constexpr std::size_t kGridTrials = 200;
constexpr double kGridMinFraction = 0.30;
constexpr double kGridMaxRounds = 18.0;
constexpr std::size_t kBoundedN = 4096;
constexpr std::size_t kBoundedTrials = 100;
constexpr double kBoundedFractionSlack = 0.9;
constexpr std::size_t kDecayTrials = 10'000;
constexpr double kDecaySlack = 1.05;
constexpr std::size_t kLargeN = 100'000;
constexpr std::size_t kLargeK = 20;
constexpr std::size_t kLargeDim = 8;
constexpr std::uint64_t kSlopeMinMerges = 50;
constexpr double kSlopeLo = 0.7;
constexpr double kSlopeHi = 1.3;
constexpr std::size_t kSpeedupWorkers = 8;
constexpr double kSpeedupRatio = 0.5;

constexpr Linkage kLinkages[] = {Linkage::kSingle, Linkage::kComplete, Linkage::kAverage};

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  bool soft;
  std::function<Outcome()> run;
};

// Shared between criteria 1, 2 and 4.
std::size_t g_hac_runs = 0;
std::size_t g_monotone_violations = 0;

void note_hac(const Dendrogram& d) {
  ++g_hac_runs;
  if (!monotone(d, kMonotoneSlack)) ++g_monotone_violations;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome dense_exactness() {
  int total = 0;
  int same = 0;
  std::string first_bad;
  for (int i = 0; i < kDenseInstances; ++i) {
    auto rng = substream(kSeed, "acceptance-dense", static_cast<std::uint64_t>(i));
    const std::size_t n = 2 + static_cast<std::size_t>(uniform01(rng) * (kDenseMaxN - 1));
    const DissimilarityGraph g = random_dense_graph(n, rng());
    for (Linkage l : kLinkages) {
      const Dendrogram h = hac_run(g, l);
      note_hac(h);
      const Dendrogram r = rac_run(g, l).dendrogram;
      ++total;
      if (same_hierarchy(h, r)) {
        ++same;
      } else if (first_bad.empty()) {
        first_bad = fmt(" first mismatch: instance %d n=%zu %s", i, n, std::string(to_string(l)).c_str());
      }
    }
  }
  return {same == total, fmt("%d/%d instance-linkage pairs identical", same, total) + first_bad};
}

Outcome sparse_exactness() {
  const std::size_t sizes[] = {500, 2000};
  const std::size_t ks[] = {5, 10};
  const ShardIndex shard_counts[] = {1, 4, 8};
  int total = 0;
  int same = 0;
  std::string first_bad;
  for (int i = 0; i < kKnnInstances; ++i) {
    const std::size_t n = sizes[i % 2];
    const std::size_t k = ks[(i / 2) % 2];
    const DissimilarityGraph g = build_knn_graph(random_points(n, 8, kSeed + static_cast<std::uint64_t>(i)), k);
    for (Linkage l : kLinkages) {
      const Dendrogram h = hac_run(g, l);
      note_hac(h);
      const Dendrogram r = rac_run(g, l).dendrogram;
      bool ok = same_hierarchy(h, r);
      for (ShardIndex s : shard_counts) ok = ok && run_sharded(g, l, {.num_shards = s}).dendrogram == r;
      ++total;
      if (ok) {
        ++same;
      } else if (first_bad.empty()) {
        first_bad = fmt(" first mismatch: instance %d n=%zu k=%zu %s", i, n, k, std::string(to_string(l)).c_str());
      }
    }
  }
  return {same == total,
          fmt("%d/%d graph-linkage cases identical across hac, rac, shards {1,4,8}", same, total) + first_bad};
}

Outcome lance_williams_vs_naive() {
  int total = 0;
  int same = 0;
  std::size_t checked = 0;
  double worst = 0.0;
  for (int i = 0; i < kNaiveInstances; ++i) {
    auto rng = substream(kSeed, "acceptance-naive", static_cast<std::uint64_t>(i));
    const std::size_t n = 2 + static_cast<std::size_t>(uniform01(rng) * (kNaiveMaxN - 1));
    const DissimilarityGraph g = random_dense_graph(n, rng());
    for (Linkage l : kLinkages) {
      ++total;
      same += same_hierarchy(hac_run(g, l), hac_naive(g, l)) ? 1 : 0;
      HacEngine engine(g, l);
      do {
        for (ClusterId a : engine.active_clusters()) {
          for (const auto& [b, link] : engine.neighbors(a).entries()) {
            const auto direct = direct_linkage(l, engine.members(a), engine.members(b), g);
            ++checked;
            const double err = std::abs(link.weight - *direct) / std::max(1.0, std::abs(*direct));
            worst = std::max(worst, err);
          }
        }
      } while (engine.step());
    }
  }
  const bool ok = same == total && worst <= kCacheRelTol;
  return {ok, fmt("%d/%d hac == naive; %zu cached values, worst relative error %.3g (tol %.0e)", same, total,
                  checked, worst, kCacheRelTol)};
}

Outcome reducibility_and_monotonicity() {
  int violations = 0;
  int checked = 0;
  for (int t = 0; t < kReducibilityTriples; ++t) {
    auto rng = substream(kSeed, "acceptance-reducible", static_cast<std::uint64_t>(t));
    const std::size_t n = 12;
    const DissimilarityGraph base =
        t % 2 == 0 ? random_dense_graph(n, rng()) : rac::testing::random_graph(n, 0.6, rng);
    std::vector<ClusterId> a, b, c;
    while (a.empty() || b.empty() || c.empty()) {
      a.clear();
      b.clear();
      c.clear();
      for (ClusterId p = 0; p < n; ++p) {
        const double u = uniform01(rng);
        if (u < 0.25) a.push_back(p);
        else if (u < 0.5) b.push_back(p);
        else if (u < 0.75) c.push_back(p);
      }
    }
    for (Linkage l : kLinkages) {
      ++checked;
      if (!check_reducibility(l, a, b, c, base)) ++violations;
    }
  }
  const bool ok = violations == 0 && g_monotone_violations == 0 && g_hac_runs > 0;
  return {ok, fmt("%d/%d triple checks reducible; %zu/%zu HAC runs from criteria 1-2 monotone (slack %.0e)",
                  checked - violations, checked, g_hac_runs - g_monotone_violations, g_hac_runs, kMonotoneSlack)};
}

Outcome negative_example() {
  std::ostringstream os;
  bool ok = true;
  for (unsigned n = 1; n <= kNegativeMaxN; ++n) {
    try {
      const NegativeExampleReport r = verify_negative_example(n);
      os << " n=" << n << ":h" << r.height << "/r" << r.rounds;
      if (n == 2 && r.rounds != 3) {
        ok = false;
        os << "(expected 3 rounds)";
      }
    } catch (const InternalError& e) {
      ok = false;
      os << " n=" << n << ": " << e.what();
    }
  }
  return {ok, "height/rounds" + os.str()};
}

Outcome stable_trees() {
  int checked = 0;
  int stable = 0;
  int rounds_ok = 0;
  int cases = 0;
  for (int i = 0; i < kStableInstances; ++i) {
    const unsigned depth = 1 + static_cast<unsigned>(i % 4);
    const StableInstance inst = gen_stable_instance(2, depth, 10.0 + i, kSeed + static_cast<std::uint64_t>(i));
    const DissimilarityGraph g = build_complete_graph(inst.points);
    for (Linkage l : kLinkages) {
      ++checked;
      stable += is_stable_tree(g, inst.expected, l) ? 1 : 0;
      const RacResult r = rac_run(g, l);
      ++cases;
      rounds_ok += (r.rounds.size() == depth && dendrogram_height(r.dendrogram) == depth &&
                    same_hierarchy(r.dendrogram, inst.expected))
                       ? 1
                       : 0;
    }
  }
  for (unsigned depth = 5; depth <= 6; ++depth) {
    for (int i = 0; i < 3; ++i) {
      const StableInstance inst = gen_stable_instance(2, depth, 10.0, kSeed + 100 * depth + static_cast<unsigned>(i));
      const DissimilarityGraph g = build_complete_graph(inst.points);
      for (Linkage l : kLinkages) {
        const RacResult r = rac_run(g, l);
        ++cases;
        rounds_ok += (r.rounds.size() == depth && same_hierarchy(r.dendrogram, inst.expected)) ? 1 : 0;
      }
    }
  }
  return {stable == checked && rounds_ok == cases,
          fmt("%d/%d stability checks true; rounds == height on %d/%d runs (incl. depth 5-6)", stable, checked,
              rounds_ok, cases)};
}

Outcome grid_model() {
  const MergeModelResult r = sim_grid_single_linkage(kGridN, kGridTrials, kSeed);
  const bool ok = r.mean_merge_fraction >= kGridMinFraction && r.mean_rounds <= kGridMaxRounds;
  return {ok, fmt("mean merge fraction %.4f (need >= %.2f), mean rounds %.2f (need <= %.0f); round-1 fraction %.4f",
                  r.mean_merge_fraction, kGridMinFraction, r.mean_rounds, kGridMaxRounds,
                  r.first_round_merge_fraction)};
}

Outcome merge_probability() {
  std::vector<ClusterPartitionGraph> suite;
  suite.push_back(partition_shape("triangle", 3));
  for (std::size_t k = 2; k <= 10; ++k) suite.push_back(partition_shape("path", k));
  for (std::size_t k = 3; k <= 9; ++k) suite.push_back(partition_shape("cycle", k));
  for (std::size_t k = 2; k <= 10; ++k) suite.push_back(partition_shape("star", k));
  for (std::size_t k = 1; k <= 9; ++k) suite.push_back(partition_shape("multi-edge", k));
  for (int i = 0; i < 30; ++i) {
    auto rng = substream(kSeed, "acceptance-partition", static_cast<std::uint64_t>(i));
    ClusterPartitionGraph g;
    g.num_clusters = 3 + static_cast<std::size_t>(uniform01(rng) * 4);
    const std::size_t m = 1 + static_cast<std::size_t>(uniform01(rng) * kMergeProbMaxEdges);
    while (g.edges.size() < m) {
      const auto u = static_cast<std::uint32_t>(uniform01(rng) * static_cast<double>(g.num_clusters));
      const auto v = static_cast<std::uint32_t>(uniform01(rng) * static_cast<double>(g.num_clusters));
      if (u != v) g.edges.emplace_back(u, v);
    }
    suite.push_back(g);
  }
  int pairs = 0;
  int equal = 0;
  for (const auto& g : suite) {
    for (const auto& [key, exact] : merge_prob_exhaustive(g)) {
      ++pairs;
      const auto [i, j] = key;
      equal += merge_prob_formula(g.d_between(i, j), g.d_total(i), g.d_total(j)) == exact ? 1 : 0;
    }
  }
  const auto tri = merge_prob_exhaustive(partition_shape("triangle", 3));
  const auto path = merge_prob_exhaustive(partition_shape("path", 3));
  const bool anchors = std::all_of(tri.begin(), tri.end(), [](const auto& e) { return e.second == Rational{1, 3}; }) &&
                       path.at({0, 1}) == Rational{1, 2} && path.at({1, 2}) == Rational{1, 2};
  const std::string printed = merge_prob_additive_denominator(1, 2, 2).to_string();
  return {equal == pairs && anchors,
          fmt("%d/%d pairs exact over %zu graphs; triangle 1/3, path-3 ends 1/2 %s; ", equal, pairs, suite.size(),
              anchors ? "ok" : "WRONG") +
              "d_ij/(d_i+d_j+d_ij) would give " + printed + " on the triangle, so the implemented denominator is "
              "d_i+d_j-d_ij"};
}

Outcome bounded_degree() {
  const unsigned degrees[] = {2, 3, 4, 8};
  bool ok = true;
  std::ostringstream os;
  for (unsigned d : degrees) {
    const MergeModelResult r = sim_bounded_degree_graph(kBoundedN, d, kBoundedTrials, kSeed + d);
    const double floor = kBoundedFractionSlack / (4.0 * d);
    const double bound = decay_bound(kBoundedN, 1.0 / (4.0 * d));
    const bool pass = r.mean_merge_fraction >= floor && r.mean_rounds <= bound;
    ok = ok && pass;
    os << fmt(" d=%u%s: fraction %.4f (floor %.4f, round 1 %.3f), rounds %.1f (bound %.1f) %s;", d,
              d == 2 ? "(cycle)" : "", r.mean_merge_fraction, floor, r.first_round_merge_fraction, r.mean_rounds,
              bound, pass ? "ok" : "FAIL");
  }
  return {ok, os.str()};
}

Outcome decay_process() {
  const std::uint64_t sizes[] = {256, 1024, 4096};
  bool ok = true;
  double worst = 0.0;
  std::string worst_case;
  int cases = 0;
  for (const NamedSampler& s : decay_samplers()) {
    for (std::uint64_t n : sizes) {
      DecayProcessConfig cfg;
      cfg.n = n;
      cfg.alpha = s.alpha;
      cfg.z_sampler = s.sampler;
      cfg.trials = kDecayTrials;
      cfg.seed = kSeed + n;
      const DecayResult r = sim_decay_process(cfg);
      ++cases;
      const double ratio = r.mean / r.bound;
      ok = ok && r.mean <= r.bound * kDecaySlack;
      if (ratio > worst) {
        worst = ratio;
        worst_case = fmt("%s n=%llu mean %.3f bound %.3f", s.name.c_str(), static_cast<unsigned long long>(n), r.mean,
                         r.bound);
      }
    }
  }
  return {ok, fmt("%d sampler/n cases, worst mean/bound %.3f (limit %.2f): ", cases, worst, kDecaySlack) + worst_case};
}

// Criteria 11 and 12 share one large instance.
const DissimilarityGraph& large_graph(double* build_seconds = nullptr) {
  static double seconds = 0.0;
  static const DissimilarityGraph g = [] {
    const auto t0 = std::chrono::steady_clock::now();
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    DissimilarityGraph out = build_knn_graph(random_points(kLargeN, kLargeDim, kSeed), kLargeK, hw);
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }();
  if (build_seconds) *build_seconds = seconds;
  return g;
}

Outcome merge_time_linearity() {
  double build = 0.0;
  const DissimilarityGraph& g = large_graph(&build);
  const RacResult r = rac_run(g, Linkage::kAverage);
  std::vector<double> xs, ys;
  for (const RoundStats& s : r.rounds) {
    if (s.merges >= kSlopeMinMerges && s.merge_seconds > 0.0) {
      xs.push_back(std::log(static_cast<double>(s.merges)));
      ys.push_back(std::log(s.merge_seconds));
    }
  }
  if (xs.size() < 3) return {false, fmt("only %zu rounds with >= %llu merges", xs.size(),
                                        static_cast<unsigned long long>(kSlopeMinMerges))};
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = sxy / sxx;
  return {slope >= kSlopeLo && slope <= kSlopeHi,
          fmt("slope %.3f over %zu rounds (want [%.1f, %.1f]); n=%zu m=%zu, %zu rounds, kNN build %.1fs", slope,
              xs.size(), kSlopeLo, kSlopeHi, g.num_nodes(), g.num_edges(), r.rounds.size(), build)};
}

Outcome parallel_speedup() {
  const DissimilarityGraph& g = large_graph();
  auto timed = [&](std::size_t workers) {
    const auto t0 = std::chrono::steady_clock::now();
    const RacResult r = rac_run(g, Linkage::kAverage, {.workers = workers});
    return std::make_pair(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(),
                          r.dendrogram);
  };
  const auto [t1, d1] = timed(1);
  const auto [t8, d8] = timed(kSpeedupWorkers);
  const double ratio = t8 / t1;
  return {ratio <= kSpeedupRatio && d1 == d8,
          fmt("1 worker %.2fs, %zu workers %.2fs, ratio %.2f (want <= %.2f); %u hardware threads; dendrograms %s", t1,
              kSpeedupWorkers, t8, ratio, kSpeedupRatio, std::thread::hardware_concurrency(),
              d1 == d8 ? "identical" : "DIFFER")};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rac");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / ("rac-acceptance-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  auto p = [&](const std::string& name) { return (dir / name).string(); };
  int failures = 0;
  std::ostringstream os;

  failures += cli({"synth", "random-knn", "--n", "3000", "--k", "10", "--seed", "7", "--out", p("a.tsv")}) != 0;
  failures += cli({"synth", "random-knn", "--n", "3000", "--k", "10", "--seed", "7", "--out", p("b.tsv")}) != 0;
  const bool synth_same = slurp(p("a.tsv")) == slurp(p("b.tsv")) && !slurp(p("a.tsv")).empty();
  os << "synth " << (synth_same ? "same" : "DIFFER");

  bool cluster_same = true;
  for (const char* linkage : {"single", "average"}) {
    std::string ref_d, ref_s;
    int run = 0;
    for (const char* shards : {"1", "1", "4", "16"}) {
      const std::string d = p(fmt("d_%s_%d.tsv", linkage, run));
      const std::string s = p(fmt("s_%s_%d.jsonl", linkage, run));
      failures += cli({"cluster", "--edges", p("a.tsv"), "--linkage", linkage, "--shards", shards, "--out", d,
                       "--stats", s}) != 0;
      if (run == 0) {
        ref_d = slurp(d);
        ref_s = slurp(s);
      } else {
        cluster_same = cluster_same && slurp(d) == ref_d && slurp(s) == ref_s;
      }
      ++run;
    }
  }
  os << ", cluster (x2 runs, shards 1/4/16) " << (cluster_same ? "same" : "DIFFER");

  for (const char* name : {"g1.jsonl", "g2.jsonl"}) {
    failures +=
        cli({"sim", "bounded-degree", "--n", "512", "--d", "2", "--trials", "20", "--seed", "3", "--stats", p(name)}) != 0;
  }
  const bool sim_same = slurp(p("g1.jsonl")) == slurp(p("g2.jsonl"));
  os << ", sim stats " << (sim_same ? "same" : "DIFFER");
  std::filesystem::remove_all(dir);
  os << "; " << failures << " command failures";
  return {synth_same && cluster_same && sim_same && failures == 0, os.str()};
}

Outcome non_reproducibility(bool ran_large) {
  return {ran_large,
          std::string("billion-node runs are out of desk scale and are not reproduced; criteria 11-12 stand in ") +
              (ran_large ? "and ran above" : "but were skipped")};
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--strict") {
      strict = true;
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
    } else {
      std::cerr << "usage: rac_acceptance [--strict] [--only 1,2,...]\n";
      return 2;
    }
  }

  bool ran_large = false;
  const std::vector<Criterion> criteria = {
      {1, "exactness on dense instances", false, dense_exactness},
      {2, "sparse exactness across engines and shards", false, sparse_exactness},
      {3, "Lance-Williams cache vs naive recomputation", false, lance_williams_vs_naive},
      {4, "reducibility and monotone merge heights", false, reducibility_and_monotonicity},
      {5, "negative example: height n, >= 2^(n-1) rounds", false, negative_example},
      {6, "stable trees: rounds equal height", false, stable_trees},
      {7, "1-D grid model merge fraction and rounds", false, grid_model},
      {8, "merge probability closed form vs enumeration", false, merge_probability},
      {9, "bounded-degree model merge fraction and rounds", false, bounded_degree},
      {10, "decay process mean stopping time", false, decay_process},
      {11, "merge time linear in merges", true,
       [&] {
         ran_large = true;
         return merge_time_linearity();
       }},
      {12, "parallel speedup with 8 workers", true, parallel_speedup},
      {13, "determinism across runs and shard counts", false, determinism},
      {14, "large-scale tables substituted", false, [&] { return non_reproducibility(ran_large); }},
  };

  int hard_failures = 0;
  int printed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = o.pass ? "PASS" : (c.soft ? "FAIL (soft)" : "FAIL");
    std::printf("[%s] %2d %s: %s (%.1fs)\n", tag, c.id, c.name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass && !c.soft) ++hard_failures;
    ++printed;
  }
  std::printf("%d criteria run, %d hard failures\n", printed, hard_failures);
  return strict && hard_failures > 0 ? 1 : 0;
}

#include "rac/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rac/dendrogram.hpp"
#include "rac/errors.hpp"
#include "rac/graph_io.hpp"
#include "rac/hac.hpp"
#include "rac/rac.hpp"
#include "rac/shard.hpp"
#include "rac/theory.hpp"

namespace rac {
namespace {

using Json = nlohmann::ordered_json;

constexpr std::size_t kDenseLimit = 10'000;
constexpr std::size_t kSparseLimit = 100'000;
constexpr std::size_t kRandomDenseLimit = 5'000;

// Mean per-round merge fraction and round-count slack asserted by `sim grid`.
constexpr double kGridMinFraction = 0.30;
constexpr double kGridRoundSlack = 1.05;
constexpr std::size_t kGridAssertMinN = 64;
constexpr double kDecaySlack = 1.05;

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::shared_ptr<spdlog::logger> log;
};

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_st>(err);
  auto log = std::make_shared<spdlog::logger>("rac", sink);
  log->set_pattern("[%l] %v");
  const char* env = std::getenv("RAC_LOG");
  const std::string level = env ? env : "error";
  if (level == "debug") {
    log->set_level(spdlog::level::debug);
  } else if (level == "info") {
    log->set_level(spdlog::level::info);
  } else {
    log->set_level(spdlog::level::err);
    if (level != "error") log->error("RAC_LOG must be error, info or debug (got '{}'); using error", level);
  }
  return log;
}

void emit(Context& ctx, const Json& record) { ctx.out << record.dump() << '\n'; }

Json summary(const std::string& command, std::span<const RoundStats> rounds, double total_seconds) {
  Json j;
  j["record"] = "summary";
  j["command"] = command;
  const Json totals = summary_record(rounds);
  for (const auto& item : totals.items()) {
    if (item.key() != "record") j[item.key()] = item.value();
  }
  j["total_seconds"] = total_seconds;
  return j;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  return f;
}

// ---- input -----------------------------------------------------------------

struct InputFlags {
  std::string edges;
  std::string vectors;
  std::size_t knn = 0;
  double eps = 0.0;
  std::string metric = "l2";
};

void add_input_flags(CLI::App* cmd, InputFlags& in) {
  auto* edges = cmd->add_option("--edges", in.edges, "edge list u<TAB>v<TAB>w");
  auto* vectors = cmd->add_option("--vectors", in.vectors, "vector file id<TAB>c1,c2,...");
  edges->excludes(vectors);
  auto* knn = cmd->add_option("--knn", in.knn, "build an exact k-nearest-neighbor graph")->needs(vectors);
  auto* eps = cmd->add_option("--eps", in.eps, "connect points within this distance")->needs(vectors);
  knn->excludes(eps);
  cmd->add_option("--metric", in.metric, "l2 or cosine")->check(CLI::IsMember({"l2", "cosine"}));
}

struct Loaded {
  DissimilarityGraph graph;
  bool dense = false;
};

Loaded load_input(Context& ctx, const InputFlags& in, std::size_t workers) {
  if (in.edges.empty() == in.vectors.empty()) throw ContractViolation("give exactly one of --edges or --vectors");
  Loaded r;
  if (!in.edges.empty()) {
    r.graph = load_edge_list(in.edges);
    const double n = static_cast<double>(r.graph.num_nodes());
    r.dense = static_cast<double>(r.graph.num_edges()) >= n * (n - 1) / 4.0 && r.graph.num_nodes() > 2;
  } else {
    const PointSet points = load_vectors(in.vectors, parse_metric(in.metric));
    ctx.log->info("read {} points of dimension {}", points.size(), points.dim);
    if (in.knn > 0) {
      if (points.size() > kSparseLimit) throw ContractViolation("kNN construction limited to n <= 100000");
      r.graph = build_knn_graph(points, in.knn, workers);
    } else if (in.eps > 0.0) {
      r.graph = build_epsilon_graph(points, in.eps);
    } else {
      if (points.size() > kDenseLimit) {
        throw ContractViolation("complete graph limited to n <= 10000 points; pass --knn or --eps");
      }
      r.graph = build_complete_graph(points);
      r.dense = true;
    }
  }
  ctx.log->info("graph: {} nodes, {} edges", r.graph.num_nodes(), r.graph.num_edges());
  return r;
}

// ---- cluster ---------------------------------------------------------------

struct ClusterFlags {
  InputFlags input;
  std::string linkage = "average";
  std::size_t shards = 1;
  std::size_t workers = 1;
  std::string out;
  std::string stats;
  bool timings = false;
  std::string transport_log;
  std::size_t flat_k = 0;
  std::string flat_out;
  bool check_invariants = false;
};

int cmd_cluster(Context& ctx, const ClusterFlags& f) {
  const auto start = std::chrono::steady_clock::now();
  const Linkage linkage = parse_linkage(f.linkage);
  const Loaded in = load_input(ctx, f.input, f.workers);

  Dendrogram dendrogram;
  std::vector<RoundStats> rounds;
  std::optional<TransportStats> transport;
  if (f.shards > 1) {
    std::ofstream log_file;
    if (!f.transport_log.empty()) log_file = open_output(f.transport_log);
    ShardedResult r = run_sharded(in.graph, linkage,
                                  {.num_shards = static_cast<ShardIndex>(f.shards),
                                   .workers_per_shard = f.workers,
                                   .transport_log = f.transport_log.empty() ? nullptr : &log_file});
    dendrogram = std::move(r.dendrogram);
    rounds = std::move(r.rounds);
    transport = std::move(r.transport);
  } else {
    RacResult r = rac_run(in.graph, linkage, {.workers = f.workers, .check_invariants = f.check_invariants});
    dendrogram = std::move(r.dendrogram);
    rounds = std::move(r.rounds);
  }
  ctx.log->info("{} merges in {} rounds", dendrogram.merges.size(), rounds.size());

  if (!f.out.empty()) write_dendrogram(dendrogram, std::filesystem::path(f.out));
  if (!f.stats.empty()) {
    write_stats(std::filesystem::path(f.stats), rounds, f.timings, transport ? &*transport : nullptr);
  }
  if (f.flat_k > 0) {
    const auto clusters = flat_clusters(dendrogram, f.flat_k);
    if (!f.flat_out.empty()) {
      auto file = open_output(f.flat_out);
      std::vector<std::size_t> label(dendrogram.n_points, 0);
      for (std::size_t c = 0; c < clusters.size(); ++c) {
        for (ClusterId id : clusters[c]) label[id] = c;
      }
      for (std::size_t i = 0; i < label.size(); ++i) file << i << '\t' << label[i] << '\n';
    }
  }

  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Json s = summary("cluster", rounds, total);
  s["points"] = dendrogram.n_points;
  s["edges"] = in.graph.num_edges();
  s["linkage"] = std::string(to_string(linkage));
  s["shards"] = f.shards;
  s["height"] = dendrogram_height(dendrogram);
  s["roots"] = count_roots(dendrogram);
  if (transport) s["remote_messages"] = transport->total_remote_messages();
  emit(ctx, s);
  return kExitOk;
}

// ---- verify ----------------------------------------------------------------

struct VerifyFlags {
  InputFlags input;
  std::string linkage = "average";
  std::size_t shards = 1;
  std::size_t workers = 1;
  bool naive = false;
  bool corrupt_for_test = false;
};

int cmd_verify(Context& ctx, const VerifyFlags& f) {
  const auto start = std::chrono::steady_clock::now();
  const Linkage linkage = parse_linkage(f.linkage);
  const Loaded in = load_input(ctx, f.input, f.workers);
  const std::size_t n = in.graph.num_nodes();
  const std::size_t limit = in.dense ? kDenseLimit : kSparseLimit;
  if (n > limit) {
    throw ContractViolation("verify: n=" + std::to_string(n) + " exceeds the " + (in.dense ? "dense" : "sparse") +
                            " limit of " + std::to_string(limit) +
                            "; use `cluster`, or verify a kNN graph of a sample");
  }

  std::vector<std::pair<std::string, Dendrogram>> runs;
  runs.emplace_back("hac", hac_run(in.graph, linkage));
  RacResult rac = rac_run(in.graph, linkage, {.workers = f.workers});
  if (f.corrupt_for_test && !rac.dendrogram.merges.empty()) rac.dendrogram.merges.pop_back();
  runs.emplace_back("rac", std::move(rac.dendrogram));
  if (f.shards > 1) {
    runs.emplace_back("sharded", run_sharded(in.graph, linkage,
                                             {.num_shards = static_cast<ShardIndex>(f.shards),
                                              .workers_per_shard = f.workers})
                                     .dendrogram);
  }
  if (f.naive) runs.emplace_back("naive", hac_naive(in.graph, linkage));

  int code = kExitOk;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (auto diff = first_difference(runs[0].second, runs[i].second)) {
      Json m;
      m["record"] = "mismatch";
      m["reference"] = runs[0].first;
      m["engine"] = runs[i].first;
      m["detail"] = *diff;
      emit(ctx, m);
      ctx.err << "mismatch " << runs[0].first << " vs " << runs[i].first << ": " << *diff << '\n';
      code = kExitMismatch;
    }
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Json s = summary("verify", rac.rounds, total);
  s["points"] = n;
  s["edges"] = in.graph.num_edges();
  s["linkage"] = std::string(to_string(linkage));
  s["engines"] = runs.size();
  s["identical"] = code == kExitOk;
  emit(ctx, s);
  return code;
}

// ---- synth -----------------------------------------------------------------

struct SynthFlags {
  unsigned n_exp = 0;
  std::size_t n = 0;
  std::size_t k = 10;
  std::size_t dim = 8;
  unsigned depth = 3;
  double separation = 10.0;
  std::string linkage = "average";
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::string out;
  std::string tree;
  std::string vectors_out;
  std::string properties;
};

int finish_synth(Context& ctx, const SynthFlags& f, Json props) {
  if (!f.properties.empty()) {
    auto file = open_output(f.properties);
    file << props.dump() << '\n';
  }
  emit(ctx, props);
  emit(ctx, summary("synth", {}, 0.0));
  return kExitOk;
}

int cmd_synth_negative(Context& ctx, const SynthFlags& f) {
  const PointSet points = gen_negative_example(f.n_exp);
  write_vectors(points, f.out);
  Json p;
  p["record"] = "properties";
  p["kind"] = "negative-example";
  p["points"] = points.size();
  p["expected_height"] = f.n_exp;
  p["expected_rounds_lower_bound"] = std::size_t{1} << (f.n_exp - 1);
  return finish_synth(ctx, f, p);
}

int cmd_synth_stable(Context& ctx, const SynthFlags& f) {
  const StableInstance inst = gen_stable_instance(2, f.depth, f.separation, f.seed);
  write_vectors(inst.points, f.out);
  if (!f.tree.empty()) write_dendrogram(inst.expected, std::filesystem::path(f.tree));
  Json p;
  p["record"] = "properties";
  p["kind"] = "stable";
  p["points"] = inst.points.size();
  p["expected_height"] = f.depth;
  p["expected_rounds"] = f.depth;
  if (inst.points.size() <= kStableCheckMaxPoints) {
    p["stable"] = is_stable_tree(build_complete_graph(inst.points), inst.expected, parse_linkage(f.linkage));
  } else {
    p["stable"] = nullptr;
  }
  return finish_synth(ctx, f, p);
}

int cmd_synth_dense(Context& ctx, const SynthFlags& f) {
  if (f.n > kRandomDenseLimit) throw ContractViolation("random-dense limited to n <= 5000");
  const DissimilarityGraph g = random_dense_graph(f.n, f.seed);
  write_edge_list(g, f.out);
  Json p;
  p["record"] = "properties";
  p["kind"] = "random-dense";
  p["points"] = g.num_nodes();
  p["edges"] = g.num_edges();
  return finish_synth(ctx, f, p);
}

int cmd_synth_knn(Context& ctx, const SynthFlags& f) {
  if (f.n > kSparseLimit) throw ContractViolation("random-knn limited to n <= 100000");
  const PointSet points = random_points(f.n, f.dim, f.seed);
  const DissimilarityGraph g = build_knn_graph(points, f.k, f.workers);
  write_edge_list(g, f.out);
  if (!f.vectors_out.empty()) write_vectors(points, f.vectors_out);
  Json p;
  p["record"] = "properties";
  p["kind"] = "random-knn";
  p["points"] = g.num_nodes();
  p["edges"] = g.num_edges();
  p["k"] = f.k;
  return finish_synth(ctx, f, p);
}

// ---- sim -------------------------------------------------------------------

struct SimFlags {
  std::size_t n = 1024;
  std::size_t trials = 0;
  unsigned d = 2;
  std::string sampler = "uniform";
  std::optional<double> alpha;
  std::string shape = "triangle";
  std::size_t k = 3;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::string stats;
};

int assertion_failed(Context& ctx, const std::string& what) {
  ctx.err << "assertion failed: " << what << '\n';
  return kExitInternal;
}

void write_trial_stats(const std::string& path, const MergeModelResult& r) {
  if (path.empty()) return;
  auto file = open_output(path);
  for (std::size_t t = 0; t < r.trials.size(); ++t) {
    for (const RoundStats& s : r.trials[t]) {
      Json j = round_record(s, false, nullptr);
      j["trial"] = t;
      file << j.dump() << '\n';
    }
  }
}

std::vector<RoundStats> all_rounds(const MergeModelResult& r) {
  std::vector<RoundStats> rounds;
  for (const auto& t : r.trials) rounds.insert(rounds.end(), t.begin(), t.end());
  return rounds;
}

Json model_record(const std::string& kind, const SimFlags& f, const MergeModelResult& r) {
  Json j;
  j["record"] = kind;
  j["n"] = f.n;
  j["trials"] = r.trials.size();
  j["mean_rounds"] = r.mean_rounds;
  j["p50_rounds"] = r.p50_rounds;
  j["p99_rounds"] = r.p99_rounds;
  j["mean_merge_fraction"] = r.mean_merge_fraction;
  j["min_merge_fraction"] = r.min_merge_fraction;
  j["first_round_merge_fraction"] = r.first_round_merge_fraction;
  return j;
}

int cmd_sim_decay(Context& ctx, const SimFlags& f) {
  const auto start = std::chrono::steady_clock::now();
  const NamedSampler named = decay_sampler(f.sampler);
  DecayProcessConfig cfg;
  cfg.n = f.n;
  cfg.alpha = f.alpha.value_or(named.alpha);
  cfg.z_sampler = named.sampler;
  cfg.trials = f.trials == 0 ? 10'000 : f.trials;
  cfg.seed = f.seed;
  cfg.workers = f.workers;
  const DecayResult r = sim_decay_process(cfg);
  Json j;
  j["record"] = "decay";
  j["sampler"] = named.name;
  j["n"] = cfg.n;
  j["alpha"] = cfg.alpha;
  j["trials"] = cfg.trials;
  j["mean"] = r.mean;
  j["p50"] = r.p50;
  j["p99"] = r.p99;
  j["bound"] = r.bound;
  emit(ctx, j);
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit(ctx, summary("sim decay", {}, total));
  if (r.mean > r.bound * kDecaySlack) {
    return assertion_failed(ctx, "mean tau " + std::to_string(r.mean) + " > 1.05 * bound " + std::to_string(r.bound));
  }
  return kExitOk;
}

int cmd_sim_grid(Context& ctx, const SimFlags& f) {
  const auto start = std::chrono::steady_clock::now();
  const MergeModelResult r = sim_grid_single_linkage(f.n, f.trials == 0 ? 200 : f.trials, f.seed, f.workers);
  const double bound = std::log(static_cast<double>(f.n)) / std::log(1.5);
  Json j = model_record("grid", f, r);
  j["round_bound"] = bound;
  emit(ctx, j);
  write_trial_stats(f.stats, r);
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit(ctx, summary("sim grid", all_rounds(r), total));
  if (f.n >= kGridAssertMinN) {
    if (r.mean_merge_fraction < kGridMinFraction) {
      return assertion_failed(ctx, "mean merge fraction " + std::to_string(r.mean_merge_fraction) + " < 0.30");
    }
    if (r.mean_rounds > bound * kGridRoundSlack) {
      return assertion_failed(ctx, "mean rounds " + std::to_string(r.mean_rounds) + " > 1.05 * " +
                                       std::to_string(bound));
    }
  }
  return kExitOk;
}

int cmd_sim_bounded(Context& ctx, const SimFlags& f) {
  const auto start = std::chrono::steady_clock::now();
  const MergeModelResult r = sim_bounded_degree_graph(f.n, f.d, f.trials == 0 ? 100 : f.trials, f.seed, f.workers);
  const double bound = decay_bound(f.n, 1.0 / (4.0 * f.d));
  Json j = model_record("bounded-degree", f, r);
  j["d"] = f.d;
  j["fraction_floor"] = 0.9 / (4.0 * f.d);
  j["round_bound"] = bound;
  emit(ctx, j);
  write_trial_stats(f.stats, r);
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit(ctx, summary("sim bounded-degree", all_rounds(r), total));
  const double floor = 0.9 / (4.0 * f.d);
  if (r.mean_merge_fraction < floor) {
    return assertion_failed(ctx, "mean merge fraction " + std::to_string(r.mean_merge_fraction) + " < " +
                                     std::to_string(floor));
  }
  if (r.mean_rounds > bound) {
    return assertion_failed(ctx, "mean rounds " + std::to_string(r.mean_rounds) + " > bound " + std::to_string(bound));
  }
  return kExitOk;
}

int cmd_sim_merge_prob(Context& ctx, const SimFlags& f) {
  const ClusterPartitionGraph g = partition_shape(f.shape, f.k);
  const MergeProbTable table = merge_prob_exhaustive(g);
  int code = kExitOk;
  for (const auto& [pair, exact] : table) {
    const auto [i, j] = pair;
    const std::uint64_t dij = g.d_between(i, j);
    const Rational formula = merge_prob_formula(dij, g.d_total(i), g.d_total(j));
    Json r;
    r["record"] = "merge_prob";
    r["i"] = i;
    r["j"] = j;
    r["d_ij"] = dij;
    r["d_i"] = g.d_total(i);
    r["d_j"] = g.d_total(j);
    r["exhaustive"] = exact.to_string();
    r["formula"] = formula.to_string();
    r["additive_denominator"] = merge_prob_additive_denominator(dij, g.d_total(i), g.d_total(j)).to_string();
    emit(ctx, r);
    if (!(formula == exact)) {
      code = assertion_failed(ctx, "pair (" + std::to_string(i) + ", " + std::to_string(j) + "): formula " +
                                       formula.to_string() + " != exhaustive " + exact.to_string());
    }
  }
  emit(ctx, summary("sim merge-prob", {}, 0.0));
  return code;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Context ctx{out, err, make_logger(err)};

  CLI::App app{"Round-synchronous reciprocal agglomerative clustering", "rac"};
  app.require_subcommand(1);
  int code = kExitOk;

  ClusterFlags cf;
  auto* cluster = app.add_subcommand("cluster", "cluster a graph or vector file");
  add_input_flags(cluster, cf.input);
  cluster->add_option("--linkage", cf.linkage)->check(CLI::IsMember({"single", "complete", "average"}));
  cluster->add_option("--shards", cf.shards, "simulated shards (1 = shared-memory engine)")
      ->check(CLI::Range(1, 4096));
  cluster->add_option("--workers", cf.workers)->check(CLI::Range(1, 1024));
  cluster->add_option("--out", cf.out, "dendrogram output");
  cluster->add_option("--stats", cf.stats, "per-round stats output (JSON lines)");
  cluster->add_flag("--timings", cf.timings, "include wall times and transport counters in --stats");
  cluster->add_option("--transport-log", cf.transport_log, "per-barrier message log (sharded runs)");
  auto* flat_k = cluster->add_option("--flat-k", cf.flat_k, "cut the hierarchy into k clusters");
  cluster->add_option("--flat-out", cf.flat_out, "point<TAB>cluster output of the cut")->needs(flat_k);
  cluster->add_flag("--check-invariants", cf.check_invariants);
  cluster->callback([&] { code = cmd_cluster(ctx, cf); });

  VerifyFlags vf;
  auto* verify = app.add_subcommand("verify", "compare sequential HAC with RAC on one input");
  add_input_flags(verify, vf.input);
  verify->add_option("--linkage", vf.linkage)->check(CLI::IsMember({"single", "complete", "average"}));
  verify->add_option("--shards", vf.shards, "also compare the sharded runtime")->check(CLI::Range(1, 4096));
  verify->add_option("--workers", vf.workers)->check(CLI::Range(1, 1024));
  verify->add_flag("--naive", vf.naive, "also compare the recompute-from-points reference (n <= 512)");
  verify->add_flag("--corrupt-for-test", vf.corrupt_for_test)->group("");
  verify->callback([&] { code = cmd_verify(ctx, vf); });

  SynthFlags sf;
  auto* synth = app.add_subcommand("synth", "generate inputs");
  synth->require_subcommand(1);
  auto synth_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", sf.out, "output file")->required();
    cmd->add_option("--properties", sf.properties, "expected-properties record output");
    cmd->add_option("--seed", sf.seed);
  };
  auto* neg = synth->add_subcommand("negative-example", "2^n points needing exponentially many rounds");
  neg->add_option("--n", sf.n_exp)->required()->check(CLI::Range(1u, kNegativeExampleMaxN));
  synth_common(neg);
  neg->callback([&] { code = cmd_synth_negative(ctx, sf); });
  auto* stable = synth->add_subcommand("stable", "well-separated balanced binary tree");
  stable->add_option("--depth", sf.depth)->check(CLI::Range(1u, 16u));
  stable->add_option("--separation", sf.separation)->check(CLI::Range(3.0, 1e6));
  stable->add_option("--tree", sf.tree, "expected tree (dendrogram format)");
  stable->add_option("--linkage", sf.linkage, "linkage for the stability check")
      ->check(CLI::IsMember({"single", "complete", "average"}));
  synth_common(stable);
  stable->callback([&] { code = cmd_synth_stable(ctx, sf); });
  auto* dense = synth->add_subcommand("random-dense", "complete graph, iid uniform weights");
  dense->add_option("--n", sf.n)->required()->check(CLI::Range(std::size_t{1}, kRandomDenseLimit));
  synth_common(dense);
  dense->callback([&] { code = cmd_synth_dense(ctx, sf); });
  auto* knn = synth->add_subcommand("random-knn", "kNN graph over uniform random vectors");
  knn->add_option("--n", sf.n)->required()->check(CLI::Range(std::size_t{2}, kSparseLimit));
  knn->add_option("--k", sf.k)->check(CLI::Range(std::size_t{1}, std::size_t{1000}));
  knn->add_option("--dim", sf.dim)->check(CLI::Range(std::size_t{1}, std::size_t{4096}));
  knn->add_option("--vectors-out", sf.vectors_out, "also write the vectors");
  knn->add_option("--workers", sf.workers)->check(CLI::Range(1, 1024));
  synth_common(knn);
  knn->callback([&] { code = cmd_synth_knn(ctx, sf); });

  SimFlags mf;
  auto* sim = app.add_subcommand("sim", "probabilistic round-count models");
  sim->require_subcommand(1);
  auto sim_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", mf.seed);
    cmd->add_option("--workers", mf.workers)->check(CLI::Range(1, 1024));
  };
  auto* decay = sim->add_subcommand("decay", "stopping time of X <- X - Z");
  decay->add_option("--n", mf.n)->check(CLI::Range(std::size_t{1}, std::size_t{1} << 40));
  decay->add_option("--trials", mf.trials);
  decay->add_option("--sampler", mf.sampler)->check(CLI::IsMember({"all-but-one", "halving", "uniform", "binomial"}));
  decay->add_option("--alpha", mf.alpha, "alpha used for the bound (default: the sampler's)")
      ->check(CLI::Range(1e-9, 1.0 - 1e-9));
  sim_common(decay);
  decay->callback([&] { code = cmd_sim_decay(ctx, mf); });
  auto* grid = sim->add_subcommand("grid", "single linkage on sorted uniform points");
  grid->add_option("--n", mf.n)->check(CLI::Range(std::size_t{2}, std::size_t{10'000'000}));
  grid->add_option("--trials", mf.trials);
  grid->add_option("--stats", mf.stats, "per-round records of every trial");
  sim_common(grid);
  grid->callback([&] { code = cmd_sim_grid(ctx, mf); });
  auto* bounded = sim->add_subcommand("bounded-degree", "single linkage on random bounded-degree graphs");
  bounded->add_option("--n", mf.n)->check(CLI::Range(std::size_t{2}, std::size_t{10'000'000}));
  bounded->add_option("--d", mf.d)->check(CLI::Range(1u, 64u));
  bounded->add_option("--trials", mf.trials);
  bounded->add_option("--stats", mf.stats, "per-round records of every trial");
  sim_common(bounded);
  bounded->callback([&] { code = cmd_sim_bounded(ctx, mf); });
  auto* prob = sim->add_subcommand("merge-prob", "exact merge probabilities on a small cluster graph");
  prob->add_option("--shape", mf.shape)->check(CLI::IsMember({"triangle", "path", "cycle", "star", "multi-edge"}));
  prob->add_option("--k", mf.k)->check(CLI::Range(std::size_t{1}, std::size_t{32}));
  prob->callback([&] { code = cmd_sim_merge_prob(ctx, mf); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return code;
}

}  // namespace rac

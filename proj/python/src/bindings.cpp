#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rac/dendrogram.hpp"
#include "rac/errors.hpp"
#include "rac/graph.hpp"
#include "rac/graph_io.hpp"
#include "rac/hac.hpp"
#include "rac/rac.hpp"
#include "rac/shard.hpp"
#include "rac/theory.hpp"

namespace py = pybind11;
using namespace rac;

namespace {

PointSet to_points(const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                   const std::string& metric) {
  if (a.ndim() != 2) throw py::value_error("points must be a 2-D array");
  PointSet p;
  p.dim = static_cast<std::size_t>(a.shape(1));
  p.coords.assign(a.data(), a.data() + a.size());
  p.metric = parse_metric(metric);
  return p;
}

py::dict round_dict(const RoundStats& s) {
  py::dict d;
  d["round"] = s.round;
  d["clusters_before"] = s.clusters_before;
  d["merges"] = s.merges;
  d["alpha"] = s.alpha;
  d["nn_updates"] = s.nn_updates;
  d["beta_per_merge"] = s.beta_per_merge;
  return d;
}

py::list rounds_list(const std::vector<RoundStats>& rounds) {
  py::list out;
  for (const RoundStats& s : rounds) out.append(round_dict(s));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Reciprocal agglomerative clustering with a sequential HAC reference.";

  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<InternalError>(m, "InternalError", PyExc_RuntimeError);

  py::class_<DissimilarityGraph>(m, "Graph")
      .def_property_readonly("num_nodes", &DissimilarityGraph::num_nodes)
      .def_property_readonly("num_edges", &DissimilarityGraph::num_edges)
      .def("weight", &DissimilarityGraph::weight, py::arg("u"), py::arg("v"))
      .def("edges", [](const DissimilarityGraph& g) {
        std::vector<std::tuple<ClusterId, ClusterId, double>> out;
        for (const Edge& e : g.edges()) out.emplace_back(e.u, e.v, e.weight);
        return out;
      });

  m.def(
      "graph_from_edges",
      [](std::size_t n, const std::vector<std::tuple<ClusterId, ClusterId, double>>& edges) {
        GraphBuilder b(n);
        for (const auto& [u, v, w] : edges) b.add_edge(u, v, w);
        return std::move(b).build();
      },
      py::arg("n"), py::arg("edges"));
  m.def(
      "knn_graph",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points, std::size_t k,
         const std::string& metric, std::size_t workers) {
        const PointSet p = to_points(points, metric);
        py::gil_scoped_release release;
        return build_knn_graph(p, k, workers);
      },
      py::arg("points"), py::arg("k"), py::arg("metric") = "l2", py::arg("workers") = 1);
  m.def(
      "complete_graph",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points, const std::string& metric) {
        return build_complete_graph(to_points(points, metric));
      },
      py::arg("points"), py::arg("metric") = "l2");
  m.def("load_edge_list", [](const std::string& path) { return load_edge_list(path); }, py::arg("path"));

  py::class_<Dendrogram>(m, "Dendrogram")
      .def_readonly("n_points", &Dendrogram::n_points)
      .def_property_readonly("merges",
                             [](const Dendrogram& d) {
                               std::vector<std::tuple<ClusterId, ClusterId, double, std::uint32_t, std::uint64_t>> out;
                               for (const MergeEvent& e : d.merges) {
                                 out.emplace_back(e.left, e.right, e.dissimilarity, e.round, e.result_size);
                               }
                               return out;
                             })
      .def_property_readonly("height", [](const Dendrogram& d) { return dendrogram_height(d); })
      .def_property_readonly("num_roots", [](const Dendrogram& d) { return count_roots(d); })
      .def("flat_clusters", &flat_clusters, py::arg("k"))
      .def("same_hierarchy", &same_hierarchy, py::arg("other"))
      .def("__eq__", [](const Dendrogram& a, const Dendrogram& b) { return a == b; })
      .def("__len__", [](const Dendrogram& d) { return d.merges.size(); });

  m.def(
      "hac",
      [](const DissimilarityGraph& g, const std::string& linkage) {
        const Linkage l = parse_linkage(linkage);
        py::gil_scoped_release release;
        return hac_run(g, l);
      },
      py::arg("graph"), py::arg("linkage") = "average");
  m.def(
      "rac",
      [](const DissimilarityGraph& g, const std::string& linkage, std::size_t workers, std::uint32_t shards) {
        const Linkage l = parse_linkage(linkage);
        Dendrogram d;
        std::vector<RoundStats> rounds;
        {
          py::gil_scoped_release release;
          if (shards > 1) {
            ShardedResult r = run_sharded(g, l, {.num_shards = shards, .workers_per_shard = workers});
            d = std::move(r.dendrogram);
            rounds = std::move(r.rounds);
          } else {
            RacResult r = rac_run(g, l, {.workers = workers});
            d = std::move(r.dendrogram);
            rounds = std::move(r.rounds);
          }
        }
        return py::make_tuple(std::move(d), rounds_list(rounds));
      },
      py::arg("graph"), py::arg("linkage") = "average", py::arg("workers") = 1, py::arg("shards") = 1);

  m.def("negative_example", [](unsigned n) {
    const PointSet p = gen_negative_example(n);
    return p.coords;
  }, py::arg("n"));
  m.def(
      "merge_probabilities",
      [](const std::string& shape, std::size_t k) {
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::string> out;
        for (const auto& [pair, p] : merge_prob_exhaustive(partition_shape(shape, k))) out[pair] = p.to_string();
        return out;
      },
      py::arg("shape"), py::arg("k") = 3);
  m.def("decay_bound", &decay_bound, py::arg("n"), py::arg("alpha"));
}

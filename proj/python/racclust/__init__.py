"""Reciprocal agglomerative clustering.

Build a graph with ``knn_graph``, ``complete_graph`` or ``graph_from_edges``
and cluster it with ``rac`` (parallel rounds) or ``hac`` (sequential
reference). Both return the same hierarchy on inputs without tied weights.
"""

from ._core import (
    ContractViolation,
    Dendrogram,
    Graph,
    InternalError,
    IoError,
    complete_graph,
    decay_bound,
    graph_from_edges,
    hac,
    knn_graph,
    load_edge_list,
    merge_probabilities,
    negative_example,
    rac,
)

__all__ = [
    "ContractViolation",
    "Dendrogram",
    "Graph",
    "InternalError",
    "IoError",
    "cluster",
    "complete_graph",
    "decay_bound",
    "graph_from_edges",
    "hac",
    "knn_graph",
    "load_edge_list",
    "merge_probabilities",
    "negative_example",
    "rac",
]


def cluster(points, k=None, linkage="average", metric="l2", workers=1):
    """Cluster the rows of ``points``; ``k`` picks a kNN graph, else all pairs.

    Returns ``(dendrogram, rounds)`` where ``rounds`` holds per-round counters.
    """
    graph = complete_graph(points, metric) if k is None else knn_graph(points, k, metric, workers)
    return rac(graph, linkage, workers)

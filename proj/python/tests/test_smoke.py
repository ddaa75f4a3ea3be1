import math

import numpy as np
import pytest

import racclust


def line_graph():
    pts = [0.0, 1.0, 3.0, 7.0]
    edges = [(i, j, abs(pts[i] - pts[j])) for i in range(4) for j in range(i + 1, 4)]
    return racclust.graph_from_edges(4, edges)


def test_line_single_linkage():
    d, rounds = racclust.rac(line_graph(), "single")
    assert [m[2] for m in d.merges] == [1.0, 2.0, 4.0]
    assert len(rounds) == 3
    assert d.flat_clusters(2) == [[0, 1, 2], [3]]


def test_rac_matches_hac_on_random_points():
    pts = np.random.default_rng(3).random((300, 4))
    for linkage in ("single", "complete", "average"):
        g = racclust.knn_graph(pts, 8)
        h = racclust.hac(g, linkage)
        r, _ = racclust.rac(g, linkage, workers=2)
        s, _ = racclust.rac(g, linkage, shards=4)
        assert h.same_hierarchy(r)
        assert r == s


def test_rounds_are_consistent():
    pts = np.random.default_rng(4).random((200, 2))
    d, rounds = racclust.cluster(pts, k=10)
    assert sum(r["merges"] for r in rounds) == len(d)
    assert len(rounds) >= d.height
    for r in rounds:
        assert math.isclose(r["alpha"], 2 * r["merges"] / r["clusters_before"])


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        racclust.graph_from_edges(2, [(0, 0, 1.0)])
    with pytest.raises(ValueError):
        racclust.hac(line_graph(), "ward")
    with pytest.raises(OSError):
        racclust.load_edge_list("/nonexistent/edges.tsv")


def test_triangle_merge_probability():
    assert set(racclust.merge_probabilities("triangle").values()) == {"1/3"}


def test_negative_example_needs_many_rounds():
    xs = racclust.negative_example(4)
    pts = np.array(xs).reshape(-1, 1)
    d, rounds = racclust.cluster(pts)
    assert d.height == 4
    assert len(rounds) >= 2 ** 3


def test_decay_bound():
    assert racclust.decay_bound(1024, 0.5) == pytest.approx(10.0)

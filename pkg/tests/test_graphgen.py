"""Graph construction, centering, and edge-list serialization tests."""

import math

import numpy as np
import pytest

from rgglab import graphgen, sphere
from rgglab.errors import InvalidParameterError


def _cap(p, d):
    return sphere.calibrate_tau(p, d)


def test_parallel_vectors_connect():
    vectors = sphere.UnitVectorSet(np.array([[1.0, 0.0], [1.0, 0.0]]))
    adjacency = graphgen.geometric_graph(vectors, _cap(0.25, 2))
    assert adjacency.edges.tolist() == [[0, 1]]


def test_orthogonal_vectors_disconnect():
    vectors = sphere.UnitVectorSet(np.eye(2))
    cap = _cap(0.25, 2)
    assert cap.tau > 0.0
    adjacency = graphgen.geometric_graph(vectors, cap)
    assert adjacency.m == 0


def test_geometric_density_matches_p():
    n, d, p = 600, 120, 0.05
    cap = _cap(p, d)
    vectors = sphere.sample_unit_vectors(n, d, seed=8)
    adjacency = graphgen.geometric_graph(vectors, cap)
    pairs = n * (n - 1) / 2
    se = math.sqrt(pairs * p * (1 - p))
    assert abs(adjacency.m - pairs * p) <= 3 * se


def test_geometric_rotation_invariance():
    d = 9
    vectors = sphere.sample_unit_vectors(80, d, seed=4)
    cap = _cap(0.1, d)
    base = graphgen.geometric_graph(vectors, cap)
    rng = np.random.default_rng(5)
    rotation, _ = np.linalg.qr(rng.standard_normal((d, d)))
    rotated = sphere.UnitVectorSet(vectors.data @ rotation.T)
    image = graphgen.geometric_graph(rotated, cap)
    assert np.array_equal(base.edges, image.edges)


def test_raising_threshold_never_adds_edges():
    d = 15
    vectors = sphere.sample_unit_vectors(120, d, seed=6)
    loose = graphgen.geometric_graph(vectors, _cap(0.2, d))
    tight = graphgen.geometric_graph(vectors, _cap(0.05, d))
    loose_set = {tuple(e) for e in loose.edges}
    tight_set = {tuple(e) for e in tight.edges}
    assert tight_set <= loose_set


def test_inner_product_tie_counts_as_edge():
    # the edge rule is >=, so a pair sitting exactly at the threshold connects
    tau = 0.5
    cap = sphere.CapParams(tau=tau, p=sphere.cap_probability(tau, 2), d=2, tol=1e-9)
    vectors = sphere.UnitVectorSet(np.array([[1.0, 0.0], [tau, math.sqrt(1 - tau**2)]]))
    gram = vectors.data @ vectors.data.T
    assert gram[0, 1] == tau  # exact float equality, no rounding slack
    assert graphgen.geometric_graph(vectors, cap).m == 1


def test_geometric_dimension_mismatch():
    vectors = sphere.sample_unit_vectors(4, 5, seed=1)
    with pytest.raises(InvalidParameterError):
        graphgen.geometric_graph(vectors, _cap(0.2, 6))


def test_erdos_renyi_edge_cases():
    assert graphgen.erdos_renyi(30, 0.0, seed=3).m == 0
    complete = graphgen.erdos_renyi(30, 1.0, seed=3)
    assert complete.m == 30 * 29 // 2


def test_erdos_renyi_count_near_mean():
    # mean edge count n(n-1)p/2 = 31237.5 at n=2500, p=0.01
    adjacency = graphgen.erdos_renyi(2500, 0.01, seed=12)
    mean = 2500 * 2499 * 0.01 / 2
    se = math.sqrt(mean * 0.99)
    assert abs(adjacency.m - mean) <= 3 * se


def test_erdos_renyi_deterministic():
    a = graphgen.erdos_renyi(100, 0.2, seed=9)
    b = graphgen.erdos_renyi(100, 0.2, seed=9)
    assert np.array_equal(a.edges, b.edges)


def test_center_empty_and_complete():
    empty = graphgen.Adjacency(n=4, edges=np.empty((0, 2), dtype=np.int64))
    q = graphgen.center(empty, 0.3).dense()
    assert np.all(np.diag(q) == 0.0)
    off = q[~np.eye(4, dtype=bool)]
    assert np.all(off == -0.3)

    complete = graphgen.erdos_renyi(3, 1.0, seed=0)
    q = graphgen.center(complete, 0.5).dense()
    assert np.all(np.diag(q) == 0.0)
    assert np.all(q[~np.eye(3, dtype=bool)] == 0.5)


def test_center_single_edge_entries():
    adjacency = graphgen.Adjacency(n=3, edges=np.array([[0, 1]]))
    q = graphgen.center(adjacency, 0.1).dense()
    assert q[0, 1] == pytest.approx(0.9)
    assert q[0, 2] == pytest.approx(-0.1)
    assert q[1, 2] == pytest.approx(-0.1)
    assert np.all(np.diag(q) == 0.0)


def test_center_plus_mean_recovers_adjacency():
    adjacency = graphgen.erdos_renyi(40, 0.3, seed=7)
    p = 0.3
    q = graphgen.center(adjacency, p).dense()
    n = adjacency.n
    reconstructed = q + p * (np.ones((n, n)) - np.eye(n))
    assert np.array_equal(reconstructed, adjacency.dense())


def test_center_rejects_degenerate_p():
    adjacency = graphgen.erdos_renyi(5, 0.5, seed=1)
    for p in (0.0, 1.0):
        with pytest.raises(InvalidParameterError):
            graphgen.center(adjacency, p)


def test_adjacency_validation():
    with pytest.raises(InvalidParameterError):
        graphgen.Adjacency(n=3, edges=np.array([[0, 0]]))
    with pytest.raises(InvalidParameterError):
        graphgen.Adjacency(n=3, edges=np.array([[2, 1]]))
    with pytest.raises(InvalidParameterError):
        graphgen.Adjacency(n=3, edges=np.array([[0, 1], [0, 1]]))
    with pytest.raises(InvalidParameterError):
        graphgen.Adjacency(n=2, edges=np.array([[0, 5]]))


def test_dense_round_trip():
    adjacency = graphgen.erdos_renyi(25, 0.4, seed=15)
    again = graphgen.Adjacency.from_dense(adjacency.dense())
    assert np.array_equal(adjacency.edges, again.edges)


def test_edge_list_serialization_round_trip(tmp_path):
    adjacency = graphgen.erdos_renyi(20, 0.3, seed=2)
    path = tmp_path / "graph.edges"
    metadata = {"generator": "erdos_renyi", "n": 20, "p": 0.3, "seed": 2}
    graphgen.save_edge_list(adjacency, path, metadata)

    text = path.read_text().splitlines()
    assert text[0] == f"20 {adjacency.m}"
    loaded, meta = graphgen.load_edge_list(path)
    assert np.array_equal(loaded.edges, adjacency.edges)
    assert meta == metadata


def test_edge_list_parse_errors(tmp_path):
    bad_header = tmp_path / "a.edges"
    bad_header.write_text("5\n0 1\n")
    with pytest.raises(InvalidParameterError, match=":1:"):
        graphgen.load_edge_list(bad_header)

    bad_line = tmp_path / "b.edges"
    bad_line.write_text("3 1\n0 1 2\n")
    with pytest.raises(InvalidParameterError, match=":2:"):
        graphgen.load_edge_list(bad_line)

    bad_count = tmp_path / "c.edges"
    bad_count.write_text("3 2\n0 1\n")
    with pytest.raises(InvalidParameterError, match="promises"):
        graphgen.load_edge_list(bad_count)

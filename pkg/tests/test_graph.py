"""Graph construction, ego induction (vs. BFS oracle), adjacency, readout."""

import networkx as nx
import numpy as np
import pytest

from fedgpl.errors import (
    DanglingEdgeEndpoint,
    EmptyEmbedding,
    InvalidCenter,
    MismatchedFeatureRows,
    SelfLoop,
)
from fedgpl.graph import build_graph, k_ego_induce, normalized_adjacency, readout


def rand_graph(rng, n, p):
    """Seeded G(n, p) with 2-dim features and ids 0..n-1."""
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return build_graph(np.arange(n), edges, rng.normal(size=(n, 2)))


# build_graph -----------------------------------------------------------------

def test_duplicate_undirected_edges_collapse():
    g = build_graph([0, 1, 2], [(0, 1), (1, 0)], np.zeros((3, 2)))
    assert g.n_edges == 1
    assert g.edges.tolist() == [[0, 1]]


def test_dangling_endpoint_rejected():
    with pytest.raises(DanglingEdgeEndpoint):
        build_graph([0, 1], [(0, 2)], np.zeros((2, 1)))


def test_self_loop_rejected():
    with pytest.raises(SelfLoop):
        build_graph([0, 1], [(1, 1)], np.zeros((2, 1)))


def test_feature_row_mismatch_rejected():
    with pytest.raises(MismatchedFeatureRows):
        build_graph([0, 1], [(0, 1)], np.zeros((3, 1)))


def test_singleton_graph_valid():
    g = build_graph([7], [], np.ones((1, 4)))
    assert g.n_nodes == 1 and g.n_edges == 0


# k_ego_induce ----------------------------------------------------------------

def test_one_hop_ball_on_path():
    g = build_graph([10, 11, 12], [(0, 1), (1, 2)], np.eye(3))
    sub = k_ego_induce(g, [1], kappa=1)
    assert sub.node_ids.tolist() == [10, 11, 12]
    assert sub.edges.tolist() == [[0, 1], [1, 2]]


def test_zero_hop_ball_is_singleton():
    g = build_graph([10, 11, 12], [(0, 1), (1, 2)], np.eye(3))
    sub = k_ego_induce(g, [1], kappa=0)
    assert sub.node_ids.tolist() == [11]
    assert sub.n_edges == 0
    assert np.array_equal(sub.features, g.features[1:2])


def test_multi_center_ball_on_path():
    # path a-b-c-d, centers {a, c}, kappa=1 covers everything
    g = build_graph([0, 1, 2, 3], [(0, 1), (1, 2), (2, 3)], np.eye(4))
    sub = k_ego_induce(g, [0, 2], kappa=1)
    assert sub.node_ids.tolist() == [0, 1, 2, 3]
    assert sub.edges.tolist() == [[0, 1], [1, 2], [2, 3]]


def test_kappa_beyond_diameter_keeps_component():
    g = build_graph([0, 1, 2, 3, 4], [(0, 1), (1, 2)], np.zeros((5, 1)))
    sub = k_ego_induce(g, [0], kappa=10)
    assert sub.node_ids.tolist() == [0, 1, 2]


def test_invalid_center_rejected():
    g = build_graph([0, 1], [(0, 1)], np.zeros((2, 1)))
    with pytest.raises(InvalidCenter):
        k_ego_induce(g, [5], kappa=1)
    with pytest.raises(InvalidCenter):
        k_ego_induce(g, [], kappa=1)


def test_induction_matches_bfs_oracle_exhaustively():
    # all-pairs shortest-path filtering on random graphs up to 50 nodes
    rng = np.random.default_rng(7)
    for trial in range(30):
        n = int(rng.integers(2, 51))
        g = rand_graph(rng, n, p=0.15)
        nxg = nx.Graph()
        nxg.add_nodes_from(range(n))
        nxg.add_edges_from(map(tuple, g.edges.tolist()))
        centers = sorted(rng.choice(n, size=int(rng.integers(1, 4)), replace=False).tolist())
        kappa = int(rng.integers(0, 4))

        sub = k_ego_induce(g, centers, kappa)

        dist = {}
        for c in centers:
            for node, d in nx.single_source_shortest_path_length(nxg, c, cutoff=kappa).items():
                dist[node] = min(d, dist.get(node, kappa + 1))
        expect_nodes = sorted(v for v, d in dist.items() if d <= kappa)
        assert sub.node_ids.tolist() == expect_nodes
        keep = set(expect_nodes)
        expect_edges = sorted(
            (min(u, v), max(u, v)) for u, v in nxg.edges if u in keep and v in keep
        )
        remap = {old: new for new, old in enumerate(expect_nodes)}
        got_edges = sorted(
            (min(expect_nodes[u], expect_nodes[v]), max(expect_nodes[u], expect_nodes[v]))
            for u, v in sub.edges.tolist()
        )
        assert got_edges == expect_edges
        assert remap  # oracle sanity: at least the centers survive


# normalized_adjacency --------------------------------------------------------

def test_singleton_adjacency_is_identity():
    g = build_graph([0], [], np.zeros((1, 1)))
    assert np.array_equal(normalized_adjacency(g), [[1.0]])


def test_two_node_edge_gives_half_everywhere():
    g = build_graph([0, 1], [(0, 1)], np.zeros((2, 1)))
    assert np.allclose(normalized_adjacency(g), 0.5)


def test_adjacency_row_sums_on_regular_graph():
    # 4-cycle is 2-regular: rows sum to 1 exactly
    g = build_graph([0, 1, 2, 3], [(0, 1), (1, 2), (2, 3), (0, 3)], np.zeros((4, 1)))
    a_hat = normalized_adjacency(g)
    assert np.allclose(a_hat.sum(axis=1), 1.0, atol=1e-15)


def test_adjacency_spectrum_bounded_by_one():
    # dense eigen oracle on random graphs up to 30 nodes
    rng = np.random.default_rng(11)
    for trial in range(20):
        n = int(rng.integers(1, 31))
        g = rand_graph(rng, n, p=0.2)
        a_hat = normalized_adjacency(g)
        assert np.allclose(a_hat, a_hat.T)
        eigs = np.linalg.eigvalsh(a_hat)
        assert eigs.max() <= 1 + 1e-9
        assert eigs.min() >= -1 - 1e-9


def test_adjacency_respects_relabeling():
    rng = np.random.default_rng(3)
    g = rand_graph(rng, 8, p=0.4)
    perm = rng.permutation(8)
    inv = np.argsort(perm)
    g_perm = build_graph(
        g.node_ids[perm],
        [(int(inv[u]), int(inv[v])) for u, v in g.edges],
        g.features[perm],
    )
    a = normalized_adjacency(g)
    a_perm = normalized_adjacency(g_perm)
    assert np.allclose(a_perm, a[np.ix_(perm, perm)])


# readout ---------------------------------------------------------------------

def test_readout_of_single_row_is_identity():
    v = np.array([[1.0, -2.0, 3.0]])
    assert np.array_equal(readout(v), v[0])


def test_readout_direct_mean():
    assert np.array_equal(readout([[1.0, 3.0], [3.0, 1.0]]), [2.0, 2.0])


def test_readout_rejects_empty():
    with pytest.raises(EmptyEmbedding):
        readout(np.zeros((0, 3)))


def test_readout_permutation_invariant_and_linear():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(6, 4))
    y = rng.normal(size=(6, 4))
    perm = rng.permutation(6)
    assert np.allclose(readout(x[perm]), readout(x))
    a, b = 2.5, -0.75
    assert np.allclose(readout(a * x + b * y), a * readout(x) + b * readout(y), atol=1e-12)

"""Undirected attributed graphs: construction, ego-network induction, propagation matrix.

Graphs are small (ego-network scale), so everything is dense numpy. Node
identity is carried by ``node_ids``; edges index positions in that array, not
id values. Edges are stored canonically: ``(min, max)`` pairs, deduplicated,
lexicographically sorted.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import (
    DanglingEdgeEndpoint,
    EmptyEmbedding,
    InvalidCenter,
    MismatchedFeatureRows,
    SelfLoop,
)


@dataclass(eq=False)
class Graph:
    """Undirected graph with per-node feature rows.

    node_ids: (N,) int64, unique, order defines the position space.
    edges: (E, 2) int64 canonical position pairs.
    features: (N, d) float64, row i belongs to node_ids[i].
    """

    node_ids: np.ndarray
    edges: np.ndarray
    features: np.ndarray

    @property
    def n_nodes(self) -> int:
        return int(self.node_ids.shape[0])

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    def neighbor_lists(self) -> list[list[int]]:
        """Adjacency as position-indexed neighbor lists (ascending)."""
        adj: list[list[int]] = [[] for _ in range(self.n_nodes)]
        for u, v in self.edges:
            adj[int(u)].append(int(v))
            adj[int(v)].append(int(u))
        for lst in adj:
            lst.sort()
        return adj


def canonical_edges(edges, n_nodes: int) -> np.ndarray:
    """Validate and canonicalize an edge list.

    Orientation is dropped, duplicates collapse to one edge, and the result is
    sorted lexicographically. Self-loops and out-of-range endpoints reject.
    """
    arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if arr.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if np.any(arr < 0) or np.any(arr >= n_nodes):
        bad = arr[(arr < 0).any(axis=1) | (arr >= n_nodes).any(axis=1)][0]
        raise DanglingEdgeEndpoint(f"edge {tuple(bad)} references a node outside [0, {n_nodes})")
    if np.any(arr[:, 0] == arr[:, 1]):
        bad = arr[arr[:, 0] == arr[:, 1]][0]
        raise SelfLoop(f"self-loop at node index {int(bad[0])}")
    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    canon = np.unique(np.stack([lo, hi], axis=1), axis=0)
    return canon


def build_graph(node_ids, edges, features) -> Graph:
    """Assemble a validated Graph from raw pieces.

    node_ids must be unique; features must have one row per node; edges are
    position pairs and go through ``canonical_edges``.
    """
    ids = np.asarray(node_ids, dtype=np.int64).reshape(-1)
    if len(np.unique(ids)) != len(ids):
        raise InvalidCenter("node_ids contain duplicates")
    feat = np.asarray(features, dtype=np.float64)
    if feat.ndim != 2 or feat.shape[0] != ids.shape[0]:
        raise MismatchedFeatureRows(
            f"feature rows {feat.shape[0] if feat.ndim == 2 else feat.shape} != node count {ids.shape[0]}"
        )
    canon = canonical_edges(edges, ids.shape[0])
    return Graph(node_ids=ids, edges=canon, features=feat)


def k_ego_induce(graph: Graph, centers, kappa: int) -> Graph:
    """Induce the subgraph of nodes within ``kappa`` hops of any center.

    centers are positions in ``graph``. The induced graph keeps original node
    ids, ordered ascending by id, and keeps exactly the original edges whose
    endpoints both survive.
    """
    if kappa < 0:
        raise InvalidCenter(f"kappa must be >= 0, got {kappa}")
    centers = [int(c) for c in np.atleast_1d(np.asarray(centers, dtype=np.int64))]
    if not centers:
        raise InvalidCenter("no centers given")
    for c in centers:
        if c < 0 or c >= graph.n_nodes:
            raise InvalidCenter(f"center {c} outside [0, {graph.n_nodes})")

    # multi-source BFS bounded at kappa hops
    adj = graph.neighbor_lists()
    dist = {c: 0 for c in centers}
    queue = deque(centers)
    while queue:
        u = queue.popleft()
        if dist[u] == kappa:
            continue
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)

    keep = sorted(dist.keys(), key=lambda p: int(graph.node_ids[p]))
    pos_of = {old: new for new, old in enumerate(keep)}
    sub_edges = [
        (pos_of[int(u)], pos_of[int(v)])
        for u, v in graph.edges
        if int(u) in pos_of and int(v) in pos_of
    ]
    return Graph(
        node_ids=graph.node_ids[keep].copy(),
        edges=canonical_edges(sub_edges, len(keep)),
        features=graph.features[keep].copy(),
    )


def normalized_adjacency(graph: Graph) -> np.ndarray:
    """Symmetrically normalized adjacency with self-loops.

    A_hat = D^{-1/2} (A + I) D^{-1/2} where D is the degree matrix of A + I.
    Self-loops keep every degree positive, so no division guard is needed.
    """
    n = graph.n_nodes
    a = np.eye(n, dtype=np.float64)
    for u, v in graph.edges:
        a[int(u), int(v)] = 1.0
        a[int(v), int(u)] = 1.0
    d_inv_sqrt = 1.0 / np.sqrt(a.sum(axis=1))
    return a * d_inv_sqrt[:, None] * d_inv_sqrt[None, :]


def readout(embeddings: np.ndarray) -> np.ndarray:
    """Mean-pool per-node embeddings into one graph-level vector."""
    h = np.asarray(embeddings, dtype=np.float64)
    if h.ndim != 2 or h.shape[0] == 0:
        raise EmptyEmbedding(f"cannot pool embeddings of shape {h.shape}")
    return h.mean(axis=0)

"""Dataset ingestion, task-sample construction, Dirichlet partitioning, synthetic data.

A dataset is one global labeled graph. Training operates on induced κ-ego
samples at three task levels:

- node: one sample per node, ball around it, labeled by that node;
- edge: one sample per adjacent same-label pair, ball around both endpoints;
- graph: balls around seeded random centers, labeled by majority vote.

Files are plain tab-separated text: node lines ``id<TAB>label<TAB>f1,f2,...``
and edge lines ``src<TAB>dst`` (ids, not positions).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    EmptyClass,
    InvalidParam,
    MissingLabel,
    NoEligibleEdges,
    ParseError,
    UnknownNodeReference,
)
from .graph import Graph, build_graph, k_ego_induce

TASK_LEVELS = ("node", "edge", "graph")


@dataclass(eq=False)
class RawDataset:
    """One global graph with integer class labels per node."""

    graph: Graph
    labels: np.ndarray  # (N,) int64 in [0, n_classes)

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1


@dataclass(eq=False)
class Sample:
    """One induced training example at a given task level."""

    graph: Graph
    label: int
    level: str


@dataclass
class Partition:
    """Per-client lists of sample indices; disjoint and jointly covering."""

    assignments: list[list[int]]

    @property
    def n_clients(self) -> int:
        return len(self.assignments)

    def validate(self, n_samples: int) -> None:
        seen: set[int] = set()
        for client in self.assignments:
            for idx in client:
                if idx in seen:
                    raise InvalidParam(f"sample {idx} assigned twice")
                seen.add(idx)
        if seen != set(range(n_samples)):
            raise InvalidParam("partition does not cover the sample set exactly")


def make_raw_dataset(graph: Graph, labels) -> RawDataset:
    lab = np.asarray(labels, dtype=np.int64).reshape(-1)
    if lab.shape[0] != graph.n_nodes:
        raise ParseError(f"{lab.shape[0]} labels for {graph.n_nodes} nodes")
    if lab.min() < 0:
        raise ParseError("negative class label")
    if lab.max() < 1:
        raise InvalidParam("dataset must contain at least 2 classes")
    return RawDataset(graph=graph, labels=lab)


def load_dataset(node_file, edge_file) -> RawDataset:
    """Parse node and edge files into a RawDataset.

    Node order follows the file. Edge endpoints are node ids and must all
    appear in the node file.
    """
    ids: list[int] = []
    labels: list[int] = []
    rows: list[np.ndarray] = []
    for lineno, line in enumerate(Path(node_file).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.rstrip("\n").split("\t")
        if len(parts) < 2 or parts[1] == "":
            raise MissingLabel(f"{node_file}:{lineno}: expected id<TAB>label<TAB>features")
        if len(parts) != 3:
            raise ParseError(f"{node_file}:{lineno}: expected 3 tab-separated fields")
        try:
            ids.append(int(parts[0]))
            labels.append(int(parts[1]))
            rows.append(np.array([float(x) for x in parts[2].split(",")], dtype=np.float64))
        except ValueError as exc:
            raise ParseError(f"{node_file}:{lineno}: {exc}") from exc
    if not ids:
        raise ParseError(f"{node_file}: no node lines")
    dims = {r.shape[0] for r in rows}
    if len(dims) != 1:
        raise ParseError(f"{node_file}: inconsistent feature dimensions {sorted(dims)}")

    pos = {node_id: i for i, node_id in enumerate(ids)}
    if len(pos) != len(ids):
        raise ParseError(f"{node_file}: duplicate node ids")
    edges: list[tuple[int, int]] = []
    for lineno, line in enumerate(Path(edge_file).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(f"{edge_file}:{lineno}: expected src<TAB>dst")
        try:
            src, dst = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ParseError(f"{edge_file}:{lineno}: {exc}") from exc
        if src not in pos or dst not in pos:
            missing = src if src not in pos else dst
            raise UnknownNodeReference(f"{edge_file}:{lineno}: unknown node id {missing}")
        edges.append((pos[src], pos[dst]))

    graph = build_graph(np.array(ids), edges, np.stack(rows))
    return make_raw_dataset(graph, labels)


def save_dataset(raw: RawDataset, node_file, edge_file) -> None:
    """Inverse of load_dataset (canonical edge order, %.17g features)."""
    lines = []
    for i in range(raw.graph.n_nodes):
        feats = ",".join(format(x, ".17g") for x in raw.graph.features[i])
        lines.append(f"{int(raw.graph.node_ids[i])}\t{int(raw.labels[i])}\t{feats}")
    Path(node_file).write_text("\n".join(lines) + "\n")
    edge_lines = [
        f"{int(raw.graph.node_ids[u])}\t{int(raw.graph.node_ids[v])}" for u, v in raw.graph.edges
    ]
    Path(edge_file).write_text("\n".join(edge_lines) + ("\n" if edge_lines else ""))


def _seeded_subset(items: list, max_samples, rng: np.random.Generator) -> list:
    if max_samples is None or len(items) <= max_samples:
        return items
    chosen = rng.choice(len(items), size=max_samples, replace=False)
    return [items[i] for i in sorted(chosen.tolist())]


def build_task_samples(raw: RawDataset, level: str, kappa: int, max_samples=None, seed: int = 0):
    """Construct the induced samples of one task level.

    Selection down to max_samples is a seeded choice without replacement;
    output order is deterministic (ascending center position).
    """
    if level not in TASK_LEVELS:
        raise InvalidParam(f"unknown task level {level!r}")
    if kappa < 0:
        raise InvalidParam("kappa must be >= 0")
    rng = np.random.default_rng(seed)
    g, labels = raw.graph, raw.labels

    if level == "node":
        centers = _seeded_subset(list(range(g.n_nodes)), max_samples, rng)
        return [
            Sample(graph=k_ego_induce(g, [v], kappa), label=int(labels[v]), level="node")
            for v in centers
        ]

    if level == "edge":
        eligible = [(int(u), int(v)) for u, v in g.edges if labels[u] == labels[v]]
        if not eligible:
            raise NoEligibleEdges("no adjacent pair shares a label")
        pairs = _seeded_subset(eligible, max_samples, rng)
        return [
            Sample(graph=k_ego_induce(g, [u, v], kappa), label=int(labels[u]), level="edge")
            for u, v in pairs
        ]

    # graph level: one ball per seeded center, majority label, ties to the
    # smallest class index (bincount argmax).
    n_centers = g.n_nodes if max_samples is None else min(max_samples, g.n_nodes)
    centers = sorted(rng.choice(g.n_nodes, size=n_centers, replace=False).tolist())
    id_to_pos = {int(node_id): i for i, node_id in enumerate(g.node_ids)}
    samples = []
    for v in centers:
        ball = k_ego_induce(g, [v], kappa)
        members = [id_to_pos[int(node_id)] for node_id in ball.node_ids]
        counts = np.bincount(labels[members], minlength=int(labels.max()) + 1)
        samples.append(Sample(graph=ball, label=int(counts.argmax()), level="graph"))
    return samples


def _largest_remainder(proportions: np.ndarray, total: int) -> np.ndarray:
    """Integer counts summing to total, proportional with largest remainders."""
    quotas = proportions * total
    base = np.floor(quotas).astype(np.int64)
    short = total - int(base.sum())
    if short > 0:
        # ties go to the lowest client index: stable argsort on -remainder
        order = np.argsort(-(quotas - base), kind="stable")
        base[order[:short]] += 1
    return base


def dirichlet_partition(samples, n_clients: int, alpha: float, seed: int = 0) -> Partition:
    """Split samples across clients with per-class Dirichlet(alpha) draws."""
    if n_clients < 1:
        raise InvalidParam("n_clients must be >= 1")
    if alpha <= 0:
        raise InvalidParam("alpha must be > 0")
    if len(samples) == 0:
        raise EmptyClass("no samples to partition")
    rng = np.random.default_rng(seed)
    labels = np.array([s.label for s in samples], dtype=np.int64)
    assignments: list[list[int]] = [[] for _ in range(n_clients)]
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        proportions = rng.dirichlet(np.full(n_clients, alpha))
        counts = _largest_remainder(proportions, len(idx))
        shuffled = rng.permutation(idx)
        start = 0
        for client, count in enumerate(counts):
            assignments[client].extend(int(i) for i in shuffled[start : start + count])
            start += count
    for client in assignments:
        client.sort()
    part = Partition(assignments=assignments)
    part.validate(len(samples))
    return part


def save_partition(partition: Partition, path) -> None:
    lines = [
        f"{client}\t{idx}"
        for client, indices in enumerate(partition.assignments)
        for idx in indices
    ]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def load_partition(path, n_clients=None) -> Partition:
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(f"{path}:{lineno}: expected client<TAB>sample_index")
        rows.append((int(parts[0]), int(parts[1])))
    count = (max(c for c, _ in rows) + 1) if rows else 0
    if n_clients is not None:
        count = max(count, n_clients)
    assignments: list[list[int]] = [[] for _ in range(count)]
    for client, idx in rows:
        assignments[client].append(idx)
    for client in assignments:
        client.sort()
    return Partition(assignments=assignments)


def synth_dataset(
    n_nodes: int,
    n_classes: int,
    feature_dim: int,
    homophily: float,
    seed: int = 0,
    avg_degree: float = 10.0,
    noise: float = 0.25,
) -> RawDataset:
    """Class-conditioned Gaussian features with homophily-controlled edges.

    Class means are orthogonal (scaled one-hot directions). A pair of nodes is
    wired with probability ``homophily * base`` when classes match and
    ``(1 - homophily) * base`` otherwise, with base set to hit avg_degree in
    expectation. homophily=1 therefore yields no inter-class edges.
    """
    if n_classes < 2:
        raise InvalidParam("n_classes must be >= 2")
    if not 0.0 <= homophily <= 1.0:
        raise InvalidParam("homophily must lie in [0, 1]")
    if feature_dim < n_classes:
        raise InvalidParam("feature_dim must be >= n_classes for orthogonal means")
    if n_nodes < n_classes:
        raise InvalidParam("need at least one node per class")

    rng = np.random.default_rng(seed)
    labels = rng.permutation(np.arange(n_nodes) % n_classes)
    means = np.zeros((n_classes, feature_dim))
    means[np.arange(n_classes), np.arange(n_classes)] = 1.0
    features = means[labels] + noise * rng.normal(size=(n_nodes, feature_dim))

    iu, ju = np.triu_indices(n_nodes, k=1)
    same = labels[iu] == labels[ju]
    frac_same = same.mean() if same.size else 0.0
    mix = homophily * frac_same + (1.0 - homophily) * (1.0 - frac_same)
    base = min(1.0, avg_degree / max((n_nodes - 1) * mix, 1e-12))
    p = np.where(same, homophily * base, (1.0 - homophily) * base)
    keep = rng.random(iu.shape[0]) < p
    edges = np.stack([iu[keep], ju[keep]], axis=1)

    graph = build_graph(np.arange(n_nodes), edges, features)
    return make_raw_dataset(graph, labels)

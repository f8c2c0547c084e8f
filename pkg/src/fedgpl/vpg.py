"""Virtual prompt graphs: candidate attachment, significance selection, application.

The prompt is a learnable score vector p' plus k' candidate nodes. Prompting a
sample works in four steps:

1. attach_candidates: wire candidates to source nodes whose feature similarity
   passes the sigmoid threshold (the "< gamma" rule, flippable by config);
2. score_significance: project features onto p'/||p'|| for node scores, absolute
   score differences for edge scores, and tanh-scale every feature row;
3. build_vpg: rank-select the top k_n nodes / k_e edges (ties by ascending id)
   into the four add/remove sets of a Vpg;
4. apply_prompt: apply the set algebra to produce the prompted graph.

Gradients flow through the differentiable part only (the scaled-feature map);
the discrete selection is held fixed, straight-through style.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import (
    DimMismatch,
    EmptyKeepSet,
    InconsistentVpg,
    InvalidParam,
    StaleCache,
    ZeroScoreVector,
)
from .graph import Graph, canonical_edges

NORM_FLOOR = 1e-12


@dataclass(eq=False)
class PromptParams:
    """Learnable score vector, candidate pool, and selection knobs."""

    score_vector: np.ndarray  # (d0,)
    candidate_features: np.ndarray  # (k', d0)
    gamma: float = 0.5
    alpha_n: float = 0.5
    alpha_e: float = 0.5
    learnable_candidates: bool = False
    attach_below_threshold: bool = True  # verbatim "< gamma" rule; False flips it

    @property
    def k_prime(self) -> int:
        return int(self.candidate_features.shape[0])

    def copy(self) -> "PromptParams":
        return PromptParams(
            score_vector=self.score_vector.copy(),
            candidate_features=self.candidate_features.copy(),
            gamma=self.gamma,
            alpha_n=self.alpha_n,
            alpha_e=self.alpha_e,
            learnable_candidates=self.learnable_candidates,
            attach_below_threshold=self.attach_below_threshold,
        )


@dataclass(eq=False)
class Vpg:
    """The four prompt sets of one sample.

    added_ids/added_features describe surviving candidates (new node ids);
    anti_nodes are source positions to drop; added_edges are id pairs whose
    endpoints all survive; anti_edges index source edges to drop.
    """

    added_ids: np.ndarray
    added_features: np.ndarray
    anti_nodes: np.ndarray
    added_edges: np.ndarray
    anti_edges: np.ndarray


class SignificanceScores(NamedTuple):
    node_scores: np.ndarray
    edge_scores: np.ndarray
    scaled_features: np.ndarray


class PromptGrads(NamedTuple):
    score_vector: np.ndarray
    candidate_features: Optional[np.ndarray]


def init_prompt(
    d0: int,
    k_prime: int,
    seed: int,
    gamma: float = 0.5,
    alpha_n: float = 0.5,
    alpha_e: float = 0.5,
    learnable_candidates: bool = False,
    attach_below_threshold: bool = True,
) -> PromptParams:
    """Seeded prompt: unit-norm p' and unit-norm Gaussian candidate rows."""
    if not 0.0 < gamma < 1.0:
        raise InvalidParam("gamma must lie in (0, 1)")
    if not (0.0 < alpha_n <= 1.0 and 0.0 < alpha_e <= 1.0):
        raise InvalidParam("alpha_n and alpha_e must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    p = rng.normal(size=d0)
    p /= max(np.linalg.norm(p), NORM_FLOOR)
    cand = rng.normal(size=(k_prime, d0))
    if k_prime:
        cand /= np.maximum(np.linalg.norm(cand, axis=1, keepdims=True), NORM_FLOOR)
    return PromptParams(
        score_vector=p,
        candidate_features=cand,
        gamma=gamma,
        alpha_n=alpha_n,
        alpha_e=alpha_e,
        learnable_candidates=learnable_candidates,
        attach_below_threshold=attach_below_threshold,
    )


def _sigmoid(t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t, dtype=np.float64)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def attach_candidates(graph: Graph, prompt: PromptParams) -> Graph:
    """Append the candidate pool and wire it to similar-enough source nodes.

    Candidate ids continue after the largest source id, so prompted graphs keep
    ascending ids whenever the source does. An edge (candidate, source) exists
    iff sigmoid(x_cand . x_src) < gamma (or >= gamma when flipped).
    """
    k = prompt.k_prime
    if k == 0:
        return graph
    if prompt.candidate_features.shape[1] != graph.features.shape[1]:
        raise DimMismatch(
            f"candidate dim {prompt.candidate_features.shape[1]} != d0 {graph.features.shape[1]}"
        )
    n = graph.n_nodes
    base = int(graph.node_ids.max()) + 1
    ids = np.concatenate([graph.node_ids, base + np.arange(k)])
    feats = np.vstack([graph.features, prompt.candidate_features])

    sims = _sigmoid(prompt.candidate_features @ graph.features.T)  # (k', n)
    attach = sims < prompt.gamma if prompt.attach_below_threshold else sims >= prompt.gamma
    cand_idx, src_idx = np.nonzero(attach)
    new_edges = np.stack([src_idx, n + cand_idx], axis=1) if cand_idx.size else np.zeros((0, 2), np.int64)
    edges = np.vstack([graph.edges, new_edges]) if graph.n_edges else new_edges
    return Graph(node_ids=ids, edges=canonical_edges(edges, n + k), features=feats)


def score_significance(g_prime: Graph, prompt: PromptParams) -> SignificanceScores:
    norm = float(np.linalg.norm(prompt.score_vector))
    if norm < NORM_FLOOR:
        raise ZeroScoreVector("prompt score vector has (near-)zero norm")
    node_scores = g_prime.features @ (prompt.score_vector / norm)
    if g_prime.n_edges:
        edge_scores = np.abs(node_scores[g_prime.edges[:, 0]] - node_scores[g_prime.edges[:, 1]])
    else:
        edge_scores = np.zeros(0)
    scaled = g_prime.features * np.tanh(node_scores)[:, None]
    return SignificanceScores(node_scores, edge_scores, scaled)


def _top_k(scores: np.ndarray, ids: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k highest scores; ties broken by ascending id."""
    if k <= 0:
        return np.zeros(0, dtype=np.int64)
    order = np.lexsort((ids, -scores))  # primary: score desc, secondary: id asc
    return order[: min(k, scores.shape[0])]


def build_vpg(graph: Graph, g_prime: Graph, scores: SignificanceScores, prompt: PromptParams) -> Vpg:
    """Select prompt sets by borderline rank over G' nodes and edges."""
    n, e = graph.n_nodes, graph.n_edges
    if scores.node_scores.shape[0] != g_prime.n_nodes:
        raise StaleCache("scores do not match g_prime")
    k_n = math.ceil(prompt.alpha_n * n)
    k_e = math.ceil(prompt.alpha_e * e)
    if k_n == 0:
        raise EmptyKeepSet("node keep budget is zero")

    keep_nodes = set(_top_k(scores.node_scores, g_prime.node_ids, k_n).tolist())
    candidate_positions = np.arange(n, g_prime.n_nodes)
    kept_candidates = np.array(
        [p for p in candidate_positions if p in keep_nodes], dtype=np.int64
    )
    anti_nodes = np.array([p for p in range(n) if p not in keep_nodes], dtype=np.int64)

    edge_ids = np.arange(g_prime.n_edges)
    keep_edges = set(_top_k(scores.edge_scores, edge_ids, k_e).tolist())
    is_source_edge = (
        (g_prime.edges[:, 0] < n) & (g_prime.edges[:, 1] < n)
        if g_prime.n_edges
        else np.zeros(0, dtype=bool)
    )
    source_edge_index = {
        (int(u), int(v)): i for i, (u, v) in enumerate(graph.edges)
    }

    added_edges = []
    anti_edges = []
    for idx in range(g_prime.n_edges):
        u, v = int(g_prime.edges[idx, 0]), int(g_prime.edges[idx, 1])
        if is_source_edge[idx]:
            kept = idx in keep_edges and u in keep_nodes and v in keep_nodes
            if not kept:
                anti_edges.append(source_edge_index[(u, v)])
        else:
            if idx in keep_edges and u in keep_nodes and v in keep_nodes:
                added_edges.append((int(g_prime.node_ids[u]), int(g_prime.node_ids[v])))

    return Vpg(
        added_ids=g_prime.node_ids[kept_candidates].copy(),
        added_features=scores.scaled_features[kept_candidates].copy(),
        anti_nodes=anti_nodes,
        added_edges=np.array(sorted(added_edges), dtype=np.int64).reshape(-1, 2),
        anti_edges=np.array(sorted(anti_edges), dtype=np.int64),
    )


def apply_prompt(graph: Graph, vpg: Vpg, scaled_features: np.ndarray) -> Graph:
    """Apply the prompt set algebra to the source graph.

    scaled_features are G' rows from score_significance; the first |V| rows
    align with source positions.
    """
    n = graph.n_nodes
    if scaled_features.shape[0] < n or scaled_features.shape[1] != graph.features.shape[1]:
        raise InconsistentVpg("scaled features do not cover the source graph")
    anti = set(vpg.anti_nodes.tolist())
    if anti - set(range(n)):
        raise InconsistentVpg("anti-node outside the source graph")
    if vpg.anti_edges.size and (
        vpg.anti_edges.min() < 0 or vpg.anti_edges.max() >= graph.n_edges
    ):
        raise InconsistentVpg("anti-edge outside the source edge list")
    source_ids = set(int(i) for i in graph.node_ids)
    if source_ids & set(int(i) for i in vpg.added_ids):
        raise InconsistentVpg("added node id collides with a source id")

    kept_source = [p for p in range(n) if p not in anti]
    new_ids = [int(graph.node_ids[p]) for p in kept_source] + [int(i) for i in vpg.added_ids]
    if not new_ids:
        raise InconsistentVpg("prompting removed every node")
    rows = [scaled_features[p] for p in kept_source] + list(vpg.added_features)
    pos_of = {node_id: i for i, node_id in enumerate(new_ids)}

    anti_e = set(vpg.anti_edges.tolist())
    edges = []
    for idx, (u, v) in enumerate(graph.edges):
        if idx in anti_e:
            continue
        iu, iv = int(graph.node_ids[u]), int(graph.node_ids[v])
        if iu in pos_of and iv in pos_of:  # drop edges touching removed nodes
            edges.append((pos_of[iu], pos_of[iv]))
    for iu, iv in vpg.added_edges:
        if int(iu) not in pos_of or int(iv) not in pos_of:
            raise InconsistentVpg(f"added edge ({iu},{iv}) references a missing node")
        edges.append((pos_of[int(iu)], pos_of[int(iv)]))

    return Graph(
        node_ids=np.array(new_ids, dtype=np.int64),
        edges=canonical_edges(edges, len(new_ids)),
        features=np.array(rows, dtype=np.float64).reshape(len(new_ids), -1),
    )


def prompt_backward(g_prime: Graph, prompt: PromptParams, grad_scaled: np.ndarray) -> PromptGrads:
    """Gradient of p' (and candidate rows) through the scaled-feature map.

    grad_scaled holds one row per G' node (zero rows for nodes the prompt
    dropped); selection membership is treated as constant.
    """
    if grad_scaled.shape != g_prime.features.shape:
        raise StaleCache(
            f"gradient shape {grad_scaled.shape} != G' feature shape {g_prime.features.shape}"
        )
    norm = float(np.linalg.norm(prompt.score_vector))
    if norm < NORM_FLOOR:
        raise ZeroScoreVector("prompt score vector has (near-)zero norm")
    u = prompt.score_vector / norm
    x = g_prime.features
    w = x @ u
    tanh_w = np.tanh(w)
    # dL/dw_i = (g_i . x_i) * (1 - tanh^2 w_i)
    s = (grad_scaled * x).sum(axis=1) * (1.0 - tanh_w * tanh_w)
    grad_u = x.T @ s
    grad_p = (grad_u - u * float(u @ grad_u)) / norm

    grad_cand = None
    if prompt.learnable_candidates and prompt.k_prime:
        k = prompt.k_prime
        cand_rows = slice(g_prime.n_nodes - k, g_prime.n_nodes)
        g_c = grad_scaled[cand_rows]
        x_c = x[cand_rows]
        w_c = w[cand_rows]
        s_c = (g_c * x_c).sum(axis=1) * (1.0 - np.tanh(w_c) ** 2)
        grad_cand = np.tanh(w_c)[:, None] * g_c + s_c[:, None] * u[None, :]
    return PromptGrads(score_vector=grad_p, candidate_features=grad_cand)


@dataclass(eq=False)
class PromptCache:
    """Everything the client must remember between prompt and backward."""

    g_prime: Graph
    scores: SignificanceScores
    vpg: Vpg
    prompted: Graph
    prompted_positions: np.ndarray  # row r of prompted graph = G' position prompted_positions[r]


def make_prompt(graph: Graph, prompt: PromptParams) -> tuple[Graph, PromptCache]:
    """Full prompting pipeline for one sample, with backward bookkeeping."""
    g_prime = attach_candidates(graph, prompt)
    scores = score_significance(g_prime, prompt)
    vpg = build_vpg(graph, g_prime, scores, prompt)
    prompted = apply_prompt(graph, vpg, scores.scaled_features)
    gprime_pos = {int(node_id): i for i, node_id in enumerate(g_prime.node_ids)}
    positions = np.array([gprime_pos[int(i)] for i in prompted.node_ids], dtype=np.int64)
    return prompted, PromptCache(
        g_prime=g_prime, scores=scores, vpg=vpg, prompted=prompted, prompted_positions=positions
    )

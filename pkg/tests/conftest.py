"""Shared fixtures: Cora-format dataset files for loader and training tests.

If real Cora exports exist at data/cora.nodes + data/cora.edges they are used;
otherwise a deterministic synthetic stand-in with the same statistics (2708
nodes, 1433 features, 7 classes, ~5400 edges) is generated once per session.
"""

from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def cora_files(tmp_path_factory):
    real_nodes = REPO_ROOT / "data" / "cora.nodes"
    real_edges = REPO_ROOT / "data" / "cora.edges"
    if real_nodes.exists() and real_edges.exists():
        return real_nodes, real_edges

    from fedgpl.data import save_dataset, synth_dataset

    raw = synth_dataset(
        n_nodes=2708,
        n_classes=7,
        feature_dim=1433,
        homophily=0.85,
        seed=42,
        avg_degree=4.0,
        noise=0.1,
    )
    out = tmp_path_factory.mktemp("cora_standin")
    nodes, edges = out / "cora.nodes", out / "cora.edges"
    save_dataset(raw, nodes, edges)
    return nodes, edges

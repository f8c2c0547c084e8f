"""Split training protocol: prompts and heads live on clients, the shared
encoder on the server. Every tensor crossing the boundary is framed by the
wire codec and decoded on receipt; the frame length feeds the byte ledger
while computation continues on the float64 copy carried alongside, so the
split pipeline stays numerically identical to a single-process one.
"""

import dataclasses
import itertools
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .data import build_task_samples, dirichlet_partition, load_dataset, synth_dataset
from .encoder import (
    ParamVector,
    gnn_backward,
    gnn_forward,
    head_forward,
    init_encoder,
    init_head,
    loss_and_grad,
    pack_blocks,
    save_param_vector,
)
from .errors import DecodeError, MissingCache, ShapeMismatch, StaleState
from .graph import Graph, build_graph, readout
from .hidta import aggregate, compute_transfer_matrix, save_transfer_matrix
from .metrics import accuracy_f1, data_heterogeneity, task_heterogeneity
from .privacy import laplace_privatize
from .vpg import init_prompt, make_prompt, prompt_backward
from .wire import decode_message, encode_message


@dataclass
class Message:
    kind: str
    client_id: int
    round: int
    payload: object  # float64 values used downstream
    wire: bytes      # what the byte ledger measures

    @property
    def nbytes(self):
        return len(self.wire)


def _send(kind, client_id, round_no, payload, wire_payload=None):
    wire = encode_message(
        kind, client_id, round_no, payload if wire_payload is None else wire_payload
    )
    return Message(kind, client_id, round_no, payload, wire)


def _receive(msg, expected_kind):
    kind, _, _, _ = decode_message(msg.wire)
    if kind != expected_kind:
        raise DecodeError(f"expected {expected_kind}, got {kind}")
    return msg.payload


@dataclass
class GpfPrompt:
    """Baseline prompt: one learnable vector added to every node feature."""

    vector: np.ndarray

    def copy(self):
        return GpfPrompt(self.vector.copy())


@dataclass
class ClientState:
    client_id: int
    level: str
    prompt: object  # PromptParams or GpfPrompt
    head: object
    train_samples: list
    test_samples: list
    cache: dict = field(default_factory=dict)

    def params_vector(self):
        if isinstance(self.prompt, GpfPrompt):
            blocks = [("prompt", self.prompt.vector)]
        else:
            blocks = [("prompt", self.prompt.score_vector)]
            if self.prompt.learnable_candidates:
                blocks.append(("candidates", self.prompt.candidate_features))
        blocks.append(("head", self.head.w))
        return pack_blocks(blocks)

    def load_params_vector(self, pv):
        if isinstance(self.prompt, GpfPrompt):
            self.prompt.vector = pv.block("prompt").copy()
        else:
            self.prompt.score_vector = pv.block("prompt").copy()
            if self.prompt.learnable_candidates:
                self.prompt.candidate_features = pv.block("candidates").copy()
        self.head.w = pv.block("head").copy()


@dataclass
class ServerState:
    encoder: object
    snapshot: object = None
    caches: dict = field(default_factory=dict)
    grad_accum: list = None
    accum_count: int = 0
    tau_history: list = field(default_factory=list)

    def begin_round(self):
        """Freeze the encoder for the round; clients all see one snapshot."""
        self.snapshot = self.encoder.copy()
        self.caches.clear()
        self.grad_accum = [np.zeros_like(w) for w in self.encoder.weights]
        self.accum_count = 0


def prompt_graph(client, sample):
    """Client-side prompting; returns (prompted graph, backward cache)."""
    if isinstance(client.prompt, GpfPrompt):
        graph = sample.graph
        prompted = Graph(
            node_ids=graph.node_ids,
            edges=graph.edges,
            features=graph.features + client.prompt.vector,
        )
        return prompted, None
    return make_prompt(sample.graph, client.prompt)


def client_prompt_step(client, key, sample, privacy, round_no):
    prompted, pcache = prompt_graph(client, sample)
    client.cache[key] = (pcache, prompted.n_nodes)
    feats = laplace_privatize(
        prompted.features, privacy, f"feat:{round_no}:{client.client_id}:{key}"
    )
    return _send(
        "PromptedGraph", client.client_id, round_no, (prompted.edges, feats)
    )


def server_embed_step(server, msg, key, privacy):
    edges, feats = _receive(msg, "PromptedGraph")
    graph = build_graph(np.arange(feats.shape[0]), edges, feats)
    h, cache = gnn_forward(server.snapshot, graph)
    server.caches[(msg.client_id, key)] = (graph, cache)
    h = laplace_privatize(h, privacy, f"emb:{msg.round}:{msg.client_id}:{key}")
    return _send("Embedding", msg.client_id, msg.round, h, wire_payload=h.ravel())


def client_grad_step(client, msg, key, sample, lr, privacy):
    _receive(msg, "Embedding")
    if key not in client.cache:
        raise StaleState(f"no cached prompt state for sample {key!r}")
    h = msg.payload
    n = h.shape[0]
    pooled = readout(h)
    logits = head_forward(client.head, pooled)
    loss, grad_logits = loss_and_grad(logits, sample.label)
    pred = int(np.argmax(logits))
    grad_w = np.outer(pooled, grad_logits)
    grad_pooled = client.head.w @ grad_logits
    client.head.w = client.head.w - lr * grad_w
    grad_h = np.tile(grad_pooled / n, (n, 1))
    grad_h = laplace_privatize(
        grad_h, privacy, f"grad:{msg.round}:{client.client_id}:{key}"
    )
    out = _send(
        "EmbeddingGrad", client.client_id, msg.round, grad_h, wire_payload=grad_h.ravel()
    )
    return loss, pred, out


def server_backprop_step(server, msg, key, freeze_encoder=False):
    _receive(msg, "EmbeddingGrad")
    cached = server.caches.get((msg.client_id, key))
    if cached is None:
        raise MissingCache(f"no activations for client {msg.client_id}, sample {key!r}")
    graph, cache = cached
    grad_h = msg.payload.reshape(cache.hs[-1].shape)
    grad_ws, grad_x = gnn_backward(server.snapshot, graph, cache, grad_h)
    if not freeze_encoder:
        for acc, g in zip(server.grad_accum, grad_ws):
            acc += g
    server.accum_count += 1
    return _send(
        "FeatureGrad", msg.client_id, msg.round, grad_x, wire_payload=grad_x.ravel()
    )


def client_apply_feature_grad(client, msg, key, lr):
    _receive(msg, "FeatureGrad")
    pcache, _ = client.cache.pop(key)
    grad_x = msg.payload
    if isinstance(client.prompt, GpfPrompt):
        client.prompt.vector = client.prompt.vector - lr * grad_x.sum(axis=0)
        return
    grad_full = np.zeros_like(pcache.g_prime.features)
    grad_full[pcache.prompted_positions] = grad_x.reshape(
        len(pcache.prompted_positions), -1
    )
    grads = prompt_backward(pcache.g_prime, client.prompt, grad_full)
    client.prompt.score_vector = client.prompt.score_vector - lr * grads.score_vector
    if client.prompt.learnable_candidates:
        client.prompt.candidate_features = (
            client.prompt.candidate_features - lr * grads.candidate_features
        )


def fedavg_aggregate(params):
    """Unweighted mean of parameter vectors; layouts must agree."""
    first = params[0]
    for pv in params[1:]:
        if pv.blocks != first.blocks or pv.data.shape != first.data.shape:
            raise ShapeMismatch("parameter layouts differ across clients")
    return ParamVector(
        data=np.mean([pv.data for pv in params], axis=0), blocks=first.blocks
    )


@dataclass
class RoundLog:
    round: int
    client_rows: list
    tau: object
    bytes_by_kind: dict
    mean_delta_t: float = 0.0  # over client pairs, post-local parameters
    mean_delta_d: float = 0.0  # over client pairs of mean pooled embeddings


def _upload_image(pv, privacy, stream_id):
    if privacy.enabled and privacy.dp_on_params:
        return laplace_privatize(pv.data, privacy, stream_id)
    return pv.data


def run_round(server, clients, cfg, round_no):
    """One synchronous round: local split passes, then the server barrier
    (transferability, aggregation, encoder step, parameter distribution)."""
    server.begin_round()
    privacy = cfg.privacy
    clients = sorted(clients, key=lambda c: c.client_id)
    theta_start = [c.params_vector() for c in clients]
    rows = []
    bytes_by_kind = {}
    per_client_bytes = {}

    def log(msg, direction, cid):
        bytes_by_kind[msg.kind] = bytes_by_kind.get(msg.kind, 0) + msg.nbytes
        per_client_bytes[cid][direction] += msg.nbytes

    pooled_means = {}
    for client in clients:
        per_client_bytes[client.client_id] = {"up": 0, "down": 0}
        losses = []
        hits = 0
        pooled_sum = None
        for key, sample in enumerate(client.train_samples):
            up = client_prompt_step(client, key, sample, privacy, round_no)
            log(up, "up", client.client_id)
            down = server_embed_step(server, up, key, privacy)
            log(down, "down", client.client_id)
            pooled = readout(down.payload)
            pooled_sum = pooled if pooled_sum is None else pooled_sum + pooled
            loss, pred, up2 = client_grad_step(
                client, down, key, sample, cfg.lr, privacy
            )
            log(up2, "up", client.client_id)
            down2 = server_backprop_step(server, up2, key, cfg.freeze_encoder)
            log(down2, "down", client.client_id)
            client_apply_feature_grad(client, down2, key, cfg.lr)
            losses.append(loss)
            hits += pred == sample.label
        n = len(client.train_samples)
        if pooled_sum is not None:
            pooled_means[client.client_id] = pooled_sum / n
        rows.append(
            {
                "client": client.client_id,
                "task": client.level,
                "loss": float(np.mean(losses)) if losses else 0.0,
                "train_acc": hits / n if n else 0.0,
            }
        )

    theta_post = [c.params_vector() for c in clients]
    delta_t, delta_d = _pair_heterogeneity(clients, theta_post, pooled_means)
    tau = None
    if cfg.mode in ("fedgpl", "fedavg"):
        uploads = [
            _upload_image(pv, privacy, f"param:{round_no}:{c.client_id}")
            for pv, c in zip(theta_post, clients)
        ]
        for client, up_data in zip(clients, uploads):
            msg = _send("ParamUpload", client.client_id, round_no, up_data)
            log(msg, "up", client.client_id)
        if cfg.mode == "fedgpl":
            tau = compute_transfer_matrix(
                [c.level for c in clients],
                [pv.data for pv in theta_start],
                uploads,
                norm_fn=cfg.norm_fn,
                direct_intra_task=cfg.direct_intra_task,
            )
            new_flats = aggregate(uploads, tau)
            server.tau_history.append((round_no, tau))
        else:
            mean = np.mean(uploads, axis=0)
            new_flats = [mean] * len(clients)
        for client, pv, flat in zip(clients, theta_post, new_flats):
            updated = ParamVector(data=np.asarray(flat, dtype=np.float64), blocks=pv.blocks)
            msg = _send("ParamUpdate", client.client_id, round_no, updated.data)
            log(msg, "down", client.client_id)
            client.load_params_vector(updated)

    if not cfg.freeze_encoder and server.accum_count:
        mean_grads = [g / server.accum_count for g in server.grad_accum]
        server.encoder.weights = [
            w - cfg.lr * g for w, g in zip(server.encoder.weights, mean_grads)
        ]

    for row in rows:
        row["bytes_up"] = per_client_bytes[row["client"]]["up"]
        row["bytes_down"] = per_client_bytes[row["client"]]["down"]
    return RoundLog(
        round=round_no,
        client_rows=rows,
        tau=tau,
        bytes_by_kind=bytes_by_kind,
        mean_delta_t=delta_t,
        mean_delta_d=delta_d,
    )


def _pair_heterogeneity(clients, theta_post, pooled_means):
    """Mean Delta_T over client pairs and mean Delta_D over pairs of the
    clients' mean pooled embeddings this round."""
    dts = [
        task_heterogeneity(
            theta_post[i].data, theta_post[j].data, clients[i].level, clients[j].level
        )
        for i, j in itertools.combinations(range(len(clients)), 2)
    ]
    with_pool = [c.client_id for c in clients if c.client_id in pooled_means]
    dds = [
        data_heterogeneity(pooled_means[a], pooled_means[b])
        for a, b in itertools.combinations(with_pool, 2)
    ]
    return (
        float(np.mean(dts)) if dts else 0.0,
        float(np.mean(dds)) if dds else 0.0,
    )


def evaluate_client(server, client, n_classes):
    """Test-set metrics with privacy off and no wire traffic."""
    preds, labels, losses = [], [], []
    for sample in client.test_samples:
        prompted, _ = prompt_graph(client, sample)
        h, _ = gnn_forward(server.encoder, prompted)
        logits = head_forward(client.head, readout(h))
        loss, _ = loss_and_grad(logits, sample.label)
        preds.append(int(np.argmax(logits)))
        labels.append(sample.label)
        losses.append(loss)
    if not labels:
        return {"loss": 0.0, "acc": 0.0, "f1": 0.0}
    acc, f1 = accuracy_f1(preds, labels, n_classes)
    return {"loss": float(np.mean(losses)), "acc": acc, "f1": f1}


# experiment assembly ---------------------------------------------------------

def _split_train_test(samples, test_fraction, few_shot, rng):
    order = rng.permutation(len(samples))
    n_test = int(math.floor(test_fraction * len(samples)))
    test = [samples[i] for i in sorted(order[:n_test])]
    train = [samples[i] for i in sorted(order[n_test:])]
    if few_shot:
        train = train[:few_shot]
    return train, test


def build_experiment(cfg):
    """Materialize (server, clients, raw dataset) from a config."""
    cfg.validate()
    if cfg.dataset == "synth":
        raw = synth_dataset(
            cfg.synth_nodes,
            cfg.synth_classes,
            cfg.synth_feature_dim,
            cfg.synth_homophily,
            seed=cfg.seed,
            avg_degree=cfg.synth_avg_degree,
            noise=cfg.synth_noise,
        )
    else:
        raw = load_dataset(cfg.node_file, cfg.edge_file)
    d0 = raw.graph.features.shape[1]
    clients = []
    cid = 0
    for ti, level in enumerate(cfg.tasks):
        samples = build_task_samples(
            raw,
            level,
            cfg.kappa,
            max_samples=cfg.samples_per_client * cfg.clients_per_task,
            seed=cfg.seed + 1000 * (ti + 1),
        )
        part = dirichlet_partition(
            samples, cfg.clients_per_task, cfg.partition_alpha, seed=cfg.seed + 77 + ti
        )
        for local in range(cfg.clients_per_task):
            mine = [samples[i] for i in part.assignments[local]]
            rng = np.random.default_rng(cfg.seed + 31 * cid + 7)
            train, test = _split_train_test(mine, cfg.test_fraction, cfg.few_shot, rng)
            if cfg.prompt_kind == "gpf":
                prompt = GpfPrompt(np.zeros(d0))
            else:
                prompt = init_prompt(
                    d0,
                    cfg.k_prime,
                    seed=cfg.seed + 9000 + cid,
                    gamma=cfg.gamma,
                    alpha_n=cfg.alpha_n,
                    alpha_e=cfg.alpha_e,
                    learnable_candidates=cfg.learnable_candidates,
                    attach_below_threshold=cfg.attach_below_threshold,
                )
            head = init_head(cfg.d, raw.n_classes, seed=cfg.seed + 500 + cid)
            clients.append(
                ClientState(
                    client_id=cid,
                    level=level,
                    prompt=prompt,
                    head=head,
                    train_samples=train,
                    test_samples=test,
                )
            )
            cid += 1
    server = ServerState(
        encoder=init_encoder(d0, cfg.d, cfg.gnn_layers, seed=cfg.seed + 5)
    )
    return server, clients, raw


@dataclass
class ExperimentReport:
    config: dict
    rows: list            # rounds.csv rows as dicts
    tau_history: list     # (round, matrix)
    final: dict
    bytes_by_kind: dict
    rounds_completed: int
    heterogeneity: list = field(default_factory=list)
    server: object = None
    clients: list = None


def _eval_rows(server, clients, n_classes, round_no):
    rows = []
    for client in sorted(clients, key=lambda c: c.client_id):
        ev = evaluate_client(server, client, n_classes)
        rows.append(
            {
                "round": round_no,
                "client": client.client_id,
                "task": client.level,
                "loss": ev["loss"],
                "acc": ev["acc"],
                "f1": ev["f1"],
                "bytes_up": 0,
                "bytes_down": 0,
            }
        )
    return rows


def run_training(cfg, out_dir=None):
    """Full experiment: initial evaluation, round loop with optional early
    stop, per-round evaluation, and (optionally) persisted outputs."""
    server, clients, raw = build_experiment(cfg)
    all_rows = list(_eval_rows(server, clients, raw.n_classes, 0))
    bytes_by_kind = {}
    loss_trace = []
    heterogeneity = []
    rounds_completed = 0
    for round_no in range(1, cfg.rounds + 1):
        log = run_round(server, clients, cfg, round_no)
        heterogeneity.append(
            {"round": round_no, "delta_t": log.mean_delta_t, "delta_d": log.mean_delta_d}
        )
        for kind, amount in log.bytes_by_kind.items():
            bytes_by_kind[kind] = bytes_by_kind.get(kind, 0) + amount
        train_by_client = {row["client"]: row for row in log.client_rows}
        for client in sorted(clients, key=lambda c: c.client_id):
            ev = evaluate_client(server, client, raw.n_classes)
            trained = train_by_client[client.client_id]
            all_rows.append(
                {
                    "round": round_no,
                    "client": client.client_id,
                    "task": client.level,
                    "loss": trained["loss"],
                    "acc": ev["acc"],
                    "f1": ev["f1"],
                    "bytes_up": trained["bytes_up"],
                    "bytes_down": trained["bytes_down"],
                }
            )
        rounds_completed = round_no
        loss_trace.append(
            float(np.mean([row["loss"] for row in log.client_rows]))
        )
        window = cfg.early_stop_window
        if (
            cfg.early_stop_tol > 0
            and len(loss_trace) > window
            and loss_trace[-window - 1] - loss_trace[-1] < cfg.early_stop_tol
        ):
            break

    last_round = max(row["round"] for row in all_rows)
    final_rows = [row for row in all_rows if row["round"] == last_round]
    final = {
        "mean_acc": float(np.mean([row["acc"] for row in final_rows])),
        "mean_f1": float(np.mean([row["f1"] for row in final_rows])),
        "per_client": [
            {k: row[k] for k in ("client", "task", "acc", "f1")} for row in final_rows
        ],
    }
    report = ExperimentReport(
        config=config_dict(cfg),
        rows=all_rows,
        tau_history=list(server.tau_history),
        final=final,
        bytes_by_kind=bytes_by_kind,
        rounds_completed=rounds_completed,
        heterogeneity=heterogeneity,
        server=server,
        clients=clients,
    )
    if out_dir is not None:
        write_outputs(report, out_dir)
    return report


def config_dict(cfg):
    out = dataclasses.asdict(cfg)
    out["tasks"] = list(out["tasks"])
    return out


ROUND_COLUMNS = ("round", "client", "task", "loss", "acc", "f1", "bytes_up", "bytes_down")


def write_outputs(report, out_dir):
    """rounds.csv, tau.csv, report.json, and parameter checkpoints."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "rounds.csv"), "w", encoding="utf-8") as fh:
        fh.write(",".join(ROUND_COLUMNS) + "\n")
        for row in report.rows:
            fh.write(
                "{round},{client},{task},{loss:.17g},{acc:.17g},{f1:.17g},"
                "{bytes_up},{bytes_down}\n".format(**row)
            )
    save_transfer_matrix(os.path.join(out_dir, "tau.csv"), report.tau_history)
    payload = {
        "config": report.config,
        "final": report.final,
        "bytes_by_kind": report.bytes_by_kind,
        "bytes_total": sum(report.bytes_by_kind.values()),
        "rounds_completed": report.rounds_completed,
        "heterogeneity": report.heterogeneity,
    }
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    ckpt_dir = os.path.join(out_dir, "checkpoints")
    os.makedirs(ckpt_dir, exist_ok=True)
    if report.server is not None:
        enc = pack_blocks(
            [(f"w{i}", w) for i, w in enumerate(report.server.encoder.weights)]
        )
        save_param_vector(enc, os.path.join(ckpt_dir, "encoder.bin"))
    for client in report.clients or []:
        save_param_vector(
            client.params_vector(),
            os.path.join(ckpt_dir, f"client_{client.client_id}.bin"),
        )

"""Message-passing encoder and linear task head with exact manual gradients.

The model is deliberately small and explicit: ``H^(l+1) = act(A_hat H^(l) W^(l))``
with symmetric normalized propagation, mean-pool readout, and a bias-free
linear head. Gradients are hand-written reverse mode, including the gradient
with respect to input features that the split protocol ships back to clients.
All training state is float64.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimMismatch, LabelOutOfRange, ParseError, ShapeMismatch, StaleCache
from .graph import Graph, normalized_adjacency

ACTIVATIONS = ("tanh", "linear")


@dataclass(eq=False)
class EncoderParams:
    """Stacked layer weights; first maps d0→d, the rest d→d."""

    weights: list[np.ndarray]
    activation: str = "tanh"

    @property
    def in_dim(self) -> int:
        return int(self.weights[0].shape[0])

    @property
    def out_dim(self) -> int:
        return int(self.weights[-1].shape[1])

    def copy(self) -> "EncoderParams":
        return EncoderParams([w.copy() for w in self.weights], self.activation)


@dataclass(eq=False)
class HeadParams:
    """Single linear map d→C, no bias."""

    w: np.ndarray

    def copy(self) -> "HeadParams":
        return HeadParams(self.w.copy())


@dataclass(eq=False)
class GnnCache:
    """Forward activations needed by the exact backward pass."""

    params: EncoderParams
    a_hat: np.ndarray
    hs: list[np.ndarray]  # H^(0) .. H^(L)
    propagated: list[np.ndarray]  # A_hat @ H^(l-1) per layer


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_encoder(d0: int, d: int, layers: int, seed: int, activation: str = "tanh") -> EncoderParams:
    if activation not in ACTIVATIONS:
        raise DimMismatch(f"unknown activation {activation!r}")
    rng = np.random.default_rng(seed)
    dims = [d0] + [d] * layers
    weights = [glorot(rng, dims[i], dims[i + 1]) for i in range(layers)]
    return EncoderParams(weights=weights, activation=activation)


def init_head(d: int, n_classes: int, seed: int) -> HeadParams:
    return HeadParams(w=glorot(np.random.default_rng(seed), d, n_classes))


def gnn_forward(params: EncoderParams, graph: Graph) -> tuple[np.ndarray, GnnCache]:
    x = graph.features
    if x.shape[1] != params.in_dim:
        raise DimMismatch(f"feature dim {x.shape[1]} != W1 rows {params.in_dim}")
    a_hat = normalized_adjacency(graph)
    hs = [x.astype(np.float64)]
    propagated = []
    for w in params.weights:
        p = a_hat @ hs[-1]
        z = p @ w
        propagated.append(p)
        hs.append(np.tanh(z) if params.activation == "tanh" else z)
    return hs[-1], GnnCache(params=params, a_hat=a_hat, hs=hs, propagated=propagated)


def gnn_backward(
    params: EncoderParams, graph: Graph, cache: GnnCache, grad_h: np.ndarray
) -> tuple[list[np.ndarray], np.ndarray]:
    """Exact gradients of the forward map: per-layer weight grads and grad wrt X."""
    if cache.params is not params or cache.hs[0].shape[0] != graph.n_nodes:
        raise StaleCache("cache does not belong to this (params, graph) forward pass")
    if grad_h.shape != cache.hs[-1].shape:
        raise StaleCache(f"grad shape {grad_h.shape} != output shape {cache.hs[-1].shape}")
    g = np.asarray(grad_h, dtype=np.float64)
    grad_ws: list[np.ndarray] = [np.zeros(0)] * len(params.weights)
    for layer in range(len(params.weights) - 1, -1, -1):
        h_out = cache.hs[layer + 1]
        gz = g * (1.0 - h_out * h_out) if params.activation == "tanh" else g
        grad_ws[layer] = cache.propagated[layer].T @ gz
        g = cache.a_hat.T @ (gz @ params.weights[layer].T)
    return grad_ws, g


def head_forward(head: HeadParams, pooled: np.ndarray) -> np.ndarray:
    pooled = np.asarray(pooled, dtype=np.float64)
    if pooled.shape != (head.w.shape[0],):
        raise DimMismatch(f"pooled shape {pooled.shape} != ({head.w.shape[0]},)")
    return pooled @ head.w


def loss_and_grad(logits: np.ndarray, label: int) -> tuple[float, np.ndarray]:
    """Softmax cross-entropy, numerically stabilized by max-shift."""
    logits = np.asarray(logits, dtype=np.float64)
    n_classes = logits.shape[0]
    if not 0 <= label < n_classes:
        raise LabelOutOfRange(f"label {label} outside [0, {n_classes})")
    shifted = logits - logits.max()
    log_z = np.log(np.exp(shifted).sum())
    loss = float(log_z - shifted[label])
    grad = np.exp(shifted - log_z)
    grad[label] -= 1.0
    return loss, grad


# flat parameter vectors ------------------------------------------------------

@dataclass(eq=False)
class ParamVector:
    """Flat float64 vector plus an ordered block layout (name, shape)."""

    data: np.ndarray
    blocks: tuple[tuple[str, tuple[int, ...]], ...]

    def block(self, name: str) -> np.ndarray:
        offset = 0
        for block_name, shape in self.blocks:
            size = int(np.prod(shape))
            if block_name == name:
                return self.data[offset : offset + size].reshape(shape)
            offset += size
        raise ShapeMismatch(f"no block named {name!r}")

    def copy(self) -> "ParamVector":
        return ParamVector(self.data.copy(), self.blocks)


def pack_blocks(named: list[tuple[str, np.ndarray]]) -> ParamVector:
    blocks = tuple((name, tuple(arr.shape)) for name, arr in named)
    if named:
        data = np.concatenate([np.asarray(arr, dtype=np.float64).ravel() for _, arr in named])
    else:
        data = np.zeros(0)
    return ParamVector(data=data, blocks=blocks)


def unpack_blocks(pv: ParamVector) -> dict[str, np.ndarray]:
    return {name: pv.block(name).copy() for name, _ in pv.blocks}


def sgd_step(params: ParamVector, grads: ParamVector, lr: float) -> ParamVector:
    if params.blocks != grads.blocks or params.data.shape != grads.data.shape:
        raise ShapeMismatch("parameter and gradient layouts differ")
    return ParamVector(data=params.data - lr * grads.data, blocks=params.blocks)


# checkpoints -----------------------------------------------------------------
# Text header (two lines) followed by the raw little-endian float64 vector.

CHECKPOINT_MAGIC = "fedgpl-params 1"


def save_param_vector(pv: ParamVector, path) -> None:
    spec = ";".join(f"{name}:{'x'.join(map(str, shape))}" for name, shape in pv.blocks)
    header = f"{CHECKPOINT_MAGIC}\n{spec}\n".encode("ascii")
    payload = np.ascontiguousarray(pv.data, dtype="<f8").tobytes()
    Path(path).write_bytes(header + payload)


def load_param_vector(path) -> ParamVector:
    blob = Path(path).read_bytes()
    first = blob.find(b"\n")
    second = blob.find(b"\n", first + 1)
    if first < 0 or second < 0 or blob[:first].decode("ascii", "replace") != CHECKPOINT_MAGIC:
        raise ParseError(f"{path}: not a parameter checkpoint")
    blocks = []
    spec = blob[first + 1 : second].decode("ascii")
    if spec:
        for part in spec.split(";"):
            name, _, shape_text = part.partition(":")
            shape = tuple(int(s) for s in shape_text.split("x")) if shape_text else ()
            blocks.append((name, shape))
    data = np.frombuffer(blob[second + 1 :], dtype="<f8").astype(np.float64)
    pv = ParamVector(data=data, blocks=tuple(blocks))
    expected = sum(int(np.prod(shape)) for _, shape in pv.blocks)
    if expected != data.shape[0]:
        raise ParseError(f"{path}: header declares {expected} values, file has {data.shape[0]}")
    return pv

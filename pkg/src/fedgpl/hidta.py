"""Directed transferability and hierarchical weighted aggregation.

Clients that share a task level are fused into a per-task mean model;
transferability between task models is extrapolated back down to client
pairs and drives a row-normalized weighted average of client parameters.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EmptyTask, InvalidParam, ShapeMismatch

NORM_FLOOR = 1e-12


def _flat(params):
    data = getattr(params, "data", params)
    return np.asarray(data, dtype=np.float64).ravel()


def transferability(theta_a, theta_a_next, theta_b_next):
    """Scalar projection of b's estimated optimum onto a's update direction.

    Directed: tau(a<-b) and tau(b<-a) generally differ. A client whose own
    update is degenerate (below the norm floor) receives 0 from everyone.
    """
    a = _flat(theta_a)
    a_next = _flat(theta_a_next)
    b_next = _flat(theta_b_next)
    if a.shape != a_next.shape or a.shape != b_next.shape:
        raise ShapeMismatch("transferability inputs differ in length")
    update = a_next - a
    norm = np.linalg.norm(update)
    if norm < NORM_FLOOR:
        return 0.0
    return float(update @ (b_next - a) / norm)


@dataclass
class TaskModel:
    level: str
    theta: np.ndarray
    theta_next: np.ndarray


def build_task_models(levels, params, params_next):
    """Per-task arithmetic mean of client parameters and next-step estimates.

    Returns {level: TaskModel} for every level present in `levels`.
    """
    if len(levels) != len(params) or len(levels) != len(params_next):
        raise ShapeMismatch("levels, params, params_next must align")
    if not levels:
        raise EmptyTask("no clients to build task models from")
    models = {}
    for level in dict.fromkeys(levels):
        idx = [i for i, lv in enumerate(levels) if lv == level]
        theta = np.mean([_flat(params[i]) for i in idx], axis=0)
        theta_next = np.mean([_flat(params_next[i]) for i in idx], axis=0)
        models[level] = TaskModel(level, theta, theta_next)
    return models


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x)) if x >= 0 else np.exp(x) / (1.0 + np.exp(x))


def _closeness(dist, norm_fn):
    if norm_fn == "sigmoid":
        return 1.0 - _sigmoid(dist)
    if norm_fn == "relu":
        return max(0.0, 1.0 - dist)
    raise InvalidParam(f"unknown norm_fn {norm_fn!r}")


def hierarchical_tau(theta_a, task_a, theta_b, task_b, tau_task, norm_fn="sigmoid"):
    """Extrapolate task-level transferability down to a client pair.

    Each factor discounts by the client's distance from its own task model,
    so clients far from their task centroid neither give nor take much.
    """
    a = _flat(theta_a)
    b = _flat(theta_b)
    if a.shape != task_a.theta.shape or b.shape != task_b.theta.shape:
        raise ShapeMismatch("client and task-model parameters differ in length")
    close_a = _closeness(float(np.linalg.norm(a - task_a.theta)), norm_fn)
    close_b = _closeness(float(np.linalg.norm(b - task_b.theta)), norm_fn)
    return close_a * close_b * tau_task


def compute_transfer_matrix(
    levels, params, params_next, norm_fn="sigmoid", direct_intra_task=False
):
    """N x N directed matrix tau[i][j] = tau(i<-j).

    Task-level transferability is computed between task-model trajectories,
    then scaled per client pair by their distances to their task models.
    With `direct_intra_task`, same-task pairs skip the hierarchy and project
    client trajectories directly.
    """
    n = len(levels)
    models = build_task_models(levels, params, params_next)
    task_tau = {
        (la, lb): transferability(ma.theta, ma.theta_next, mb.theta_next)
        for la, ma in models.items()
        for lb, mb in models.items()
    }
    tau = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if direct_intra_task and levels[i] == levels[j]:
                tau[i, j] = transferability(params[i], params_next[i], params_next[j])
            else:
                tau[i, j] = hierarchical_tau(
                    params[i],
                    models[levels[i]],
                    params[j],
                    models[levels[j]],
                    task_tau[(levels[i], levels[j])],
                    norm_fn,
                )
    if not np.isfinite(tau).all():
        raise InvalidParam("non-finite transferability")
    return tau


def aggregate(params, tau):
    """Row-normalized nonnegative weighted mean of client parameter vectors.

    w_ij = max(tau_ij, 0) / sum_k max(tau_ik, 0); a client whose row clamps
    to (near) zero keeps its own parameters. Inputs are not mutated.
    """
    tau = np.asarray(tau, dtype=np.float64)
    n = len(params)
    if tau.shape != (n, n):
        raise ShapeMismatch(f"tau must be {n}x{n}, got {tau.shape}")
    flats = [_flat(p) for p in params]
    width = flats[0].shape[0]
    if any(f.shape[0] != width for f in flats):
        raise ShapeMismatch("client parameter vectors differ in length")
    stack = np.stack(flats)
    clamped = np.maximum(tau, 0.0)
    out = []
    for i in range(n):
        row_sum = clamped[i].sum()
        if row_sum < NORM_FLOOR:
            out.append(stack[i].copy())
        else:
            out.append((clamped[i] / row_sum) @ stack)
    return out


def save_transfer_matrix(path, rows):
    """Append-style writer for (round, tau_matrix) pairs as round,i,j,tau CSV."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("round,i,j,tau\n")
        for rnd, tau in rows:
            tau = np.asarray(tau)
            for i in range(tau.shape[0]):
                for j in range(tau.shape[1]):
                    fh.write(f"{rnd},{i},{j},{tau[i, j]:.17g}\n")

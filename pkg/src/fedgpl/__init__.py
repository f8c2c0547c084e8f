"""Federated graph prompt learning under task and data heterogeneity.

A deterministic simulator and library for split client/server training:
clients hold lightweight graph prompts and task heads, the server holds the
shared encoder, and aggregation weights follow directed transferability.
"""

from .accounting import (
    AccountingConfig,
    AccountingReport,
    PRESETS,
    comm_accounting,
    format_table,
    param_accounting,
)
from .config import Config, load_config, parse_config
from .data import (
    Partition,
    RawDataset,
    Sample,
    build_task_samples,
    dirichlet_partition,
    load_dataset,
    load_partition,
    make_raw_dataset,
    save_dataset,
    save_partition,
    synth_dataset,
)
from .encoder import (
    EncoderParams,
    HeadParams,
    ParamVector,
    gnn_backward,
    gnn_forward,
    head_forward,
    init_encoder,
    init_head,
    load_param_vector,
    loss_and_grad,
    pack_blocks,
    save_param_vector,
    sgd_step,
    unpack_blocks,
)
from .errors import FedgplError
from .federation import (
    ClientState,
    ExperimentReport,
    GpfPrompt,
    RoundLog,
    ServerState,
    build_experiment,
    evaluate_client,
    fedavg_aggregate,
    run_round,
    run_training,
    write_outputs,
)
from .graph import Graph, build_graph, canonical_edges, k_ego_induce, normalized_adjacency, readout
from .hidta import (
    TaskModel,
    aggregate,
    build_task_models,
    compute_transfer_matrix,
    hierarchical_tau,
    transferability,
)
from .metrics import accuracy_f1, data_heterogeneity, task_heterogeneity
from .privacy import PrivacyConfig, laplace_noise, laplace_privatize
from .vpg import (
    PromptParams,
    Vpg,
    apply_prompt,
    attach_candidates,
    build_vpg,
    init_prompt,
    make_prompt,
    prompt_backward,
    score_significance,
)
from .wire import decode_message, encode_message

__version__ = "0.1.0"

__all__ = [
    "AccountingConfig",
    "AccountingReport",
    "PRESETS",
    "comm_accounting",
    "format_table",
    "param_accounting",
    "Config",
    "load_config",
    "parse_config",
    "Partition",
    "RawDataset",
    "Sample",
    "build_task_samples",
    "dirichlet_partition",
    "load_dataset",
    "load_partition",
    "make_raw_dataset",
    "save_dataset",
    "save_partition",
    "synth_dataset",
    "EncoderParams",
    "HeadParams",
    "ParamVector",
    "gnn_backward",
    "gnn_forward",
    "head_forward",
    "init_encoder",
    "init_head",
    "load_param_vector",
    "loss_and_grad",
    "pack_blocks",
    "save_param_vector",
    "sgd_step",
    "unpack_blocks",
    "FedgplError",
    "ClientState",
    "ExperimentReport",
    "GpfPrompt",
    "RoundLog",
    "ServerState",
    "build_experiment",
    "evaluate_client",
    "fedavg_aggregate",
    "run_round",
    "run_training",
    "write_outputs",
    "Graph",
    "build_graph",
    "canonical_edges",
    "k_ego_induce",
    "normalized_adjacency",
    "readout",
    "TaskModel",
    "aggregate",
    "build_task_models",
    "compute_transfer_matrix",
    "hierarchical_tau",
    "transferability",
    "accuracy_f1",
    "data_heterogeneity",
    "task_heterogeneity",
    "PrivacyConfig",
    "laplace_noise",
    "laplace_privatize",
    "PromptParams",
    "Vpg",
    "apply_prompt",
    "attach_candidates",
    "build_vpg",
    "init_prompt",
    "make_prompt",
    "prompt_backward",
    "score_significance",
    "decode_message",
    "encode_message",
    "__version__",
]

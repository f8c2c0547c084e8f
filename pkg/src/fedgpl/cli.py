"""Command-line entry point.

Subcommands: run (train and write reports + figures), partition (write a
client assignment manifest), account (print the cost table), eval (recompute
metrics from checkpoints), sweep (vary one config key and plot the curve).
Exit codes: 0 success, 1 configuration/runtime failure, 2 usage error.
"""

import argparse
import copy
import csv
import os
import sys

import numpy as np

from .accounting import PRESETS, comm_accounting, format_table
from .config import Config, apply_setting, load_config
from .data import build_task_samples, dirichlet_partition, load_dataset, save_partition, synth_dataset
from .encoder import load_param_vector
from .errors import ConfigError, FedgplError, UsageError
from .federation import build_experiment, evaluate_client, run_training

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="fedgpl",
        description="Federated graph prompt learning simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="train and write rounds.csv/tau.csv/report.json + figures")
    _common_config_flags(run)
    run.add_argument("--out", default="fedgpl_out", help="output directory")
    run.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    part = sub.add_parser("partition", help="write a client assignment manifest")
    _common_config_flags(part)
    part.add_argument("--level", default="node", choices=("node", "edge", "graph"))
    part.add_argument("--clients", type=int, default=None, help="default: clients_per_task")
    part.add_argument("--alpha", type=float, default=None, help="default: partition_alpha")
    part.add_argument("--out", required=True, help="manifest path")

    account = sub.add_parser("account", help="print the parameter/communication cost table")
    account.add_argument("--preset", default="table7", choices=sorted(PRESETS))

    ev = sub.add_parser("eval", help="recompute test metrics from saved checkpoints")
    _common_config_flags(ev)
    ev.add_argument("--checkpoints", required=True, help="directory holding *.bin checkpoints")

    sweep = sub.add_parser("sweep", help="run once per value of one config key")
    _common_config_flags(sweep)
    sweep.add_argument("--sweep", required=True, metavar="key=v1,v2,...")
    sweep.add_argument("--out", default="fedgpl_sweep", help="output directory")
    sweep.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    return parser


def _common_config_flags(sub):
    sub.add_argument("--config", default=None, help="key=value config file")
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--mode", default=None, choices=("fedgpl", "fedavg", "local"))
    sub.add_argument("--rounds", type=int, default=None)


def _load_cfg(args):
    cfg = Config()
    if args.config is not None:
        if not os.path.exists(args.config):
            raise ConfigError(f"config file not found: {args.config}")
        cfg = load_config(args.config, base=cfg)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.mode is not None:
        cfg.mode = args.mode
    if args.rounds is not None:
        cfg.rounds = args.rounds
    return cfg.validate()


def _cmd_run(args):
    cfg = _load_cfg(args)
    report = run_training(cfg, out_dir=args.out)
    if not args.no_figures:
        from .figures import render_run

        render_run(args.out)
    print(f"rounds completed: {report.rounds_completed}")
    print(f"mean accuracy:    {report.final['mean_acc']:.4f}")
    print(f"mean macro F1:    {report.final['mean_f1']:.4f}")
    print(f"bytes exchanged:  {sum(report.bytes_by_kind.values())}")
    print(f"outputs:          {args.out}")
    return EXIT_OK


def _cmd_partition(args):
    cfg = _load_cfg(args)
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
    samples = build_task_samples(
        raw,
        args.level,
        cfg.kappa,
        max_samples=cfg.samples_per_client * cfg.clients_per_task,
        seed=cfg.seed,
    )
    n_clients = args.clients if args.clients is not None else cfg.clients_per_task
    alpha = args.alpha if args.alpha is not None else cfg.partition_alpha
    part = dirichlet_partition(samples, n_clients, alpha, seed=cfg.seed)
    save_partition(part, args.out)
    sizes = [len(a) for a in part.assignments]
    print(f"{len(samples)} samples over {n_clients} clients: {sizes} -> {args.out}")
    return EXIT_OK


def _cmd_account(args):
    print(format_table(comm_accounting(PRESETS[args.preset])))
    return EXIT_OK


def _cmd_eval(args):
    cfg = _load_cfg(args)
    server, clients, raw = build_experiment(cfg)
    enc_path = os.path.join(args.checkpoints, "encoder.bin")
    if os.path.exists(enc_path):
        enc = load_param_vector(enc_path)
        server.encoder.weights = [
            enc.block(f"w{i}").copy() for i in range(len(server.encoder.weights))
        ]
    accs, f1s = [], []
    for client in clients:
        path = os.path.join(args.checkpoints, f"client_{client.client_id}.bin")
        if os.path.exists(path):
            client.load_params_vector(load_param_vector(path))
        ev = evaluate_client(server, client, raw.n_classes)
        accs.append(ev["acc"])
        f1s.append(ev["f1"])
        print(
            f"client {client.client_id} ({client.level}): "
            f"acc {ev['acc']:.4f} f1 {ev['f1']:.4f}"
        )
    print(f"mean: acc {np.mean(accs):.4f} f1 {np.mean(f1s):.4f}")
    return EXIT_OK


def _cmd_sweep(args):
    base = _load_cfg(args)
    if "=" not in args.sweep:
        raise UsageError("--sweep expects key=v1,v2,...")
    key, _, joined = args.sweep.partition("=")
    key = key.strip()
    values = [v.strip() for v in joined.split(",") if v.strip()]
    if not values:
        raise UsageError("--sweep lists no values")
    os.makedirs(args.out, exist_ok=True)
    rows = []
    for value in values:
        cfg = apply_setting(copy.deepcopy(base), key, value).validate()
        report = run_training(cfg)
        rows.append(
            {
                "key": key,
                "value": value,
                "mean_acc": report.final["mean_acc"],
                "mean_f1": report.final["mean_f1"],
            }
        )
        print(f"{key}={value}: acc {rows[-1]['mean_acc']:.4f} f1 {rows[-1]['mean_f1']:.4f}")
    with open(os.path.join(args.out, "sweep.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=("key", "value", "mean_acc", "mean_f1"))
        writer.writeheader()
        writer.writerows(rows)
    if not args.no_figures:
        from .figures import render_sweep

        render_sweep(rows, args.out)
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "partition": _cmd_partition,
    "account": _cmd_account,
    "eval": _cmd_eval,
    "sweep": _cmd_sweep,
}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FedgplError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())

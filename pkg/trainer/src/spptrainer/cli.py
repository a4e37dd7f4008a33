"""Trainer command line: ``spptrain train`` fits a model on a pair-file
dataset and exports a weight bundle; ``spptrain cross-check`` compares a
bundle's trainer-side and runtime-side forward passes."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .cross_check import TOLERANCE, cross_check_forward
from .train import TrainConfig, export_bundle, train, write_log


def _cmd_train(args) -> int:
    config = TrainConfig(lr=args.lr, weight_decay=args.weight_decay,
                         batch_size=args.batch_size, max_epochs=args.epochs,
                         patience=args.patience, variant=args.variant,
                         seed=args.seed, full_kl=(args.loss == "full"))
    model, history, norm_stats = train(args.pairs, args.val, config)
    export_bundle(model, norm_stats, args.out)
    if args.log:
        write_log(history, args.log)
    best = min(row["val_kl"] for row in history)
    print(json.dumps({"epochs_run": history[-1]["epoch"], "best_val_kl": best,
                      "initial_val_kl": history[0]["val_kl"],
                      "bundle": str(args.out)}))
    return 0


def _cmd_cross_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.count):
        features = rng.standard_normal((129, args.frames)).astype(np.float32)
        worst = max(worst, cross_check_forward(args.model, features))
    print(json.dumps({"max_abs_deviation": worst, "tolerance": TOLERANCE,
                      "ok": worst <= TOLERANCE}))
    return 0 if worst <= TOLERANCE else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="spptrain", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train")
    p.add_argument("--pairs", required=True, help="training pair-file directory")
    p.add_argument("--val", required=True, help="validation pair-file directory")
    p.add_argument("--out", required=True, help="output bundle path (.sppm)")
    p.add_argument("--log", help="JSONL training log path")
    p.add_argument("--variant", choices=("blstm", "attention"), default="blstm")
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--weight-decay", type=float, default=0.00001)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--loss", choices=("full", "printed"), default="full",
                   help="full binary KL (default) or the plain t*log(t/e) form")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("cross-check")
    p.add_argument("--model", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--frames", type=int, default=40)
    p.set_defaults(func=_cmd_cross_check)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

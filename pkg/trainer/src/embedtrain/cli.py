"""Command line for the embedding trainer.

    embedtrain train --method ae --input bootstrap.csv --out transform.json \
        --dim 12 --lr 1e-2 --epochs 100 [--seed 0]
    embedtrain train --method ib --input bootstrap.csv --labels label \
        --beta 0.5 --out transform.json --preset dos

The input is a numeric CSV with a header row, typically the bootstrap dump
produced by the streaming scorer's fit-pca subcommand. For the bottleneck
method the --labels column supplies the 0/1 anomaly indicator; note this
injects weak supervision into an otherwise unsupervised pipeline, so the
exported transform should only be reused on streams where those bootstrap
labels were legitimate to obtain.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .train import (
    EPOCH_GRID,
    LR_GRID,
    PRESET_HYPERPARAMS,
    MissingLabels,
    NonFiniteLoss,
    ShapeError,
    TrainerError,
    TrainSpec,
    train_ae,
    train_ib,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embedtrain",
        description="Train an embedding on bootstrap rows and export it as "
                    "an affine transform file.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("train", help="train and export an encoder")
    p.add_argument("--method", choices=["ae", "ib"], required=True)
    p.add_argument("--input", required=True, help="bootstrap CSV (header row)")
    p.add_argument("--out", required=True, help="transform file to write")
    p.add_argument("--dim", type=int, default=12, help="output dimension")
    p.add_argument("--lr", type=float, help=f"learning rate, one of {LR_GRID}")
    p.add_argument("--epochs", type=int, help=f"epoch count, one of {EPOCH_GRID}")
    p.add_argument("--beta", type=float, default=0.5,
                   help="bottleneck relevance weight (ib only)")
    p.add_argument("--labels", help="label column name (ib only)")
    p.add_argument("--preset", choices=sorted({d for d, _ in PRESET_HYPERPARAMS}),
                   help="use a dataset's tuned learning rate and epochs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--expect-rows", type=int, default=256,
                   help="required row count; 0 disables the check")
    return parser


def _load_matrix(path: str, label_column: str | None):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ShapeError(f"{path} is empty")
        rows = [row for row in reader if row]
    label_idx = None
    if label_column is not None:
        try:
            label_idx = header.index(label_column)
        except ValueError:
            raise MissingLabels(
                f"label column {label_column!r} not in header {header}"
            ) from None
    try:
        values = np.array(
            [[float(v) for i, v in enumerate(row) if i != label_idx]
             for row in rows],
            dtype=np.float64,
        )
    except ValueError as exc:
        raise ShapeError(f"non-numeric cell in {path}: {exc}") from None
    labels = None
    if label_idx is not None:
        labels = np.array([int(float(row[label_idx])) for row in rows])
    return values, labels


def _cmd_train(args: argparse.Namespace) -> int:
    lr, epochs = args.lr, args.epochs
    if args.preset:
        preset_lr, preset_epochs = PRESET_HYPERPARAMS[(args.preset, args.method)]
        lr = lr if lr is not None else preset_lr
        epochs = epochs if epochs is not None else preset_epochs
    if lr is None or epochs is None:
        raise TrainerError("--lr and --epochs are required without --preset")

    matrix, labels = _load_matrix(args.input, args.labels)
    spec = TrainSpec(
        matrix=matrix,
        method=args.method,
        out_dim=args.dim,
        learning_rate=lr,
        epochs=epochs,
        ib_beta=args.beta,
        labels=labels,
        seed=args.seed,
        expected_rows=args.expect_rows,
    )
    result = train_ae(spec) if args.method == "ae" else train_ib(spec)
    result.export(args.out)
    line = (f"wrote {args.out} ({result.in_dim} -> {result.out_dim} dims, "
            f"loss {result.initial_loss:.6g} -> {result.final_loss:.6g}")
    if "bootstrap_accuracy" in result.extra:
        line += f", bootstrap accuracy {result.extra['bootstrap_accuracy']:.3f}"
    print(line + ")")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _cmd_train(args)
    except (MissingLabels, TrainerError) as exc:
        if isinstance(exc, (ShapeError, NonFiniteLoss)):
            print(f"data error: {exc}", file=sys.stderr)
            return EXIT_DATA
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

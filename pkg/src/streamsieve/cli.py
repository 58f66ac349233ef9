"""Command-line interface.

Subcommands:
    score        stream a CSV and emit per-record anomaly scores
    eval         score a labeled CSV and print its ROC-AUC
    stream-eval  ROC-AUC over growing prefixes, emitted as CSV
    bench        wall-time sweeps over records / dims / hash copies
    fit-pca      fit the PCA transform on a bootstrap prefix and save it
    gen          generate a labeled synthetic stream + matching config

Exit codes: 0 success, 2 configuration error, 3 data error. The seed can be
overridden by the STREAMSIEVE_SEED environment variable; an explicit
--seed flag wins over both the environment and the config file.
"""

from __future__ import annotations

import argparse
import csv

import os
import sys
from dataclasses import replace


from . import datasets, dimred, evaluate, pipeline, synth
from .pipeline import ConfigError, DataError, DimredConfig, RunConfig
from .records import ParseError, TickPolicy

SEED_ENV_VAR = "STREAMSIEVE_SEED"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streamsieve",
        description="Streaming group-anomaly scoring for mixed-type data streams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, needs_input: bool = True) -> None:
        p.add_argument("--config", help="JSON run-config file")
        p.add_argument("--preset", choices=sorted(datasets.PRESETS),
                       help="named dataset column map instead of --config schema")
        if needs_input:
            p.add_argument("--input", required=True, help="CSV path ('-' for stdin)")
        p.add_argument("--alpha", type=float, help="decay factor in (0,1)")
        p.add_argument("--buckets", type=int, help="hash buckets b")
        p.add_argument("--copies", type=int, help="independent hash copies w")
        p.add_argument("--seed", type=int, help="hash seed (wins over env/config)")
        p.add_argument("--tick-every", type=int, metavar="N",
                       help="derive ticks as one per N records")
        p.add_argument("--dimred-mode", choices=["none", "pca", "external"])
        p.add_argument("--out-dim", type=int, help="reduced numeric dimension")
        p.add_argument("--transform", help="transform file for --dimred-mode external")
        p.add_argument("--decay-per-elapsed-tick", action="store_true",
                       help="decay once per elapsed tick instead of per transition")
        p.add_argument("--no-header", action="store_true",
                       help="input has no header row")

    p_score = sub.add_parser("score", help="emit per-record anomaly scores")
    add_common(p_score)
    p_score.add_argument("--out", help="output CSV path (default stdout)")
    p_score.add_argument("--per-feature", action="store_true",
                         help="append per-feature score columns")

    p_eval = sub.add_parser("eval", help="score a labeled stream, print ROC-AUC")
    add_common(p_eval)
    p_eval.add_argument("--kdd-downsample", action="store_true",
                        help="keep every 16th attack row (kddcup99 preset)")

    p_seval = sub.add_parser("stream-eval", help="prefix ROC-AUC series")
    add_common(p_seval)
    p_seval.add_argument("--every", type=int, default=100_000,
                         help="evaluation interval in records (default 100000)")
    p_seval.add_argument("--out", help="output CSV path (default stdout)")

    p_bench = sub.add_parser("bench", help="wall-time scaling sweeps")
    add_common(p_bench)
    p_bench.add_argument("--sweep", choices=["records", "dims", "hash_copies"],
                         default="records")
    p_bench.add_argument("--repeats", type=int, default=1)

    p_fit = sub.add_parser("fit-pca", help="fit PCA on the bootstrap prefix")
    add_common(p_fit)
    p_fit.add_argument("--out", required=True, help="transform file to write")
    p_fit.add_argument("--dump-rows",
                       help="also write the bootstrap numeric matrix as CSV "
                            "(with label column when present), for external trainers")

    p_gen = sub.add_parser("gen", help="generate a labeled synthetic stream")
    p_gen.add_argument("--out", required=True, help="CSV path to write")
    p_gen.add_argument("--config-out", help="also write a matching run config")
    p_gen.add_argument("--seed", type=int, default=None)
    p_gen.add_argument("--records", type=int, default=100_000)
    p_gen.add_argument("--cat-features", type=int, default=2)
    p_gen.add_argument("--num-features", type=int, default=1)
    p_gen.add_argument("--ticks", type=int, default=500)
    p_gen.add_argument("--block", action="append", default=[],
                       metavar="START:END[:MULT[:POOL[:CENTER[:SPREAD]]]]",
                       help="inject an anomaly block (repeatable)")
    return parser


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    header: list[str] | None = None
    if getattr(args, "preset", None):
        preset = datasets.get_preset(args.preset)
        if preset.has_header:
            header = _peek_header(args.input)
        config = preset.config(header)
    elif getattr(args, "config", None):
        config = pipeline.load_config(args.config)
    else:
        raise ConfigError("either --config or --preset is required")

    updates: dict = {}
    if args.alpha is not None:
        updates["alpha"] = args.alpha
    if args.buckets is not None:
        updates["buckets"] = args.buckets
    if args.copies is not None:
        updates["hash_copies"] = args.copies
    if args.seed is not None:
        updates["seed"] = args.seed
    elif os.environ.get(SEED_ENV_VAR):
        try:
            updates["seed"] = int(os.environ[SEED_ENV_VAR])
        except ValueError:
            raise ConfigError(
                f"{SEED_ENV_VAR} must be an integer, got "
                f"{os.environ[SEED_ENV_VAR]!r}"
            ) from None
    if args.tick_every is not None:
        updates["tick"] = TickPolicy.every_n(args.tick_every)
    if args.no_header:
        updates["has_header"] = False

    dr_updates: dict = {}
    if args.dimred_mode is not None:
        dr_updates["mode"] = args.dimred_mode
    if args.out_dim is not None:
        dr_updates["out_dim"] = args.out_dim
    if args.transform is not None:
        dr_updates["transform_path"] = args.transform
        if args.dimred_mode is None:
            dr_updates["mode"] = "external"
    if dr_updates:
        updates["dimred"] = replace(config.dimred, **dr_updates)
    if args.decay_per_elapsed_tick:
        updates["decay_per_elapsed_tick"] = True

    if updates:
        config = replace(config, **updates)
    return config.validated()


def _peek_header(path: str) -> list[str]:
    if path == "-":
        raise ConfigError("presets with headers cannot read from stdin")
    with open(path, newline="", encoding="utf-8") as fh:
        row = next(csv.reader(fh), None)
    if row is None:
        raise DataError(f"{path} is empty")
    return row


def _open_input(path: str):
    if path == "-":
        return sys.stdin
    return open(path, newline="", encoding="utf-8")


def _input_rows(args: argparse.Namespace, config: RunConfig):
    fh = _open_input(args.input)
    reader = csv.reader(fh)
    rows = (
        row
        for i, row in enumerate(reader)
        if row and not (config.has_header and i == 0)
    )
    if getattr(args, "kdd_downsample", False):
        label_idx = config.schema.label_index
        if label_idx is None:
            raise ConfigError("--kdd-downsample needs a label column")
        rows = datasets.downsample_kdd(rows, label_index=label_idx)
    return fh, rows


def _cmd_score(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    fh, rows = _input_rows(args, config)
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.writer(out)
        names: list[str] | None = None
        for row in pipeline.run(config, rows, per_feature=args.per_feature):
            if names is None:
                names = ["ordinal", "tick", "score", "top_feature"]
                if args.per_feature:
                    names += ["record_term"] + [
                        f"f_{i}" for i in range(len(row.feature_scores or []))
                    ]
                writer.writerow(names)
            line = [row.ordinal, row.tick, repr(row.score), row.top_feature]
            if args.per_feature:
                line += [repr(row.record_term)] + [
                    repr(v) for v in (row.feature_scores or [])
                ]
            writer.writerow(line)
    finally:
        if out is not sys.stdout:
            out.close()
        if fh is not sys.stdin:
            fh.close()
    return EXIT_OK


def _scored_with_labels(config: RunConfig, rows):
    scores: list[float] = []
    labels: list[bool] = []
    unlabeled = 0
    for row in pipeline.run(config, rows):
        scores.append(row.score)
        if row.label is None:
            unlabeled += 1
            labels.append(False)
        else:
            labels.append(row.label)
    if unlabeled:
        print(f"warning: {unlabeled} records had no label", file=sys.stderr)
    return scores, labels


def _cmd_eval(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    fh, rows = _input_rows(args, config)
    try:
        scores, labels = _scored_with_labels(config, rows)
    finally:
        if fh is not sys.stdin:
            fh.close()
    if not scores:
        raise DataError("input stream is empty")
    auc = evaluate.roc_auc(scores, labels)
    print(f"records={len(scores)} positives={sum(labels)} auc={auc:.6f}")
    return EXIT_OK


def _cmd_stream_eval(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    fh, rows = _input_rows(args, config)
    try:
        scores, labels = _scored_with_labels(config, rows)
    finally:
        if fh is not sys.stdin:
            fh.close()
    points = evaluate.streaming_auc(scores, labels, every=args.every)
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(["prefix", "auc", "degenerate"])
        for pt in points:
            writer.writerow(
                [pt.prefix, "" if pt.auc is None else f"{pt.auc:.6f}", int(pt.degenerate)]
            )
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _cmd_bench(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    fh, rows = _input_rows(args, config)
    from .records import StreamParser

    parser = StreamParser(config.schema, config.tick,
                          benign_tokens=config.benign_tokens)
    try:
        parsed = [(r.tick, r.cats, r.nums) for r in map(parser.parse, rows)]
    finally:
        if fh is not sys.stdin:
            fh.close()
    n_cat = len(config.schema.categorical_names)
    n_num = len(config.schema.numeric_names)
    if args.sweep == "records":
        sizes = [1 << e for e in range(12, 18) if (1 << e) <= len(parsed)]
        if not sizes:
            raise DataError("input too small to sweep records (need >= 4096)")
        points = pipeline.bench_records(
            config, parsed, n_cat, n_num, sizes, repeats=args.repeats
        )
    elif args.sweep == "dims":
        dims = [m for m in range(10, 81, 10) if m <= n_num]
        if not dims:
            raise DataError("need >= 10 numeric columns to sweep dims")
        points = pipeline.bench_dims(
            config, parsed, n_cat, dims,
            n_records=min(len(parsed), 16384), repeats=args.repeats,
        )
    else:
        points = pipeline.bench_copies(
            config, parsed, n_cat, n_num, copies=[2, 3, 4],
            n_records=min(len(parsed), 16384), repeats=args.repeats,
        )
    writer = csv.writer(sys.stdout)
    writer.writerow(["size", "records", "seconds"])
    for pt in points:
        writer.writerow([pt.size, pt.records, f"{pt.seconds:.6f}"])
    return EXIT_OK


def _cmd_fit_pca(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    fh, rows = _input_rows(args, config)
    from .records import StreamParser

    parser = StreamParser(config.schema, config.tick,
                          benign_tokens=config.benign_tokens)
    n_num = len(config.schema.numeric_names)
    buffer = dimred.BootstrapBuffer(n_num, config.dimred.bootstrap)
    kept: list = []
    try:
        for row in rows:
            record = parser.parse(row)
            buffer.add(record.nums)
            kept.append(record)
            if buffer.full:
                break
    finally:
        if fh is not sys.stdin:
            fh.close()
    if not buffer.full:
        raise DataError(
            f"input has {len(buffer)} records; bootstrap needs "
            f"{config.dimred.bootstrap}"
        )
    transform = dimred.fit_pca(buffer, config.dimred.out_dim)
    dimred.save_transform(transform, args.out)
    print(f"wrote {args.out} ({n_num} -> {config.dimred.out_dim} dims)")
    if args.dump_rows:
        with open(args.dump_rows, "w", newline="", encoding="utf-8") as dump:
            writer = csv.writer(dump)
            has_labels = any(r.label is not None for r in kept)
            header = list(config.schema.numeric_names)
            if has_labels:
                header.append("label")
            writer.writerow(header)
            for record in kept:
                line = [repr(v) for v in record.nums]
                if has_labels:
                    line.append("1" if record.label else "0")
                writer.writerow(line)
        print(f"wrote {args.dump_rows} ({len(kept)} bootstrap rows)")
    return EXIT_OK


def _parse_block(text: str) -> synth.AnomalyBlock:
    parts = text.split(":")
    if len(parts) < 2:
        raise ConfigError(f"block spec needs at least START:END, got {text!r}")
    try:
        start, end = int(parts[0]), int(parts[1])
        mult = float(parts[2]) if len(parts) > 2 else 5.0
        pool = int(parts[3]) if len(parts) > 3 else 3
        center = float(parts[4]) if len(parts) > 4 else 1000.0
        spread = float(parts[5]) if len(parts) > 5 else 5.0
    except ValueError as exc:
        raise ConfigError(f"malformed block spec {text!r}: {exc}") from None
    try:
        return synth.AnomalyBlock(start, end, pool, mult, center, spread)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _cmd_gen(args: argparse.Namespace) -> int:
    blocks = [_parse_block(spec) for spec in args.block]
    schema = synth.synth_schema(args.cat_features, args.num_features)
    seed = args.seed
    if seed is None:
        env = os.environ.get(SEED_ENV_VAR)
        try:
            seed = int(env) if env else 0
        except ValueError:
            raise ConfigError(
                f"{SEED_ENV_VAR} must be an integer, got {env!r}"
            ) from None
    try:
        rows = synth.generate(
            seed, args.records, args.cat_features, args.num_features,
            blocks, n_ticks=args.ticks,
        )
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow([c.name for c in schema.columns])
            for row in rows:
                writer.writerow(row)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    print(f"wrote {args.out} ({args.records} records)")
    if args.config_out:
        config = RunConfig(
            schema=schema,
            tick=TickPolicy.from_timestamp(),
            seed=seed,
            dimred=DimredConfig(),
        )
        pipeline.save_config(config, args.config_out)
        print(f"wrote {args.config_out}")
    return EXIT_OK


_COMMANDS = {
    "score": _cmd_score,
    "eval": _cmd_eval,
    "stream-eval": _cmd_stream_eval,
    "bench": _cmd_bench,
    "fit-pca": _cmd_fit_pca,
    "gen": _cmd_gen,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, dimred.TransformError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, ParseError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

"""End-to-end runner: configuration, the streaming engine, and benchmarks.

The engine wires the pieces together per record: optional dimensionality
reduction of the numeric columns, decay of the current-tick counters on
tick transitions, then hash-update-query-score. Scoring is strictly
sequential and single-pass; the only buffering is the PCA bootstrap, whose
records are replayed through scoring in arrival order once the transform
is fitted, so every input record yields exactly one score row.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from . import dimred
from .hashing import HasherBank
from .records import (
    Record,
    Schema,
    StreamParser,
    TickPolicy,
    validate_schema,
)
from .scoring import ScoreReport, score_parts
from .sketch import SketchBank

DEFAULT_ALPHA = 0.85
DEFAULT_BUCKETS = 1024
DEFAULT_HASH_COPIES = 2


class ConfigError(ValueError):
    """Invalid run configuration; surfaces as exit code 2 in the CLI."""


class DataError(ValueError):
    """Unprocessable input stream; surfaces as exit code 3 in the CLI."""


@dataclass(frozen=True)
class DimredConfig:
    mode: str = "none"  # none | pca | external
    out_dim: int = dimred.DEFAULT_OUT_DIM
    transform_path: str | None = None
    bootstrap: int = dimred.BOOTSTRAP_CAPACITY


@dataclass(frozen=True)
class RunConfig:
    """Everything one scoring run needs besides the input rows."""

    schema: Schema
    tick: TickPolicy = field(default_factory=lambda: TickPolicy.every_n(1000))
    alpha: float = DEFAULT_ALPHA
    buckets: int = DEFAULT_BUCKETS
    hash_copies: int = DEFAULT_HASH_COPIES
    seed: int = 0
    dimred: DimredConfig = field(default_factory=DimredConfig)
    decay_per_elapsed_tick: bool = False
    has_header: bool = True
    benign_tokens: tuple[str, ...] | None = None

    def validated(self) -> "RunConfig":
        if not (0.0 < self.alpha < 1.0):
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.buckets < 2:
            raise ConfigError("buckets must be >= 2")
        if self.hash_copies < 1:
            raise ConfigError("hash_copies must be >= 1")
        if self.dimred.mode not in ("none", "pca", "external"):
            raise ConfigError(f"unknown dimred mode {self.dimred.mode!r}")
        if self.dimred.mode != "none":
            n_num = len(self.schema.numeric_names)
            if n_num == 0:
                raise ConfigError("dimensionality reduction needs numeric columns")
            if self.dimred.out_dim < 1:
                raise ConfigError("out_dim must be >= 1")
            if self.dimred.mode == "pca" and self.dimred.out_dim > n_num:
                raise ConfigError(
                    f"out_dim {self.dimred.out_dim} exceeds the "
                    f"{n_num} numeric columns"
                )
            if self.dimred.mode == "external" and not self.dimred.transform_path:
                raise ConfigError("external dimred mode needs transform_path")
        try:
            validate_schema(self.schema)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self


def _schema_from_doc(doc) -> Schema:
    try:
        pairs = [(col["name"], col["kind"]) for col in doc["columns"]]
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"malformed schema section: {exc}") from exc
    try:
        return Schema.of(*pairs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> RunConfig:
    """Read a JSON run-config document; missing keys take the defaults."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if "schema" not in doc:
        raise ConfigError("config document has no schema section")
    schema = _schema_from_doc(doc["schema"])
    tick_doc = doc.get("tick", {"mode": "every_n", "n": 1000})
    try:
        policy = TickPolicy(tick_doc.get("mode", "every_n"), tick_doc.get("n", 1))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    dr = doc.get("dimred", {})
    config = RunConfig(
        schema=schema,
        tick=policy,
        alpha=doc.get("alpha", DEFAULT_ALPHA),
        buckets=doc.get("buckets", DEFAULT_BUCKETS),
        hash_copies=doc.get("hash_copies", DEFAULT_HASH_COPIES),
        seed=doc.get("seed", 0),
        dimred=DimredConfig(
            mode=dr.get("mode", "none"),
            out_dim=dr.get("out_dim", dimred.DEFAULT_OUT_DIM),
            transform_path=dr.get("transform_path"),
            bootstrap=dr.get("bootstrap", dimred.BOOTSTRAP_CAPACITY),
        ),
        decay_per_elapsed_tick=doc.get("decay_per_elapsed_tick", False),
        has_header=doc.get("has_header", True),
        benign_tokens=(
            tuple(doc["benign_tokens"]) if "benign_tokens" in doc else None
        ),
    )
    return config.validated()


def save_config(config: RunConfig, path: str | Path) -> None:
    doc = {
        "schema": {
            "columns": [
                {"name": c.name, "kind": c.kind.value} for c in config.schema.columns
            ]
        },
        "tick": {"mode": config.tick.mode, "n": config.tick.n},
        "alpha": config.alpha,
        "buckets": config.buckets,
        "hash_copies": config.hash_copies,
        "seed": config.seed,
        "dimred": {
            "mode": config.dimred.mode,
            "out_dim": config.dimred.out_dim,
            "transform_path": config.dimred.transform_path,
            "bootstrap": config.dimred.bootstrap,
        },
        "decay_per_elapsed_tick": config.decay_per_elapsed_tick,
        "has_header": config.has_header,
    }
    if config.benign_tokens is not None:
        doc["benign_tokens"] = list(config.benign_tokens)
    Path(path).write_text(json.dumps(doc, indent=2), encoding="utf-8")


class StreamEngine:
    """Sequential scorer over parsed records.

    ``process`` returns the (record, report) pairs that became available;
    with PCA bootstrapping that is an empty list while buffering, then the
    whole backlog once the transform is fitted. ``finish`` flushes a
    bootstrap that never filled.
    """

    def __init__(self, config: RunConfig, n_cat: int, n_num: int):
        config.validated()
        self.config = config
        mode = config.dimred.mode
        self.reduced = mode != "none"
        effective_num = config.dimred.out_dim if self.reduced else n_num
        self.n_cat = n_cat
        self.n_num = n_num
        self.effective_num = effective_num
        self.hashers = HasherBank(
            n_cat, effective_num, config.hash_copies, config.buckets, config.seed
        )
        self.bank = SketchBank(
            n_cat + effective_num, config.hash_copies, config.buckets, config.alpha
        )
        self.transform: dimred.Transform | None = None
        self._buffer: dimred.BootstrapBuffer | None = None
        self._pending: list[Record] = []
        if mode == "external":
            self.transform = dimred.load_transform(config.dimred.transform_path)
            if self.transform.input_dim != n_num:
                raise ConfigError(
                    f"transform expects {self.transform.input_dim} numeric "
                    f"columns, stream has {n_num}"
                )
            if self.transform.output_dim != config.dimred.out_dim:
                raise ConfigError(
                    f"transform produces {self.transform.output_dim} dims, "
                    f"config says {config.dimred.out_dim}"
                )
        elif mode == "pca":
            self._buffer = dimred.BootstrapBuffer(n_num, config.dimred.bootstrap)
        self._last_tick: int | None = None
        self._alpha = config.alpha
        self._per_elapsed = config.decay_per_elapsed_tick

    def _score(self, record: Record) -> ScoreReport:
        tick = record.tick
        last = self._last_tick
        if last is not None and tick > last:
            if self._per_elapsed and tick - last > 1:
                self.bank.decay_all(self._alpha ** (tick - last))
            else:
                self.bank.decay_all()
        self._last_tick = tick
        nums = record.nums
        if self.transform is not None:
            nums = dimred.apply(self.transform, nums)
        return score_parts(tick, record.cats, nums, self.bank, self.hashers)

    def process(self, record: Record) -> list[tuple[Record, ScoreReport]]:
        if self._buffer is not None:
            self._buffer.add(record.nums)
            self._pending.append(record)
            if self._buffer.full:
                self.transform = dimred.fit_pca(self._buffer, self.config.dimred.out_dim)
                self._buffer = None
                backlog = [(r, self._score(r)) for r in self._pending]
                self._pending = []
                return backlog
            return []
        return [(record, self._score(record))]

    def finish(self) -> list[tuple[Record, ScoreReport]]:
        """Flush a short stream whose PCA bootstrap never filled.

        Fits on whatever was buffered (at least two records needed);
        replays the backlog so emitted scores still equal input records.
        """
        if self._buffer is None or not self._pending:
            return []
        out_dim = self.config.dimred.out_dim
        if len(self._pending) < max(2, out_dim):
            raise DataError(
                f"stream ended during dimensionality-reduction bootstrap "
                f"with {len(self._pending)} record(s); need at least "
                f"{max(2, out_dim)} to fit a transform"
            )
        self.transform = dimred.fit_pca_rows(self._buffer.matrix(), out_dim)
        self._buffer = None
        backlog = [(r, self._score(r)) for r in self._pending]
        self._pending = []
        return backlog

    def feature_names(self, schema: Schema | None = None) -> list[str]:
        if schema is not None and not self.reduced:
            return list(schema.categorical_names) + list(schema.numeric_names)
        if schema is not None:
            return list(schema.categorical_names) + [
                f"z{j}" for j in range(self.effective_num)
            ]
        return [f"c{j}" for j in range(self.n_cat)] + [
            f"z{j}" for j in range(self.effective_num)
        ]

    def sketch_bytes(self) -> int:
        return self.bank.nominal_bytes()


@dataclass
class ScoreRow:
    """One output line: arrival ordinal, tick, total score, top feature."""

    ordinal: int
    tick: int
    score: float
    top_feature: str
    label: bool | None = None
    record_term: float | None = None
    feature_scores: list[float] | None = None


def run(
    config: RunConfig,
    rows: Iterable[Sequence[str]],
    per_feature: bool = False,
) -> Iterator[ScoreRow]:
    """Score raw CSV rows (already split into fields, header excluded).

    Emits exactly one ScoreRow per input record, in input order. Parse
    failures carry the offending record's ordinal. Configuration problems
    surface here, before any record is touched.
    """
    config = config.validated()
    schema = config.schema
    parser = StreamParser(schema, config.tick, benign_tokens=config.benign_tokens)
    engine = StreamEngine(
        config, len(schema.categorical_names), len(schema.numeric_names)
    )
    names = engine.feature_names(schema)
    return _run_rows(engine, parser, rows, names, per_feature)


def _run_rows(
    engine: StreamEngine,
    parser: StreamParser,
    rows: Iterable[Sequence[str]],
    names: list[str],
    per_feature: bool,
) -> Iterator[ScoreRow]:
    ordinal = 0

    def to_row(record: Record, report: ScoreReport) -> ScoreRow:
        nonlocal ordinal
        row = ScoreRow(
            ordinal=ordinal,
            tick=record.tick,
            score=report.total,
            top_feature=names[report.top_feature] if names else "",
            label=record.label,
            record_term=report.record_term if per_feature else None,
            feature_scores=list(report.feature_terms) if per_feature else None,
        )
        ordinal += 1
        return row

    for raw in rows:
        record = parser.parse(raw)
        for rec, report in engine.process(record):
            yield to_row(rec, report)
    for rec, report in engine.finish():
        yield to_row(rec, report)


def run_csv(
    config: RunConfig,
    source,
    per_feature: bool = False,
) -> Iterator[ScoreRow]:
    """Like run(), but over a text file object containing CSV."""
    import csv as _csv

    reader = _csv.reader(source)
    rows = (row for i, row in enumerate(reader) if row and not (config.has_header and i == 0))
    return run(config, rows, per_feature=per_feature)


# ---------------------------------------------------------------------------
# benchmarks


@dataclass(frozen=True)
class BenchPoint:
    size: int
    records: int
    seconds: float


def _time_pass(
    config: RunConfig,
    parsed: Sequence[tuple[int, tuple[str, ...], tuple[float, ...]]],
    n_cat: int,
    n_num: int,
    repeats: int = 1,
    min_seconds: float = 0.0,
    max_repeats: int = 8,
) -> float:
    """Best-of-N wall time for one full scoring pass.

    Runs at least ``repeats`` times and keeps repeating until the cumulative
    measured time reaches ``min_seconds`` (up to ``max_repeats``), so short
    passes on noisy machines get extra samples. Engine construction is
    excluded; tick-boundary decay is included.
    """
    best = float("inf")
    spent = 0.0
    runs = 0
    while runs < repeats or (spent < min_seconds and runs < max_repeats):
        engine = StreamEngine(config, n_cat, n_num)
        bank, hashers = engine.bank, engine.hashers
        t0 = time.perf_counter()
        last = None
        for tick, cats, nums in parsed:
            if last is not None and tick > last:
                bank.decay_all()
            last = tick
            score_parts(tick, cats, nums, bank, hashers)
        elapsed = time.perf_counter() - t0
        best = min(best, elapsed)
        spent += elapsed
        runs += 1
    return best


def bench_records(
    config: RunConfig,
    parsed: Sequence[tuple[int, tuple[str, ...], tuple[float, ...]]],
    n_cat: int,
    n_num: int,
    sizes: Sequence[int],
    repeats: int = 1,
    warmup: bool = True,
    min_seconds: float = 0.0,
) -> list[BenchPoint]:
    """Wall time to score the first n records, for each n in sizes."""
    if max(sizes) > len(parsed):
        raise ValueError("input too small for the requested sweep")
    if warmup:
        _time_pass(config, parsed[: sizes[0]], n_cat, n_num)
    return [
        BenchPoint(n, n, _time_pass(config, parsed[:n], n_cat, n_num, repeats,
                                    min_seconds))
        for n in sizes
    ]


def bench_dims(
    config: RunConfig,
    parsed: Sequence[tuple[int, tuple[str, ...], tuple[float, ...]]],
    n_cat: int,
    dims: Sequence[int],
    n_records: int,
    repeats: int = 1,
    warmup: bool = True,
    min_seconds: float = 0.0,
) -> list[BenchPoint]:
    """Wall time at fixed record count, sweeping the numeric dimension."""
    window = parsed[:n_records]
    if not window:
        raise ValueError("no records to bench")
    if max(dims) > len(window[0][2]):
        raise ValueError(
            f"sweep needs {max(dims)} numeric dims, input has {len(window[0][2])}"
        )
    if warmup:
        sliced = [(t, c, n[: dims[0]]) for t, c, n in window]
        _time_pass(config, sliced, n_cat, dims[0])
    points = []
    for m in dims:
        sliced = [(t, c, n[:m]) for t, c, n in window]
        points.append(
            BenchPoint(m, n_records,
                       _time_pass(config, sliced, n_cat, m, repeats, min_seconds))
        )
    return points


def bench_copies(
    config: RunConfig,
    parsed: Sequence[tuple[int, tuple[str, ...], tuple[float, ...]]],
    n_cat: int,
    n_num: int,
    copies: Sequence[int],
    n_records: int,
    repeats: int = 1,
    warmup: bool = True,
    min_seconds: float = 0.0,
) -> list[BenchPoint]:
    """Wall time at fixed record count, sweeping the hash-copy count w."""
    window = parsed[:n_records]
    if warmup:
        _time_pass(config, window, n_cat, n_num)
    points = []
    for w in copies:
        cfg = replace(config, hash_copies=w)
        points.append(
            BenchPoint(w, n_records,
                       _time_pass(cfg, window, n_cat, n_num, repeats, min_seconds))
        )
    return points

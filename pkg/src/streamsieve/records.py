"""Records, schemas, and stream ingestion.

A stream entry is a ``Record``: an integer time tick plus the categorical
tokens and numeric values of its scoring columns. Columns are described by a
``Schema``; ticks are assigned by a ``TickPolicy``: either a dense 1-based
rank over distinct timestamp values, or a fixed number of records per tick
for datasets without timestamps.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence, TextIO

# Reserved token for empty categorical fields; scored like any other value.
MISSING_TOKEN = "∅"

# Tokens (lowercased) treated as the negative class when parsing labels.
# Everything else is positive. Covers 0/1, true/false, and the benign
# markers used by common intrusion-detection datasets.
DEFAULT_BENIGN_TOKENS = frozenset(
    {"0", "false", "no", "benign", "normal", "normal.", "-"}
)


class SchemaError(ValueError):
    """A schema violates one of its structural invariants."""


class DuplicateColumn(SchemaError):
    def __init__(self, names: Sequence[str]):
        super().__init__(f"duplicate column name(s): {', '.join(names)}")
        self.names = tuple(names)


class NoScoringColumns(SchemaError):
    def __init__(self) -> None:
        super().__init__("schema has no categorical or numeric columns to score")


class MultipleTimestampColumns(SchemaError):
    def __init__(self, names: Sequence[str]):
        super().__init__(f"more than one timestamp column: {', '.join(names)}")
        self.names = tuple(names)


class MultipleLabelColumns(SchemaError):
    def __init__(self, names: Sequence[str]):
        super().__init__(f"more than one label column: {', '.join(names)}")
        self.names = tuple(names)


class ParseError(ValueError):
    """A raw row cannot be turned into a Record."""


class FieldCountMismatch(ParseError):
    def __init__(self, expected: int, got: int, ordinal: int):
        super().__init__(
            f"record {ordinal}: expected {expected} fields, got {got}"
        )
        self.expected = expected
        self.got = got
        self.ordinal = ordinal


class NumericParseError(ParseError):
    def __init__(self, column: str, value: str, ordinal: int):
        super().__init__(
            f"record {ordinal}: column {column!r}: not a finite number: {value!r}"
        )
        self.column = column
        self.value = value
        self.ordinal = ordinal


class NonMonotonicTimestamp(ParseError):
    def __init__(self, value: str, ordinal: int):
        super().__init__(
            f"record {ordinal}: timestamp {value!r} reappears after later values"
        )
        self.value = value
        self.ordinal = ordinal


class ColumnKind(str, Enum):
    CATEGORICAL = "categorical"
    NUMERIC = "numeric"
    TIMESTAMP = "timestamp"
    LABEL = "label"
    IGNORE = "ignore"


@dataclass(frozen=True)
class Column:
    name: str
    kind: ColumnKind


@dataclass(frozen=True)
class Schema:
    """Ordered column descriptors for one stream."""

    columns: tuple[Column, ...]

    @staticmethod
    def of(*pairs: tuple[str, str]) -> "Schema":
        """Build a schema from (name, kind) pairs and validate it."""
        cols = tuple(Column(name, ColumnKind(kind)) for name, kind in pairs)
        return validate_schema(Schema(cols))

    def indices(self, kind: ColumnKind) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.columns) if c.kind is kind)

    @property
    def categorical_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns if c.kind is ColumnKind.CATEGORICAL)

    @property
    def numeric_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns if c.kind is ColumnKind.NUMERIC)

    @property
    def timestamp_index(self) -> int | None:
        idx = self.indices(ColumnKind.TIMESTAMP)
        return idx[0] if idx else None

    @property
    def label_index(self) -> int | None:
        idx = self.indices(ColumnKind.LABEL)
        return idx[0] if idx else None


def validate_schema(schema: Schema) -> Schema:
    """Return the schema unchanged if its invariants hold.

    Raises DuplicateColumn, NoScoringColumns, MultipleTimestampColumns or
    MultipleLabelColumns otherwise.
    """
    seen: dict[str, int] = {}
    dupes = []
    for col in schema.columns:
        seen[col.name] = seen.get(col.name, 0) + 1
        if seen[col.name] == 2:
            dupes.append(col.name)
    if dupes:
        raise DuplicateColumn(dupes)
    ts = [c.name for c in schema.columns if c.kind is ColumnKind.TIMESTAMP]
    if len(ts) > 1:
        raise MultipleTimestampColumns(ts)
    labels = [c.name for c in schema.columns if c.kind is ColumnKind.LABEL]
    if len(labels) > 1:
        raise MultipleLabelColumns(labels)
    if not schema.categorical_names and not schema.numeric_names:
        raise NoScoringColumns()
    return schema


@dataclass(frozen=True)
class TickPolicy:
    """How integer time ticks are derived for incoming records."""

    mode: str  # "every_n" | "from_timestamp"
    n: int = 1

    def __post_init__(self) -> None:
        if self.mode not in ("every_n", "from_timestamp"):
            raise ValueError(f"unknown tick policy mode: {self.mode!r}")
        if self.n < 1:
            raise ValueError("records-per-tick must be >= 1")

    @classmethod
    def every_n(cls, n: int) -> "TickPolicy":
        return cls("every_n", n)

    @classmethod
    def from_timestamp(cls) -> "TickPolicy":
        return cls("from_timestamp")


@dataclass(frozen=True)
class Record:
    """One parsed stream entry.

    ``cats`` holds one token per categorical column, ``nums`` one finite
    float per numeric column, both in schema order. ``label`` is ground
    truth for evaluation only; the scoring path never reads it.
    """

    tick: int
    cats: tuple[str, ...]
    nums: tuple[float, ...]
    label: bool | None = None


class TickTracker:
    """Dense 1-based ranks of distinct timestamp tokens, in arrival order.

    Raw timestamps are opaque keys: the first distinct value maps to tick 1,
    the next new value to tick 2, and so on. A value reappearing after a
    newer one would make ticks decrease and is rejected.
    """

    def __init__(self) -> None:
        self._ranks: dict[str, int] = {}
        self._last = 0

    def tick_for(self, token: str, ordinal: int = -1) -> int:
        rank = self._ranks.get(token)
        if rank is None:
            rank = len(self._ranks) + 1
            self._ranks[token] = rank
        elif rank < self._last:
            raise NonMonotonicTimestamp(token, ordinal)
        self._last = rank
        return rank


@dataclass
class ParseStats:
    """Counters for recoverable parse anomalies."""

    missing_numeric: int = 0
    missing_categorical: int = 0


def parse_record(
    row: Sequence[str],
    schema: Schema,
    policy: TickPolicy,
    seq: int,
    tracker: TickTracker | None = None,
    stats: ParseStats | None = None,
    benign_tokens: frozenset[str] = DEFAULT_BENIGN_TOKENS,
) -> Record:
    """Parse one raw CSV row into a Record.

    ``seq`` is the 0-based record ordinal. Under every_n the tick is
    ``1 + seq // n``; under from_timestamp a ``tracker`` must be supplied and
    carries the dense-rank state across calls. Empty categorical fields map
    to the reserved missing token; empty numeric fields map to 0.0 and bump
    ``stats.missing_numeric``.
    """
    if len(row) != len(schema.columns):
        raise FieldCountMismatch(len(schema.columns), len(row), seq)

    cats: list[str] = []
    nums: list[float] = []
    label: bool | None = None
    ts_token: str | None = None

    for value, col in zip(row, schema.columns):
        kind = col.kind
        if kind is ColumnKind.CATEGORICAL:
            token = value.strip()
            if not token:
                token = MISSING_TOKEN
                if stats is not None:
                    stats.missing_categorical += 1
            cats.append(token)
        elif kind is ColumnKind.NUMERIC:
            text = value.strip()
            if not text:
                nums.append(0.0)
                if stats is not None:
                    stats.missing_numeric += 1
                continue
            try:
                x = float(text)
            except ValueError:
                raise NumericParseError(col.name, value, seq) from None
            if not math.isfinite(x):
                raise NumericParseError(col.name, value, seq)
            nums.append(x)
        elif kind is ColumnKind.TIMESTAMP:
            ts_token = value.strip()
        elif kind is ColumnKind.LABEL:
            text = value.strip()
            if text:
                label = text.lower() not in benign_tokens
        # IGNORE columns are skipped

    if policy.mode == "every_n":
        tick = 1 + seq // policy.n
    else:
        if ts_token is None:
            raise ParseError(
                "tick policy needs a timestamp column but the schema has none"
            )
        if tracker is None:
            raise ValueError("from_timestamp parsing requires a TickTracker")
        tick = tracker.tick_for(ts_token, seq)

    return Record(tick=tick, cats=tuple(cats), nums=tuple(nums), label=label)


class StreamParser:
    """Stateful row parser: owns the tick tracker and warning counters."""

    def __init__(
        self,
        schema: Schema,
        policy: TickPolicy,
        benign_tokens: Iterable[str] | None = None,
    ):
        self.schema = validate_schema(schema)
        self.policy = policy
        self.tracker = TickTracker()
        self.stats = ParseStats()
        self.benign_tokens = (
            frozenset(t.lower() for t in benign_tokens)
            if benign_tokens is not None
            else DEFAULT_BENIGN_TOKENS
        )
        self._seq = 0

    def parse(self, row: Sequence[str]) -> Record:
        record = parse_record(
            row,
            self.schema,
            self.policy,
            self._seq,
            tracker=self.tracker,
            stats=self.stats,
            benign_tokens=self.benign_tokens,
        )
        self._seq += 1
        return record


def read_csv(
    source: TextIO | Iterable[str],
    schema: Schema,
    policy: TickPolicy,
    has_header: bool = True,
    benign_tokens: Iterable[str] | None = None,
) -> Iterator[Record]:
    """Stream Records from comma-separated text with optional header row."""
    parser = StreamParser(schema, policy, benign_tokens=benign_tokens)
    reader = csv.reader(source)
    for i, row in enumerate(reader):
        if has_header and i == 0:
            continue
        if not row:
            continue
        yield parser.parse(row)

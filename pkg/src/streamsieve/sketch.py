"""Decayed count-min sketches.

Each counted key family (the whole record, plus every scored feature) gets a
``DecayPair``: two w-row, b-column count matrices. ``total`` accumulates
forever; ``current`` is multiplied by the decay factor alpha at every tick
boundary instead of being reset, so recent ticks contribute with diminishing
weight. Point queries take the minimum across rows, the standard count-min
estimate: it never underestimates, and collisions can only inflate it.

Counts are floats because decay demands it. Memory is w*b*(d+1) cells,
fixed at construction, constant with respect to stream length.
"""

from __future__ import annotations

import struct
from typing import BinaryIO, Sequence

_SNAPSHOT_MAGIC = b"SSKT"
_SNAPSHOT_VERSION = 1


class BucketOutOfRange(IndexError):
    def __init__(self, bucket: int, b: int):
        super().__init__(f"bucket {bucket} outside [0, {b})")
        self.bucket = bucket
        self.b = b


class CountMatrix:
    """w x b grid of non-negative float counters.

    Rows are plain Python lists: single-cell reads and writes dominate the
    per-record path and list indexing beats array scalar access there.
    """

    __slots__ = ("w", "b", "rows")

    def __init__(self, w: int, b: int):
        if w < 1 or b < 1:
            raise ValueError("matrix needs at least one row and one column")
        self.w = w
        self.b = b
        self.rows: list[list[float]] = [[0.0] * b for _ in range(w)]

    def cell_count(self) -> int:
        return self.w * self.b

    def nominal_bytes(self) -> int:
        # 8 bytes per cell; the allocation never changes after construction.
        return self.cell_count() * 8


class DecayPair:
    """Twin count matrices: all-time totals and decayed current-tick counts."""

    __slots__ = ("total", "current", "alpha", "w", "b")

    def __init__(self, w: int, b: int, alpha: float):
        if not (0.0 < alpha < 1.0):
            raise ValueError(f"decay factor must be in (0, 1), got {alpha}")
        self.w = w
        self.b = b
        self.alpha = alpha
        self.total = CountMatrix(w, b)
        self.current = CountMatrix(w, b)

    def update(self, buckets: Sequence[int]) -> None:
        """Add one observation: increment row i at buckets[i] in both matrices."""
        b = self.b
        total_rows = self.total.rows
        current_rows = self.current.rows
        for i, bucket in enumerate(buckets):
            if not 0 <= bucket < b:
                raise BucketOutOfRange(bucket, b)
            total_rows[i][bucket] += 1.0
            current_rows[i][bucket] += 1.0

    def query(self, buckets: Sequence[int]) -> tuple[float, float]:
        """(total, current) count-min estimates: min over rows."""
        b = self.b
        total_rows = self.total.rows
        current_rows = self.current.rows
        s_hat = float("inf")
        a_hat = float("inf")
        for i, bucket in enumerate(buckets):
            if not 0 <= bucket < b:
                raise BucketOutOfRange(bucket, b)
            v = total_rows[i][bucket]
            if v < s_hat:
                s_hat = v
            v = current_rows[i][bucket]
            if v < a_hat:
                a_hat = v
        return s_hat, a_hat

    def update_query(self, buckets: Sequence[int]) -> tuple[float, float]:
        """Fused update-then-query pass; semantics identical to the pair.

        One traversal of the rows for the per-record hot loop.
        """
        b = self.b
        total_rows = self.total.rows
        current_rows = self.current.rows
        s_hat = float("inf")
        a_hat = float("inf")
        for i, bucket in enumerate(buckets):
            if not 0 <= bucket < b:
                raise BucketOutOfRange(bucket, b)
            row = total_rows[i]
            v = row[bucket] + 1.0
            row[bucket] = v
            if v < s_hat:
                s_hat = v
            row = current_rows[i]
            v = row[bucket] + 1.0
            row[bucket] = v
            if v < a_hat:
                a_hat = v
        return s_hat, a_hat

    def decay(self, factor: float | None = None) -> None:
        """Multiply every current cell by the decay factor; totals untouched."""
        f = self.alpha if factor is None else factor
        for row in self.current.rows:
            # conditional keeps zero cells as the shared 0.0 constant
            row[:] = [v * f if v else 0.0 for v in row]

    def nominal_bytes(self) -> int:
        return self.total.nominal_bytes() + self.current.nominal_bytes()


class SketchBank:
    """One record-level DecayPair plus one per scored feature."""

    def __init__(self, n_features: int, w: int, b: int, alpha: float):
        self.record_pair = DecayPair(w, b, alpha)
        self.feature_pairs = [DecayPair(w, b, alpha) for _ in range(n_features)]
        self.w = w
        self.b = b
        self.alpha = alpha

    def decay_all(self, factor: float | None = None) -> None:
        self.record_pair.decay(factor)
        for pair in self.feature_pairs:
            pair.decay(factor)

    def nominal_bytes(self) -> int:
        return self.record_pair.nominal_bytes() + sum(
            p.nominal_bytes() for p in self.feature_pairs
        )

    def dump_snapshot(self, fh: BinaryIO) -> None:
        """Debugging dump: versioned header, then row-major float64 cells."""
        pairs = [self.record_pair, *self.feature_pairs]
        fh.write(_SNAPSHOT_MAGIC)
        fh.write(struct.pack("<HHIId", _SNAPSHOT_VERSION, self.w, self.b,
                             len(pairs), self.alpha))
        for pair in pairs:
            for matrix in (pair.total, pair.current):
                for row in matrix.rows:
                    fh.write(struct.pack(f"<{len(row)}d", *row))


def load_snapshot(fh: BinaryIO) -> SketchBank:
    """Inverse of SketchBank.dump_snapshot."""
    magic = fh.read(4)
    if magic != _SNAPSHOT_MAGIC:
        raise ValueError("not a sketch snapshot (bad magic)")
    version, w, b, n_pairs, alpha = struct.unpack("<HHIId", fh.read(20))
    if version != _SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    bank = SketchBank(n_pairs - 1, w, b, alpha)
    pairs = [bank.record_pair, *bank.feature_pairs]
    for pair in pairs:
        for matrix in (pair.total, pair.current):
            for i in range(w):
                cells = struct.unpack(f"<{b}d", fh.read(8 * b))
                matrix.rows[i] = list(cells)
    return bank

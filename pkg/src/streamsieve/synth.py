"""Labeled synthetic multi-aspect streams with injected group anomalies.

Background traffic draws categorical tokens from a large vocabulary and
numeric values from a log-normal distribution (packet-size-like). An
anomaly block injects extra records over a span of ticks: their categorical
values come from a small dedicated key pool, their numerics cluster tightly
around a center, and they arrive at a multiple of the background per-tick
rate: the three signatures of a group anomaly (few repeated keys, numeric
similarity, sudden arrival).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .records import Schema

BACKGROUND_VOCABULARY = 1000
BACKGROUND_LOG_MEAN = 4.5
BACKGROUND_LOG_SIGMA = 1.0


@dataclass(frozen=True)
class AnomalyBlock:
    """One injected burst spanning [start_tick, end_tick] inclusive."""

    start_tick: int
    end_tick: int
    pool_size: int = 3
    rate_multiplier: float = 5.0
    center: float = 1000.0
    spread: float = 5.0

    def __post_init__(self) -> None:
        if self.end_tick < self.start_tick:
            raise ValueError("block end tick precedes start tick")
        if self.rate_multiplier <= 1.0:
            raise ValueError("rate multiplier must exceed 1")
        if self.pool_size < 1:
            raise ValueError("key pool must hold at least one value")

    @property
    def span(self) -> int:
        return self.end_tick - self.start_tick + 1


def synth_schema(n_cat_features: int, n_num_features: int) -> Schema:
    cols: list[tuple[str, str]] = [("tick", "timestamp")]
    cols += [(f"cat_{j}", "categorical") for j in range(n_cat_features)]
    cols += [(f"num_{j}", "numeric") for j in range(n_num_features)]
    cols.append(("label", "label"))
    return Schema.of(*cols)


def _validate_blocks(blocks: Sequence[AnomalyBlock], n_ticks: int) -> None:
    occupied: set[int] = set()
    for block in blocks:
        if block.start_tick < 1 or block.end_tick > n_ticks:
            raise ValueError(
                f"block ticks {block.start_tick}..{block.end_tick} outside "
                f"stream range 1..{n_ticks}"
            )
        ticks = set(range(block.start_tick, block.end_tick + 1))
        if occupied & ticks:
            raise ValueError("anomaly blocks overlap")
        occupied |= ticks


def generate(
    seed: int,
    n_records: int,
    n_cat_features: int,
    n_num_features: int,
    blocks: Sequence[AnomalyBlock] = (),
    n_ticks: int = 500,
) -> Iterator[list[str]]:
    """Yield CSV rows (tick, categorical..., numeric..., label).

    Exactly n_records rows come out: block records at rate_multiplier times
    the background per-tick rate during their span, background everywhere,
    interleaved within each tick. Labels are "1" exactly on block records.
    """
    if n_records < 1:
        raise ValueError("need at least one record")
    blocks = list(blocks)
    _validate_blocks(blocks, n_ticks)

    rng = np.random.default_rng(np.random.SeedSequence(seed))

    # Per-tick record budget: background rate r solves
    # n_records = n_ticks*r + sum(span * multiplier * r).
    weight = n_ticks + sum(b.span * b.rate_multiplier for b in blocks)
    rate = n_records / weight

    block_at: dict[int, AnomalyBlock] = {}
    for block in blocks:
        for t in range(block.start_tick, block.end_tick + 1):
            block_at[t] = block

    block_counts = {
        t: int(round(block_at[t].rate_multiplier * rate)) for t in block_at
    }
    n_block = sum(block_counts.values())
    n_background = n_records - n_block
    if n_background < n_ticks:
        raise ValueError("record budget too small for the requested blocks")
    base, extra = divmod(n_background, n_ticks)
    background_counts = {
        t: base + (1 if t <= extra else 0) for t in range(1, n_ticks + 1)
    }

    pools = {
        id(b): [
            [f"burst{bi}_f{j}_k{i}" for i in range(b.pool_size)]
            for j in range(n_cat_features)
        ]
        for bi, b in enumerate(blocks)
    }

    for tick in range(1, n_ticks + 1):
        rows: list[list[str]] = []
        n_bg = background_counts[tick]
        if n_bg:
            tokens = rng.integers(0, BACKGROUND_VOCABULARY, size=(n_bg, n_cat_features))
            values = rng.lognormal(
                BACKGROUND_LOG_MEAN, BACKGROUND_LOG_SIGMA, size=(n_bg, n_num_features)
            )
            for i in range(n_bg):
                row = [str(tick)]
                row += [f"u{tokens[i, j]:04d}" for j in range(n_cat_features)]
                row += [f"{values[i, j]:.6g}" for j in range(n_num_features)]
                row.append("0")
                rows.append(row)
        block = block_at.get(tick)
        if block is not None:
            n_blk = block_counts[tick]
            pool = pools[id(block)]
            choices = rng.integers(0, block.pool_size, size=(n_blk, n_cat_features))
            values = rng.normal(block.center, block.spread, size=(n_blk, n_num_features))
            for i in range(n_blk):
                row = [str(tick)]
                row += [pool[j][choices[i, j]] for j in range(n_cat_features)]
                row += [f"{values[i, j]:.6g}" for j in range(n_num_features)]
                row.append("1")
                rows.append(row)
        order = rng.permutation(len(rows))
        for idx in order:
            yield rows[idx]


def toy_stream() -> tuple[Schema, list[list[str]]]:
    """The 10-record two-IP demo stream: a burst of near-identical large
    records at times 4-5 inside ordinary background traffic."""
    schema = Schema.of(
        ("time", "timestamp"),
        ("src", "categorical"),
        ("dst", "categorical"),
        ("size", "numeric"),
        ("label", "label"),
    )
    rows = [
        ["1", "194.027.251.021", "194.027.251.021", "100", "0"],
        ["2", "172.016.113.105", "207.230.054.203", "80", "0"],
        ["4", "194.027.251.021", "192.168.001.001", "1000", "1"],
        ["4", "194.027.251.021", "192.168.001.001", "995", "1"],
        ["4", "194.027.251.021", "192.168.001.001", "1000", "1"],
        ["5", "194.027.251.021", "192.168.001.001", "990", "1"],
        ["5", "194.027.251.021", "194.027.251.021", "1000", "1"],
        ["5", "194.027.251.021", "194.027.251.021", "995", "1"],
        ["6", "194.027.251.021", "194.027.251.021", "100", "0"],
        ["7", "172.016.113.105", "207.230.054.203", "80", "0"],
    ]
    return schema, rows

"""Threshold-free evaluation: ROC-AUC, batch and over a growing prefix."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class DegenerateLabels(ValueError):
    def __init__(self) -> None:
        super().__init__("AUC needs at least one positive and one negative label")


def roc_auc(scores: Sequence[float], labels: Sequence[bool]) -> float:
    """Exact ROC-AUC via the rank statistic; tied scores contribute half.

    Equivalent to trapezoidal integration of the ROC curve and to the
    normalized Mann-Whitney U count of (positive, negative) pairs.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape[0] != labels.shape[0]:
        raise ValueError("scores and labels must have equal length")
    n_pos = int(labels.sum())
    n_neg = labels.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels()

    order = np.argsort(scores, kind="mergesort")
    sorted_scores = scores[order]
    ranks = np.empty(scores.shape[0], dtype=np.float64)
    i = 0
    n = scores.shape[0]
    while i < n:
        j = i
        while j + 1 < n and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        # average 1-based rank for the tie group [i, j]
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1

    rank_sum_pos = float(ranks[labels].sum())
    u = rank_sum_pos - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


@dataclass(frozen=True)
class StreamingPoint:
    prefix: int
    auc: float | None
    degenerate: bool


def streaming_auc(
    scores: Sequence[float],
    labels: Sequence[bool],
    every: int = 100_000,
) -> list[StreamingPoint]:
    """AUC over all records seen so far, after every `every` records.

    A final point over the whole stream is always included, so the last
    entry equals the batch AUC. Prefixes whose labels are all one class are
    flagged degenerate and carry no AUC value.
    """
    if every < 1:
        raise ValueError("interval must be >= 1")
    n = len(scores)
    cuts = list(range(every, n, every))
    if n > 0:
        cuts.append(n)
    points = []
    for cut in cuts:
        try:
            value = roc_auc(scores[:cut], labels[:cut])
            points.append(StreamingPoint(prefix=cut, auc=value, degenerate=False))
        except DegenerateLabels:
            points.append(StreamingPoint(prefix=cut, auc=None, degenerate=True))
    return points

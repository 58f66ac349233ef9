"""Chi-squared temporal anomaly scoring.

Each record produces d+1 non-negative terms: one for the whole-record
bucket and one per scored feature. A term contrasts the decayed
current-tick count a against the uniform-over-ticks expectation s/t:

    (a - s/t)^2 * t^2 / (s * (t - 1))

which is the two-category chi-squared statistic for "this tick" vs "all
past ticks". The record's score is the plain sum of the terms; the argmax
feature term names the attribute most responsible for the alarm.
"""

from __future__ import annotations

from dataclasses import dataclass

from .hashing import HasherBank
from .sketch import SketchBank


def chi2(a_hat: float, s_hat: float, t: int) -> float:
    """Chi-squared burst statistic; 0 when t <= 1 or s_hat == 0.

    Both guards cover points where the formula is undefined (zero
    denominator); zero reads as "no evidence of anomaly yet".
    """
    if t <= 1 or s_hat == 0.0:
        return 0.0
    dev = a_hat - s_hat / t
    return dev * dev * t * t / (s_hat * (t - 1))


@dataclass
class ScoreReport:
    """Scores for one record: total = record_term + sum(feature_terms)."""

    total: float
    record_term: float
    feature_terms: list[float]
    top_feature: int

    @property
    def anomaly_score(self) -> float:
        return self.total


def score_record(record, bank: SketchBank, hashers: HasherBank) -> ScoreReport:
    """Update all sketches with this record, then score the updated counts.

    The caller must already have applied tick-boundary decay for any
    transition this record triggers. The record counts itself: updates land
    before queries, so a and s include the current observation.
    """
    return score_parts(record.tick, record.cats, record.nums, bank, hashers)


def score_parts(
    t: int, cats, nums, bank: SketchBank, hashers: HasherBank
) -> ScoreReport:
    """score_record over the raw parts, for callers that transform nums.

    The chi-squared expression is inlined below (it runs d+1 times per
    record); chi2() remains the reference definition.
    """
    feature_buckets = hashers.feature_buckets(cats, nums)
    record_buckets = hashers.record_buckets(cats, nums)
    scorable = t > 1

    s_hat, a_hat = bank.record_pair.update_query(record_buckets)
    if scorable and s_hat != 0.0:
        dev = a_hat - s_hat / t
        record_term = dev * dev * t * t / (s_hat * (t - 1))
    else:
        record_term = 0.0

    feature_terms: list[float] = []
    append = feature_terms.append
    top = 0
    top_val = -1.0
    for j, buckets in enumerate(feature_buckets):
        s_hat, a_hat = bank.feature_pairs[j].update_query(buckets)
        if scorable and s_hat != 0.0:
            dev = a_hat - s_hat / t
            term = dev * dev * t * t / (s_hat * (t - 1))
        else:
            term = 0.0
        append(term)
        if term > top_val:
            top_val = term
            top = j

    return ScoreReport(
        total=record_term + sum(feature_terms),
        record_term=record_term,
        feature_terms=feature_terms,
        top_feature=top,
    )

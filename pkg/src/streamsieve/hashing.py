"""Locality-sensitive hashing of features and whole records.

Two hash families map stream values into ``b`` buckets:

* Per-feature hashing: categorical tokens go through a seeded linear hash
  over the Mersenne prime 2^61-1; numeric values go through a streaming
  log-bucketization (sign-preserving log transform, then min-max
  normalization against running extrema, then an even split into b buckets).

* Whole-record hashing: the categorical buckets are summed modulo b, the
  numeric subvector is hashed by signed random projection (one bit per
  Gaussian hyperplane, k = ceil(log2 b) bits), and the two parts are added
  modulo b. Similar records land in nearby buckets, which is what lets a
  burst of near-duplicate records pile up in the count sketches.

Token fingerprints use the 64-bit FNV-1a polynomial (offset basis
14695981039346656037, prime 1099511628211), so they are identical across
runs and platforms; independence between hash copies comes solely from the
seeded linear-hash coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

MERSENNE_P = (1 << 61) - 1

_FNV_OFFSET = 14695981039346656037
_FNV_PRIME = 1099511628211
_U64 = (1 << 64) - 1

# token -> fingerprint memo; cleared if it ever grows past the cap.
_FP_CACHE: dict[str, int] = {}
_FP_CACHE_MAX = 1 << 20


class DimensionMismatch(ValueError):
    """Input vector length disagrees with the hasher's expected dimension."""


def token_fingerprint(token: str) -> int:
    """Stable 64-bit FNV-1a fingerprint of a token (seed-independent)."""
    fp = _FP_CACHE.get(token)
    if fp is not None:
        return fp
    h = _FNV_OFFSET
    for byte in token.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _U64
    if len(_FP_CACHE) >= _FP_CACHE_MAX:
        _FP_CACHE.clear()
    _FP_CACHE[token] = h
    return h


@dataclass(frozen=True)
class LinearHasher:
    """Seeded linear hash ((a*key + c) mod p) mod b over p = 2^61 - 1."""

    a: int
    c: int
    b: int

    def __post_init__(self) -> None:
        if not (1 <= self.a < MERSENNE_P):
            raise ValueError("multiplier a must be in [1, p)")
        if not (0 <= self.c < MERSENNE_P):
            raise ValueError("offset c must be in [0, p)")
        if self.a % 2 == 0:
            raise ValueError("multiplier a must be odd")
        if self.b < 2:
            raise ValueError("bucket count must be >= 2")

    @classmethod
    def draw(cls, rng: np.random.Generator, b: int) -> "LinearHasher":
        a = int(rng.integers(0, MERSENNE_P // 2)) * 2 + 1
        c = int(rng.integers(0, MERSENNE_P))
        return cls(a=a, c=c, b=b)

    def bucket_of_key(self, key: int) -> int:
        return ((self.a * key + self.c) % MERSENNE_P) % self.b

    def bucket(self, token: str) -> int:
        return self.bucket_of_key(token_fingerprint(token))


def hash_categorical(hasher: LinearHasher, token: str) -> int:
    return hasher.bucket(token)


@dataclass
class NumericHashState:
    """Running extrema of log-transformed values for one numeric feature.

    The state is a property of the data, not of any hash copy, so one state
    per feature is shared by all sketch rows.
    """

    min_val: float = 0.0
    max_val: float = 0.0
    seen: bool = False

    def copy(self) -> "NumericHashState":
        return replace(self)


def _log_squash(x: float) -> float:
    # sign(x) * log(1 + |x|); equals the plain log transform for x >= 0.
    return math.copysign(math.log1p(abs(x)), x)


def hash_numeric(state: NumericHashState, x: float, b: int) -> int:
    """Bucketize one numeric value, folding it into the running min/max first.

    The value being hashed participates in the extrema it is normalized
    against. When max == min the bucket is 0. A value sitting exactly at the
    max normalizes to 1.0 and wraps to bucket 0 via the final mod.
    """
    r = _log_squash(x)
    if not state.seen:
        state.min_val = r
        state.max_val = r
        state.seen = True
    else:
        if r < state.min_val:
            state.min_val = r
        elif r > state.max_val:
            state.max_val = r
    span = state.max_val - state.min_val
    if span <= 0.0:
        return 0
    return int(((r - state.min_val) / span) * b) % b


@dataclass(frozen=True)
class GaussianProjection:
    """k Gaussian hyperplanes over p numeric dimensions, k = ceil(log2 b).

    Each output bit is 1 iff the scalar product with the corresponding
    hyperplane normal is strictly positive; the k bits concatenate into an
    integer with bit 1 (the first hyperplane) most significant.
    """

    vectors: np.ndarray  # shape (k, p)

    @classmethod
    def draw(cls, rng: np.random.Generator, b: int, p: int) -> "GaussianProjection":
        k = max(1, math.ceil(math.log2(b)))
        return cls(vectors=rng.standard_normal((k, p)))

    @property
    def k(self) -> int:
        return self.vectors.shape[0]

    @property
    def p(self) -> int:
        return self.vectors.shape[1]

    def bit_pattern(self, nums) -> int:
        """Integer whose bits are the signs of the k scalar products."""
        nums = np.asarray(nums, dtype=np.float64)
        if nums.shape[0] != self.p:
            raise DimensionMismatch(
                f"expected {self.p} numeric dims, got {nums.shape[0]}"
            )
        if self.p == 0:
            return 0
        bits = self.vectors @ nums > 0.0
        value = 0
        for bit in bits:
            value = (value << 1) | int(bit)
        return value


def hash_record(
    cats: tuple[str, ...],
    nums,
    hashers: list[LinearHasher],
    proj: GaussianProjection,
    b: int,
) -> int:
    """Joint bucket for one record: (categorical sum + projection bits) mod b."""
    if len(cats) != len(hashers):
        raise DimensionMismatch(
            f"expected {len(hashers)} categorical values, got {len(cats)}"
        )
    bucket_cat = 0
    for token, hasher in zip(cats, hashers):
        bucket_cat += hasher.bucket(token)
    return (bucket_cat + proj.bit_pattern(nums)) % b


class HasherBank:
    """All hash state for one pipeline: w independent copies over d features.

    Categorical hashers differ per copy (independent seeds); numeric min/max
    states are shared across copies. The record hash keeps its own
    categorical hashers and one Gaussian projection per copy, stacked into a
    single matrix so the per-record scalar products are one matvec.
    """

    def __init__(self, n_cat: int, n_num: int, w: int, b: int, seed: int):
        if w < 1:
            raise ValueError("need at least one hash copy")
        self.n_cat = n_cat
        self.n_num = n_num
        self.w = w
        self.b = b
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        self.feature_cat_hashers = [
            [LinearHasher.draw(rng, b) for _ in range(n_cat)] for _ in range(w)
        ]
        self.record_cat_hashers = [
            [LinearHasher.draw(rng, b) for _ in range(n_cat)] for _ in range(w)
        ]
        self.numeric_states = [NumericHashState() for _ in range(n_num)]
        self.projections = [GaussianProjection.draw(rng, b, n_num) for _ in range(w)]
        k = self.projections[0].k
        self._k = k
        # (w*k, p) stack for one-shot evaluation of every copy's hyperplanes.
        self._stacked = np.vstack([pr.vectors for pr in self.projections])
        self._powers = 1 << np.arange(k - 1, -1, -1, dtype=np.int64)

    def feature_buckets(self, cats: tuple[str, ...], nums) -> list[list[int]]:
        """Per-feature bucket lists, one bucket per copy, cats then nums.

        Numeric features have no per-copy randomness, so every copy shares
        the bucket produced by the (updated) min/max state. The numeric path
        inlines hash_numeric: this runs once per feature per record.
        """
        w = self.w
        buckets: list[list[int]] = []
        for j, token in enumerate(cats):
            fp = token_fingerprint(token)
            buckets.append(
                [self.feature_cat_hashers[i][j].bucket_of_key(fp) for i in range(w)]
            )
        b = self.b
        log1p = math.log1p
        copysign = math.copysign
        for state, x in zip(self.numeric_states, nums):
            r = copysign(log1p(abs(x)), x)
            if state.seen:
                if r < state.min_val:
                    state.min_val = r
                elif r > state.max_val:
                    state.max_val = r
            else:
                state.min_val = r
                state.max_val = r
                state.seen = True
            span = state.max_val - state.min_val
            bk = int((r - state.min_val) / span * b) % b if span > 0.0 else 0
            buckets.append([bk] * w)
        return buckets

    def record_buckets(self, cats: tuple[str, ...], nums) -> list[int]:
        """One record bucket per hash copy."""
        w = self.w
        b = self.b
        if self.n_num:
            dots = self._stacked @ np.asarray(nums, dtype=np.float64)
            bits = (dots > 0.0).reshape(w, self._k)
            patterns = bits @ self._powers
        else:
            patterns = np.zeros(w, dtype=np.int64)
        out = []
        for i in range(w):
            bucket_cat = 0
            row = self.record_cat_hashers[i]
            for j, token in enumerate(cats):
                bucket_cat += row[j].bucket(token)
            out.append((bucket_cat + int(patterns[i])) % b)
        return out

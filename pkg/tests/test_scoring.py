import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracle import ExactScorer
from streams import N_CAT, N_NUM, build_key_pool, find_collision_free_seed
from streamsieve import (
    Record,
    RunConfig,
    Schema,
    StreamEngine,
    StreamParser,
    TickPolicy,
    chi2,
    score_record,
)
from streamsieve.hashing import HasherBank
from streamsieve.sketch import SketchBank
from streamsieve.synth import toy_stream


class TestChi2:
    def test_tick_one_guard(self):
        assert chi2(5.0, 5.0, 1) == 0.0

    def test_zero_total_guard(self):
        assert chi2(0.0, 0.0, 7) == 0.0

    def test_observed_equals_expected(self):
        assert chi2(1.0, 2.0, 2) == 0.0

    def test_hand_computed_value(self):
        # (2 - 3/2)^2 * 4 / (3 * 1) = 1/3
        assert chi2(2.0, 3.0, 2) == pytest.approx(1.0 / 3.0, rel=1e-12)

    @given(st.floats(0, 1e6), st.floats(0, 1e6), st.integers(1, 10**6))
    @settings(max_examples=300)
    def test_non_negative(self, a, s, t):
        assert chi2(a, s, t) >= 0.0


def small_engine(n_cat=2, n_num=1, alpha=0.85, w=2, b=1024, seed=0):
    cols = [(f"c{j}", "categorical") for j in range(n_cat)]
    cols += [(f"n{j}", "numeric") for j in range(n_num)]
    schema = Schema.of(*cols)
    cfg = RunConfig(schema=schema, tick=TickPolicy.every_n(1), alpha=alpha,
                    buckets=b, hash_copies=w, seed=seed)
    return StreamEngine(cfg, n_cat, n_num)


class TestScoreRecord:
    def test_first_record_scores_zero(self):
        eng = small_engine()
        (_, report), = eng.process(Record(1, ("a", "b"), (5.0,)))
        assert report.total == 0.0

    def test_additivity_exact(self):
        eng = small_engine()
        rng = np.random.default_rng(0)
        for i in range(200):
            rec = Record(1 + i // 10, (f"t{rng.integers(5)}", "x"),
                         (float(rng.uniform(1, 100)),))
            (_, report), = eng.process(rec)
            assert report.total == report.record_term + sum(report.feature_terms)
            assert report.record_term >= 0.0
            assert all(term >= 0.0 for term in report.feature_terms)

    def test_top_feature_argmax_ties_lowest_index(self):
        bank = SketchBank(n_features=2, w=1, b=512, alpha=0.85)
        hashers = HasherBank(n_cat=2, n_num=0, w=1, b=512, seed=0)
        # identical token pattern in both features: terms tie, index 0 wins
        for tick in (1, 2, 2):
            report = score_record(Record(tick, ("k", "k"), ()), bank, hashers)
        assert report.feature_terms[0] == report.feature_terms[1]
        assert report.top_feature == 0

    def test_repeated_record_matches_geometric_series(self):
        # one identical record per tick: a follows the partial geometric sum
        # of alpha, s equals t, and every term keeps the same closed form
        alpha = 0.85
        eng = small_engine(alpha=alpha)
        totals = []
        a = 0.0
        for t in range(1, 201):
            a = a * alpha + 1.0  # decayed partial sum, matching the engine
            (_, report), = eng.process(Record(t, ("a", "b"), (7.0,)))
            expected_term = chi2(a, float(t), t)
            d_plus_1 = 4  # record + 2 categorical + 1 numeric
            assert report.total == pytest.approx(
                d_plus_1 * expected_term, rel=1e-9
            )
            totals.append(report.total)
        # no burst: the total approaches a constant instead of growing
        limit = 4 * (alpha / (1 - alpha)) ** 2
        assert totals[-1] < limit * 1.05
        assert totals[-1] == pytest.approx(limit * 200 / 199, rel=1e-3)

    def test_burst_sensitivity(self):
        # a rate jump at tick T must raise the record term versus tick T-1
        eng = small_engine(n_cat=1, n_num=1)
        last_report_at = {}
        for t in range(1, 31):
            for _ in range(3):
                (_, rep), = eng.process(Record(t, ("k",), (5.0,)))
            last_report_at[t] = rep
        for _ in range(15):
            (_, rep), = eng.process(Record(31, ("k",), (5.0,)))
        last_report_at[31] = rep
        assert last_report_at[31].record_term > last_report_at[30].record_term


class TestOracleEquivalence:
    def test_toy_stream_matches_exact_counts(self):
        # ten-record demo: engine equals the exact-dictionary scorer; the
        # record hash sees only the categorical part here because the lone
        # numeric column is positive (sign bits are scale-invariant)
        schema, rows = toy_stream()
        cfg = RunConfig(schema=schema, tick=TickPolicy.from_timestamp(),
                        alpha=0.85, buckets=1024, hash_copies=2, seed=0)
        parser = StreamParser(schema, cfg.tick)
        eng = StreamEngine(cfg, 2, 1)
        oracle = ExactScorer(2, 1, 1024, 0.85,
                             record_key=lambda cats, nums: tuple(cats))
        for row in rows:
            record = parser.parse(row)
            for rec, report in eng.process(record):
                total, rec_term, terms = oracle.score(rec.tick, rec.cats, rec.nums)
                assert report.total == pytest.approx(total, rel=1e-9)
                assert report.record_term == pytest.approx(rec_term, rel=1e-9)

    def test_collision_free_stream_matches_brute_force(self):
        # single-stream version of the acceptance criterion
        b = 8192
        keys = build_key_pool(stream_seed=0, n_keys=80)
        seed = find_collision_free_seed(keys, base_seed=0, b=b)
        cols = [(f"c{j}", "categorical") for j in range(N_CAT)]
        cols += [(f"n{j}", "numeric") for j in range(N_NUM)]
        schema = Schema.of(*cols)
        cfg = RunConfig(schema=schema, tick=TickPolicy.every_n(100),
                        alpha=0.85, buckets=b, hash_copies=1, seed=seed)
        eng = StreamEngine(cfg, N_CAT, N_NUM)
        oracle = ExactScorer(N_CAT, N_NUM, b, 0.85)
        rng = np.random.default_rng(17)
        for i, pick in enumerate(rng.integers(0, len(keys), 3000)):
            cats, nums = keys[pick]
            record = Record(1 + i // 100, cats, nums)
            (_, report), = eng.process(record)
            total, rec_term, terms = oracle.score(record.tick, cats, nums)
            for got, want in [(report.total, total),
                              (report.record_term, rec_term),
                              *zip(report.feature_terms, terms)]:
                assert got == pytest.approx(want, rel=1e-9, abs=1e-12)

    def test_per_elapsed_tick_decay_matches_oracle(self):
        cols = [("c0", "categorical"), ("n0", "numeric")]
        schema = Schema.of(*cols)
        cfg = RunConfig(schema=schema, tick=TickPolicy.every_n(1), alpha=0.6,
                        buckets=4096, hash_copies=1, seed=2,
                        decay_per_elapsed_tick=True)
        eng = StreamEngine(cfg, 1, 1)
        oracle = ExactScorer(1, 1, 4096, 0.6, per_elapsed=True)
        ticks = [1, 1, 2, 5, 5, 9, 20, 20, 21]
        for tick in ticks:
            record = Record(tick, ("k",), (3.0,))
            (_, report), = eng.process(record)
            total, _, _ = oracle.score(tick, record.cats, record.nums)
            assert report.total == pytest.approx(total, rel=1e-9, abs=1e-12)

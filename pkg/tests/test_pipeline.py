import numpy as np
import pytest

from oracle import ExactScorer
from streamsieve import (
    ConfigError,
    DataError,
    DimredConfig,
    Record,
    RunConfig,
    Schema,
    StreamEngine,
    TickPolicy,
    load_config,
    run,
    save_config,
    save_transform,
)
from streamsieve.dimred import apply, fit_pca_rows
from streamsieve.pipeline import bench_copies, bench_dims, bench_records
from streamsieve.synth import generate, synth_schema


def synth_rows(seed=0, n=600, n_cat=2, n_num=3, ticks=12):
    return list(generate(seed, n, n_cat, n_num, [], n_ticks=ticks))


def synth_config(n_cat=2, n_num=3, **overrides):
    schema = synth_schema(n_cat, n_num)
    base = dict(schema=schema, tick=TickPolicy.from_timestamp(), seed=1)
    base.update(overrides)
    return RunConfig(**base)


class TestRun:
    def test_empty_input_empty_output(self):
        assert list(run(synth_config(), [])) == []

    def test_bad_alpha_rejected_before_processing(self):
        exploding = iter(lambda: (_ for _ in ()).throw(RuntimeError), None)
        with pytest.raises(ConfigError):
            run(synth_config(alpha=1.5), exploding)

    def test_one_row_per_record_in_order(self):
        rows = synth_rows()
        out = list(run(synth_config(), rows))
        assert len(out) == len(rows)
        assert [r.ordinal for r in out] == list(range(len(rows)))
        ticks = [r.tick for r in out]
        assert ticks == sorted(ticks)

    def test_reproducible_bit_for_bit(self):
        rows = synth_rows()
        a = [(r.score, r.top_feature) for r in run(synth_config(), rows)]
        b = [(r.score, r.top_feature) for r in run(synth_config(), rows)]
        assert a == b

    def test_seed_changes_hashing(self):
        rows = synth_rows()
        a = [r.score for r in run(synth_config(seed=1), rows)]
        b = [r.score for r in run(synth_config(seed=2), rows)]
        assert a != b

    def test_labels_never_influence_scores(self):
        rows = synth_rows()
        flipped = [row[:-1] + ["1" if row[-1] == "0" else "0"] for row in rows]
        a = [r.score for r in run(synth_config(), rows)]
        b = [r.score for r in run(synth_config(), flipped)]
        assert a == b

    def test_top_feature_names(self):
        rows = synth_rows()
        names = {r.top_feature for r in run(synth_config(), rows)}
        allowed = {"cat_0", "cat_1", "num_0", "num_1", "num_2"}
        assert names <= allowed

    def test_per_feature_scores(self):
        rows = synth_rows(n=50)
        for row in run(synth_config(), rows, per_feature=True):
            assert row.feature_scores is not None
            assert len(row.feature_scores) == 5
            assert row.score == pytest.approx(
                row.record_term + sum(row.feature_scores)
            )


class TestDimredModes:
    def test_external_transform_equals_manual_prereduction(self):
        # scoring with an external transform must equal reducing the numeric
        # columns by hand and scoring the reduced stream with mode none
        rng = np.random.default_rng(0)
        transform = fit_pca_rows(rng.standard_normal((64, 3)) * [4, 2, 1], 2)
        rows = synth_rows(n=400)

        import tempfile, os
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "t.json")
            save_transform(transform, path)
            cfg = synth_config(
                dimred=DimredConfig(mode="external", out_dim=2,
                                    transform_path=path)
            )
            external = [r.score for r in run(cfg, rows)]

        reduced_rows = []
        for row in rows:
            nums = np.array([float(v) for v in row[3:6]])
            z = apply(transform, nums)
            reduced_rows.append(row[:3] + [repr(float(v)) for v in z] + row[6:])
        cfg_manual = synth_config(n_num=2)
        schema = synth_schema(2, 2)
        cfg_manual = RunConfig(schema=schema, tick=TickPolicy.from_timestamp(),
                               seed=1)
        manual = [r.score for r in run(cfg_manual, reduced_rows)]
        assert external == pytest.approx(manual, rel=1e-12)

    def test_pca_bootstrap_replays_everything(self):
        rows = synth_rows(n=700)
        cfg = synth_config(dimred=DimredConfig(mode="pca", out_dim=2))
        out = list(run(cfg, rows))
        assert len(out) == len(rows)
        assert [r.ordinal for r in out] == list(range(len(rows)))
        assert [r.tick for r in out] == sorted(r.tick for r in out)

    def test_single_pass_over_input(self):
        # a one-shot iterator suffices even with bootstrap replay: the
        # runner never rewinds its input
        rows = iter(synth_rows(n=400))
        cfg = synth_config(dimred=DimredConfig(mode="pca", out_dim=2))
        assert len(list(run(cfg, rows))) == 400

    def test_run_csv_respects_header_flag(self):
        import io

        from streamsieve import run_csv

        body = "".join(",".join(row) + "\n" for row in synth_rows(n=20))
        with_header = io.StringIO("tick,cat_0,cat_1,num_0,num_1,num_2,label\n" + body)
        assert len(list(run_csv(synth_config(), with_header))) == 20
        headerless = io.StringIO(body)
        cfg = synth_config(has_header=False)
        assert len(list(run_csv(cfg, headerless))) == 20

    def test_pca_bootstrap_shorter_stream_still_scores(self):
        # stream ends before the 256-record bootstrap: fit on what arrived
        rows = synth_rows(n=40)
        cfg = synth_config(dimred=DimredConfig(mode="pca", out_dim=2))
        out = list(run(cfg, rows))
        assert len(out) == 40

    def test_pca_bootstrap_too_short_to_fit(self):
        rows = [["1", "a", "b", "1.0", "2.0", "3.0", "0"]]
        cfg = synth_config(dimred=DimredConfig(mode="pca", out_dim=2))
        with pytest.raises(DataError):
            list(run(cfg, rows))

    def test_out_dim_larger_than_numeric_rejected(self):
        cfg = synth_config(dimred=DimredConfig(mode="pca", out_dim=9))
        with pytest.raises(ConfigError):
            list(run(cfg, synth_rows()))

    def test_external_mode_needs_path(self):
        cfg = synth_config(dimred=DimredConfig(mode="external"))
        with pytest.raises(ConfigError):
            list(run(cfg, synth_rows()))

    def test_reduced_feature_names(self):
        rows = synth_rows(n=300)
        cfg = synth_config(dimred=DimredConfig(mode="pca", out_dim=2))
        names = {r.top_feature for r in run(cfg, rows)}
        assert names <= {"cat_0", "cat_1", "z0", "z1"}

    def test_pca_reduction_feeds_reduced_values_to_hashes(self):
        # engine sketches must be sized for categorical + reduced dims
        cfg = synth_config(dimred=DimredConfig(mode="pca", out_dim=2))
        engine = StreamEngine(cfg, 2, 3)
        assert len(engine.bank.feature_pairs) == 4
        assert engine.hashers.projections[0].p == 2


class TestEngineDecay:
    def test_per_transition_vs_per_elapsed(self):
        schema = Schema.of(("c", "categorical"))
        ticks = [1, 3, 9, 9, 10]

        def totals(per_elapsed):
            cfg = RunConfig(schema=schema, tick=TickPolicy.every_n(1),
                            alpha=0.5, hash_copies=1, seed=0,
                            decay_per_elapsed_tick=per_elapsed)
            engine = StreamEngine(cfg, 1, 0)
            oracle = ExactScorer(1, 0, cfg.buckets, 0.5,
                                 per_elapsed=per_elapsed)
            out = []
            for t in ticks:
                (_, rep), = engine.process(Record(t, ("k",), ()))
                want, _, _ = oracle.score(t, ("k",), ())
                assert rep.total == pytest.approx(want, rel=1e-9)
                out.append(rep.total)
            return out

        assert totals(False) != totals(True)


class TestConfigFiles:
    def test_round_trip(self, tmp_path):
        cfg = synth_config(alpha=0.4, buckets=512, hash_copies=3, seed=9,
                           decay_per_elapsed_tick=True)
        path = tmp_path / "cfg.json"
        save_config(cfg, path)
        loaded = load_config(path)
        assert loaded == cfg

    def test_missing_schema_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text('{"alpha": 0.5}')
        with pytest.raises(ConfigError):
            load_config(path)

    def test_bad_alpha_rejected(self, tmp_path):
        cfg = synth_config()
        path = tmp_path / "cfg.json"
        save_config(cfg, path)
        doc = path.read_text().replace("0.85", "1.85")
        path.write_text(doc)
        with pytest.raises(ConfigError):
            load_config(path)

    def test_defaults_match_operating_point(self):
        cfg = synth_config()
        assert cfg.alpha == 0.85
        assert cfg.buckets == 1024
        assert cfg.hash_copies == 2
        assert cfg.dimred.out_dim == 12
        assert cfg.dimred.bootstrap == 256


class TestBench:
    def _parsed(self, n=3000, n_cat=1, n_num=12):
        from streamsieve.records import StreamParser

        schema = synth_schema(n_cat, n_num)
        parser = StreamParser(schema, TickPolicy.from_timestamp())
        rows = generate(5, n, n_cat, n_num, [], n_ticks=10)
        return [(r.tick, r.cats, r.nums) for r in map(parser.parse, rows)]

    def test_records_sweep_counts(self):
        parsed = self._parsed()
        cfg = synth_config(n_cat=1, n_num=12)
        pts = bench_records(cfg, parsed, 1, 12, sizes=[500, 1000, 2000])
        assert [p.size for p in pts] == [500, 1000, 2000]
        assert all(p.seconds > 0 for p in pts)

    def test_records_sweep_requires_enough_input(self):
        parsed = self._parsed(n=100)
        cfg = synth_config(n_cat=1, n_num=12)
        with pytest.raises(ValueError):
            bench_records(cfg, parsed, 1, 12, sizes=[500])

    def test_dims_sweep_validates(self):
        parsed = self._parsed()
        cfg = synth_config(n_cat=1, n_num=12)
        with pytest.raises(ValueError):
            bench_dims(cfg, parsed, 1, dims=[10, 20], n_records=100)
        pts = bench_dims(cfg, parsed, 1, dims=[4, 8, 12], n_records=500)
        assert [p.size for p in pts] == [4, 8, 12]

    def test_copies_sweep(self):
        parsed = self._parsed(n=800)
        cfg = synth_config(n_cat=1, n_num=12)
        pts = bench_copies(cfg, parsed, 1, 12, copies=[1, 2], n_records=500)
        assert [p.size for p in pts] == [1, 2]


class TestMemory:
    def test_sketch_footprint_constant_in_stream_length(self):
        cfg = synth_config()
        sizes = []
        for n in (1000, 10_000):
            engine = StreamEngine(cfg, 2, 3)
            before = engine.sketch_bytes()
            for row in synth_rows(n=n):
                pass
            from streamsieve.records import StreamParser

            parser = StreamParser(cfg.schema, cfg.tick)
            for raw in synth_rows(n=n):
                engine.process(parser.parse(raw))
            assert engine.sketch_bytes() == before
            sizes.append(engine.sketch_bytes())
        assert sizes[0] == sizes[1]

import math
import os

import numpy as np
import pytest

from okp.core import ConfigError, DataError
from okp.harness import (
    RunRecord,
    SweepConfig,
    cdf,
    empirical_cr,
    load_instance,
    parse_sweep_config,
    read_meta,
    read_records,
    report_cdf,
    run_sweep,
    write_meta,
    write_records,
)
from okp.instgen import GenSpec

from conftest import inst


class TestEmpiricalCr:
    def test_basic(self):
        assert empirical_cr(2.0, 6.0) == 3.0

    def test_perfect(self):
        assert empirical_cr(5.0, 5.0) == 1.0

    def test_zero_opt_is_one(self):
        assert empirical_cr(0.0, 0.0) == 1.0

    def test_zero_profit_is_inf(self):
        assert empirical_cr(0.0, 3.0) == math.inf

    def test_negative_rejected(self):
        with pytest.raises(DataError):
            empirical_cr(-1.0, 3.0)
        with pytest.raises(DataError):
            empirical_cr(1.0, -3.0)


class TestCdf:
    def test_simple(self):
        assert cdf([3.0, 1.0, 2.0]) == [(1.0, 1 / 3), (2.0, 2 / 3), (3.0, 1.0)]

    def test_duplicates_collapse_to_last(self):
        assert cdf([2.0, 2.0, 5.0, 2.0]) == [(2.0, 0.75), (5.0, 1.0)]

    def test_single(self):
        assert cdf([7.0]) == [(7.0, 1.0)]

    def test_inf_sorts_last(self):
        got = cdf([math.inf, 1.0])
        assert got == [(1.0, 0.5), (math.inf, 1.0)]

    def test_empty_rejected(self):
        with pytest.raises(ConfigError):
            cdf([])

    def test_nan_rejected(self):
        with pytest.raises(DataError):
            cdf([1.0, math.nan])


class TestSweepConfig:
    def test_instances_and_generator_conflict(self):
        with pytest.raises(ConfigError):
            SweepConfig(
                algorithms=("ta",),
                instances=("a.csv",),
                generator=GenSpec("powerlaw"),
                count=2,
            )

    def test_needs_some_source(self):
        with pytest.raises(ConfigError):
            SweepConfig(algorithms=("ta",))

    def test_generator_needs_count(self):
        with pytest.raises(ConfigError):
            SweepConfig(algorithms=("ta",), generator=GenSpec("powerlaw"))

    def test_algorithms_validated_up_front(self):
        with pytest.raises(ConfigError):
            SweepConfig(algorithms=("warp",), instances=("a.csv",))

    def test_predictions_validated_up_front(self):
        with pytest.raises(ConfigError):
            SweepConfig(
                algorithms=("ta",), predictions=("banana",), instances=("a.csv",)
            )


def write_config(tmp_path, text, name="sweep.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


class TestParseSweepConfig:
    def test_generator_config(self, tmp_path):
        path = write_config(
            tmp_path,
            """
            # a small sweep
            algorithms = ta, ppa
            predictions = exact
            generator = powerlaw
            count = 3
            seed = 42
            n = 50                  # generator parameter
            weight_scale = 0.1
            """,
        )
        cfg = parse_sweep_config(path)
        assert cfg.algorithms == ("ta", "ppa")
        assert cfg.predictions == ("exact",)
        assert cfg.generator.kind == "powerlaw"
        assert cfg.generator.seed == 42
        assert cfg.generator.params == {"n": "50", "weight_scale": "0.1"}
        assert cfg.count == 3
        assert cfg.seed == 42

    def test_instance_paths_resolve_against_config_dir(self, tmp_path):
        sub = tmp_path / "cfgs"
        sub.mkdir()
        path = write_config(sub, "algorithms = ta\ninstances = ../a.csv, b.csv\n")
        cfg = parse_sweep_config(path)
        assert cfg.instances[0] == os.path.join(str(sub), "../a.csv")
        assert cfg.instances[1] == os.path.join(str(sub), "b.csv")

    def test_absolute_paths_kept(self, tmp_path):
        path = write_config(tmp_path, "algorithms = ta\ninstances = /data/x.csv\n")
        assert parse_sweep_config(path).instances == ("/data/x.csv",)

    def test_out_dir_resolves(self, tmp_path):
        path = write_config(
            tmp_path, "algorithms = ta\ninstances = a.csv\nout = results\n"
        )
        assert parse_sweep_config(path).out_dir == os.path.join(str(tmp_path), "results")

    def test_params_without_generator_rejected(self, tmp_path):
        path = write_config(tmp_path, "algorithms = ta\ninstances = a.csv\nn = 50\n")
        with pytest.raises(ConfigError, match="unknown keys"):
            parse_sweep_config(path)

    def test_malformed_line_rejected(self, tmp_path):
        path = write_config(tmp_path, "algorithms = ta\njust some words\n")
        with pytest.raises(ConfigError, match=":2:"):
            parse_sweep_config(path)

    def test_bad_count_rejected(self, tmp_path):
        path = write_config(
            tmp_path, "algorithms = ta\ngenerator = powerlaw\ncount = few\n"
        )
        with pytest.raises(ConfigError, match="count"):
            parse_sweep_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_sweep_config(str(tmp_path / "none.cfg"))


class TestMetaSidecar:
    def test_round_trip(self, tmp_path):
        path = str(tmp_path / "x.meta")
        write_meta(path, {"kind": "powerlaw", "lo": repr(1.0), "hi": repr(1000.0)})
        meta = read_meta(path)
        assert meta["kind"] == "powerlaw"
        assert float(meta["lo"]) == 1.0

    def test_missing_file_is_empty(self, tmp_path):
        assert read_meta(str(tmp_path / "none.meta")) == {}


class TestLoadInstance:
    def test_bounds_from_sidecar(self, tmp_path):
        ins = inst([(5.0, 0.5), (2.0, 0.5)])
        path = str(tmp_path / "i.csv")
        ins.to_csv(path)
        write_meta(path + ".meta", {"lo": "1.0", "hi": "10.0"})
        back = load_instance(path)
        assert back.bounds == (1.0, 10.0)

    def test_bounds_fall_back_to_observed(self, tmp_path):
        ins = inst([(5.0, 0.5), (2.0, 0.5)])
        path = str(tmp_path / "i.csv")
        ins.to_csv(path)
        back = load_instance(path)
        assert back.bounds == (2.0, 5.0)

    def test_zero_value_skips_fallback(self, tmp_path):
        ins = inst([(0.0, 0.5), (2.0, 0.5)])
        path = str(tmp_path / "i.csv")
        ins.to_csv(path)
        assert load_instance(path).bounds is None

    def test_bad_sidecar_bounds(self, tmp_path):
        ins = inst([(5.0, 0.5)])
        path = str(tmp_path / "i.csv")
        ins.to_csv(path)
        write_meta(path + ".meta", {"lo": "one", "hi": "10"})
        with pytest.raises(DataError):
            load_instance(path)


def small_config(**over):
    base = dict(
        algorithms=("ta", "ppa"),
        predictions=("exact", "point:5"),
        generator=GenSpec("powerlaw", seed=3, params={"n": "60"}),
        count=4,
        seed=3,
    )
    base.update(over)
    return SweepConfig(**base)


class TestRunSweep:
    def test_grid_shape_and_order(self):
        records = run_sweep(small_config())
        assert len(records) == 4 * 2 * 2
        # instances outermost, then algorithms, then predictions
        assert [r.instance_id for r in records[:4]] == ["powerlaw-00000"] * 4
        assert [r.algorithm for r in records[:4]] == ["ta", "ta", "ppa", "ppa"]
        assert [r.prediction for r in records[:4]] == [
            "exact",
            "point:5",
            "exact",
            "point:5",
        ]

    def test_records_are_complete(self):
        for rec in run_sweep(small_config()):
            assert rec.error == ""
            assert math.isfinite(rec.profit)
            assert rec.ratio >= 1.0 - 1e-12
            assert 0.0 <= rec.utilization <= 1.0 + 1e-9
            assert rec.opt_profit > 0.0

    def test_no_prediction_label(self):
        records = run_sweep(small_config(algorithms=("ta",), predictions=()))
        assert all(r.prediction == "none" for r in records)

    def test_cell_failure_becomes_error_row(self):
        # ipa with a point prediction of 0 is a degenerate interval
        records = run_sweep(
            small_config(algorithms=("ipa",), predictions=("point:0",))
        )
        assert len(records) == 4
        assert all(r.error.startswith("ConfigError") for r in records)
        assert all(math.isnan(r.profit) for r in records)

    def test_serial_and_parallel_agree_exactly(self):
        serial = run_sweep(small_config(parallelism=1))
        parallel = run_sweep(small_config(parallelism=3))
        assert serial == parallel

    def test_family_generator_rejected(self):
        cfg = small_config(
            generator=GenSpec("pair", params={"omegahat": "0.5", "hi": "100"}),
            predictions=(),
        )
        with pytest.raises(ConfigError, match="family"):
            run_sweep(cfg)

    def test_explicit_instances(self, tmp_path):
        a = inst([(5.0, 0.5), (2.0, 0.8)])
        pa = str(tmp_path / "a.csv")
        a.to_csv(pa)
        cfg = SweepConfig(algorithms=("ppa",), predictions=("exact",), instances=(pa,))
        records = run_sweep(cfg)
        assert len(records) == 1
        assert records[0].instance_id == "a.csv"
        assert records[0].error == ""

    def test_randomized_predictions_reproducible(self):
        cfg = small_config(predictions=("interval-width:20", "untrusted:0.5:point"))
        assert run_sweep(cfg) == run_sweep(cfg)

    def test_prediction_draw_independent_of_algorithm_list(self):
        # the drawn prediction belongs to the (instance, prediction)
        # cell, so adding algorithms to the sweep must not change it
        both = run_sweep(small_config(predictions=("untrusted:0.5:point",)))
        solo = run_sweep(
            small_config(algorithms=("ppa",), predictions=("untrusted:0.5:point",))
        )
        ppa_rows = [r for r in both if r.algorithm == "ppa"]
        assert ppa_rows == solo


class TestRecordsIo:
    def records(self):
        return run_sweep(small_config())

    def test_round_trip_exact(self, tmp_path):
        records = self.records()
        path = str(tmp_path / "records.csv")
        write_records(records, path)
        assert read_records(path) == records

    def test_inf_and_nan_round_trip(self, tmp_path):
        rec = RunRecord(
            instance_id="x",
            algorithm="ta",
            prediction="none",
            profit=0.0,
            opt_profit=1.0,
            ratio=math.inf,
            utilization=math.nan,
            vhat=1.0,
            omegahat=2.0,
            error="boom",
        )
        path = str(tmp_path / "records.csv")
        write_records([rec], path)
        back = read_records(path)[0]
        assert back.ratio == math.inf
        assert math.isnan(back.utilization)
        assert back.error == "boom"

    def test_header_validated(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(DataError, match="not a sweep records"):
            read_records(str(p))

    def test_column_count_validated(self, tmp_path):
        path = str(tmp_path / "records.csv")
        write_records(self.records()[:1], path)
        with open(path, "a") as fh:
            fh.write("x,ta,none,1.0\n")
        with pytest.raises(DataError, match=":3:"):
            read_records(path)


class TestReportCdf:
    def test_groups_in_first_seen_order(self):
        records = run_sweep(small_config())
        rows = report_cdf(records)
        keys = []
        for alg, pred, _, _ in rows:
            if (alg, pred) not in keys:
                keys.append((alg, pred))
        assert keys == [
            ("ta", "exact"),
            ("ta", "point:5"),
            ("ppa", "exact"),
            ("ppa", "point:5"),
        ]

    def test_cdf_ends_at_one(self):
        rows = report_cdf(run_sweep(small_config()))
        last = {}
        for alg, pred, ratio, frac in rows:
            last[(alg, pred)] = frac
        assert all(f == 1.0 for f in last.values())

    def test_error_rows_excluded(self):
        records = run_sweep(
            small_config(algorithms=("ipa",), predictions=("point:0",))
        )
        assert report_cdf(records) == []

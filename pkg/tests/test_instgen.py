import math

import numpy as np
import pytest
from scipy import integrate, stats

from okp.core import ConfigError, IntervalPrediction, PointPrediction
from okp.instgen import (
    GenSpec,
    bounded_powerlaw,
    gen_integral_lb,
    gen_interval_lb,
    gen_omegahat,
    gen_pair,
    gen_powerlaw,
    gen_ramp,
    gen_three_batch,
    generate,
    make_prediction,
    parse_prediction,
    substream,
)
from okp.offline import critical_value


class TestSubstream:
    def test_reproducible(self):
        a = substream(42, 7).random(16)
        b = substream(42, 7).random(16)
        assert (a == b).all()

    def test_index_changes_stream(self):
        a = substream(42, 0).random(16)
        b = substream(42, 1).random(16)
        assert not (a == b).all()

    def test_seed_changes_stream(self):
        a = substream(1, 0).random(16)
        b = substream(2, 0).random(16)
        assert not (a == b).all()

    def test_nearby_seeds_uncorrelated(self):
        # counter-mode key derivation: adjacent seeds must not produce
        # visibly related streams
        a = substream(100, 0).random(4096)
        b = substream(101, 0).random(4096)
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.05


class TestBoundedPowerlaw:
    def test_range(self):
        x = bounded_powerlaw(substream(0), 2.0, 1.0, 1000.0, 10000)
        assert x.min() >= 1.0
        assert x.max() <= 1000.0

    def test_degenerate_range(self):
        x = bounded_powerlaw(substream(0), 2.0, 5.0, 5.0, 10)
        assert (x == 5.0).all()

    def test_rejects_bad_parameters(self):
        with pytest.raises(ConfigError):
            bounded_powerlaw(substream(0), 2.0, 0.0, 1.0, 4)
        with pytest.raises(ConfigError):
            bounded_powerlaw(substream(0), 2.0, 2.0, 1.0, 4)
        with pytest.raises(ConfigError):
            bounded_powerlaw(substream(0), 0.0, 1.0, 2.0, 4)

    def test_distribution_matches_analytic_cdf(self):
        a, lo, hi = 2.0, 1.0, 1000.0
        x = bounded_powerlaw(substream(123), a, lo, hi, 20000)

        def cdf(t):
            t = np.clip(t, lo, hi)
            return (1.0 - (lo / t) ** a) / (1.0 - (lo / hi) ** a)

        d, p = stats.kstest(x, cdf)
        assert p > 1e-3  # seeded draw, not a flaky bound

    def test_mean_matches_numeric_integral(self):
        a, lo, hi = 2.0, 1.0, 1000.0
        norm = 1.0 - (lo / hi) ** a

        def density(t):
            return a * lo**a * t ** (-a - 1.0) / norm

        want, _ = integrate.quad(lambda t: t * density(t), lo, hi)
        x = bounded_powerlaw(substream(7), a, lo, hi, 200000)
        assert x.mean() == pytest.approx(want, abs=0.05)


class TestGenPowerlaw:
    def test_shape_and_bounds(self):
        ins = gen_powerlaw(n=500, seed=1)
        assert ins.n == 500
        assert ins.bounds == (1.0, 1000.0)
        assert ins.values.min() >= 1.0
        assert ins.values.max() <= 1000.0

    def test_weights_scaled_to_max(self):
        ins = gen_powerlaw(n=500, seed=1, weight_scale=0.07)
        assert ins.weights.max() == pytest.approx(0.07, rel=1e-15)
        assert ins.weights.min() > 0.0

    def test_deterministic(self):
        a = gen_powerlaw(n=100, seed=5, index=3)
        b = gen_powerlaw(n=100, seed=5, index=3)
        assert (a.values == b.values).all()
        assert (a.weights == b.weights).all()

    def test_index_varies(self):
        a = gen_powerlaw(n=100, seed=5, index=0)
        b = gen_powerlaw(n=100, seed=5, index=1)
        assert not (a.values == b.values).all()

    def test_constant_weight(self):
        ins = gen_powerlaw(n=50, seed=2, constant_weight=1e-3)
        assert (ins.weights == 1e-3).all()

    def test_value_grid_rounds_and_stays_in_range(self):
        ins = gen_powerlaw(n=2000, seed=3, value_grid=1.0)
        assert np.allclose(ins.values, np.round(ins.values))
        assert ins.values.min() >= 1.0
        assert ins.values.max() <= 1000.0

    def test_value_grid_fattens_tie_class(self):
        # integer values pile weight onto the critical value; continuous
        # values leave the tie class a single boundary item
        smooth = critical_value(gen_powerlaw(n=1000, seed=9))
        gridded = critical_value(gen_powerlaw(n=1000, seed=9, value_grid=1.0))
        assert gridded.omegahat > smooth.omegahat * 5.0

    def test_rejects_bad_parameters(self):
        with pytest.raises(ConfigError):
            gen_powerlaw(n=0, seed=0)
        with pytest.raises(ConfigError):
            gen_powerlaw(n=10, seed=0, weight_scale=0.0)
        with pytest.raises(ConfigError):
            gen_powerlaw(n=10, seed=0, weight_scale=1.5)
        with pytest.raises(ConfigError):
            gen_powerlaw(n=10, seed=0, value_grid=-1.0)


class TestGenPair:
    def test_structure(self):
        first, second = gen_pair(1.0, 1e6, epsilon=1e-3)
        assert first.n == 1
        assert second.n == 2
        assert first.bounds == (1.0, 1e6)
        assert list(second.values) == [1.0, 1e6]
        assert second.weights[1] == pytest.approx(0.999, rel=1e-15)

    def test_optimum_oracles(self):
        # by hand: first holds one unit at value 1; second packs the
        # big item plus epsilon of the small one
        first, second = gen_pair(1.0, 1e6, epsilon=1e-3)
        assert critical_value(first).opt_profit == pytest.approx(1.0, rel=1e-12)
        assert critical_value(second).opt_profit == pytest.approx(
            999000.001, rel=1e-12
        )

    def test_rejects_bad_parameters(self):
        with pytest.raises(ConfigError):
            gen_pair(0.0, 10.0)
        with pytest.raises(ConfigError):
            gen_pair(1.5, 10.0)
        with pytest.raises(ConfigError):
            gen_pair(0.5, 10.0, epsilon=1.0)


class TestGenRamp:
    def test_exact_multiple(self):
        ins = gen_ramp(5.0, 1.0, 9.0, batches=4, per_batch=3)
        # step 2: levels 1, 3, 5
        assert ins.n == 9
        assert list(ins.values[::3]) == [1.0, 3.0, 5.0]
        assert (ins.weights == ins.weights[0]).all()
        assert ins.weights[0] == pytest.approx(1.0 / 3.0, rel=1e-15)

    def test_rounds_up_between_levels(self):
        ins = gen_ramp(5.5, 1.0, 9.0, batches=4, per_batch=2)
        # 5.5 sits between levels, so the ramp tops out one step above
        assert list(ins.values[::2]) == [1.0, 3.0, 5.0, 7.0]

    def test_snap_absorbs_float_noise(self):
        # x/step lands a hair above an integer; must not add a level
        ins = gen_ramp(1.0 + 2.0 * (0.1 + 1e-12), 1.0, 2.0, batches=10, per_batch=1)
        assert ins.n == 3

    def test_full_ramp_reaches_hi(self):
        ins = gen_ramp(9.0, 1.0, 9.0, batches=4, per_batch=2)
        assert ins.values.max() == 9.0
        assert ins.n == 10

    def test_values_nondecreasing(self):
        ins = gen_ramp(700.0, 1.0, 1000.0, batches=500, per_batch=3)
        assert (np.diff(ins.values) >= 0.0).all()

    def test_each_level_weighs_one_unit(self):
        ins = gen_ramp(5.0, 1.0, 9.0, batches=4, per_batch=3)
        assert ins.total_weight == pytest.approx(3.0, rel=1e-12)

    def test_bounds_override(self):
        ins = gen_ramp(5.0, 1.0, 9.0, batches=4, per_batch=1, bounds_hi=100.0)
        assert ins.bounds == (1.0, 100.0)

    def test_rejects_target_outside_range(self):
        with pytest.raises(ConfigError):
            gen_ramp(0.5, 1.0, 9.0, batches=4, per_batch=1)
        with pytest.raises(ConfigError):
            gen_ramp(10.0, 1.0, 9.0, batches=4, per_batch=1)


class TestGenIntervalLb:
    def test_structure(self):
        plain, spiked = gen_interval_lb(1.0, 10.0, 100.0, m=5)
        assert plain.n == 5 * 5 + 5  # m levels of m items, plus the snap level
        assert spiked.n == plain.n + 1
        assert spiked.values[-1] == 100.0
        assert spiked.weights[-1] == pytest.approx(0.999, rel=1e-15)
        assert plain.bounds == (1.0, 100.0)
        assert spiked.bounds == (1.0, 100.0)

    def test_rejects_bad_order(self):
        with pytest.raises(ConfigError):
            gen_interval_lb(1.0, 100.0, 10.0, m=5)


class TestGenThreeBatch:
    def test_structure(self):
        fam = gen_three_batch(1.0, 2.0, 5.0, 100.0, per_batch=4)
        assert fam.one.n == 4
        assert fam.two.n == 7
        assert fam.full.n == 15
        assert set(fam.one.values) == {1.0}
        assert set(fam.two.values) == {1.0, 2.0}
        assert set(fam.full.values) == {1.0, 2.0, 5.0}
        assert (fam.full.weights == 0.25).all()

    def test_prefix_property(self):
        fam = gen_three_batch(1.0, 2.0, 5.0, 100.0, per_batch=4)
        assert (fam.full.values[: fam.two.n] == fam.two.values).all()
        assert (fam.two.values[: fam.one.n] == fam.one.values).all()

    def test_batch_weights(self):
        # one unit at lo, just under one at a*lo, two units at b*lo
        fam = gen_three_batch(1.0, 2.0, 5.0, 100.0, per_batch=4)
        assert fam.one.total_weight == pytest.approx(1.0)
        assert fam.two.total_weight == pytest.approx(1.0 + 0.75)
        assert fam.full.total_weight == pytest.approx(1.75 + 2.0)

    def test_rejects_bad_parameters(self):
        with pytest.raises(ConfigError):
            gen_three_batch(1.0, 5.0, 2.0, 100.0, per_batch=4)
        with pytest.raises(ConfigError):
            gen_three_batch(1.0, 2.0, 500.0, 100.0, per_batch=4)
        with pytest.raises(ConfigError):
            gen_three_batch(1.0, 2.0, 5.0, 100.0, per_batch=1)


class TestGenIntegralLb:
    def test_bounded_variant(self):
        first, second = gen_integral_lb("bounded", hi=100.0, kappa=0.1)
        assert list(first.weights) == [0.2]
        assert list(second.weights) == pytest.approx([0.2, 0.9])
        assert list(second.values) == [1.0, 100.0]

    def test_bounded_rejects_large_kappa(self):
        with pytest.raises(ConfigError):
            gen_integral_lb("bounded", hi=100.0, kappa=0.3)

    def test_smallweight_variant(self):
        out = gen_integral_lb("smallweight", vhat=2.0, kappa=0.25, c=2.0, levels=3)
        assert len(out) == 4
        assert out[0].n == 4
        assert (out[0].values == 2.0).all()
        # escalation values: c*(c+1)^(j-1) * vhat/kappa
        assert out[1].values[-1] == pytest.approx(2.0 * 2.0 / 0.25)
        assert out[2].values[-1] == pytest.approx(2.0 * 3.0 * 2.0 / 0.25)
        assert out[3].values[-1] == pytest.approx(2.0 * 9.0 * 2.0 / 0.25)
        # nested prefixes
        assert (out[2].values[: out[1].n] == out[1].values).all()

    def test_smallweight_rejects_non_unit_fraction(self):
        with pytest.raises(ConfigError):
            gen_integral_lb("smallweight", vhat=2.0, kappa=0.3)

    def test_unknown_variant(self):
        with pytest.raises(ConfigError):
            gen_integral_lb("other", hi=1.0)


class TestGenOmegahat:
    @pytest.mark.parametrize("target", [0.2, 0.5, 1.0])
    def test_tie_class_weight_is_exact(self, target):
        ins = gen_omegahat(target, n=200, seed=11)
        info = critical_value(ins)
        assert info.vhat == pytest.approx(math.sqrt(1000.0), rel=1e-12)
        assert info.omegahat == pytest.approx(target, rel=1e-9)

    def test_tie_class_arrives_first(self):
        ins = gen_omegahat(0.5, n=200, seed=11)
        vhat = math.sqrt(1000.0)
        n_at = 200 // 5
        assert (ins.values[:n_at] == vhat).all()
        assert not np.isclose(ins.values[n_at:], vhat, rtol=1e-9).any()

    def test_above_class_cannot_fill_alone(self):
        ins = gen_omegahat(0.4, n=200, seed=11)
        vhat = math.sqrt(1000.0)
        above = ins.weights[ins.values > vhat * (1.0 + 1e-9)].sum()
        assert above == pytest.approx(1.0 - 0.2, rel=1e-9)

    def test_deterministic(self):
        a = gen_omegahat(0.5, n=200, seed=11, index=2)
        b = gen_omegahat(0.5, n=200, seed=11, index=2)
        assert (a.values == b.values).all()

    def test_rejects_bad_parameters(self):
        with pytest.raises(ConfigError):
            gen_omegahat(0.0, seed=0)
        with pytest.raises(ConfigError):
            gen_omegahat(1.2, seed=0)
        with pytest.raises(ConfigError):
            gen_omegahat(0.5, n=5, seed=0)


class TestGenerateDispatch:
    def test_powerlaw_round_trip(self):
        spec = GenSpec("powerlaw", seed=5, params={"n": 50, "weight_scale": 0.1})
        a = generate(spec, index=2)
        b = gen_powerlaw(n=50, seed=5, index=2, weight_scale=0.1)
        assert (a.values == b.values).all()
        assert (a.weights == b.weights).all()

    def test_family_kinds_return_tuples(self):
        spec = GenSpec("pair", params={"omegahat": 0.5, "hi": 100.0})
        out = generate(spec)
        assert isinstance(out, tuple)
        assert len(out) == 2

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            generate(GenSpec("mystery"))


class TestPredictionParsing:
    def test_exact(self):
        spec = parse_prediction("exact")
        assert spec.kind == "exact"

    def test_point(self):
        spec = parse_prediction("point:3.5")
        assert spec.params["value"] == 3.5

    def test_interval(self):
        spec = parse_prediction("interval:2:8")
        assert spec.params == {"lo": 2.0, "hi": 8.0}

    def test_interval_width(self):
        spec = parse_prediction("interval-width:25")
        assert spec.params["pct"] == 25.0

    def test_untrusted(self):
        spec = parse_prediction("untrusted:0.3:point")
        assert spec.params == {"delta": 0.3, "model": "point"}

    @pytest.mark.parametrize(
        "bad",
        [
            "exact:1",
            "point",
            "point:x",
            "interval:5",
            "interval:8:2",
            "interval-width:150",
            "untrusted:0.5",
            "untrusted:2:point",
            "untrusted:0.5:other",
            "banana",
        ],
    )
    def test_rejects_malformed(self, bad):
        with pytest.raises(ConfigError):
            parse_prediction(bad)


class TestMakePrediction:
    def ins(self):
        return gen_powerlaw(n=300, seed=21)

    def test_exact_is_critical_value(self):
        ins = self.ins()
        pred = make_prediction(ins, parse_prediction("exact"))
        assert isinstance(pred, PointPrediction)
        assert pred.vhat == critical_value(ins).vhat

    def test_point_passthrough(self):
        pred = make_prediction(self.ins(), parse_prediction("point:7.5"))
        assert pred == PointPrediction(7.5)

    def test_interval_passthrough(self):
        pred = make_prediction(self.ins(), parse_prediction("interval:2:8"))
        assert pred == IntervalPrediction(2.0, 8.0)

    def test_interval_width_contains_critical_value(self):
        ins = self.ins()
        vhat = critical_value(ins).vhat
        rng = substream(99)
        for _ in range(20):
            pred = make_prediction(ins, parse_prediction("interval-width:10"), rng)
            assert isinstance(pred, IntervalPrediction)
            assert pred.lo <= vhat <= pred.hi
            assert pred.hi - pred.lo == pytest.approx(0.1 * 999.0, rel=1e-9)
            assert pred.lo >= 1.0 - 1e-9
            assert pred.hi <= 1000.0 + 1e-9

    def test_interval_width_zero_collapses_to_point(self):
        ins = self.ins()
        pred = make_prediction(ins, parse_prediction("interval-width:0"), substream(1))
        assert pred == PointPrediction(critical_value(ins).vhat)

    def test_untrusted_point_zero_delta_is_exact(self):
        ins = self.ins()
        pred = make_prediction(
            ins, parse_prediction("untrusted:0:point"), substream(4)
        )
        assert pred.vhat == critical_value(ins).vhat

    def test_untrusted_point_full_delta_misses(self):
        ins = self.ins()
        vhat = critical_value(ins).vhat
        rng = substream(5)
        spec = parse_prediction("untrusted:1:point")
        for _ in range(20):
            pred = make_prediction(ins, spec, rng)
            assert abs(pred.vhat - vhat) > 1e-6 * abs(vhat)

    def test_untrusted_interval_split(self):
        ins = self.ins()
        vhat = critical_value(ins).vhat
        rng = substream(6)
        spec = parse_prediction("untrusted:0.5:interval")
        hit = miss = 0
        for _ in range(60):
            pred = make_prediction(ins, spec, rng)
            if pred.lo <= vhat <= pred.hi:
                hit += 1
            else:
                miss += 1
        assert hit > 10
        assert miss > 10

    def test_randomized_kinds_need_bounds(self):
        from okp.core import Instance

        bare = Instance([2.0, 3.0], [0.5, 0.7])
        with pytest.raises(ConfigError):
            make_prediction(bare, parse_prediction("interval-width:10"), substream(1))

"""Seeded instance generators and prediction synthesis.

Randomness policy: every stream is a numpy Philox generator (64-bit
counter-based).  The 128-bit Philox key for (seed, index) is derived
with SplitMix64:

    k_lo = splitmix64(seed)
    k_hi = splitmix64(k_lo + index)
    key  = k_hi << 64 | k_lo

so instance i of a family is an independent, reproducible substream.
Regenerating with the same (seed, index) yields byte-identical CSVs.

Generator kinds:

    powerlaw         bounded power-law values on [lo, hi] (inverse CDF),
                     power-law weights scaled so the largest equals
                     weight_scale
    pair             one critical-mass item, then the same plus a huge
                     near-full-capacity item (worst pair for reserve
                     style algorithms)
    ramp             batches of unit total weight with linearly rising
                     values from lo up to a target x ("ramp to x");
                     drives threshold algorithms to their worst case
    interval-lb      ramp across a predicted range plus one spike far
                     above it
    three-batch      three value levels with prefix instances exposed
    integral-lb      families showing all-or-nothing algorithms cannot
                     be competitive (bounded weights / small weights)
    omegahat         engineered instances whose critical class carries
                     an exact target weight
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import (
    ConfigError,
    Instance,
    IntervalPrediction,
    PointPrediction,
    Prediction,
)
from .offline import critical_value

_MASK64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def substream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent reproducible generator for item index of a seeded family."""
    k_lo = _splitmix64(int(seed) & _MASK64)
    k_hi = _splitmix64((k_lo + int(index)) & _MASK64)
    return np.random.Generator(np.random.Philox(key=(k_hi << 64) | k_lo))


def bounded_powerlaw(
    rng: np.random.Generator, exponent: float, lo: float, hi: float, size: int
) -> np.ndarray:
    """Samples on [lo, hi] with density proportional to x^-(exponent+1).

    Inverse CDF of the truncated power law:
        x = lo * (1 - u * (1 - (lo/hi)^a)) ** (-1/a),  u ~ U[0, 1)
    """
    if not (0.0 < lo <= hi):
        raise ConfigError(f"powerlaw range needs 0 < lo <= hi, got ({lo}, {hi})")
    if exponent <= 0.0:
        raise ConfigError(f"powerlaw exponent must be positive, got {exponent}")
    if lo == hi:
        return np.full(size, lo)
    u = rng.random(size)
    a = exponent
    return lo * (1.0 - u * (1.0 - (lo / hi) ** a)) ** (-1.0 / a)


def gen_powerlaw(
    n: int = 1000,
    lo: float = 1.0,
    hi: float = 1000.0,
    *,
    seed: int,
    index: int = 0,
    value_exponent: float = 2.0,
    weight_exponent: float = 2.0,
    weight_scale: float = 0.05,
    constant_weight: float = 0.0,
    value_grid: float = 0.0,
) -> Instance:
    """Heavy-tailed values on [lo, hi]; weights are an unbounded power
    law rescaled so the largest sampled weight equals weight_scale.

    constant_weight > 0 switches every weight to that fixed value
    instead (the small-weight regime used by the integral wrapper).
    value_grid > 0 rounds values to that grid (clamped to [lo, hi]),
    which produces the fat critical-value tie classes that separate the
    prediction-greedy algorithms from the robust baseline."""
    if n < 1:
        raise ConfigError(f"need at least one item, got n={n}")
    if not (0.0 < weight_scale <= 1.0):
        raise ConfigError(f"weight_scale must be in (0, 1], got {weight_scale}")
    if weight_exponent <= 0.0:
        raise ConfigError(f"weight exponent must be positive, got {weight_exponent}")
    if constant_weight < 0.0:
        raise ConfigError(f"constant_weight must be >= 0, got {constant_weight}")
    if value_grid < 0.0:
        raise ConfigError(f"value_grid must be >= 0, got {value_grid}")
    rng = substream(seed, index)
    values = bounded_powerlaw(rng, value_exponent, lo, hi, n)
    if value_grid > 0.0:
        values = np.minimum(np.maximum(np.round(values / value_grid) * value_grid, lo), hi)
    if constant_weight > 0.0:
        weights = np.full(n, constant_weight)
    else:
        raw = (1.0 - rng.random(n)) ** (-1.0 / weight_exponent)
        weights = raw * (weight_scale / raw.max())
    return Instance(values, weights, bounds=(lo, hi))


def gen_pair(
    omegahat: float, hi: float, epsilon: float = 1e-3, lo: float = 1.0
) -> tuple[Instance, Instance]:
    """One critical item of weight omegahat; then the same followed by a
    top-value item of weight 1 - epsilon.  No online algorithm can do
    well on both, which is what makes the pair a useful stress test."""
    if not (0.0 < omegahat <= 1.0):
        raise ConfigError(f"omegahat must be in (0, 1], got {omegahat}")
    if not (0.0 < epsilon < 1.0):
        raise ConfigError(f"epsilon must be in (0, 1), got {epsilon}")
    if not (0.0 < lo <= hi):
        raise ConfigError(f"range needs 0 < lo <= hi, got ({lo}, {hi})")
    first = Instance([lo], [omegahat], bounds=(lo, hi))
    second = Instance([lo, hi], [omegahat, 1.0 - epsilon], bounds=(lo, hi))
    return first, second


def gen_ramp(
    x: float,
    lo: float,
    hi: float,
    batches: int,
    per_batch: int,
    bounds_hi: float | None = None,
) -> Instance:
    """Value levels rising linearly from lo towards x, one unit of weight
    per level (per_batch items of weight 1/per_batch each).

    The level step is (hi - lo) / batches; levels run lo, lo+step, ...
    until the first level at or above x, so the ramp contains
    ceil((x - lo)/step) + 1 levels and tops out within one step of x.
    """
    if not (0.0 < lo <= hi):
        raise ConfigError(f"range needs 0 < lo <= hi, got ({lo}, {hi})")
    if not (lo <= x <= hi):
        raise ConfigError(f"ramp target {x} outside [{lo}, {hi}]")
    if batches < 1 or per_batch < 1:
        raise ConfigError("batches and per_batch must be at least 1")
    if hi == lo:
        levels = np.array([lo])
    else:
        step = (hi - lo) / batches
        r = (x - lo) / step
        near = round(r)
        nb = (near if abs(r - near) <= 1e-9 else math.ceil(r)) + 1
        levels = np.minimum(lo + np.arange(nb) * step, hi)
    values = np.repeat(levels, per_batch)
    weights = np.full(values.size, 1.0 / per_batch)
    return Instance(values, weights, bounds=(lo, bounds_hi if bounds_hi else hi))


def gen_interval_lb(
    lo: float, hi: float, top: float, m: int, epsilon: float = 1e-3
) -> tuple[Instance, Instance]:
    """A ramp across [lo, hi] (m levels, m items each), and the same ramp
    followed by one item of value top and weight 1 - epsilon."""
    if not (0.0 < lo <= hi <= top):
        raise ConfigError(f"need 0 < lo <= hi <= top, got ({lo}, {hi}, {top})")
    if not (0.0 < epsilon < 1.0):
        raise ConfigError(f"epsilon must be in (0, 1), got {epsilon}")
    ramp = gen_ramp(hi, lo, hi, batches=m, per_batch=m, bounds_hi=top)
    spiked = Instance(
        np.append(ramp.values, top),
        np.append(ramp.weights, 1.0 - epsilon),
        bounds=(lo, top),
    )
    return ramp, spiked


class ThreeBatchFamily(NamedTuple):
    one: Instance
    two: Instance
    full: Instance


def gen_three_batch(
    lo: float, a: float, b: float, hi: float, per_batch: int
) -> ThreeBatchFamily:
    """Three value levels lo, a*lo, b*lo (1 <= a < b, b*lo <= hi): a full
    unit of weight at lo, just under a unit at a*lo, two units at b*lo.
    The one-batch and two-batch prefixes are returned alongside."""
    if not (1.0 <= a < b):
        raise ConfigError(f"need 1 <= a < b, got a={a}, b={b}")
    if b * lo > hi * (1.0 + 1e-12):
        raise ConfigError(f"b*lo={b * lo} exceeds hi={hi}")
    if per_batch < 2:
        raise ConfigError("per_batch must be at least 2")
    if lo <= 0.0:
        raise ConfigError(f"lo must be positive, got {lo}")
    w = 1.0 / per_batch
    v1 = np.full(per_batch, lo)
    v2 = np.full(per_batch - 1, a * lo)
    v3 = np.full(2 * per_batch, b * lo)
    bounds = (lo, hi)
    one = Instance(v1, np.full(v1.size, w), bounds=bounds)
    two = Instance(np.concatenate([v1, v2]), np.full(v1.size + v2.size, w), bounds=bounds)
    full = Instance(
        np.concatenate([v1, v2, v3]),
        np.full(v1.size + v2.size + v3.size, w),
        bounds=bounds,
    )
    return ThreeBatchFamily(one, two, full)


def gen_integral_lb(variant: str, **params):
    """Instances on which whole-item-only algorithms lose unboundedly.

    variant="bounded" (params hi, kappa, lo=1): a pair like gen_pair but
    with weights 2*kappa and 1 - kappa, kappa in (0, 1/4): whichever
    item an integral algorithm commits to, the other instance of the
    pair punishes it.
    variant="smallweight" (params vhat, kappa, c, levels): 1/kappa items
    of (vhat, kappa), then follow-up items whose values escalate
    geometrically (factor c*(c+1)^(j-1)/kappa); returns the list of
    nested instances, one per escalation level.
    """
    if variant == "bounded":
        hi = float(params["hi"])
        kappa = float(params["kappa"])
        lo = float(params.get("lo", 1.0))
        if not (0.0 < kappa < 0.25):
            raise ConfigError(f"kappa must be in (0, 1/4), got {kappa}")
        first = Instance([lo], [2.0 * kappa], bounds=(lo, hi))
        second = Instance([lo, hi], [2.0 * kappa, 1.0 - kappa], bounds=(lo, hi))
        return first, second
    if variant == "smallweight":
        vhat = float(params["vhat"])
        kappa = float(params["kappa"])
        c = float(params.get("c", 2.0))
        levels = int(params.get("levels", 4))
        base_count = round(1.0 / kappa)
        if abs(1.0 / kappa - base_count) > 1e-9 or base_count < 1:
            raise ConfigError(f"1/kappa must be an integer, got kappa={kappa}")
        if vhat <= 0.0 or c <= 0.0 or levels < 0:
            raise ConfigError("smallweight needs vhat > 0, c > 0, levels >= 0")
        vals = [vhat] * base_count
        wts = [kappa] * base_count
        out = [Instance(vals, wts)]
        for j in range(1, levels + 1):
            vals = vals + [c * (c + 1.0) ** (j - 1) * vhat / kappa]
            wts = wts + [kappa]
            out.append(Instance(vals, wts))
        return out
    raise ConfigError(f"unknown integral-lb variant {variant!r}")


def gen_omegahat(
    omegahat: float,
    n: int = 400,
    lo: float = 1.0,
    hi: float = 1000.0,
    *,
    seed: int,
    index: int = 0,
    value_exponent: float = 2.0,
) -> Instance:
    """Instance whose critical class carries exactly omegahat of weight.

    Construction: pick vhat = sqrt(lo*hi); give the items above vhat a
    combined weight of 1 - omegahat/2 (so they never fill the knapsack
    alone), put exactly omegahat of weight at vhat itself, and pad with
    below-vhat filler.  The vhat items arrive first, which is the
    stressful order for reserve-style algorithms.
    """
    if not (0.0 < omegahat <= 1.0):
        raise ConfigError(f"omegahat must be in (0, 1], got {omegahat}")
    if n < 12:
        raise ConfigError(f"need n >= 12, got {n}")
    if not (0.0 < lo < hi):
        raise ConfigError(f"range needs 0 < lo < hi, got ({lo}, {hi})")
    rng = substream(seed, index)
    vhat = math.sqrt(lo * hi)
    n_at = max(2, n // 5)
    n_above = max(2, n // 4)
    n_below = n - n_at - n_above

    above_vals = bounded_powerlaw(rng, value_exponent, vhat * (1.0 + 1e-6), hi, n_above)
    raw = rng.uniform(0.5, 1.5, n_above)
    above_wts = raw * ((1.0 - omegahat / 2.0) / raw.sum())

    raw = rng.uniform(0.5, 1.5, n_at)
    at_wts = raw * (omegahat / raw.sum())

    below_vals = bounded_powerlaw(rng, value_exponent, lo, vhat / (1.0 + 1e-6), n_below)
    raw = rng.uniform(0.5, 1.5, n_below)
    below_wts = raw * (1.0 / raw.sum())

    tail_vals = np.concatenate([above_vals, below_vals])
    tail_wts = np.concatenate([above_wts, below_wts])
    perm = rng.permutation(tail_vals.size)
    values = np.concatenate([np.full(n_at, vhat), tail_vals[perm]])
    weights = np.concatenate([at_wts, tail_wts[perm]])
    return Instance(values, weights, bounds=(lo, hi))


@dataclass(frozen=True)
class GenSpec:
    """A generator family: kind, seed, and kind-specific parameters."""

    kind: str
    seed: int = 0
    params: dict = field(default_factory=dict)


def generate(spec: GenSpec, index: int = 0):
    """Materialize instance `index` of a family (or the tuple/list for
    the pair/prefix/family kinds, which ignore the index)."""
    kind = spec.kind
    p = dict(spec.params)
    if kind == "powerlaw":
        return gen_powerlaw(
            n=int(p.pop("n", 1000)),
            lo=float(p.pop("lo", 1.0)),
            hi=float(p.pop("hi", 1000.0)),
            seed=spec.seed,
            index=index,
            **{k: float(v) for k, v in p.items()},
        )
    if kind == "pair":
        return gen_pair(
            omegahat=float(p["omegahat"]),
            hi=float(p["hi"]),
            epsilon=float(p.get("epsilon", 1e-3)),
            lo=float(p.get("lo", 1.0)),
        )
    if kind == "ramp":
        return gen_ramp(
            x=float(p["x"]),
            lo=float(p.get("lo", 1.0)),
            hi=float(p["hi"]),
            batches=int(p.get("batches", 500)),
            per_batch=int(p.get("per_batch", 100)),
        )
    if kind == "interval-lb":
        return gen_interval_lb(
            lo=float(p["lo"]),
            hi=float(p["hi"]),
            top=float(p["top"]),
            m=int(p.get("m", 100)),
            epsilon=float(p.get("epsilon", 1e-3)),
        )
    if kind == "three-batch":
        return gen_three_batch(
            lo=float(p.get("lo", 1.0)),
            a=float(p["a"]),
            b=float(p["b"]),
            hi=float(p["hi"]),
            per_batch=int(p.get("per_batch", 100)),
        )
    if kind == "integral-lb":
        variant = p.pop("variant")
        return gen_integral_lb(variant, **p)
    if kind == "omegahat":
        return gen_omegahat(
            omegahat=float(p["omegahat"]),
            n=int(p.get("n", 400)),
            lo=float(p.get("lo", 1.0)),
            hi=float(p.get("hi", 1000.0)),
            seed=spec.seed,
            index=index,
            value_exponent=float(p.get("value_exponent", 2.0)),
        )
    raise ConfigError(f"unknown generator kind {kind!r}")


@dataclass(frozen=True)
class PredictionSpec:
    """How to derive a prediction from an instance (possibly randomized)."""

    kind: str
    params: dict = field(default_factory=dict)


def parse_prediction(spec: str) -> PredictionSpec:
    tokens = [t.strip() for t in spec.strip().split(":")]
    head = tokens[0]
    if head == "exact":
        if len(tokens) != 1:
            raise ConfigError(f"exact takes no parameters, got {spec!r}")
        return PredictionSpec("exact")
    if head == "point":
        if len(tokens) != 2:
            raise ConfigError(f"point spec is point:<value>, got {spec!r}")
        return PredictionSpec("point", {"value": _pfloat(tokens[1], spec)})
    if head == "interval":
        if len(tokens) != 3:
            raise ConfigError(f"interval spec is interval:<lo>:<hi>, got {spec!r}")
        lo = _pfloat(tokens[1], spec)
        hi = _pfloat(tokens[2], spec)
        if not (lo <= hi):
            raise ConfigError(f"interval needs lo <= hi, got {spec!r}")
        return PredictionSpec("interval", {"lo": lo, "hi": hi})
    if head == "interval-width":
        if len(tokens) != 2:
            raise ConfigError(f"spec is interval-width:<pct>, got {spec!r}")
        pct = _pfloat(tokens[1], spec)
        if not (0.0 <= pct <= 100.0):
            raise ConfigError(f"width percent must be in [0, 100], got {pct}")
        return PredictionSpec("interval-width", {"pct": pct})
    if head == "untrusted":
        if len(tokens) != 3 or tokens[2] not in ("point", "interval"):
            raise ConfigError(
                f"spec is untrusted:<delta>:<point|interval>, got {spec!r}"
            )
        delta = _pfloat(tokens[1], spec)
        if not (0.0 <= delta <= 1.0):
            raise ConfigError(f"delta must be in [0, 1], got {delta}")
        return PredictionSpec("untrusted", {"delta": delta, "model": tokens[2]})
    raise ConfigError(f"unknown prediction kind {head!r}")


def _pfloat(token: str, spec: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ConfigError(f"bad number {token!r} in prediction spec {spec!r}") from None


def make_prediction(
    instance: Instance,
    spec: PredictionSpec,
    rng: np.random.Generator | None = None,
) -> Prediction:
    """Materialize a prediction for the instance.

    Randomized kinds (interval-width, untrusted) draw from rng, which
    the caller supplies from a per-cell substream to stay reproducible.
    """
    kind = spec.kind
    if kind == "exact":
        return PointPrediction(critical_value(instance).vhat)
    if kind == "point":
        return PointPrediction(float(spec.params["value"]))
    if kind == "interval":
        return IntervalPrediction(float(spec.params["lo"]), float(spec.params["hi"]))
    if rng is None:
        rng = substream(0, 0)
    if kind == "interval-width":
        return _interval_width(instance, float(spec.params["pct"]), rng)
    if kind == "untrusted":
        return _untrusted(
            instance, float(spec.params["delta"]), str(spec.params["model"]), rng
        )
    raise ConfigError(f"unknown prediction kind {kind!r}")


def _bounds_of(instance: Instance) -> tuple[float, float]:
    if instance.bounds is None:
        raise ConfigError("this prediction kind needs instance value bounds")
    return instance.bounds


def _interval_width(
    instance: Instance, pct: float, rng: np.random.Generator
) -> Prediction:
    lo_b, hi_b = _bounds_of(instance)
    vhat = critical_value(instance).vhat
    width = (hi_b - lo_b) * (pct / 100.0)
    if width <= 0.0:
        return PointPrediction(vhat)
    lo_min = max(lo_b, vhat - width)
    lo_max = min(vhat, hi_b - width)
    if lo_max < lo_min:  # vhat outside the declared bounds; pin to them
        lo_min = lo_max = min(max(lo_b, vhat - width), hi_b - width)
    lo = float(rng.uniform(lo_min, lo_max))
    return IntervalPrediction(lo, lo + width)


def _untrusted(
    instance: Instance, delta: float, model: str, rng: np.random.Generator
) -> Prediction:
    lo_b, hi_b = _bounds_of(instance)
    vhat = critical_value(instance).vhat
    wrong = bool(rng.random() < delta)
    if model == "point":
        if not wrong:
            return PointPrediction(vhat)
        excl = max(1e-6 * abs(vhat), 1e-9)
        for _ in range(1000):
            u = float(rng.uniform(lo_b, hi_b))
            if abs(u - vhat) > excl:
                return PointPrediction(u)
        raise ConfigError(
            f"cannot draw a wrong point in [{lo_b}, {hi_b}] away from {vhat}"
        )
    if not wrong:
        lo = float(rng.uniform(lo_b, max(lo_b, min(vhat, hi_b))))
        hi = float(rng.uniform(min(max(vhat, lo_b), hi_b), hi_b))
        if hi < lo:
            lo, hi = hi, lo
        return IntervalPrediction(lo, hi)
    for _ in range(1000):
        a = float(rng.uniform(lo_b, hi_b))
        b = float(rng.uniform(lo_b, hi_b))
        lo, hi = (a, b) if a <= b else (b, a)
        if vhat < lo or vhat > hi:
            return IntervalPrediction(lo, hi)
    raise ConfigError(
        f"cannot draw an interval in [{lo_b}, {hi_b}] avoiding {vhat}"
    )

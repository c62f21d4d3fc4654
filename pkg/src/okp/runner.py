"""Algorithm spec strings, machine construction, and backend dispatch.

Spec strings name the algorithm to run:

    ta                      threshold, no prediction (needs value bounds)
    ppn                     greedy at/above a predicted critical value
    ppb                     balanced halving around the prediction
    ppa                     adaptive reserve around the prediction
    ipa                     interval prediction
    ma:<lambda>:<inner>     blend of <inner> (ppa or ipa) with ta
    conv:<inner>:<delta>:<epsilon>
                            all-or-nothing wrapper around a fractional
                            spec, e.g. conv:ppa:0.05:0.001

Two interchangeable execution backends produce bit-identical decisions:
the stepwise Python machines, and compiled loops in okp._kernels when
the extension was built.  Selection order: explicit argument, then the
OKP_BACKEND environment variable ("py" or "c"), then the compiled one
if it imports.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .algorithms import (
    AdaptiveReserve,
    BalancedHalving,
    IntervalAware,
    Mixture,
    PredictedGreedy,
    Threshold,
)
from .conversion import IntegralWrapper, ValuePartition
from .core import (
    ConfigError,
    DataError,
    Instance,
    IntervalPrediction,
    PointPrediction,
    Prediction,
    Solution,
    check_solution,
    online_run,
)

try:
    from . import _kernels  # type: ignore[attr-defined]
except ImportError:
    _kernels = None

_PREDICTION_KINDS = {"ppn", "ppb", "ppa", "ipa"}


@dataclass(frozen=True)
class AlgSpec:
    kind: str
    lam: float | None = None
    inner: "AlgSpec | None" = None
    delta: float | None = None
    epsilon: float | None = None

    def __str__(self) -> str:
        if self.kind == "ma":
            return f"ma:{self.lam:g}:{self.inner}"
        if self.kind == "conv":
            return f"conv:{self.inner}:{self.delta:g}:{self.epsilon:g}"
        return self.kind

    @property
    def needs_prediction(self) -> bool:
        if self.kind in _PREDICTION_KINDS:
            return True
        if self.inner is not None:
            return self.inner.needs_prediction
        return False

    @property
    def needs_bounds(self) -> bool:
        return self.kind in ("ta", "ma", "conv")


def parse_algorithm(spec: str) -> AlgSpec:
    tokens = [t.strip() for t in spec.strip().split(":")]
    parsed, rest = _parse_tokens(tokens)
    if rest:
        raise ConfigError(f"trailing tokens in algorithm spec {spec!r}")
    return parsed


def _parse_tokens(tokens: list[str]) -> tuple[AlgSpec, list[str]]:
    if not tokens or not tokens[0]:
        raise ConfigError("empty algorithm spec")
    head = tokens[0]
    if head in ("ta", "ppn", "ppb", "ppa", "ipa"):
        return AlgSpec(head), tokens[1:]
    if head == "ma":
        if len(tokens) < 3:
            raise ConfigError("ma spec needs ma:<lambda>:<inner>")
        lam = _parse_float(tokens[1], "lambda")
        if not (0.0 < lam < 1.0):
            raise ConfigError(f"lambda must be in (0, 1), got {lam}")
        inner, rest = _parse_tokens(tokens[2:])
        if inner.kind not in ("ppa", "ipa"):
            raise ConfigError(f"ma inner must be ppa or ipa, got {inner.kind!r}")
        return AlgSpec("ma", lam=lam, inner=inner), rest
    if head == "conv":
        if len(tokens) < 4:
            raise ConfigError("conv spec needs conv:<inner>:<delta>:<epsilon>")
        inner, rest = _parse_tokens(tokens[1:])
        if inner.kind == "conv":
            raise ConfigError("conv cannot wrap another conv")
        if len(rest) < 2:
            raise ConfigError("conv spec needs conv:<inner>:<delta>:<epsilon>")
        delta = _parse_float(rest[0], "delta")
        epsilon = _parse_float(rest[1], "epsilon")
        if delta <= 0.0:
            raise ConfigError(f"delta must be positive, got {delta}")
        if epsilon <= 0.0:
            raise ConfigError(f"epsilon must be positive, got {epsilon}")
        return AlgSpec("conv", inner=inner, delta=delta, epsilon=epsilon), rest[2:]
    raise ConfigError(f"unknown algorithm {head!r}")


def _parse_float(token: str, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ConfigError(f"bad {what} {token!r}") from None


def _point(pred: Prediction | None, kind: str) -> float:
    if isinstance(pred, PointPrediction):
        return pred.vhat
    raise ConfigError(f"{kind} needs a point prediction, got {pred!r}")


def _interval(pred: Prediction | None) -> tuple[float, float]:
    if isinstance(pred, IntervalPrediction):
        return pred.lo, pred.hi
    if isinstance(pred, PointPrediction):
        # degenerate range; behaves like halving around the point
        return pred.vhat, pred.vhat
    raise ConfigError(f"ipa needs an interval (or point) prediction, got {pred!r}")


def make_machine(
    spec: AlgSpec | str,
    bounds: tuple[float, float] | None = None,
    prediction: Prediction | None = None,
):
    """Build the stepwise machine for a spec (pure Python backend)."""
    if isinstance(spec, str):
        spec = parse_algorithm(spec)
    if spec.needs_bounds and bounds is None:
        raise ConfigError(f"{spec} needs instance value bounds (lo, hi)")
    kind = spec.kind
    if kind == "ta":
        return Threshold(bounds[0], bounds[1])
    if kind == "ppn":
        return PredictedGreedy(_point(prediction, "ppn"))
    if kind == "ppb":
        return BalancedHalving(_point(prediction, "ppb"))
    if kind == "ppa":
        return AdaptiveReserve(_point(prediction, "ppa"))
    if kind == "ipa":
        lo, hi = _interval(prediction)
        return IntervalAware(lo, hi)
    if kind == "ma":
        pred_machine = make_machine(spec.inner, bounds, prediction)
        return Mixture(spec.lam, pred_machine, Threshold(bounds[0], bounds[1]))
    if kind == "conv":
        part = ValuePartition(bounds[0], bounds[1], spec.delta)
        inner = make_machine(spec.inner, bounds, prediction)
        return IntegralWrapper(part, inner, spec.epsilon)
    raise ConfigError(f"unknown algorithm kind {kind!r}")


def default_backend() -> str:
    env = os.environ.get("OKP_BACKEND", "").strip().lower()
    if env in ("py", "c"):
        return env
    if env:
        raise ConfigError(f"OKP_BACKEND must be 'py' or 'c', got {env!r}")
    return "c" if _kernels is not None else "py"


def available_backends() -> list[str]:
    return ["py", "c"] if _kernels is not None else ["py"]


def run_spec(
    spec: AlgSpec | str,
    instance: Instance,
    prediction: Prediction | None = None,
    backend: str | None = None,
) -> Solution:
    """Run an algorithm spec over an instance and return its decisions."""
    if isinstance(spec, str):
        spec = parse_algorithm(spec)
    if backend is None:
        backend = default_backend()
    if backend == "c":
        if _kernels is None:
            raise ConfigError("compiled backend requested but okp._kernels is not built")
        x = _kernel_decisions(spec, instance, prediction)
        sol = Solution(x, instance.values, instance.weights)
        check_solution(sol)
        return sol
    if backend != "py":
        raise ConfigError(f"unknown backend {backend!r}")
    machine = make_machine(spec, instance.bounds, prediction)
    return online_run(machine, instance)


def _require_bounds(spec: AlgSpec, instance: Instance) -> tuple[float, float]:
    if instance.bounds is None:
        raise ConfigError(f"{spec} needs instance value bounds (lo, hi)")
    return instance.bounds


def _kernel_decisions(
    spec: AlgSpec, instance: Instance, prediction: Prediction | None
) -> np.ndarray:
    v = instance.values
    w = instance.weights
    x = np.zeros(v.size)
    kind = spec.kind
    if kind == "ta":
        lo, hi = _require_bounds(spec, instance)
        _kernels.ta_run(v, w, lo, hi, x)
    elif kind == "ppn":
        _kernels.ppn_run(v, w, _point(prediction, "ppn"), False, x)
    elif kind == "ppb":
        _kernels.ppb_run(v, w, _point(prediction, "ppb"), x)
    elif kind == "ppa":
        scratch = np.zeros(v.size)
        _kernels.ppa_run(v, w, _point(prediction, "ppa"), x, scratch, scratch, scratch, False)
    elif kind == "ipa":
        lo, hi = _interval(prediction)
        IntervalAware(lo, hi)  # parameter validation only
        _kernels.ipa_run(v, w, lo, hi, x)
    elif kind == "ma":
        lo, hi = _require_bounds(spec, instance)
        Threshold(lo, hi)  # parameter validation only
        if spec.inner.kind == "ppa":
            _kernels.ma_point_run(v, w, spec.lam, _point(prediction, "ppa"), lo, hi, x)
        else:
            plo, phi = _interval(prediction)
            IntervalAware(plo, phi)
            _kernels.ma_interval_run(v, w, spec.lam, plo, phi, lo, hi, x)
    elif kind == "conv":
        lo, hi = _require_bounds(spec, instance)
        part = ValuePartition(lo, hi, spec.delta)
        # mirror the wrapper's preconditions before touching the kernel
        probe = IntegralWrapper(part, Threshold(lo, hi), spec.epsilon)
        if v.size and w.max() > spec.epsilon * (1.0 + 1e-12):
            raise DataError(
                f"item weight {w.max()!r} exceeds the small-weight cap {spec.epsilon}"
            )
        inner_x = _kernel_decisions(spec.inner, instance, prediction)
        _kernels.conv_run(
            v, w, inner_x, lo, part.k, float(part.delta), probe.factor, x
        )
    else:
        raise ConfigError(f"unknown algorithm kind {kind!r}")
    return x


def ppa_run_traced(
    instance: Instance, vhat: float, backend: str | None = None
) -> tuple[Solution, np.ndarray, np.ndarray, np.ndarray]:
    """Adaptive-reserve run that also reports (omega, s, tilde) after each step."""
    if backend is None:
        backend = default_backend()
    n = instance.n
    if backend == "c" and _kernels is not None:
        x = np.zeros(n)
        omega = np.zeros(n)
        s = np.zeros(n)
        tilde = np.zeros(n)
        _kernels.ppa_run(instance.values, instance.weights, vhat, x, omega, s, tilde, True)
        sol = Solution(x, instance.values, instance.weights)
        check_solution(sol)
        return sol, omega, s, tilde
    machine = AdaptiveReserve(vhat)
    x = np.zeros(n)
    omega = np.zeros(n)
    s = np.zeros(n)
    tilde = np.zeros(n)
    for i in range(n):
        x[i] = machine.step(instance.values[i], instance.weights[i])
        omega[i] = machine.omega
        s[i] = machine.s
        tilde[i] = machine.tilde
    sol = Solution(x, instance.values, instance.weights)
    check_solution(sol)
    return sol, omega, s, tilde

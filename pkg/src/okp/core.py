"""Domain types and numeric policy shared by every other module.

Conventions used throughout the package:

* The knapsack capacity is always 1; item weights are fractions of it.
* An item is a pair (value, weight) where ``value`` is the value per
  unit of weight and ``weight`` is how much capacity the whole item
  occupies.  Weights may exceed 1 (only part of such an item can ever
  be packed).
* A decision x_i is the amount of item i that was accepted,
  0 <= x_i <= w_i.  Profit is sum(x_i * v_i); utilization is sum(x_i).
* Items arrive one at a time and decisions are irrevocable.  The
  fractional problem allows any x_i in [0, w_i]; the integral problem
  allows only x_i in {0, w_i}.

All arithmetic is float64.  Value equality (needed for "is this item's
value the critical value?") uses a relative tolerance of 1e-12 with an
absolute floor of 1e-15.  Feasibility checks use an absolute 1e-9 on
utilization.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Protocol, Sequence

import numpy as np

VALUE_REL_TOL = 1e-12
VALUE_ABS_TOL = 1e-15
FEAS_TOL = 1e-9
PROFIT_REL_TOL = 1e-9

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_INVARIANT = 3


class ConfigError(ValueError):
    """Bad parameters, bad spec strings, unusable combinations (exit 1)."""


class DataError(ValueError):
    """Malformed or out-of-contract input data (exit 2)."""


class InvariantError(RuntimeError):
    """An internal invariant broke; this is a bug, not a user error (exit 3)."""


def values_equal(a: float, b: float) -> bool:
    """Tolerant equality for item values (rel 1e-12, abs floor 1e-15)."""
    d = a - b
    if d < 0.0:
        d = -d
    m = abs(a)
    mb = abs(b)
    if mb > m:
        m = mb
    tol = VALUE_REL_TOL * m
    if tol < VALUE_ABS_TOL:
        tol = VALUE_ABS_TOL
    return d <= tol


class Item(NamedTuple):
    value: float
    weight: float


class Instance:
    """An arrival-ordered sequence of items, optionally with value bounds.

    ``bounds = (lo, hi)`` declares the support of item values; threshold
    algorithms need it.  When present it is validated: 0 < lo <= hi and
    every value lies in [lo, hi] (up to the value tolerance).
    """

    __slots__ = ("values", "weights", "bounds")

    def __init__(self, values, weights, bounds: tuple[float, float] | None = None):
        v = np.ascontiguousarray(values, dtype=np.float64)
        w = np.ascontiguousarray(weights, dtype=np.float64)
        if v.ndim != 1 or w.ndim != 1 or v.shape != w.shape:
            raise DataError("values and weights must be 1-d arrays of equal length")
        if v.size and not (np.isfinite(v).all() and np.isfinite(w).all()):
            raise DataError("non-finite value or weight")
        if (v < 0.0).any():
            raise DataError("negative item value")
        if (w <= 0.0).any():
            raise DataError("non-positive item weight")
        if bounds is not None:
            lo, hi = float(bounds[0]), float(bounds[1])
            if not (0.0 < lo <= hi):
                raise DataError(f"bad bounds ({lo}, {hi}): need 0 < lo <= hi")
            if v.size:
                slack_lo = lo - max(VALUE_ABS_TOL, VALUE_REL_TOL * lo)
                slack_hi = hi + max(VALUE_ABS_TOL, VALUE_REL_TOL * hi)
                if v.min() < slack_lo or v.max() > slack_hi:
                    raise DataError(
                        f"item value outside declared bounds [{lo}, {hi}]"
                    )
            bounds = (lo, hi)
        self.values = v
        self.weights = w
        self.bounds = bounds

    @classmethod
    def from_items(
        cls, items: Sequence[tuple[float, float]], bounds=None
    ) -> "Instance":
        vals = [it[0] for it in items]
        wts = [it[1] for it in items]
        return cls(vals, wts, bounds)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> Item:
        return Item(float(self.values[i]), float(self.weights[i]))

    def __iter__(self) -> Iterator[Item]:
        for i in range(self.n):
            yield Item(float(self.values[i]), float(self.weights[i]))

    def __repr__(self) -> str:
        b = f", bounds={self.bounds}" if self.bounds else ""
        return f"Instance(n={self.n}{b})"

    def to_csv(self, path) -> None:
        """Write the instance as ``value,weight`` rows in arrival order.

        Floats are written with repr (shortest round-trip form), so the
        same instance always produces byte-identical files.
        """
        with open(path, "w", newline="") as f:
            wr = csv.writer(f)
            wr.writerow(["value", "weight"])
            for i in range(self.n):
                wr.writerow([repr(float(self.values[i])), repr(float(self.weights[i]))])

    @classmethod
    def from_csv(cls, path, bounds=None) -> "Instance":
        vals: list[float] = []
        wts: list[float] = []
        with open(path, newline="") as f:
            rd = csv.reader(f)
            header = next(rd, None)
            if header is None or [h.strip() for h in header[:2]] != ["value", "weight"]:
                raise DataError(f"{path}: expected header 'value,weight'")
            for lineno, row in enumerate(rd, start=2):
                if not row or (len(row) == 1 and not row[0].strip()):
                    continue
                if len(row) < 2:
                    raise DataError(f"{path}:{lineno}: expected two columns")
                try:
                    vals.append(float(row[0]))
                    wts.append(float(row[1]))
                except ValueError as e:
                    raise DataError(f"{path}:{lineno}: {e}") from None
        return cls(vals, wts, bounds)


class PointPrediction(NamedTuple):
    """A predicted critical value."""

    vhat: float


class IntervalPrediction(NamedTuple):
    """A predicted range [lo, hi] that should contain the critical value."""

    lo: float
    hi: float


Prediction = PointPrediction | IntervalPrediction


class OnlineAlgorithm(Protocol):
    """Stepwise contract every online machine implements."""

    utilization: float

    def step(self, value: float, weight: float) -> float: ...


@dataclass(frozen=True)
class Solution:
    """Per-item decisions in arrival order, plus the derived aggregates."""

    x: np.ndarray
    values: np.ndarray
    weights: np.ndarray

    @property
    def profit(self) -> float:
        return float(np.dot(self.x, self.values))

    @property
    def utilization(self) -> float:
        return float(self.x.sum())

    @property
    def n(self) -> int:
        return int(self.x.size)

    def is_integral(self, tol: float = 1e-12) -> bool:
        """True when every decision is 0 or the whole item."""
        x = self.x
        w = self.weights
        return bool(np.all((np.abs(x) <= tol) | (np.abs(x - w) <= tol * np.maximum(w, 1.0))))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            wr = csv.writer(f)
            wr.writerow(["index", "value", "weight", "x"])
            for i in range(self.n):
                wr.writerow(
                    [
                        i,
                        repr(float(self.values[i])),
                        repr(float(self.weights[i])),
                        repr(float(self.x[i])),
                    ]
                )


def check_solution(sol: Solution) -> None:
    """Bug-level validation of an online run's output."""
    x = sol.x
    if (x < -FEAS_TOL).any():
        raise InvariantError("negative decision")
    if (x - sol.weights > FEAS_TOL).any():
        raise InvariantError("decision exceeds item weight")
    if sol.utilization > 1.0 + FEAS_TOL:
        raise InvariantError(f"capacity exceeded: utilization={sol.utilization!r}")


def online_run(algorithm: OnlineAlgorithm, instance: Instance) -> Solution:
    """Feed the instance to a stepwise machine and collect its decisions.

    The machine sees items strictly in arrival order and its answer for
    item i is locked in before item i+1 is revealed.  Decisions are
    validated (0 <= x_i <= w_i, total <= 1) before returning; a
    violation raises InvariantError because machines are supposed to
    clamp themselves.
    """
    v = instance.values
    w = instance.weights
    x = np.zeros(instance.n)
    for i in range(instance.n):
        x[i] = algorithm.step(v[i], w[i])
    sol = Solution(x, v, w)
    check_solution(sol)
    return sol

"""Turn any fractional online algorithm into an all-or-nothing one.

Works only in the small-weight regime: every item must weigh at most
epsilon, and epsilon * (K + 1) must stay below 1 where K is the number
of value buckets.  Values in [lo, hi] are split into buckets of
geometric width (1 + delta); bucket 0 holds exactly lo and bucket j
holds values in (lo*(1+delta)^(j-1), lo*(1+delta)^j].

The wrapper shadows the fractional machine on a virtual knapsack.  Per
bucket it tracks R[j], the value the fractional machine has collected
there, and A[j], the value it has itself accepted.  An arriving item is
taken whole exactly when its bucket is behind target:

    A[j] < R[j] * (1 - epsilon*(K+1)) / (1 + delta)

This keeps A[j] >= R[j] * (1 - epsilon*(K+1)) / (1 + delta) at every
step, so the integral profit trails the fractional machine's by at most
that factor, and the accepted weight never exceeds the capacity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ConfigError, DataError, OnlineAlgorithm

_BUCKET_SNAP = 1e-12


@dataclass(frozen=True)
class ValuePartition:
    """Geometric bucketing of [lo, hi] with ratio (1 + delta) per bucket."""

    lo: float
    hi: float
    delta: float

    def __post_init__(self):
        if not (0.0 < self.lo <= self.hi):
            raise ConfigError(f"partition needs 0 < lo <= hi, got ({self.lo}, {self.hi})")
        if not (self.delta > 0.0) or not math.isfinite(self.delta):
            raise ConfigError(f"bucket ratio delta must be positive, got {self.delta}")

    @property
    def k(self) -> int:
        """Index of the last bucket; there are k + 1 buckets in total."""
        raw = math.log(self.hi / self.lo) / math.log1p(self.delta)
        r = round(raw)
        if abs(raw - r) <= 1e-9:
            return int(r)
        return int(math.ceil(raw))

    def bucket(self, value: float) -> int:
        """Bucket index of a value, snapping to boundaries at rel 1e-12.

        A value within relative 1e-12 of a boundary lo*(1+delta)^j is
        assigned to bucket j, so float noise cannot push a boundary
        value into the next bucket up.
        """
        k = self.k
        lo = self.lo
        if value < lo or value > self.hi:
            tol_lo = _BUCKET_SNAP * lo
            tol_hi = _BUCKET_SNAP * self.hi
            if not (lo - tol_lo <= value <= self.hi + tol_hi):
                raise DataError(
                    f"value {value!r} outside partition range [{lo}, {self.hi}]"
                )
        raw = math.log(value / lo) / math.log1p(self.delta)
        near = round(raw)
        if 0 <= near <= k:
            edge = lo * (1.0 + self.delta) ** near
            if abs(value - edge) <= _BUCKET_SNAP * max(abs(value), edge):
                return int(near)
        j = int(math.ceil(raw))
        if j < 0:
            j = 0
        if j > k:
            j = k
        return j


class IntegralWrapper:
    """All-or-nothing shadow of a fractional machine (see module docstring)."""

    __slots__ = ("part", "inner", "epsilon", "factor", "acc", "ref", "z")

    def __init__(self, partition: ValuePartition, inner: OnlineAlgorithm, epsilon: float):
        epsilon = float(epsilon)
        if not (0.0 < epsilon):
            raise ConfigError(f"epsilon must be positive, got {epsilon}")
        k = partition.k
        slack = 1.0 - epsilon * (k + 1)
        if slack <= 0.0:
            raise ConfigError(
                f"epsilon={epsilon} too large for {k + 1} buckets: "
                "need epsilon * (k+1) < 1"
            )
        self.part = partition
        self.inner = inner
        self.epsilon = epsilon
        self.factor = slack / (1.0 + partition.delta)
        self.acc = np.zeros(k + 1)  # value accepted per bucket (A)
        self.ref = np.zeros(k + 1)  # value the inner machine holds per bucket (R)
        self.z = 0.0

    def step(self, value: float, weight: float) -> float:
        if weight > self.epsilon * (1.0 + 1e-12):
            raise DataError(
                f"item weight {weight!r} exceeds the small-weight cap {self.epsilon}"
            )
        xt = self.inner.step(value, weight)
        j = self.part.bucket(value)
        self.ref[j] += xt * value
        if self.acc[j] < self.ref[j] * self.factor:
            self.acc[j] += weight * value
            self.z += weight
            return weight
        return 0.0

    @property
    def utilization(self) -> float:
        return self.z

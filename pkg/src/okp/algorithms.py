"""Stepwise online knapsack machines.

Every machine implements step(value, weight) -> accepted amount and
keeps its own utilization.  All of them clamp each step at the
remaining capacity, so a machine is feasible on any input even when its
prediction is garbage; with an accurate critical-value prediction the
clamp never binds and the update rules below apply verbatim.

The guarantees, with OPT the fractional offline optimum, values in
[lo, hi] where required, and vhat the true critical value:

* Threshold(lo, hi): OPT/ALG <= 1 + ln(hi/lo), no prediction used.
* PredictedGreedy(vhat): take everything at or above vhat; can be a
  factor hi/lo off, kept as the naive baseline.  The strict variant
  (accept only strictly above vhat) has no bound at all.
* BalancedHalving(vhat): half of everything above vhat, half of the
  first unit of weight at vhat; OPT/ALG <= 2.
* AdaptiveReserve(vhat): scales acceptances by 1/(1+omega) where omega
  is the vhat-class weight seen so far (capped at 1), which buys
  OPT/ALG <= 1 + min(1, omegahat).
* IntervalAware(lo, hi): prediction is only a range containing vhat;
  OPT/ALG <= 2 + ln(hi/lo).
* Mixture(lam, pred, robust): plays lam times a prediction machine plus
  (1-lam) times a Threshold on the full range, each on its own virtual
  knapsack; consistency c/lam and robustness (1 + ln(hi/lo))/(1-lam).
"""

from __future__ import annotations

import math

from .core import ConfigError, values_equal


class Threshold:
    """Accept only above a price curve that rises as the knapsack fills.

    The curve is flat at lo while utilization is below 1/(1+ln(hi/lo))
    and then climbs exponentially, reaching hi exactly at utilization 1.
    An item clearing the bar is taken fractionally, up to the
    utilization at which the bar would reach the item's value.
    """

    __slots__ = ("lo", "hi", "alpha", "zbreak", "z")

    def __init__(self, lo: float, hi: float):
        lo = float(lo)
        hi = float(hi)
        if not (0.0 < lo <= hi) or not math.isfinite(lo) or not math.isfinite(hi):
            raise ConfigError(f"threshold range needs 0 < lo <= hi, got ({lo}, {hi})")
        self.lo = lo
        self.hi = hi
        self.alpha = 1.0 + math.log(hi / lo)
        self.zbreak = 1.0 / self.alpha
        self.z = 0.0

    def threshold(self, z: float) -> float:
        """Price bar at utilization z."""
        if z < self.zbreak:
            return self.lo
        return self.lo * math.exp(self.alpha * z - 1.0)

    def threshold_inv(self, value: float) -> float:
        """Utilization at which the bar reaches value (1 beyond hi)."""
        if value >= self.hi:
            return 1.0
        return (1.0 + math.log(value / self.lo)) / self.alpha

    def step(self, value: float, weight: float) -> float:
        z = self.z
        if value < self.threshold(z):
            return 0.0
        x = self.threshold_inv(value) - z
        if x < 0.0:
            x = 0.0
        if x > weight:
            x = weight
        room = 1.0 - z
        if x > room:
            x = room
        self.z = z + x
        return x

    @property
    def utilization(self) -> float:
        return self.z


class PredictedGreedy:
    """Take everything valued at or above the predicted critical value.

    strict=True accepts only strictly above the prediction, which
    forfeits the whole critical class and with it any guarantee; it is
    kept for comparison runs.
    """

    __slots__ = ("vhat", "strict", "z")

    def __init__(self, vhat: float, strict: bool = False):
        self.vhat = float(vhat)
        self.strict = bool(strict)
        self.z = 0.0

    def step(self, value: float, weight: float) -> float:
        eq = values_equal(value, self.vhat)
        if self.strict:
            ok = value > self.vhat and not eq
        else:
            ok = value > self.vhat or eq
        if not ok:
            return 0.0
        x = weight
        room = 1.0 - self.z
        if x > room:
            x = room
        if x < 0.0:
            x = 0.0
        self.z += x
        return x

    @property
    def utilization(self) -> float:
        return self.z


class BalancedHalving:
    """Half of everything above the prediction, half of the first unit at it.

    Items above vhat are always half-accepted; items at vhat are
    half-accepted until a full unit of critical weight has been seen.
    Either the above-class or the at-class carries half the optimum, so
    the profit is at least OPT/2 when vhat is right.
    """

    __slots__ = ("vhat", "at_mass", "z")

    def __init__(self, vhat: float):
        self.vhat = float(vhat)
        self.at_mass = 0.0  # weight of the vhat class admitted pre-halving
        self.z = 0.0

    def step(self, value: float, weight: float) -> float:
        if values_equal(value, self.vhat):
            temp = 1.0 - self.at_mass
            if weight < temp:
                temp = weight
            if temp < 0.0:
                temp = 0.0
            self.at_mass += temp
            x = temp / 2.0
        elif value > self.vhat:
            x = weight / 2.0
        else:
            return 0.0
        room = 1.0 - self.z
        if x > room:
            x = room
        if x < 0.0:
            x = 0.0
        self.z += x
        return x

    @property
    def utilization(self) -> float:
        return self.z


class AdaptiveReserve:
    """Scale every acceptance by 1/(1+omega), omega = critical weight so far.

    Above-prediction items get weight/(1+omega).  At-prediction items
    first claim m = min(weight, 1-omega) of the critical budget, then
    receive (1-s) * m/(1+omega') where s is the utilization before the
    step and omega' the updated budget, which tops the load up to
    exactly (omega' + above_weight)/(1+omega').  Once omega reaches 1
    the budget is spent and at-class items are ignored.
    """

    __slots__ = ("vhat", "omega", "tilde", "s")

    def __init__(self, vhat: float):
        self.vhat = float(vhat)
        self.omega = 0.0  # vhat-class weight claimed so far, capped at 1
        self.tilde = 0.0  # total weight seen strictly above vhat
        self.s = 0.0

    def step(self, value: float, weight: float) -> float:
        s = self.s
        if values_equal(value, self.vhat):
            m = 1.0 - self.omega
            if weight < m:
                m = weight
            if m < 0.0:
                m = 0.0
            self.omega += m
            q = m / (1.0 + self.omega)
            x = q - s * q
        elif value > self.vhat:
            self.tilde += weight
            x = weight / (1.0 + self.omega)
        else:
            return 0.0
        room = 1.0 - s
        if x > room:
            x = room
        if x < 0.0:
            x = 0.0
        self.s = s + x
        return x

    @property
    def utilization(self) -> float:
        return self.s


class IntervalAware:
    """Trust only a range [lo, hi] said to contain the critical value.

    Values above the range are bought at rate 1/(alpha+1) of their
    weight (they are certainly worth taking); values inside the range
    are delegated to a nested Threshold machine on [lo, hi] running on
    its own virtual knapsack, scaled by alpha/(alpha+1); values below
    the range are dropped.  alpha = 1 + ln(hi/lo).  Range endpoints
    count as inside.
    """

    __slots__ = ("lo", "hi", "alpha", "inner", "s")

    def __init__(self, lo: float, hi: float):
        lo = float(lo)
        hi = float(hi)
        if not (0.0 < lo <= hi):
            raise ConfigError(f"interval needs 0 < lo <= hi, got ({lo}, {hi})")
        self.lo = lo
        self.hi = hi
        self.alpha = 1.0 + math.log(hi / lo)
        self.inner = Threshold(lo, hi)
        self.s = 0.0

    def step(self, value: float, weight: float) -> float:
        if value > self.hi and not values_equal(value, self.hi):
            x = weight / (self.alpha + 1.0)
        elif value < self.lo and not values_equal(value, self.lo):
            return 0.0
        else:
            xt = self.inner.step(value, weight)
            x = xt * (self.alpha / (self.alpha + 1.0))
        room = 1.0 - self.s
        if x > room:
            x = room
        if x < 0.0:
            x = 0.0
        self.s += x
        return x

    @property
    def utilization(self) -> float:
        return self.s


class Mixture:
    """Convex blend of a prediction machine and a no-prediction Threshold.

    Both nested machines run untouched on their own virtual unit
    knapsacks; the real acceptance is lam * (prediction move) +
    (1-lam) * (threshold move).  The blend is feasible because each
    side is, and it inherits lam of the prediction machine's profit and
    (1-lam) of the threshold's.
    """

    __slots__ = ("lam", "pred", "robust", "s")

    def __init__(self, lam: float, pred, robust):
        lam = float(lam)
        if not (0.0 < lam < 1.0):
            raise ConfigError(f"mixing weight must be in (0, 1), got {lam}")
        self.lam = lam
        self.pred = pred
        self.robust = robust
        self.s = 0.0

    def step(self, value: float, weight: float) -> float:
        xp = self.pred.step(value, weight)
        xr = self.robust.step(value, weight)
        x = self.lam * xp + (1.0 - self.lam) * xr
        room = 1.0 - self.s
        if x > room:
            x = room
        if x < 0.0:
            x = 0.0
        self.s += x
        return x

    @property
    def utilization(self) -> float:
        return self.s

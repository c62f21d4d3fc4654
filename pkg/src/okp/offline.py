"""Offline benchmarks: fractional optimum, critical value, exact integral optimum.

The fractional optimum sorts items by value (descending, ties broken by
arrival index) and fills the knapsack greedily, splitting the boundary
item.  The critical value is the value of that boundary item: the
smallest value v such that the items strictly more valuable than v do
not fill the knapsack on their own.  Algorithms that trust a prediction
of the critical value only ever need this one number.

If the whole instance weighs less than the capacity, a virtual item
with value 0 and weight 1 is appended before computing the critical
value, so the boundary always exists (and the critical value is 0 when
everything fits).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    FEAS_TOL,
    VALUE_ABS_TOL,
    VALUE_REL_TOL,
    ConfigError,
    Instance,
    Solution,
)


@dataclass(frozen=True)
class CriticalInfo:
    """Critical value, the total weight at it, and the fractional optimum.

    ``omegahat`` is reported uncapped (it can exceed 1); consumers that
    need the capped version take min(1, omegahat).  When the instance
    under-fills the knapsack, the virtual (0, 1) item's weight is part
    of omegahat.
    """

    vhat: float
    omegahat: float
    opt_profit: float


def fractional_opt(instance: Instance) -> Solution:
    """Greedy fill by descending value; returns decisions in arrival order."""
    v = instance.values
    w = instance.weights
    n = v.size
    x = np.zeros(n)
    if n:
        order = np.argsort(-v, kind="stable")
        ws = w[order]
        before = np.cumsum(ws) - ws  # capacity used before each sorted item
        take = np.minimum(ws, np.maximum(1.0 - before, 0.0))
        x[order] = take
    return Solution(x, v, w)


def critical_value(instance: Instance) -> CriticalInfo:
    """Critical value and the total weight tied at it (uncapped)."""
    v = instance.values
    w = instance.weights
    opt = fractional_opt(instance).profit
    if float(w.sum()) < 1.0:
        # everything fits; pad with the virtual zero-value filler
        v = np.append(v, 0.0)
        w = np.append(w, 1.0)
    order = np.argsort(-v, kind="stable")
    cw = np.cumsum(w[order])
    p = int(np.searchsorted(cw, 1.0, side="left"))
    if p >= v.size:  # total weight >= 1 is guaranteed after padding
        p = v.size - 1
    vhat = float(v[order[p]])
    tol = np.maximum(VALUE_ABS_TOL, VALUE_REL_TOL * np.maximum(np.abs(v), abs(vhat)))
    at = np.abs(v - vhat) <= tol
    omegahat = float(w[at].sum())
    return CriticalInfo(vhat=vhat, omegahat=omegahat, opt_profit=opt)


_ENUM_LIMIT = 30


def integral_opt_bruteforce(
    instance: Instance, method: str = "enum", grid: int | None = None
) -> float:
    """Exact optimum when items must be taken whole or not at all.

    method="enum" explores subsets with a depth-first search pruned by
    the fractional relaxation (instances up to 30 items).  Subset
    feasibility is judged at the package utilization tolerance, so a
    subset whose weights sum to 1 up to float rounding still counts.
    method="grid" runs a capacity-indexed dynamic program and requires
    every weight to be a multiple of 1/grid.
    """
    if method == "grid":
        if not grid or grid <= 0:
            raise ConfigError("grid method needs a positive grid resolution")
        return _integral_grid(instance, int(grid))
    if method != "enum":
        raise ConfigError(f"unknown integral method {method!r}")
    if instance.n > _ENUM_LIMIT:
        raise ConfigError(
            f"enumeration limited to {_ENUM_LIMIT} items, got {instance.n}"
        )
    v = instance.values
    w = instance.weights
    # only items that fit alone can ever be in an integral solution
    keep = w <= 1.0 + FEAS_TOL
    v = v[keep]
    w = w[keep]
    order = np.argsort(-v, kind="stable")
    v = v[order]
    w = w[order]
    profits = v * w
    n = v.size
    # suffix fractional bound for pruning: best profit achievable from
    # position i with the given remaining capacity
    best = 0.0

    def bound(i: int, cap: float) -> float:
        total = 0.0
        for j in range(i, n):
            if cap <= 0.0:
                break
            take = w[j] if w[j] <= cap else cap
            total += take * v[j]
            cap -= take
        return total

    def dfs(i: int, cap: float, acc: float) -> None:
        nonlocal best
        if acc > best:
            best = acc
        if i >= n or cap <= 0.0:
            return
        # the bound must cover the feasibility slack the take branch
        # grants, or it could prune a subset that rule would accept
        if acc + bound(i, cap + FEAS_TOL * (n - i)) <= best + 1e-15:
            return
        if w[i] <= cap + FEAS_TOL:
            dfs(i + 1, cap - w[i], acc + profits[i])
        dfs(i + 1, cap, acc)

    dfs(0, 1.0, 0.0)
    return best


def _integral_grid(instance: Instance, grid: int) -> float:
    v = instance.values
    w = instance.weights
    units = np.rint(w * grid)
    if np.abs(w * grid - units).max(initial=0.0) > 1e-9 * grid:
        raise ConfigError("grid method needs weights on multiples of 1/grid")
    dp = np.zeros(grid + 1)
    for val, wt, k in zip(v, w, units.astype(np.int64)):
        if k > grid:
            continue
        profit = val * wt
        if k == 0:
            dp += profit  # zero-width item is free to take
            continue
        shifted = dp[:-k] + profit
        dp[k:] = np.maximum(dp[k:], shifted)
    return float(dp[-1])

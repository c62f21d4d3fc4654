"""Converters from external CSV data to Instance objects.

Two sources are supported: a price series (numeric `price` column, any
other columns ignored) and a workload trace (numeric `duration`
column).  Ingestion is a pure function of the file bytes, the spec, and
the seed: re-running it reproduces the same instance.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .core import ConfigError, DataError, Instance
from .instgen import substream


@dataclass(frozen=True)
class IngestSpec:
    source: str = "price-series"
    sample_n: int = 1000
    item_weight: float = 0.001
    duration_scale_range: tuple[float, float] = (1.0, 250.0)
    resource_factors: tuple[float, ...] = (0.01, 0.03, 0.05)
    seed: int = 0

    def __post_init__(self):
        if self.source not in ("price-series", "duration-trace"):
            raise ConfigError(f"unknown ingest source {self.source!r}")
        if self.sample_n < 1:
            raise ConfigError(f"sample_n must be at least 1, got {self.sample_n}")
        if not (0.0 < self.item_weight):
            raise ConfigError(f"item_weight must be positive, got {self.item_weight}")
        lo, hi = self.duration_scale_range
        if not (0.0 < lo <= hi):
            raise ConfigError(f"bad duration_scale_range ({lo}, {hi})")
        if not self.resource_factors or any(f <= 0.0 for f in self.resource_factors):
            raise ConfigError("resource_factors must be positive and non-empty")


def _read_column(path: str, column: str) -> np.ndarray:
    out = []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"{path}: {exc}") from None
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or column not in reader.fieldnames:
            raise DataError(f"{path}: no {column!r} column in header")
        for row in reader:
            raw = row.get(column)
            if raw is None or raw.strip() == "":
                continue
            try:
                val = float(raw)
            except ValueError:
                raise DataError(
                    f"{path}:{reader.line_num}: bad {column} value {raw!r}"
                ) from None
            if not np.isfinite(val) or val <= 0.0:
                raise DataError(
                    f"{path}:{reader.line_num}: {column} must be finite and positive,"
                    f" got {raw!r}"
                )
            out.append(val)
    if not out:
        raise DataError(f"{path}: no usable {column} rows")
    return np.asarray(out)


def _sample(rng: np.random.Generator, data: np.ndarray, n: int) -> np.ndarray:
    # without replacement when the file is large enough, with otherwise
    return rng.choice(data, size=n, replace=n > data.size)


def load_price_series(path: str, spec: IngestSpec) -> Instance:
    """Sampled prices become unit values; every item gets the same weight."""
    prices = _read_column(path, "price")
    rng = substream(spec.seed)
    values = _sample(rng, prices, spec.sample_n)
    weights = np.full(values.size, spec.item_weight)
    return Instance(values, weights, bounds=(float(values.min()), float(values.max())))


def load_duration_trace(path: str, spec: IngestSpec) -> Instance:
    """Sampled durations, each scaled by a uniform draw from
    duration_scale_range and a random resource factor, become unit
    values; every item gets the same weight."""
    durations = _read_column(path, "duration")
    rng = substream(spec.seed)
    sampled = _sample(rng, durations, spec.sample_n)
    scales = rng.uniform(*spec.duration_scale_range, size=sampled.size)
    factors = rng.choice(np.asarray(spec.resource_factors), size=sampled.size)
    values = sampled * scales * factors
    weights = np.full(values.size, spec.item_weight)
    return Instance(values, weights, bounds=(float(values.min()), float(values.max())))


def load(path: str, spec: IngestSpec) -> Instance:
    if spec.source == "price-series":
        return load_price_series(path, spec)
    return load_duration_trace(path, spec)

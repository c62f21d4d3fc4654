"""Experiment driver.

Runs (instance x algorithm x prediction) grids, computes empirical
ratios against the fractional offline optimum, and serializes the
records.  Ratios are OPT/ALG, so 1 is perfect and larger is worse; the
fractional optimum is also the benchmark for integral (conv-wrapped)
runs, which makes those ratios conservative.

Parallelism is across instances only; items within an instance are
always processed sequentially, preserving the online semantics.
Records come back in deterministic (instance, algorithm, prediction)
config order regardless of worker scheduling, and reruns with the same
config and seed produce byte-identical CSVs.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .core import ConfigError, DataError, Instance
from .instgen import (
    GenSpec,
    generate,
    make_prediction,
    parse_prediction,
    substream,
)
from .offline import critical_value, fractional_opt
from .runner import parse_algorithm, run_spec

RECORD_FIELDS = (
    "instance_id",
    "algorithm",
    "prediction",
    "profit",
    "opt_profit",
    "ratio",
    "utilization",
    "vhat",
    "omegahat",
    "error",
)


@dataclass(frozen=True)
class RunRecord:
    instance_id: str
    algorithm: str
    prediction: str
    profit: float
    opt_profit: float
    ratio: float
    utilization: float
    vhat: float
    omegahat: float
    error: str = ""


def empirical_cr(alg_profit: float, opt_profit: float) -> float:
    """OPT/ALG with the conventions: opt = 0 gives 1, a zero-profit run
    against positive opt gives +inf."""
    if alg_profit < 0.0 or opt_profit < 0.0:
        raise DataError(
            f"profits must be non-negative, got ({alg_profit}, {opt_profit})"
        )
    if opt_profit == 0.0:
        return 1.0
    if alg_profit == 0.0:
        return math.inf
    return opt_profit / alg_profit


def cdf(ratios) -> list[tuple[float, float]]:
    """Empirical CDF as (value, cumulative fraction) pairs, duplicates
    collapsed to their last (highest) fraction; +inf sorts last."""
    xs = sorted(float(r) for r in ratios)
    if not xs:
        raise ConfigError("cdf needs at least one ratio")
    if any(math.isnan(x) for x in xs):
        raise DataError("cdf input contains nan")
    n = len(xs)
    out: list[tuple[float, float]] = []
    for k, x in enumerate(xs, start=1):
        if out and out[-1][0] == x:
            out[-1] = (x, k / n)
        else:
            out.append((x, k / n))
    return out


@dataclass(frozen=True)
class SweepConfig:
    """One sweep: an instance source, algorithm specs, prediction specs.

    Instances come either from explicit CSV paths or from a seeded
    generator family (`generator` + `count`), never both.
    """

    algorithms: tuple[str, ...]
    predictions: tuple[str, ...] = ()
    instances: tuple[str, ...] = ()
    generator: GenSpec | None = None
    count: int = 0
    parallelism: int = 1
    out_dir: str = "."
    seed: int = 0
    backend: str | None = None

    def __post_init__(self):
        if not self.algorithms:
            raise ConfigError("sweep needs at least one algorithm")
        if self.instances and self.generator is not None:
            raise ConfigError("give either instance paths or a generator, not both")
        if not self.instances:
            if self.generator is None:
                raise ConfigError("sweep needs instances or a generator")
            if self.count < 1:
                raise ConfigError("generator sweeps need count >= 1")
        for a in self.algorithms:
            parse_algorithm(a)
        for p in self.predictions:
            if p:
                parse_prediction(p)
        if self.parallelism < 1:
            raise ConfigError(f"parallelism must be >= 1, got {self.parallelism}")


_CONFIG_LIST_KEYS = ("algorithms", "predictions", "instances")
_CONFIG_SCALAR_KEYS = ("generator", "count", "parallelism", "out", "seed", "backend")


def parse_sweep_config(path: str) -> SweepConfig:
    """Flat `key = value` lines; `#` starts a comment; arrays are
    comma-separated.  Keys not in the fixed set are treated as generator
    parameters.  Relative instance paths resolve against the config
    file's directory."""
    lists: dict[str, tuple[str, ...]] = {}
    scalars: dict[str, str] = {}
    gen_params: dict[str, str] = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    with fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, raw = text.partition("=")
            key = key.strip().lower()
            raw = raw.strip()
            if key in _CONFIG_LIST_KEYS:
                lists[key] = tuple(t.strip() for t in raw.split(",") if t.strip())
            elif key in _CONFIG_SCALAR_KEYS:
                scalars[key] = raw
            else:
                gen_params[key] = raw
    base = os.path.dirname(os.path.abspath(path))
    instances = tuple(
        p if os.path.isabs(p) else os.path.join(base, p)
        for p in lists.get("instances", ())
    )
    seed = _config_int(scalars.get("seed", "0"), "seed", path)
    gen = None
    if "generator" in scalars:
        gen = GenSpec(scalars["generator"], seed=seed, params=gen_params)
    elif gen_params:
        extra = ", ".join(sorted(gen_params))
        raise ConfigError(f"{path}: unknown keys without a generator: {extra}")
    out_dir = scalars.get("out", ".")
    if not os.path.isabs(out_dir):
        out_dir = os.path.join(base, out_dir)
    return SweepConfig(
        algorithms=lists.get("algorithms", ()),
        predictions=lists.get("predictions", ()),
        instances=instances,
        generator=gen,
        count=_config_int(scalars.get("count", "0"), "count", path),
        parallelism=_config_int(scalars.get("parallelism", "1"), "parallelism", path),
        out_dir=out_dir,
        seed=seed,
        backend=scalars.get("backend") or None,
    )


def _config_int(raw: str, key: str, path: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{path}: {key} must be an integer, got {raw!r}") from None


def write_meta(path: str, meta: dict) -> None:
    """Sidecar metadata: flat `key = value` lines next to an instance CSV."""
    with open(path, "w") as fh:
        for key, val in meta.items():
            fh.write(f"{key} = {val}\n")


def read_meta(path: str) -> dict:
    meta: dict[str, str] = {}
    try:
        fh = open(path)
    except OSError:
        return meta
    with fh:
        for line in fh:
            text = line.split("#", 1)[0].strip()
            if not text or "=" not in text:
                continue
            key, _, raw = text.partition("=")
            meta[key.strip()] = raw.strip()
    return meta


def load_instance(path: str) -> Instance:
    """Instance CSV plus optional `<path>.meta` sidecar.

    Value bounds come from the sidecar's lo/hi keys when present, else
    fall back to the observed (min, max) of the values (skipped when a
    zero value makes that an invalid range)."""
    inst = Instance.from_csv(path)
    meta = read_meta(path + ".meta")
    if "lo" in meta and "hi" in meta:
        try:
            bounds = (float(meta["lo"]), float(meta["hi"]))
        except ValueError:
            raise DataError(f"{path}.meta: bad lo/hi values") from None
        return Instance(inst.values, inst.weights, bounds=bounds)
    if inst.n and inst.values.min() > 0.0:
        return Instance(
            inst.values,
            inst.weights,
            bounds=(float(inst.values.min()), float(inst.values.max())),
        )
    return inst


def _materialize(config: SweepConfig) -> list[tuple[str, Instance]]:
    if config.instances:
        return [(os.path.basename(p), load_instance(p)) for p in config.instances]
    out = []
    for i in range(config.count):
        inst = generate(config.generator, index=i)
        if not isinstance(inst, Instance):
            raise ConfigError(
                f"generator kind {config.generator.kind!r} produces an instance"
                " family; write it out with `okp generate` and sweep the files"
            )
        out.append((f"{config.generator.kind}-{i:05d}", inst))
    return out


def _run_cell(
    instance_id: str,
    instance: Instance,
    alg: str,
    pred_label: str,
    prediction,
    opt: float,
    vhat: float,
    omegahat: float,
    backend: str | None,
) -> RunRecord:
    base = RunRecord(
        instance_id=instance_id,
        algorithm=alg,
        prediction=pred_label or "none",
        profit=math.nan,
        opt_profit=opt,
        ratio=math.nan,
        utilization=math.nan,
        vhat=vhat,
        omegahat=omegahat,
    )
    try:
        sol = run_spec(alg, instance, prediction, backend=backend)
        return replace(
            base,
            profit=sol.profit,
            ratio=empirical_cr(sol.profit, opt),
            utilization=sol.utilization,
        )
    except Exception as exc:  # record the failure, keep sweeping
        return replace(base, error=f"{type(exc).__name__}: {exc}")


def _sweep_one(args) -> list[RunRecord]:
    inst_index, instance_id, instance, config = args
    preds = config.predictions or ("",)
    opt = fractional_opt(instance).profit
    info = critical_value(instance)
    records = []
    predictions = []
    for p_idx, p in enumerate(preds):
        if not p:
            predictions.append((p, None))
            continue
        rng = substream(config.seed, inst_index * len(preds) + p_idx)
        try:
            pred = make_prediction(instance, parse_prediction(p), rng)
        except Exception as exc:
            predictions.append((p, exc))
            continue
        predictions.append((p, pred))
    for alg in config.algorithms:
        for p, pred in predictions:
            if isinstance(pred, Exception):
                records.append(
                    RunRecord(
                        instance_id=instance_id,
                        algorithm=alg,
                        prediction=p,
                        profit=math.nan,
                        opt_profit=opt,
                        ratio=math.nan,
                        utilization=math.nan,
                        vhat=info.vhat,
                        omegahat=info.omegahat,
                        error=f"{type(pred).__name__}: {pred}",
                    )
                )
                continue
            records.append(
                _run_cell(
                    instance_id,
                    instance,
                    alg,
                    p,
                    pred,
                    opt,
                    info.vhat,
                    info.omegahat,
                    config.backend,
                )
            )
    return records


def run_sweep(config: SweepConfig) -> list[RunRecord]:
    """The full grid, in config order: instances outermost, then
    algorithms, then predictions.  Per-cell failures become error rows."""
    work = [
        (i, instance_id, inst, config)
        for i, (instance_id, inst) in enumerate(_materialize(config))
    ]
    if config.parallelism > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=config.parallelism) as pool:
            chunks = list(pool.map(_sweep_one, work, chunksize=8))
    else:
        chunks = [_sweep_one(item) for item in work]
    return [rec for chunk in chunks for rec in chunk]


def write_records(records, path: str) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(RECORD_FIELDS)
        for rec in records:
            wr.writerow(
                [
                    rec.instance_id,
                    rec.algorithm,
                    rec.prediction,
                    repr(rec.profit),
                    repr(rec.opt_profit),
                    repr(rec.ratio),
                    repr(rec.utilization),
                    repr(rec.vhat),
                    repr(rec.omegahat),
                    rec.error,
                ]
            )


def read_records(path: str) -> list[RunRecord]:
    out = []
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd, None)
        if header is None or tuple(h.strip() for h in header) != RECORD_FIELDS:
            raise DataError(f"{path}: not a sweep records file")
        for lineno, row in enumerate(rd, start=2):
            if not row:
                continue
            if len(row) != len(RECORD_FIELDS):
                raise DataError(f"{path}:{lineno}: expected {len(RECORD_FIELDS)} columns")
            try:
                out.append(
                    RunRecord(
                        instance_id=row[0],
                        algorithm=row[1],
                        prediction=row[2],
                        profit=float(row[3]),
                        opt_profit=float(row[4]),
                        ratio=float(row[5]),
                        utilization=float(row[6]),
                        vhat=float(row[7]),
                        omegahat=float(row[8]),
                        error=row[9],
                    )
                )
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    return out


def report_cdf(records) -> list[tuple[str, str, float, float]]:
    """Per (algorithm, prediction) group, the CDF of finite-or-inf
    ratios.  Error rows are excluded; groups with nothing left are
    dropped."""
    groups: dict[tuple[str, str], list[float]] = {}
    order: list[tuple[str, str]] = []
    for rec in records:
        if rec.error or math.isnan(rec.ratio):
            continue
        key = (rec.algorithm, rec.prediction)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(rec.ratio)
    rows = []
    for key in order:
        for ratio, frac in cdf(groups[key]):
            rows.append((key[0], key[1], ratio, frac))
    return rows

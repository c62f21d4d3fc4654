"""Command line front end.

Subcommands:

    okp generate  seeded instance families to CSV (+ .meta sidecars)
    okp ingest    external price/duration CSVs to instance CSVs
    okp run       one algorithm over one instance, decisions to CSV
    okp sweep     an (instances x algorithms x predictions) grid
    okp report    summaries / CDFs over sweep records

Exit codes: 0 success, 1 bad configuration or arguments, 2 bad or
unreadable data, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import glob
import math
import os
import sys

from .core import (
    EXIT_CONFIG,
    EXIT_DATA,
    EXIT_INVARIANT,
    EXIT_OK,
    ConfigError,
    DataError,
    Instance,
    InvariantError,
)
from .harness import (
    load_instance,
    parse_sweep_config,
    read_records,
    report_cdf,
    run_sweep,
    write_meta,
    write_records,
)
from .ingest import IngestSpec, load
from .instgen import GenSpec, generate, make_prediction, parse_prediction, substream
from .offline import critical_value, fractional_opt
from .runner import available_backends, run_spec


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 1, not argparse's default 2
        raise ConfigError(message)


def _build() -> argparse.ArgumentParser:
    parser = _Parser(prog="okp", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("generate", help="write seeded instance families")
    g.add_argument("--kind", required=True, help="generator kind (powerlaw, ...)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--count", type=int, default=1, help="instances to generate")
    g.add_argument(
        "--param",
        "-p",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="generator parameter, repeatable",
    )
    g.add_argument(
        "--out",
        required=True,
        help="output CSV (count=1) or directory (count>1 or family kinds)",
    )
    g.set_defaults(func=_cmd_generate)

    i = sub.add_parser("ingest", help="convert external CSV data to an instance")
    i.add_argument("--source", required=True, choices=["price", "trace"])
    i.add_argument("--in", dest="infile", required=True)
    i.add_argument("--n", type=int, default=1000, help="items to sample")
    i.add_argument("--weight", type=float, default=0.001, help="weight per item")
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--out", required=True)
    i.set_defaults(func=_cmd_ingest)

    r = sub.add_parser("run", help="run one algorithm over one instance")
    r.add_argument("--alg", required=True, help="algorithm spec, e.g. ma:0.5:ppa")
    r.add_argument("--pred", default="", help="prediction spec, e.g. exact")
    r.add_argument("--instance", required=True, help="instance CSV")
    r.add_argument("--seed", type=int, default=0, help="seed for randomized predictions")
    r.add_argument("--backend", choices=["py", "c"], default=None)
    r.add_argument("--out", default="", help="write decisions CSV here")
    r.set_defaults(func=_cmd_run)

    s = sub.add_parser("sweep", help="run a config-driven grid")
    s.add_argument("--config", required=True, help="flat key = value config file")
    s.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("report", help="summarize sweep records")
    p.add_argument("--in", dest="indir", required=True, help="records CSV or directory")
    p.add_argument("--cdf", action="store_true", help="emit per-group ratio CDFs")
    p.add_argument("--out", default="", help="output CSV (default stdout)")
    p.set_defaults(func=_cmd_report)

    b = sub.add_parser("backends", help="list decision-loop backends")
    b.set_defaults(func=_cmd_backends)

    return parser


def main(argv=None) -> int:
    parser = _build()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "func"):
            parser.print_help()
            return EXIT_CONFIG
        return args.func(args)
    except ConfigError as exc:
        return _fail(exc, EXIT_CONFIG)
    except DataError as exc:
        return _fail(exc, EXIT_DATA)
    except InvariantError as exc:
        return _fail(exc, EXIT_INVARIANT)
    except OSError as exc:
        return _fail(exc, EXIT_DATA)


def _fail(exc: Exception, code: int) -> int:
    print(f"okp: {exc}", file=sys.stderr)
    return code


def _parse_params(pairs) -> dict:
    params = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--param needs KEY=VALUE, got {pair!r}")
        key, _, val = pair.partition("=")
        params[key.strip()] = val.strip()
    return params


def _instance_meta(inst: Instance, spec: GenSpec, tag) -> dict:
    info = critical_value(inst)
    meta = {"kind": spec.kind, "seed": spec.seed, "index": tag}
    for key, val in spec.params.items():
        meta[key] = val
    if inst.bounds is not None:
        meta["lo"] = repr(inst.bounds[0])
        meta["hi"] = repr(inst.bounds[1])
    meta["vhat"] = repr(info.vhat)
    meta["omegahat"] = repr(info.omegahat)
    meta["opt"] = repr(fractional_opt(inst).profit)
    return meta


def _write_instance(inst: Instance, path: str, spec: GenSpec, tag) -> None:
    inst.to_csv(path)
    write_meta(path + ".meta", _instance_meta(inst, spec, tag))


def _cmd_generate(args) -> int:
    spec = GenSpec(args.kind, seed=args.seed, params=_parse_params(args.param))
    if args.count < 1:
        raise ConfigError(f"--count must be at least 1, got {args.count}")
    first = generate(spec, index=0)
    if isinstance(first, Instance):
        single_file = args.count == 1 and args.out.endswith(".csv")
        if single_file:
            _write_instance(first, args.out, spec, 0)
            print(args.out)
            return EXIT_OK
        os.makedirs(args.out, exist_ok=True)
        for i in range(args.count):
            inst = first if i == 0 else generate(spec, index=i)
            path = os.path.join(args.out, f"{spec.kind}-{i:05d}.csv")
            _write_instance(inst, path, spec, i)
        print(f"{args.count} instances -> {args.out}")
        return EXIT_OK
    # family kinds return a tuple/list and ignore --count
    if args.count != 1:
        raise ConfigError(f"kind {spec.kind!r} produces a fixed family; drop --count")
    members = list(first)
    names = getattr(first, "_fields", None) or [str(j) for j in range(len(members))]
    os.makedirs(args.out, exist_ok=True)
    for name, inst in zip(names, members):
        path = os.path.join(args.out, f"{spec.kind}-{name}.csv")
        _write_instance(inst, path, spec, name)
    print(f"{len(members)} instances -> {args.out}")
    return EXIT_OK


def _cmd_ingest(args) -> int:
    source = "price-series" if args.source == "price" else "duration-trace"
    spec = IngestSpec(
        source=source, sample_n=args.n, item_weight=args.weight, seed=args.seed
    )
    inst = load(args.infile, spec)
    inst.to_csv(args.out)
    info = critical_value(inst)
    meta = {
        "kind": f"ingest-{args.source}",
        "source": os.path.basename(args.infile),
        "seed": args.seed,
        "n": args.n,
        "weight": repr(args.weight),
        "lo": repr(inst.bounds[0]),
        "hi": repr(inst.bounds[1]),
        "vhat": repr(info.vhat),
        "omegahat": repr(info.omegahat),
        "opt": repr(fractional_opt(inst).profit),
    }
    write_meta(args.out + ".meta", meta)
    print(args.out)
    return EXIT_OK


def _cmd_run(args) -> int:
    inst = load_instance(args.instance)
    prediction = None
    if args.pred:
        prediction = make_prediction(
            inst, parse_prediction(args.pred), substream(args.seed, 0)
        )
    sol = run_spec(args.alg, inst, prediction, backend=args.backend)
    opt = fractional_opt(inst).profit
    ratio = opt / sol.profit if sol.profit > 0.0 else (1.0 if opt == 0.0 else math.inf)
    if args.out:
        sol.to_csv(args.out)
    print(
        f"profit={sol.profit:.6g} opt={opt:.6g} ratio={ratio:.6g}"
        f" utilization={sol.utilization:.6g}"
    )
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = parse_sweep_config(args.config)
    records = run_sweep(config)
    os.makedirs(config.out_dir, exist_ok=True)
    path = os.path.join(config.out_dir, "records.csv")
    write_records(records, path)
    errors = sum(1 for r in records if r.error)
    note = f" ({errors} error rows)" if errors else ""
    print(f"{len(records)} records{note} -> {path}")
    return EXIT_OK


def _cmd_report(args) -> int:
    if os.path.isdir(args.indir):
        paths = sorted(glob.glob(os.path.join(args.indir, "records*.csv")))
        if not paths:
            raise DataError(f"{args.indir}: no records*.csv files")
    else:
        paths = [args.indir]
    records = [rec for p in paths for rec in read_records(p)]
    if not records:
        raise DataError("no records to report on")
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        wr = csv.writer(out)
        if args.cdf:
            wr.writerow(["algorithm", "prediction", "ratio", "cum_fraction"])
            for alg, pred, ratio, frac in report_cdf(records):
                wr.writerow([alg, pred, repr(ratio), repr(frac)])
        else:
            wr.writerow(
                ["algorithm", "prediction", "count", "errors", "mean_ratio", "max_ratio"]
            )
            for alg, pred, stats in _summaries(records):
                wr.writerow([alg, pred, *stats])
    finally:
        if args.out:
            out.close()
    if args.out:
        print(args.out)
    return EXIT_OK


def _summaries(records):
    groups: dict[tuple[str, str], list] = {}
    order = []
    for rec in records:
        key = (rec.algorithm, rec.prediction)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(rec)
    for key in order:
        recs = groups[key]
        ratios = [r.ratio for r in recs if not r.error and not math.isnan(r.ratio)]
        errors = sum(1 for r in recs if r.error)
        if ratios:
            mean = sum(ratios) / len(ratios)
            stats = (len(recs), errors, repr(mean), repr(max(ratios)))
        else:
            stats = (len(recs), errors, "", "")
        yield key[0], key[1], stats


def _cmd_backends(args) -> int:
    for name in available_backends():
        print(name)
    return EXIT_OK

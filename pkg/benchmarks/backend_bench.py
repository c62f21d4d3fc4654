"""Wall-time comparison of the pure Python and compiled decision loops.

Usage: python benchmarks/backend_bench.py [n_items] [n_instances]
"""

import sys
import time

from okp.core import PointPrediction
from okp.instgen import gen_powerlaw
from okp.offline import critical_value
from okp.runner import available_backends, run_spec

ALGS = ["ta", "ppn", "ppb", "ppa", "ipa", "ma:0.5:ppa", "conv:ppa:0.05:0.001"]


def bench(n_items: int, n_instances: int) -> None:
    # Weights are pinned at 1e-3: small enough for the conversion
    # wrapper's item cap, and n_items of them overfill the knapsack so
    # every instance has a real boundary value for the predictions.
    if n_items <= 1000:
        raise SystemExit("need n_items > 1000 so the knapsack overfills")
    instances = [
        gen_powerlaw(n=n_items, seed=7, index=i, constant_weight=1e-3)
        for i in range(n_instances)
    ]
    preds = [PointPrediction(critical_value(ins).vhat) for ins in instances]
    backends = available_backends()
    if backends == ["py"]:
        print("compiled kernels not built; nothing to compare against")
    print(f"{n_instances} instances x {n_items} items, profits cross-checked\n")
    print(f"{'algorithm':<22}" + "".join(f"{b:>10}" for b in backends) + f"{'speedup':>10}")
    for alg in ALGS:
        times = {}
        profits = {}
        for backend in backends:
            start = time.perf_counter()
            total = 0.0
            for inst, pred in zip(instances, preds):
                total += run_spec(alg, inst, pred, backend=backend).profit
            times[backend] = time.perf_counter() - start
            profits[backend] = total
        if len(backends) == 2 and profits["py"] != profits["c"]:
            raise SystemExit(f"{alg}: backend profits diverge: {profits}")
        row = f"{alg:<22}" + "".join(f"{times[b]:>9.3f}s" for b in backends)
        if len(backends) == 2:
            row += f"{times['py'] / times['c']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    n_items = int(sys.argv[1]) if len(sys.argv) > 1 else 20000
    n_instances = int(sys.argv[2]) if len(sys.argv) > 2 else 20
    bench(n_items, n_instances)

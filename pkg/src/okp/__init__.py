"""Online knapsack algorithms with untrusted predictions.

A unit-capacity knapsack, items arriving one at a time as (unit value,
weight) pairs, an irrevocable accept decision per item, and optional
side information about the instance's critical value.  The package
bundles the stepwise algorithms, offline baselines, seeded instance
generators, an integral conversion wrapper, and a sweep harness with a
CLI front end (`okp`).
"""

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
    InvariantError,
    Item,
    PointPrediction,
    Solution,
    check_solution,
    online_run,
    values_equal,
)
from .harness import RunRecord, cdf, empirical_cr, run_sweep
from .instgen import (
    GenSpec,
    PredictionSpec,
    generate,
    make_prediction,
    parse_prediction,
    substream,
)
from .offline import critical_value, fractional_opt, integral_opt_bruteforce
from .runner import (
    AlgSpec,
    available_backends,
    default_backend,
    make_machine,
    parse_algorithm,
    run_spec,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveReserve",
    "AlgSpec",
    "BalancedHalving",
    "ConfigError",
    "DataError",
    "GenSpec",
    "Instance",
    "IntegralWrapper",
    "IntervalAware",
    "IntervalPrediction",
    "InvariantError",
    "Item",
    "Mixture",
    "PointPrediction",
    "PredictedGreedy",
    "PredictionSpec",
    "RunRecord",
    "Solution",
    "Threshold",
    "ValuePartition",
    "available_backends",
    "cdf",
    "check_solution",
    "critical_value",
    "default_backend",
    "empirical_cr",
    "fractional_opt",
    "generate",
    "integral_opt_bruteforce",
    "make_machine",
    "make_prediction",
    "online_run",
    "parse_algorithm",
    "parse_prediction",
    "run_spec",
    "substream",
    "values_equal",
    "__version__",
]

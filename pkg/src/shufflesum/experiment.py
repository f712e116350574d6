"""Protocol planning by name and the seeded experiment runner."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import baselines
from .datasets import DatasetSpec
from .errors import ParameterError
from .ikos import ikos_protocol, mse_bound_ikos, plan_ikos
from .recursive import (
    mse_bound_recursive,
    optimize_recursive_params,
    plan_recursive_basic,
    recursive_protocol,
)
from .sampling import RngStream
from .shuffle import execute, identity_protocol
from .single import best_single_precision, single_message_protocol

REPORT_SCHEMA = "shufflesum.report/1"
PROTOCOLS = (
    "single",
    "recursive",
    "recursive-opt",
    "ikos",
    "central-laplace",
    "local-laplace",
    "local-rr",
    "identity",
)


@dataclass
class Plan:
    """A planned protocol: what it sends, its analytic error and how to run it."""

    protocol: str
    n: int
    epsilon: float
    delta: float
    messages: int | None
    mse_bound: float
    formula: str
    params: Any = None
    estimator: Callable | None = field(default=None, repr=False)

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.mse_bound)

    def summary(self) -> dict:
        return {
            "protocol": self.protocol,
            "n": self.n,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "messages": self.messages,
            "mse_bound": jsonable(self.mse_bound),
            "feasible": self.feasible,
            "formula": self.formula,
            "params": jsonable(self.params),
        }


def jsonable(obj):
    """Convert params/records to JSON-safe values; infinities become "inf"."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    return obj


def _shuffle_estimator(protocol):
    return lambda x, rng: execute(protocol, x, rng)[1]


def plan_protocol(
    protocol: str, n: int, epsilon: float, delta: float | None = None, messages: int | None = None
) -> Plan:
    """Plan ``protocol`` for ``n`` users at ``(epsilon, delta)``.

    ``delta`` defaults to ``1 / n^2``.  ``messages`` is the level count of
    the recursive protocols (default 2).  Infeasible plans come back with
    an infinite bound and no estimator.
    """
    if protocol not in PROTOCOLS:
        raise ParameterError(f"unknown protocol {protocol!r}; choose from {PROTOCOLS}")
    if n < 1:
        raise ParameterError("n must be positive")
    delta = 1.0 / n**2 if delta is None else delta
    if protocol == "single":
        params, bound = best_single_precision(epsilon, delta, n)
        est = _shuffle_estimator(single_message_protocol(params)) if math.isfinite(bound) else None
        return Plan(protocol, n, epsilon, delta, 1, bound, "single:blanket-rr+rounding", params, est)
    if protocol in ("recursive", "recursive-opt"):
        m = messages or 2
        if protocol == "recursive":
            params = plan_recursive_basic(epsilon, delta, n, m)
        else:
            params = optimize_recursive_params(epsilon, delta, n, m)
        bound = mse_bound_recursive(params)
        est = _shuffle_estimator(recursive_protocol(params)) if params.feasible else None
        formula = f"recursive:{params.composition}-composition"
        return Plan(protocol, n, epsilon, delta, m, bound, formula, params, est)
    if protocol == "ikos":
        params = plan_ikos(epsilon, delta, n)
        bound = mse_bound_ikos(epsilon, n, params.p, params.q)
        est = _shuffle_estimator(ikos_protocol(params))
        return Plan(protocol, n, epsilon, delta, params.m_total, bound, "ikos:improved", params, est)
    if protocol == "identity":
        return Plan(protocol, n, epsilon, delta, 1, 0.0, "identity:exact",
                    None, _shuffle_estimator(identity_protocol()))
    kind = {
        "central-laplace": baselines.BaselineKind.CENTRAL_LAPLACE,
        "local-laplace": baselines.BaselineKind.LOCAL_LAPLACE,
        "local-rr": baselines.BaselineKind.LOCAL_RR,
    }[protocol]
    fn, mse = baselines.BASELINES[kind]
    msgs = None if protocol == "central-laplace" else 1
    return Plan(protocol, n, epsilon, delta, msgs, mse(n, epsilon), f"baseline:{kind.value}",
                {"kind": kind.value}, lambda x, rng: fn(x, epsilon, rng))


@dataclass(frozen=True)
class ExperimentConfig:
    protocol: str = "ikos"
    n: int = 10_000
    epsilon: float = 1.0
    delta: float | None = None
    messages: int | None = None
    dataset: DatasetSpec = DatasetSpec()
    runs: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.runs < 1:
            raise ParameterError("runs must be >= 1")

    @property
    def effective_delta(self) -> float:
        return 1.0 / self.n**2 if self.delta is None else self.delta


@dataclass
class ExperimentReport:
    config: dict
    seed: int
    n: int
    plan: dict
    true_sum: float | None
    run_errors: list
    mean_error: float | None
    std_error: float | None
    analytic_mse: float
    schema: str = REPORT_SCHEMA

    def to_dict(self) -> dict:
        return jsonable(dataclasses.asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Run the planned protocol ``config.runs`` times on one dataset.

    Run ``k`` draws from the substream ``(seed, k)``, so results depend only
    on the config.  The per-run error is ``|sum(x) - estimate| / n``; the
    spread across runs uses the sample standard deviation.  An infeasible
    plan yields a report with an infinite bound and no runs.
    """
    data = config.dataset.load(config.n, config.seed)
    n = len(data)
    echo = jsonable(config)
    # the 1/n^2 default follows the dataset actually loaded (CSV data fixes n)
    plan = plan_protocol(config.protocol, n, config.epsilon, config.delta, config.messages)
    if not plan.feasible:
        return ExperimentReport(echo, config.seed, n, plan.summary(), math.fsum(data),
                                [], None, None, math.inf)
    truth = math.fsum(data)
    root = RngStream(config.seed)
    errors = []
    for k in range(config.runs):
        estimate = plan.estimator(data, root.substream(k))
        errors.append(abs(truth - estimate) / n)
    arr = np.asarray(errors)
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return ExperimentReport(echo, config.seed, n, plan.summary(), truth, errors,
                            float(arr.mean()), std, plan.mse_bound)


__all__ = [
    "PROTOCOLS",
    "REPORT_SCHEMA",
    "Plan",
    "plan_protocol",
    "ExperimentConfig",
    "ExperimentReport",
    "run_experiment",
    "jsonable",
]

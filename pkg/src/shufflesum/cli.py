"""Command line entry point: ``shufflesum {plan,bounds,run,security}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .datasets import DatasetSpec
from .errors import ParameterError
from .experiment import PROTOCOLS, ExperimentConfig, jsonable, plan_protocol, run_experiment
from .sampling import RngStream
from .security import (
    TinyInstance,
    component_bound,
    estimate_q_power_components,
    exact_tv_oracle,
    max_admissible_q,
)
from .tables import Scenario, default_scenarios, emit_bounds_table

# config-file keys and the type each is parsed with
CONFIG_KEYS = {
    "protocol": str,
    "n": int,
    "epsilon": float,
    "delta": float,
    "messages": int,
    "runs": int,
    "seed": int,
    "dataset": str,
    "csv_path": str,
    "csv_column": str,
    "normalizer": str,
    "normal_mean": float,
    "normal_std": float,
    "format": str,
    "out": str,
    "trials": int,
    "q": int,
}


def read_config(path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise ParameterError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = CONFIG_KEYS[key](val)
        except ValueError:
            raise ParameterError(f"{path}:{lineno}: bad value for {key}: {val!r}") from None
    return out


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key = value file; command line flags take precedence")
    p.add_argument("--protocol", choices=PROTOCOLS)
    p.add_argument("--n", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float, help="default 1/n^2")
    p.add_argument("--messages", type=int, help="recursive levels (plan, run) or permutations m (security)")
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=("csv", "json", "md"))
    p.add_argument("--out", help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shufflesum", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_plan = sub.add_parser("plan", help="print planned parameters")
    _common(p_plan)
    p_bounds = sub.add_parser("bounds", help="emit the message/MSE comparison table")
    _common(p_bounds)
    p_run = sub.add_parser("run", help="run an experiment and emit a JSON report")
    _common(p_run)
    p_run.add_argument("--runs", type=int)
    p_run.add_argument("--dataset", choices=("ur", "normal", "csv"))
    p_run.add_argument("--csv-path")
    p_run.add_argument("--csv-column")
    p_run.add_argument("--normalizer", help="max | minmax | fixed:D")
    p_run.add_argument("--normal-mean", type=float)
    p_run.add_argument("--normal-std", type=float)
    p_sec = sub.add_parser("security", help="component Monte Carlo and tiny-instance TV oracle")
    _common(p_sec)
    p_sec.add_argument("--q", type=int, help="group order (default: largest admissible)")
    p_sec.add_argument("--trials", type=int)
    p_sec.add_argument("--tiny", action="store_true", help="run the exhaustive TV oracle instead")
    return parser


def _merged(args) -> dict:
    opts = read_config(args.config) if args.config else {}
    for key, val in vars(args).items():
        if key in ("config", "command") or val is None:
            continue
        if key == "tiny" and val is False and "tiny" in opts:
            continue
        opts[key] = val
    return opts


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _cmd_plan(o):
    plan = plan_protocol(o.get("protocol", "ikos"), o.get("n", 10_000), o.get("epsilon", 1.0),
                         o.get("delta"), o.get("messages"))
    return json.dumps(plan.summary(), sort_keys=True, indent=2) + "\n"


def _cmd_bounds(o):
    if "n" in o or "epsilon" in o:
        ns = (o.get("n", 10_000),)
        eps = (o.get("epsilon", 1.0),)
        scenarios = [Scenario(s.kind, s.n, s.epsilon, o.get("delta"), s.m) for s in default_scenarios(ns, eps)]
    else:
        scenarios = default_scenarios()
    return emit_bounds_table(scenarios, o.get("format", "md"))


def _cmd_run(o):
    ds = DatasetSpec(
        kind=o.get("dataset", "ur"),
        mean=o.get("normal_mean", 0.573),
        std=o.get("normal_std", 0.1),
        csv_path=o.get("csv_path"),
        csv_column=o.get("csv_column"),
        normalizer=o.get("normalizer", "max"),
    )
    cfg = ExperimentConfig(
        protocol=o.get("protocol", "ikos"),
        n=o.get("n", 10_000),
        epsilon=o.get("epsilon", 1.0),
        delta=o.get("delta"),
        messages=o.get("messages"),
        dataset=ds,
        runs=o.get("runs", 20),
        seed=o.get("seed", 0),
    )
    return run_experiment(cfg).to_json()


def _cmd_security(o):
    seed = o.get("seed", 0)
    if o.get("tiny"):
        reports = []
        for n in (2, 3):
            for m in (2, 3):
                for q in (2, 3):
                    reports.append(exact_tv_oracle(TinyInstance(n, m, q)).as_dict())
        return json.dumps(jsonable(reports), sort_keys=True, indent=2) + "\n"
    n, m = o.get("n", 19), o.get("messages", 3)
    q = o.get("q") or max_admissible_q(n, m)
    trials = o.get("trials", 10_000)
    est, half = estimate_q_power_components(n, m, q, trials, RngStream(seed))
    try:
        bound = component_bound(n, m, q)
    except ParameterError:
        bound = None
    rep = {"n": n, "m": m, "q": q, "trials": trials, "seed": seed, "estimate": est,
           "ci_halfwidth": half, "bound": bound,
           "within_bound": None if bound is None else est <= bound + 3 * half}
    return json.dumps(jsonable(rep), sort_keys=True, indent=2) + "\n"


COMMANDS = {"plan": _cmd_plan, "bounds": _cmd_bounds, "run": _cmd_run, "security": _cmd_security}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = _merged(args)
        text = COMMANDS[args.command](opts)
    except (ValueError, RuntimeError) as exc:
        print(f"shufflesum: error: {exc}", file=sys.stderr)
        return 2
    _emit(text, opts.get("out"))
    return 0


if __name__ == "__main__":
    sys.exit(main())

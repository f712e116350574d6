"""Comparison table of message counts and analytic MSE bounds."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

from .baselines import central_laplace_mse, local_laplace_mse, local_rr_mse
from .errors import ParameterError
from .experiment import jsonable, plan_protocol
from .ikos import messages_prior, messages_original, mse_bound_ikos, plan_ikos
from .recursive import mse_bound_recursive, optimize_recursive_params, plan_recursive_basic

ROW_KINDS = (
    "curator",
    "local-laplace",
    "local-rr",
    "single",
    "recursive",
    "recursive-opt",
    "ikos",
    "ikos-original",
    "ikos-prior",
)
LABELS = {
    "curator": "CuratorDP",
    "local-laplace": "LocalLaplace",
    "local-rr": "LocalDP",
    "single": "Single",
    "recursive": "Recursive",
    "recursive-opt": "Recursive (opt)",
    "ikos": "IKOS (Improved)",
    "ikos-original": "IKOS (Original)",
    "ikos-prior": "Prior bound",
}
NO_MESSAGES = "-"


@dataclass(frozen=True)
class Scenario:
    kind: str
    n: int
    epsilon: float
    delta: float | None = None
    m: int | None = None

    @property
    def effective_delta(self) -> float:
        return 1.0 / self.n**2 if self.delta is None else self.delta


def bound_row(s: Scenario) -> dict:
    """One table row: messages per user, analytic MSE and the formula used."""
    if s.kind not in ROW_KINDS:
        raise ParameterError(f"unknown row kind {s.kind!r}")
    d = s.effective_delta
    label = LABELS[s.kind]
    if s.kind == "curator":
        msgs, mse, formula = NO_MESSAGES, central_laplace_mse(s.epsilon), "2/eps^2"
    elif s.kind == "local-laplace":
        msgs, mse, formula = 1, local_laplace_mse(s.n, s.epsilon), "2n/eps^2"
    elif s.kind == "local-rr":
        msgs, mse, formula = 1, local_rr_mse(s.n, s.epsilon), "n(e^eps/(e^eps-1)^2+1/4)"
    elif s.kind == "single":
        plan = plan_protocol("single", s.n, s.epsilon, d)
        msgs, mse, formula = 1, plan.mse_bound, "min_p blanket-rr(p)/p^2 + n/(4p^2)"
    elif s.kind in ("recursive", "recursive-opt"):
        m = s.m or 2
        label = f"{label} {m}-msg"
        if s.kind == "recursive":
            params = plan_recursive_basic(s.epsilon, d, s.n, m)
        else:
            params = optimize_recursive_params(s.epsilon, d, s.n, m)
        msgs, mse = m, mse_bound_recursive(params)
        formula = f"n/(4q_m^2)+sum B_j/q_j^2 [{params.composition}]"
    else:
        params = plan_ikos(s.epsilon, d, s.n)
        mse = mse_bound_ikos(s.epsilon, s.n, params.p, params.q)
        log2q = math.log2(params.q)
        if s.kind == "ikos":
            msgs, formula = params.m_total, "ceil((2s+log2 q)/(log2 n-log2 e)+2)"
        elif s.kind == "ikos-original":
            msgs = messages_original(params.sigma, params.q, s.n)
            formula = "fixed point m=1+s+5ceil(log2 q)/2+log2(pi(m+1/2))/4, +log2(n-1)"
        else:
            msgs = messages_prior(params.sigma, log2q, s.n)
            formula = "ceil(100(s+log2 q)/(log2 n-1)+4)"
    return {
        "protocol": label,
        "kind": s.kind,
        "n": s.n,
        "epsilon": s.epsilon,
        "delta": d,
        "messages": msgs,
        "mse": mse,
        "formula": formula,
    }


def default_scenarios(ns=(10_000, 100_000), epsilons=(0.5, 1.0)) -> list:
    """The comparison grid with ``delta = 1/n^2``."""
    out = []
    for kind in ROW_KINDS:
        ms = (2, 3) if kind.startswith("recursive") else (None,)
        for m in ms:
            for n in ns:
                for eps in epsilons:
                    out.append(Scenario(kind, n, eps, None, m))
    return out


def _fmt_mse(v: float) -> str:
    return "inf" if math.isinf(v) else f"{v:.6g}"


def emit_bounds_table(scenarios, fmt: str = "md") -> str:
    """Render the rows for ``scenarios`` as ``csv``, ``json`` or aligned ``md``."""
    rows = [bound_row(s) for s in scenarios]
    if fmt == "json":
        return json.dumps(jsonable(rows), sort_keys=True, indent=2) + "\n"
    header = ["protocol", "n", "epsilon", "delta", "messages", "mse"]
    cells = [
        [r["protocol"], str(r["n"]), f"{r['epsilon']:g}", f"{r['delta']:.3g}",
         str(r["messages"]), _fmt_mse(r["mse"])]
        for r in rows
    ]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header + ["formula"])
        for c, r in zip(cells, rows):
            w.writerow(c + [r["formula"]])
        return buf.getvalue()
    if fmt == "md":
        widths = [max(len(x) for x in col) for col in zip(header, *cells)]
        line = lambda vals: "| " + " | ".join(v.ljust(w) for v, w in zip(vals, widths)) + " |"
        out = [line(header), "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
        out += [line(c) for c in cells]
        return "\n".join(out) + "\n"
    raise ParameterError(f"unknown format {fmt!r}")


def figure_series_csv(reports) -> str:
    """Rows ``(protocol, n, mean_error, std_error)`` from experiment reports."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["protocol", "n", "mean_error", "std_error"])
    for r in reports:
        w.writerow([r.plan["protocol"], r.n, jsonable(r.mean_error), jsonable(r.std_error)])
    return buf.getvalue()


__all__ = ["Scenario", "bound_row", "default_scenarios", "emit_bounds_table", "figure_series_csv"]

"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that is printed in the pytest terminal
summary (or directly when this file is run as a script).
"""

import json
import math

import numpy as np
import pytest
from scipy import stats

from conftest import ACCEPTANCE_RESULTS
from shufflesum.baselines import central_laplace_mse, local_rr_mse
from shufflesum.cli import main as cli_main
from shufflesum.datasets import gen_uniform
from shufflesum.ikos import (
    IkosParams,
    ikos_protocol,
    messages_prior,
    messages_improved,
    mse_bound_ikos,
    plan_ikos,
    sigma_from_delta,
)
from shufflesum.recursive import (
    mse_bound_recursive,
    optimize_recursive_params,
    plan_recursive_basic,
    recursive_protocol,
)
from shufflesum.sampling import RngStream, discrete_laplace_pmf, randomized_round, sample_polya
from shufflesum.security import (
    TinyInstance,
    component_bound,
    exact_tv_oracle,
    max_admissible_q,
    q_power_mean,
    sample_component_counts,
)
from shufflesum.shuffle import execute
from shufflesum.tables import Scenario, bound_row

TABLE_CELLS = [(10**4, 0.5), (10**4, 1.0), (10**5, 0.5), (10**5, 1.0)]


def record(num, ok, detail):
    ACCEPTANCE_RESULTS[num] = (bool(ok), detail)
    assert ok, detail


def test_criterion_01_golden_message_counts():
    got = [messages_improved(80, 64, 10**6), messages_improved(80, 64, 10**3)]
    for n, eps in TABLE_CELLS:
        sigma = sigma_from_delta(eps, 1 / n**2)
        got.append(messages_improved(sigma, math.log2(plan_ikos(eps, 1 / n**2, n).q), n))
    record(1, got == [15, 29, 9, 9, 9, 9], f"counts {got} vs [15, 29, 9, 9, 9, 9]")


def test_criterion_02_prior_counts():
    headline = messages_prior(80, 64, 10**6)
    printed = [411, 415, 399, 402]
    got = [bound_row(Scenario("ikos-prior", n, e))["messages"] for n, e in TABLE_CELLS]
    rel = [abs(g - p) / p for g, p in zip(got, printed)]
    ok = headline == 765 and max(rel) <= 0.02
    record(2, ok, f"headline {headline}; table cells {got} vs {printed}, max rel diff {max(rel):.4f}")


def test_criterion_03_bounds_table():
    curator = [bound_row(Scenario("curator", n, e))["mse"] for n, e in TABLE_CELLS[:2]]
    local = [bound_row(Scenario("local-rr", n, e))["mse"] for n, e in TABLE_CELLS]
    ikos = [bound_row(Scenario("ikos", n, e))["mse"] for n, e in TABLE_CELLS]
    printed_local = [41677.0, 11706.7, 416769.8, 117067.4]
    printed_ikos = [8.2, 2.2, 8.2, 2.2]
    ok_cur = curator == [8.0, 2.0]
    ok_loc = all(float(f"{a:.4g}") == float(f"{b:.4g}") for a, b in zip(local, printed_local))
    ok_ikos = all(abs(a - b) <= 0.06 for a, b in zip(ikos, printed_ikos))
    detail = (f"curator {curator}; local {[round(v, 1) for v in local]}; "
              f"ikos {[round(v, 4) for v in ikos]}")
    record(3, ok_cur and ok_loc and ok_ikos, detail)


@pytest.mark.slow
def test_criterion_04_ikos_end_to_end():
    n, eps, trials = 10**4, 1.0, 10**4
    params = plan_ikos(eps, 1 / n**2, n)
    proto = ikos_protocol(params)
    x = gen_uniform(n, 2024)
    truth = math.fsum(x)
    root = RngStream(2024)
    err = np.array([execute(proto, x, root.substream(k))[1] - truth for k in range(trials)])
    sq = err**2
    mse, ci = sq.mean(), 3 * sq.std(ddof=1) / math.sqrt(trials)
    bound = mse_bound_ikos(eps, n, params.p, params.q)
    bias_ok = abs(err.mean()) <= 3 * err.std(ddof=1) / math.sqrt(trials)
    ok = mse <= bound + ci and abs(mse - bound) <= 0.15 * bound and bias_ok
    record(4, ok, f"empirical MSE {mse:.4f} (+-{ci:.4f}) vs bound {bound:.4f}; bias {err.mean():.4f}")


def test_criterion_05_exact_reconstruction():
    bad = 0
    for seed in range(1000):
        g = RngStream(seed, 5).generator
        n = int(g.integers(2, 200))
        p = math.isqrt(n - 1) + 1
        params = IkosParams(n=n, p=p, q=2 * n * p, alpha=0.0, m_total=int(g.integers(2, 10)))
        x = g.random(n)
        _, out = execute(ikos_protocol(params), x, RngStream(seed))
        expected = np.sum(randomized_round(x, p, RngStream(seed))) / p
        bad += out != expected
    record(5, bad == 0, f"{1000 - bad}/1000 executions reconstructed exactly")


@pytest.mark.slow
def test_criterion_06_recursive():
    n, trials = 1000, 10**4
    # closed-form rates are infeasible for m = 2 at n = 1e3 with eps <= 1
    params = plan_recursive_basic(2.0, 0.01, n, 2)
    bound = mse_bound_recursive(params)
    proto = recursive_protocol(params)
    x = gen_uniform(n, 6)
    truth = math.fsum(x)
    root = RngStream(6)
    err = np.array([execute(proto, x, root.substream(k))[1] - truth for k in range(trials)])
    unbiased = abs(err.mean()) <= 3 * err.std(ddof=1) / math.sqrt(trials)
    mse = float(np.mean(err**2))
    infeasible = mse_bound_recursive(plan_recursive_basic(0.5, 1e-8, 10**4, 3)) == math.inf
    ok = unbiased and mse <= bound and infeasible
    record(6, ok, f"bias {err.mean():.3f}, MSE {mse:.1f} <= bound {bound:.1f}; "
                  f"3-msg n=1e4 eps=0.5 cell infinite: {infeasible}")


def test_criterion_07_optimizer_dominance():
    strict, ok, cells = 0, True, []
    for n in (10**5, 10**6, 10**7):
        for eps in (0.5, 1.0, 2.0):
            d = 1 / n**2
            basic = mse_bound_recursive(plan_recursive_basic(eps, d, n, 2))
            opt = mse_bound_recursive(optimize_recursive_params(eps, d, n, 2))
            ok &= opt <= basic
            strict += opt < basic
            cells.append(f"{basic:.4g}->{opt:.4g}")
    record(7, ok and strict >= 1, f"{strict}/9 strict improvements: {', '.join(cells)}")


@pytest.mark.slow
def test_criterion_08_security_monte_carlo():
    trials, worst, fails, points = 10**5, -math.inf, [], 0
    for n in (19, 50, 100, 1000):
        for m in (3, 4, 5):
            counts = sample_component_counts(n, m, trials, RngStream(n, m))
            for q in sorted({2, max_admissible_q(n, m)}):
                est, half = q_power_mean(counts, q)
                points += 1
                bound = component_bound(n, m, q)
                worst = max(worst, (est - bound) / max(half, 1e-300))
                if est > bound + 3 * half:
                    fails.append((n, m, q, est, bound))
    record(8, not fails, f"{points} grid points, max (estimate - bound)/CI = {worst:.2f}; failures {fails}")


TINY = [TinyInstance(n, m, q) for n in (2, 3) for m in (2, 3) for q in (2, 3)]


def test_criterion_09_tiny_instance_oracle():
    reports = [exact_tv_oracle(t) for t in TINY]
    avg_ok = all(r.avg_bound_holds and r.graph_identity_gap < 1e-12 for r in reports)
    claim = [r.randomized_claim_holds for r in reports]
    detail = (f"avg-TV <= sqrt(q^(mn-1) Pr[E] - 1) on {sum(r.avg_bound_holds for r in reports)}/8; "
              f"randomized-input worst-case TV <= base average-case TV on {sum(claim)}/8")
    ACCEPTANCE_RESULTS[9] = (avg_ok and all(claim), detail)
    assert avg_ok, detail


@pytest.mark.xfail(strict=True, reason="worst case over a fixed input difference can exceed the "
                   "average over independent equal-sum pairs; analysis in the decisions ledger")
def test_criterion_09_randomized_variant_literal():
    reports = [exact_tv_oracle(t) for t in TINY]
    for r in reports:
        assert r.randomized_claim_holds, (
            f"(n={r.n}, m={r.m}, q={r.q}): worst randomized {r.randomized_worst_tv:.4f} "
            f"> base average {r.avg_tv:.4f}"
        )


def _polya_sum_differences(n, alpha, samples, rng, chunk=10_000):
    out = np.empty(samples, dtype=np.int64)
    for start in range(0, samples, chunk):
        b = min(chunk, samples - start)
        a = sample_polya(1 / n, alpha, rng, (b, n)).sum(axis=1)
        c = sample_polya(1 / n, alpha, rng, (b, n)).sum(axis=1)
        out[start : start + b] = a - c
    return out


def _dlap_pvalue(d, alpha):
    pmf_cut = discrete_laplace_pmf(np.arange(0, 1000), alpha)
    # largest K with expected count >= 5 in every interior bin
    cut = int(np.max(np.nonzero(pmf_cut * len(d) >= 5)[0]))
    k = np.arange(-cut, cut + 1)
    pmf = discrete_laplace_pmf(k, alpha)
    tail = (1 - pmf.sum()) / 2
    obs = np.concatenate([[np.sum(d < -cut)], [np.sum(d == v) for v in k], [np.sum(d > cut)]])
    exp = np.concatenate([[tail], pmf, [tail]]) * len(d)
    return stats.chisquare(obs, exp).pvalue


@pytest.mark.slow
def test_criterion_10_polya_divisibility():
    pvals = {}
    for n in (100, 1000):
        for alpha in (0.5, 0.9):
            d = _polya_sum_differences(n, alpha, 10**5, RngStream(10, (n, int(alpha * 10))))
            pvals[(n, alpha)] = _dlap_pvalue(d, alpha)
    ok = all(p > 0.01 for p in pvals.values())
    record(10, ok, "p-values " + ", ".join(f"{k}: {v:.3f}" for k, v in pvals.items()))


def test_criterion_11_determinism(tmp_path):
    same = []
    for proto in ("ikos", "recursive-opt", "single", "local-rr", "central-laplace"):
        paths = [tmp_path / f"{proto}-{i}.json" for i in range(2)]
        for p in paths:
            args = ["run", "--protocol", proto, "--n", "3000", "--epsilon", "1", "--runs", "3",
                    "--seed", "77", "--out", str(p)]
            assert cli_main(args) == 0
        same.append(paths[0].read_bytes() == paths[1].read_bytes())
        json.loads(paths[0].read_text())
    record(11, all(same), f"byte-identical reports for {sum(same)}/{len(same)} protocols")


if __name__ == "__main__":
    import sys

    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion") and not name.endswith("_literal"):
            kwargs = {"tmp_path": __import__("pathlib").Path(__import__("tempfile").mkdtemp())} \
                if "tmp_path" in fn.__code__.co_varnames[: fn.__code__.co_argcount] else {}
            try:
                fn(**kwargs)
            except AssertionError:
                pass
    for num in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[num]
        print(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    sys.exit(0 if all(ok for ok, _ in ACCEPTANCE_RESULTS.values()) else 1)

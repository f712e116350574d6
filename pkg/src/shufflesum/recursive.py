"""m-message recursive protocol built from one-level blanket randomized response.

A real ``x`` in [0, 1] is written in a mixed-radix fixed-point expansion
``x ~ s_1/q_1 + ... + s_m/q_m`` with ``q_j = p_1 ... p_j``; the last digit
is randomly rounded so the expansion is unbiased.  Digit ``j`` is then sent
through blanket randomized response on ``{0..p_j}`` (``{0..p_m+1}`` for the
last digit) and the analyzer recombines the debiased per-level sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleParametersError, ParameterError, ProtocolError
from .sampling import _gen
from .shuffle import ShuffleProtocol, View
from .single import SingleParams, blanket_rate, mse_bound_single, rr_analyze, rr_randomize

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
# objective value for infeasible probes; graded so golden section still moves
_BARRIER = 1e200


@dataclass(frozen=True)
class RecursiveParams:
    n: int
    precisions: tuple
    gammas: tuple
    epsilons: tuple
    deltas: tuple
    epsilon: float | None = None
    delta: float | None = None
    composition: str = "basic"

    @property
    def m(self) -> int:
        return len(self.precisions)

    @property
    def products(self) -> tuple:
        """``(q_1, ..., q_m)`` as exact integers."""
        out, acc = [], 1
        for p in self.precisions:
            acc *= int(p)
            out.append(acc)
        return tuple(out)

    @property
    def feasible(self) -> bool:
        return all(0.0 <= g < 1.0 for g in self.gammas)

    def level(self, j: int) -> SingleParams:
        """One-level parameters of level ``j`` (0-based); the last has domain p_m + 1."""
        top = self.precisions[j] + (1 if j == self.m - 1 else 0)
        eps = self.epsilons[j] if self.epsilons else None
        dlt = self.deltas[j] if self.deltas else None
        return SingleParams(self.gammas[j], int(top), self.n, eps, dlt)

    def require_feasible(self):
        if not self.feasible:
            raise InfeasibleParametersError(f"some blanket rate >= 1: {self.gammas}")


def _check_precisions(precisions):
    if not precisions or any(int(p) != p or p < 1 for p in precisions):
        raise ParameterError("precisions must be positive integers")


def encode_recursive(x, precisions, rng):
    """Mixed-radix digits ``(s_1, ..., s_m)`` of ``x`` with a random last carry.

    ``s_j = floor(q_j x - p_j floor(q_{j-1} x))`` (with ``q_0 x := 0``), which
    equals ``floor(p_j * frac(q_{j-1} x))``; the residual is tracked directly
    so every digit provably lands in range.  ``s_m`` then gets
    ``Ber(residual)`` added, so ``E[sum_j s_j / q_j] = x``.

    Returns:
        For scalar ``x`` a tuple of ints, otherwise an ``(n, m)`` int array.
    """
    _check_precisions(precisions)
    xa = np.asarray(x, dtype=float)
    if np.any((xa < 0) | (xa > 1)) or np.any(np.isnan(xa)):
        raise ParameterError("encode_recursive expects inputs in [0, 1]")
    flat = np.atleast_1d(xa)
    digits = np.empty((flat.size, len(precisions)), dtype=np.int64)
    residual = flat.copy()
    for j, p in enumerate(precisions):
        t = residual * p
        s = np.floor(t)
        digits[:, j] = s.astype(np.int64)
        residual = t - s
    digits[:, -1] += _gen(rng).random(flat.size) < residual
    if xa.ndim == 0:
        return tuple(int(v) for v in digits[0])
    return digits


def decode_recursive(digits, precisions) -> np.ndarray:
    """``sum_j s_j / q_j`` for each row of ``digits``."""
    q = np.cumprod(np.asarray(precisions, dtype=float))
    return np.asarray(digits, dtype=float) @ (1.0 / q)


def recursive_randomize(x, params: RecursiveParams, rng):
    """Encode then apply blanket randomized response level by level."""
    digits = encode_recursive(np.atleast_1d(np.asarray(x, dtype=float)), params.precisions, rng)
    out = np.empty_like(digits)
    for j in range(params.m):
        out[:, j] = rr_randomize(digits[:, j], params.level(j), rng)
    if np.ndim(x) == 0:
        return tuple(int(v) for v in out[0])
    return out


def recursive_analyze(view: View, params: RecursiveParams, shifted_debias: bool = False) -> float:
    """Debias each level's multiset and return ``sum_j z_j / q_j``."""
    if view.m != params.m:
        raise ProtocolError(f"expected {params.m} shuffled columns, got {view.m}")
    total = 0.0
    for j, q in enumerate(params.products):
        total += rr_analyze(view.columns[j], params.level(j), shifted_debias) / q
    return total


def recursive_protocol(params: RecursiveParams) -> ShuffleProtocol:
    params.require_feasible()
    return ShuffleProtocol(
        name=f"recursive-{params.m}",
        randomizer=lambda x, rng: recursive_randomize(x, params, rng),
        analyzer=lambda view: recursive_analyze(view, params),
        m=params.m,
        params=params,
    )


def _level_gammas(epsilons, deltas, n, precisions):
    m = len(precisions)
    return tuple(
        blanket_rate(epsilons[j], deltas[j], n, precisions[j] + (1 if j == m - 1 else 0))
        for j in range(m)
    )


def _round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def plan_recursive_basic(epsilon: float, delta: float, n: int, m: int) -> RecursiveParams:
    """Even budget split under basic composition.

    ``eps_j = eps/m``, ``delta_j = delta/m``, ``p_j = n^(3^(j-m-1))`` rounded
    to the nearest integer (at least 2), and
    ``gamma_j = 14 (p_j + [j = m]) ln(2/delta_j) / ((n-1) eps_j^2)``.
    Infeasible plans are returned with ``feasible == False``.
    """
    if m < 1 or n < 2:
        raise ParameterError("need m >= 1 and n >= 2")
    if not 0 < epsilon <= m:
        raise ParameterError("basic composition plan needs 0 < epsilon <= m")
    if not 0 < delta < 1 or math.log(1.0 / delta) < 2 * epsilon:
        raise ParameterError("basic composition plan needs ln(1/delta) >= 2 epsilon")
    precisions = tuple(max(2, _round_half_up(n ** (3.0 ** (j - m - 1)))) for j in range(1, m + 1))
    epsilons = (epsilon / m,) * m
    deltas = (delta / m,) * m
    gammas = _level_gammas(epsilons, deltas, n, precisions)
    return RecursiveParams(n, precisions, gammas, epsilons, deltas, epsilon, delta, "basic")


def advanced_composition_epsilon(eps_level: float, m: int, delta_slack: float) -> float:
    """Total epsilon of ``m`` eps_level-DP mechanisms under advanced composition."""
    return eps_level * math.sqrt(2 * m * math.log(1.0 / delta_slack)) + m * eps_level * math.expm1(
        eps_level
    )


def advanced_levels(n: int) -> int:
    """``floor(log_3(log_2 n))`` computed without floating-point edge errors."""
    bits = math.log2(n)
    m = 0
    while 3 ** (m + 1) <= bits + 1e-9:
        m += 1
    return m


def plan_recursive_advanced(epsilon: float, delta: float, n: int) -> RecursiveParams:
    """Doubly-exponential precisions with an advanced-composition budget split.

    ``m = floor(log_3 log_2 n)`` and ``p_j = 2^(3^j)``.  Each level gets
    ``delta_j = delta / (m+1)`` and the same ``eps_j``, found by bisection so
    that ``m`` such levels compose (advanced composition with slack
    ``delta / (m+1)``) to exactly ``epsilon``.  ``eps_j`` is capped at 1, the
    range where the closed-form blanket rate is valid.
    """
    m = advanced_levels(n)
    if m < 1:
        raise ParameterError("n too small for at least one level (need log2 n >= 3)")
    if not 0 < epsilon or not 0 < delta < 1:
        raise ParameterError("need epsilon > 0 and 0 < delta < 1")
    slack = delta / (m + 1)
    lo, hi = 0.0, 1.0
    if advanced_composition_epsilon(hi, m, slack) <= epsilon:
        eps_level = hi
    else:
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if advanced_composition_epsilon(mid, m, slack) <= epsilon:
                lo = mid
            else:
                hi = mid
        eps_level = lo
    precisions = tuple(2 ** (3**j) for j in range(1, m + 1))
    epsilons = (eps_level,) * m
    deltas = (slack,) * m
    gammas = _level_gammas(epsilons, deltas, n, precisions)
    return RecursiveParams(n, precisions, gammas, epsilons, deltas, epsilon, delta, "advanced")


def mse_bound_recursive(params: RecursiveParams, printed: bool = False) -> float:
    """``n / (4 q_m^2) + sum_j B_j / q_j^2`` with ``B_j`` the one-level bound.

    ``printed`` is forwarded to :func:`mse_bound_single`.  Returns ``inf``
    when any level is infeasible.
    """
    if not params.feasible:
        return math.inf
    q = params.products
    total = params.n / (4.0 * float(q[-1]) ** 2)
    for j in range(params.m):
        total += mse_bound_single(params.level(j), printed=printed) / float(q[j]) ** 2
    return total


def golden_section_search(f, lo: float, hi: float, tol: float = 1e-9, max_iter: int = 200):
    """Minimize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def integer_golden_section(f, lo: int, hi: int):
    """Golden-section search over the integers in ``[lo, hi]`` (log-spaced).

    The bracket is searched on ``log p`` and the last few candidates are
    scanned exhaustively.  Returns ``(k, f(k))``.
    """
    cache = {}

    def g(k):
        k = min(max(int(k), lo), hi)
        if k not in cache:
            cache[k] = f(k)
        return cache[k]

    if hi - lo <= 8:
        k = min(range(lo, hi + 1), key=g)
        return k, g(k)
    x, _ = golden_section_search(lambda t: g(round(math.exp(t))), math.log(lo), math.log(hi), 1e-6)
    centre = round(math.exp(x))
    k = min(range(max(lo, centre - 3), min(hi, centre + 3) + 1), key=g)
    return k, g(k)


def _objective(n, epsilon, delta, precisions, epsilons):
    m = len(precisions)
    deltas = (delta / m,) * m
    gammas = _level_gammas(epsilons, deltas, n, precisions)
    excess = sum(max(0.0, g - 0.999999) for g in gammas) + sum(max(0.0, e - 1.0) for e in epsilons)
    if excess > 0 or any(g >= 1 for g in gammas):
        return _BARRIER * (1.0 + excess)
    params = RecursiveParams(n, tuple(precisions), gammas, tuple(epsilons), deltas, epsilon, delta)
    return mse_bound_recursive(params)


def _rescale(epsilons, j, value, total):
    rest = sum(e for i, e in enumerate(epsilons) if i != j)
    out = list(epsilons)
    for i in range(len(out)):
        if i == j:
            out[i] = value
        elif rest > 0:
            out[i] = epsilons[i] * (total - value) / rest
        else:
            out[i] = (total - value) / (len(out) - 1)
    return out


def optimize_recursive_params(
    epsilon: float,
    delta: float,
    n: int,
    m: int,
    start: RecursiveParams | None = None,
    max_cycles: int = 3,
    tol: float = 1e-4,
) -> RecursiveParams:
    """Cyclic coordinate descent on the recursive MSE bound.

    Each cycle line-searches every precision ``p_j`` over ``[2, n]`` and
    every ``eps_j`` over ``(0, epsilon)`` (the other ``eps_i`` are rescaled
    to keep the total), each by golden-section search.  Budgets ``delta_j``
    stay at ``delta / m``.  Probes with a blanket rate >= 1 or a level
    ``eps_j > 1`` are treated as a barrier.  Moves are only accepted when
    they lower the bound, so the result never does worse than ``start``
    (default: the basic plan).  Stops after ``max_cycles`` cycles or when a
    cycle improves the bound by less than ``tol`` relative.
    """
    if start is None:
        start = plan_recursive_basic(epsilon, delta, n, m)
    precisions = list(start.precisions)
    epsilons = list(start.epsilons)
    best = _objective(n, epsilon, delta, precisions, epsilons)
    for _ in range(max_cycles):
        before = best
        for j in range(m):
            def by_p(pj, j=j):
                trial = precisions.copy()
                trial[j] = pj
                return _objective(n, epsilon, delta, trial, epsilons)

            pj, val = integer_golden_section(by_p, 2, max(2, n))
            if val < best:
                precisions[j], best = pj, val
        if m > 1:
            for j in range(m):
                def by_eps(e, j=j):
                    return _objective(n, epsilon, delta, precisions, _rescale(epsilons, j, e, epsilon))

                e, val = golden_section_search(by_eps, 1e-9 * epsilon, epsilon * (1 - 1e-9), 1e-10)
                if val < best:
                    epsilons, best = _rescale(epsilons, j, e, epsilon), val
        if not (before > best and (before - best) > tol * abs(best)):
            break
    deltas = (delta / m,) * m
    gammas = _level_gammas(epsilons, deltas, n, precisions)
    return RecursiveParams(
        n, tuple(precisions), gammas, tuple(epsilons), deltas, epsilon, delta, "optimized"
    )


__all__ = [
    "RecursiveParams",
    "encode_recursive",
    "decode_recursive",
    "recursive_randomize",
    "recursive_analyze",
    "recursive_protocol",
    "plan_recursive_basic",
    "plan_recursive_advanced",
    "advanced_composition_epsilon",
    "advanced_levels",
    "mse_bound_recursive",
    "golden_section_search",
    "integer_golden_section",
    "optimize_recursive_params",
]


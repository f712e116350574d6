"""One-level discrete summation: blanket randomized response over {0..p}.

Each user holds ``xbar`` in ``{0, ..., p}`` and submits it with probability
``1 - gamma``, otherwise a uniform draw from ``{0, ..., p}``.  The analyzer
sums the multiset and removes the blanket's expected contribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleParametersError, ParameterError, ProtocolError
from .sampling import _gen, randomized_round
from .shuffle import ShuffleProtocol, View

# Constants of the closed-form blanket rate; logs are natural.
GAMMA_DELTA_COEF = 14.0
GAMMA_EPS_COEF = 27.0


@dataclass(frozen=True)
class SingleParams:
    gamma: float
    p: int
    n: int
    epsilon: float | None = None
    delta: float | None = None

    @property
    def feasible(self) -> bool:
        return 0.0 <= self.gamma < 1.0

    def require_feasible(self):
        if not self.feasible:
            raise InfeasibleParametersError(
                f"blanket rate gamma={self.gamma:.4g} >= 1 (n={self.n}, p={self.p})"
            )


def blanket_rate(epsilon: float, delta: float, n: int, p: int) -> float:
    """``max{14 p ln(2/delta) / ((n-1) eps^2), 27 p / ((n-1) eps)}``; may exceed 1."""
    return max(
        GAMMA_DELTA_COEF * p * math.log(2.0 / delta) / ((n - 1) * epsilon**2),
        GAMMA_EPS_COEF * p / ((n - 1) * epsilon),
    )


def rr_randomize(xbar, params: SingleParams, rng):
    """Blanket randomized response on ``{0, ..., params.p}`` (vectorized)."""
    x = np.asarray(xbar)
    if np.any((x < 0) | (x > params.p)) or np.any(x != np.floor(x)):
        raise ProtocolError(f"inputs must be integers in [0, {params.p}]")
    if not 0.0 <= params.gamma <= 1.0:
        raise InfeasibleParametersError(f"gamma={params.gamma} outside [0, 1]")
    g = _gen(rng)
    blanket = g.random(x.shape) < params.gamma
    decoys = g.integers(0, params.p, size=x.shape, endpoint=True, dtype=np.int64)
    out = np.where(blanket, decoys, x.astype(np.int64))
    return int(out) if x.ndim == 0 else out


def rr_analyze(messages, params: SingleParams, shifted_debias: bool = False) -> float:
    """Debiased sum of one shuffled column.

    ``DeBias(w) = (w - n gamma mu) / (1 - gamma)`` where ``mu`` is the mean
    of the decoy distribution, ``p / 2``.  With ``shifted_debias=True`` the
    constant ``(p + 1) / 2`` is used instead, which leaves a bias of
    ``n gamma / (2 (1 - gamma))``.
    """
    y = np.asarray(messages)
    if len(y) != params.n:
        raise ProtocolError(f"expected {params.n} messages, got {len(y)}")
    if np.any((y < 0) | (y > params.p)):
        raise ProtocolError(f"message outside [0, {params.p}]")
    if params.gamma >= 1.0:
        raise InfeasibleParametersError("cannot debias with gamma >= 1")
    mu = (params.p + 1) / 2.0 if shifted_debias else params.p / 2.0
    w = float(np.sum(y, dtype=np.int64))
    return (w - params.n * params.gamma * mu) / (1.0 - params.gamma)


def plan_single(
    epsilon: float, delta: float, n: int, p: int, allow_infeasible: bool = False
) -> SingleParams:
    """Closed-form blanket rate for one message of precision ``p``.

    Raises:
        ParameterError: arguments outside the planner's domain.
        InfeasibleParametersError: the rate reaches 1, unless
            ``allow_infeasible`` is set, in which case the record is returned
            with ``feasible == False`` (bounds then evaluate to ``inf``).
    """
    if not 0 < epsilon <= 1:
        raise ParameterError("the closed-form blanket rate needs 0 < epsilon <= 1")
    if not 0 < delta < 1:
        raise ParameterError("delta must lie in (0, 1)")
    if n < 2 or p < 1:
        raise ParameterError("need n >= 2 and p >= 1")
    params = SingleParams(blanket_rate(epsilon, delta, n, p), int(p), int(n), epsilon, delta)
    if not allow_infeasible:
        params.require_feasible()
    return params


def mse_bound_single(params: SingleParams, printed: bool = False) -> float:
    """Worst-case MSE of the debiased sum over inputs in ``{0..p}^n``.

    The default is the exact supremum for decoys on ``{0, ..., p}``::

        n / (1-g)^2 * (g ((p+1)^2 - 1) / 12 + p^2 g (1-g) / 4)

    ``printed=True`` evaluates the same expression with ``p + 1`` replaced
    by ``p`` (the commonly quoted form).  That
    variant is the supremum for a decoy domain of ``p`` values and
    under-estimates the error of the ``{0..p}`` randomizer implemented here.
    """
    g = params.gamma
    if not 0.0 <= g < 1.0:
        return math.inf
    size = params.p if printed else params.p + 1
    return params.n / (1.0 - g) ** 2 * (
        g * (size**2 - 1) / 12.0 + (size - 1) ** 2 * g * (1.0 - g) / 4.0
    )


def exact_mse_single(params: SingleParams, xbar) -> float:
    """Exact MSE of the default analyzer for a fixed input vector."""
    g, p = params.gamma, params.p
    x = np.asarray(xbar, dtype=float)
    second_moment = p * (2 * p + 1) / 6.0
    per_user = g * (1 - g) * x * (x - p) + g * (second_moment - g * p * p / 4.0)
    return float(np.sum(per_user)) / (1.0 - g) ** 2


def best_single_precision(epsilon: float, delta: float, n: int, p_max: int | None = None):
    """Precision minimizing rounding plus blanket error for real inputs.

    Scans ``p = 1 .. p_max`` (default ``ceil(sqrt(n))``) and returns the
    ``(params, total_bound)`` pair with the smallest
    ``mse_bound_single / p^2 + n / (4 p^2)``.  ``total_bound`` is ``inf``
    when no precision is feasible.
    """
    p_max = p_max or max(1, math.isqrt(n) + 1)
    best = (plan_single(epsilon, delta, n, 1, allow_infeasible=True), math.inf)
    for p in range(1, p_max + 1):
        params = plan_single(epsilon, delta, n, p, allow_infeasible=True)
        total = mse_bound_single(params) / p**2 + n / (4.0 * p**2)
        if total < best[1]:
            best = (params, total)
    return best


def single_message_protocol(params: SingleParams) -> ShuffleProtocol:
    """Real summation with one message: randomized rounding, then blanket RR."""
    params.require_feasible()

    def randomizer(x, rng):
        return rr_randomize(randomized_round(x, params.p, rng), params, rng)[:, None]

    def analyzer(view: View) -> float:
        return rr_analyze(view.columns[0], params) / params.p

    return ShuffleProtocol("single", randomizer, analyzer, m=1, params=params)

"""Constant-error summation from secure aggregation over Z_q.

Each user rounds its input to ``{0..p}``, adds the difference of two
Polya(1/n, alpha) variables (the n users' noise sums to a discrete Laplace
draw), reduces mod ``q`` and splits the result into ``m`` additive shares.
Every share but the last goes through its own shuffler; the last share may
be sent outside the shuffle.  The analyzer adds everything up mod ``q`` and
undoes the wrap-around of small negative totals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ProtocolError
from .sampling import _gen, randomized_round, sample_polya
from .shuffle import ShuffleProtocol, View

# executable group orders must keep every intermediate in int64
MAX_EXEC_Q = 2**63 - 1


@dataclass(frozen=True)
class IkosParams:
    n: int
    p: int
    q: int
    alpha: float
    m_total: int
    sigma: float | None = None
    epsilon: float | None = None
    delta: float | None = None
    unshuffled_last: bool = True

    @property
    def m_shuffled(self) -> int:
        return self.m_total - 1 if self.unshuffled_last else self.m_total

    def validate(self):
        if self.p < 1 or self.n < 1:
            raise ParameterError("need p >= 1 and n >= 1")
        if self.q <= self.n * self.p:
            raise ParameterError(f"group order q={self.q} must exceed n*p={self.n * self.p}")
        if self.q > MAX_EXEC_Q:
            raise ParameterError("group order too large for int64 arithmetic")
        if not 0 <= self.alpha < 1:
            raise ParameterError("alpha must lie in [0, 1)")
        if self.m_total < 1:
            raise ParameterError("need at least one message")


def _addmod(a, b, q):
    """``(a + b) mod q`` for ``a, b`` in ``[0, q)`` without int64 overflow."""
    t = a - (q - b)
    return np.where(t < 0, t + q, t)


def split_shares(x, m: int, q: int, rng):
    """Additive sharing of ``x`` mod ``q`` into ``m`` shares.

    The first ``m - 1`` shares are uniform on ``Z_q``; the last is the
    difference that makes the shares sum to ``x``.  Vectorized: an array of
    ``n`` secrets gives an ``(n, m)`` array, a scalar gives a tuple.
    """
    if m < 1:
        raise ParameterError("need at least one share")
    if q < 1 or q > MAX_EXEC_Q:
        raise ParameterError("group order must lie in [1, 2^63)")
    xa = np.mod(np.atleast_1d(np.asarray(x, dtype=np.int64)), q)
    shares = np.empty((xa.size, m), dtype=np.int64)
    shares[:, : m - 1] = _gen(rng).integers(0, q, size=(xa.size, m - 1), dtype=np.int64)
    acc = np.zeros(xa.size, dtype=np.int64)
    for j in range(m - 1):
        acc = _addmod(acc, shares[:, j], q)
    shares[:, m - 1] = _addmod(xa, (q - acc) % q, q)
    if np.ndim(x) == 0:
        return tuple(int(v) for v in shares[0])
    return shares


def sum_mod(values, q: int) -> int:
    """Exact ``sum(values) mod q`` for integers in ``[0, q)``."""
    v = np.asarray(values, dtype=np.int64).ravel()
    if v.size == 0:
        return 0
    if v.size * float(q) < 2.0**62:
        return int(np.sum(v)) % q
    return sum(v.tolist()) % q


def ikos_randomize(x, params: IkosParams, rng):
    """Round, add Polya-difference noise, reduce mod q and split into shares.

    Randomness is consumed in a fixed order: rounding bits, then the two
    noise vectors, then the shares.
    """
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    xt = np.atleast_1d(randomized_round(xa, params.p, rng))
    if params.alpha > 0:
        noise = sample_polya(1.0 / params.n, params.alpha, rng, xa.size) - sample_polya(
            1.0 / params.n, params.alpha, rng, xa.size
        )
    else:
        noise = np.zeros(xa.size, dtype=np.int64)
    y = np.mod(xt.astype(np.int64) + noise, params.q)
    shares = split_shares(y, params.m_total, params.q, rng)
    if np.ndim(x) == 0:
        return tuple(int(v) for v in shares[0])
    return shares


def ikos_decode(z: int, n: int, p: int, q: int) -> float:
    """Undo wrap-around: totals above ``(np + q) / 2`` are read as negative."""
    z = int(z) % q
    if 2 * z > n * p + q:
        z -= q
    return z / p


def ikos_analyze(view: View, params: IkosParams) -> float:
    """Sum all messages mod q, correct underflow, rescale by ``1/p``."""
    msgs = view.all_messages()
    expected = params.n * params.m_total
    if msgs.size != expected:
        raise ProtocolError(f"expected {expected} messages, got {msgs.size}")
    if np.any((msgs < 0) | (msgs >= params.q)):
        raise ProtocolError("message outside Z_q")
    return ikos_decode(sum_mod(msgs, params.q), params.n, params.p, params.q)


def ikos_protocol(params: IkosParams) -> ShuffleProtocol:
    params.validate()
    return ShuffleProtocol(
        name="ikos",
        randomizer=lambda x, rng: ikos_randomize(x, params, rng),
        analyzer=lambda view: ikos_analyze(view, params),
        m=params.m_total,
        unshuffled=params.m_total - 1 if params.unshuffled_last and params.m_total > 1 else None,
        params=params,
    )


def sigma_from_delta(epsilon: float, delta: float) -> float:
    """Security bits needed for ``delta = (1 + e^eps) 2^-sigma``."""
    if epsilon <= 0 or not 0 < delta < 1:
        raise ParameterError("need epsilon > 0 and 0 < delta < 1")
    return math.log2(1.0 + math.exp(epsilon)) - math.log2(delta)


def message_split(sigma: float, log2q: float, n: int) -> tuple[int, int]:
    """``(total, shuffled)`` message counts for worst-case security sigma.

    ``total = ceil((2 sigma + log2 q) / (log2 n - log2 e) + 2)``, of which one
    share may bypass the shuffle.

    Raises:
        ParameterError: if ``n < 19`` or fewer than 3 shuffled messages result.
    """
    if n < 19:
        raise ParameterError("the message-count bound needs n >= 19")
    total = math.ceil((2 * sigma + log2q) / (math.log2(n) - math.log2(math.e)) + 2)
    if total - 1 < 3:
        raise ParameterError(f"bound gives {total - 1} shuffled messages; it needs at least 3")
    return total, total - 1


def messages_improved(sigma: float, log2q: float, n: int) -> int:
    """Total messages per user, one of which may be unshuffled."""
    return message_split(sigma, log2q, n)[0]


def _ceil_log2(q) -> int:
    if isinstance(q, (int, np.integer)):
        return (int(q) - 1).bit_length()
    return math.ceil(math.log2(q))


def messages_original(sigma: float, q, n: int, iterations: int = 200) -> int:
    """Message count of the original IKOS analysis, base-2 logs.

    Solves ``m = 1 + sigma + 5 ceil(log2 q) / 2 + log2(pi (m + 1/2)) / 4`` by
    fixed-point iteration, adds ``log2(n - 1)`` and rounds up.
    """
    if q < 2 or n < 2:
        raise ParameterError("need q >= 2 and n >= 2")
    base = 1 + sigma + 5 * _ceil_log2(q) / 2
    m = base
    for _ in range(iterations):
        nxt = base + 0.25 * math.log2(math.pi * (m + 0.5))
        if abs(nxt - m) < 1e-12:
            m = nxt
            break
        m = nxt
    return math.ceil(m + math.log2(n - 1))


def messages_prior(sigma: float, log2q: float, n: int) -> int:
    """Comparison count ``ceil(100 (sigma + log2 q) / (log2 n - 1) + 4)``."""
    if n <= 2:
        raise ParameterError("need n > 2")
    return math.ceil(100 * (sigma + log2q) / (math.log2(n) - 1) + 4)


def plan_ikos(epsilon: float, delta: float, n: int) -> IkosParams:
    """``p = ceil(sqrt n)``, ``q = 2 n p``, ``alpha = e^(-eps/p)``."""
    if n < 19:
        raise ParameterError("planner needs n >= 19")
    sigma = sigma_from_delta(epsilon, delta)
    p = math.isqrt(n)
    if p * p < n:
        p += 1
    q = 2 * n * p
    alpha = math.exp(-epsilon / p)
    m_total = messages_improved(sigma, math.log2(q), n)
    return IkosParams(n, p, q, alpha, m_total, sigma, epsilon, delta, True)


def mse_bound_ikos(epsilon: float, n: int, p: int, q: int) -> float:
    """``2a/(p^2 (1-a)^2) + n/(4p^2) + (q/p)^2 a^((q-np)/2)`` with ``a = e^(-eps/p)``.

    The overflow term is evaluated in log space, so huge ``q`` simply
    underflows it to zero.
    """
    if epsilon <= 0:
        raise ParameterError("epsilon must be positive")
    alpha = math.exp(-epsilon / p)
    one_minus = -math.expm1(-epsilon / p)
    noise = 2 * alpha / (p**2 * one_minus**2)
    rounding = n / (4.0 * p**2)
    log_overflow = 2 * math.log(q / p) - (q - n * p) / 2 * (epsilon / p)
    overflow = math.exp(log_overflow) if log_overflow > -745 else 0.0
    return noise + rounding + overflow


__all__ = [
    "IkosParams",
    "split_shares",
    "sum_mod",
    "ikos_randomize",
    "ikos_decode",
    "ikos_analyze",
    "ikos_protocol",
    "sigma_from_delta",
    "message_split",
    "messages_improved",
    "messages_original",
    "messages_prior",
    "plan_ikos",
    "mse_bound_ikos",
]

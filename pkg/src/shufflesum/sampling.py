"""Seedable samplers for every primitive distribution the protocols use.

All randomness flows through :class:`RngStream`, a thin wrapper around a
counter-based numpy generator (Philox) keyed by ``(seed, stream_id)``.  The
streams are meant for statistical simulation only; they are NOT a source of
cryptographically secure randomness and must not be used to protect real
data.

Every sampler accepts an optional ``size`` and then returns a numpy array,
so a whole population of users can be randomized in one call.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError


class RngStream:
    """Reproducible random stream identified by a seed and a stream id.

    Two streams built from the same ``(seed, stream_id)`` produce identical
    sequences.  Distinct stream ids map to distinct ``SeedSequence`` spawn
    keys, which numpy guarantees to give independent Philox keys.

    Args:
        seed: non-negative integer (64-bit values are fine).
        stream_id: an integer or a tuple of integers naming the substream.
    """

    def __init__(self, seed: int, stream_id: int | tuple[int, ...] = 0):
        if seed < 0:
            raise ParameterError("seed must be non-negative")
        key = (stream_id,) if isinstance(stream_id, (int, np.integer)) else tuple(stream_id)
        self.seed = int(seed)
        self.stream_id = tuple(int(k) for k in key)
        seq = np.random.SeedSequence(self.seed, spawn_key=self.stream_id)
        self.generator = np.random.Generator(np.random.Philox(seq))

    def substream(self, index: int) -> "RngStream":
        """Child stream ``index``; independent of the parent and its siblings."""
        return RngStream(self.seed, self.stream_id + (int(index),))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def _gen(rng: RngStream | np.random.Generator) -> np.random.Generator:
    return rng.generator if isinstance(rng, RngStream) else rng


def bernoulli(prob, rng, size=None):
    """Draw Ber(prob) bits.  ``prob`` may be an array (broadcast against ``size``)."""
    prob_arr = np.asarray(prob, dtype=float)
    if np.any((prob_arr < 0) | (prob_arr > 1)) or np.any(np.isnan(prob_arr)):
        raise ParameterError("Bernoulli probability must lie in [0, 1]")
    if size is None and prob_arr.ndim > 0:
        size = prob_arr.shape
    u = _gen(rng).random(size)
    # random() is in [0, 1), so prob=1 always fires and prob=0 never does
    bits = (u < prob_arr).astype(np.int64)
    return int(bits) if size is None else bits


def uniform_int(lo: int, hi: int, rng, size=None):
    """Uniform integers on ``{lo, ..., hi}`` inclusive.

    numpy's bounded integer generation uses Lemire's rejection method, so
    every value is exactly equiprobable (no modulo bias).
    """
    if lo > hi:
        raise ParameterError(f"empty range [{lo}, {hi}]")
    out = _gen(rng).integers(lo, hi, size=size, endpoint=True, dtype=np.int64)
    return int(out) if size is None else out


def randomized_round(x, p: int, rng):
    """Unbiased fixed-point encoding ``floor(x p) + Ber(x p - floor(x p))``.

    Args:
        x: scalar or array of reals in [0, 1].
        p: positive integer precision.
        rng: an :class:`RngStream`.

    Returns:
        Integers in ``{0, ..., p}`` with ``E[value] / p == x``.  Scalar in,
        scalar out.
    """
    if p < 1 or int(p) != p:
        raise ParameterError("precision must be a positive integer")
    xa = np.asarray(x, dtype=float)
    if np.any((xa < 0) | (xa > 1)) or np.any(np.isnan(xa)):
        raise ParameterError("randomized_round expects inputs in [0, 1]")
    scaled = xa * p
    base = np.floor(scaled)
    frac = scaled - base
    u = _gen(rng).random(xa.shape)
    out = base.astype(np.int64) + (u < frac)
    return int(out) if xa.ndim == 0 else out


def sample_polya(r: float, beta: float, rng, size=None):
    """Polya(r, beta): negative binomial with real shape ``r``.

    Sampled as a Gamma-Poisson mixture, ``Poisson(G)`` with
    ``G ~ Gamma(shape=r, scale=beta / (1 - beta))``.  Mean ``r beta / (1 - beta)``,
    variance ``r beta / (1 - beta)^2``.
    """
    if r <= 0:
        raise ParameterError("Polya shape must be positive")
    if not 0 <= beta < 1:
        raise ParameterError("Polya parameter beta must lie in [0, 1)")
    g = _gen(rng)
    if beta == 0:
        return 0 if size is None else np.zeros(size, dtype=np.int64)
    lam = g.gamma(r, beta / (1.0 - beta), size=size)
    out = g.poisson(lam)
    return int(out) if size is None else out.astype(np.int64)


def sample_discrete_laplace(alpha: float, rng, size=None):
    """Two-sided geometric draw with ``P[k]`` proportional to ``alpha^|k|``.

    Realized as the difference of two i.i.d. geometric variables on
    ``{0, 1, ...}`` with success probability ``1 - alpha``.
    """
    if not 0 <= alpha < 1:
        raise ParameterError("discrete Laplace parameter must lie in [0, 1)")
    if alpha == 0:
        return 0 if size is None else np.zeros(size, dtype=np.int64)
    g = _gen(rng)
    a = g.geometric(1.0 - alpha, size=size)
    b = g.geometric(1.0 - alpha, size=size)
    out = np.asarray(a, dtype=np.int64) - np.asarray(b, dtype=np.int64)
    return int(out) if size is None else out


def discrete_laplace_pmf(k, alpha: float):
    """Closed-form pmf ``(1 - alpha) / (1 + alpha) * alpha^|k|``."""
    k = np.abs(np.asarray(k))
    return (1.0 - alpha) / (1.0 + alpha) * np.power(alpha, k)


def discrete_laplace_variance(alpha: float) -> float:
    return 2.0 * alpha / (1.0 - alpha) ** 2


def laplace(scale: float, rng, size=None):
    """Continuous Laplace(0, scale)."""
    if scale < 0:
        raise ParameterError("Laplace scale must be non-negative")
    out = _gen(rng).laplace(0.0, scale, size)
    return float(out) if size is None else out


def polya_difference_variance(n: int, alpha: float) -> float:
    """Variance of ``Polya(1/n, alpha) - Polya(1/n, alpha)``."""
    return 2.0 * (1.0 / n) * alpha / (1.0 - alpha) ** 2


__all__ = [
    "RngStream",
    "bernoulli",
    "uniform_int",
    "randomized_round",
    "sample_polya",
    "sample_discrete_laplace",
    "discrete_laplace_pmf",
    "discrete_laplace_variance",
    "laplace",
    "polya_difference_variance",
]

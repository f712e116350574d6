"""Central and local reference mechanisms for real summation."""

from __future__ import annotations

import enum
import math

import numpy as np

from .errors import ParameterError
from .sampling import _gen, laplace, randomized_round


class BaselineKind(enum.Enum):
    CENTRAL_LAPLACE = "central-laplace"
    LOCAL_LAPLACE = "local-laplace"
    LOCAL_RR = "local-randomized-response"


def _check(epsilon):
    if not epsilon > 0:
        raise ParameterError("epsilon must be positive")


def central_laplace(inputs, epsilon: float, rng) -> float:
    """Trusted curator: exact sum plus Laplace(1/eps)."""
    _check(epsilon)
    return float(np.sum(inputs)) + laplace(1.0 / epsilon, rng)


def local_laplace(inputs, epsilon: float, rng) -> float:
    """Every user adds its own Laplace(1/eps) before reporting."""
    _check(epsilon)
    x = np.asarray(inputs, dtype=float)
    return float(np.sum(x + laplace(1.0 / epsilon, rng, size=x.shape)))


def local_randomized_response(inputs, epsilon: float, rng) -> float:
    """Binary randomized response on a randomly rounded bit, debiased and summed.

    Each user keeps its bit with probability ``e^eps / (1 + e^eps)``; the
    analyzer maps a report ``b`` to ``(b - (1 - t)) / (2t - 1)``.
    """
    _check(epsilon)
    x = np.asarray(inputs, dtype=float)
    bits = np.atleast_1d(randomized_round(x, 1, rng))
    keep = 1.0 / (1.0 + math.exp(-epsilon))
    flip = _gen(rng).random(bits.shape) >= keep
    reports = np.where(flip, 1 - bits, bits)
    return float(np.sum((reports - (1.0 - keep)) / (2.0 * keep - 1.0)))


def central_laplace_mse(epsilon: float) -> float:
    _check(epsilon)
    return 2.0 / epsilon**2


def local_laplace_mse(n: int, epsilon: float) -> float:
    _check(epsilon)
    return 2.0 * n / epsilon**2


def local_rr_mse(n: int, epsilon: float) -> float:
    """Worst-case ``n (e^eps / (e^eps - 1)^2 + 1/4)``: response plus rounding variance."""
    _check(epsilon)
    return n * (math.exp(epsilon) / math.expm1(epsilon) ** 2 + 0.25)


BASELINES = {
    BaselineKind.CENTRAL_LAPLACE: (central_laplace, lambda n, eps: central_laplace_mse(eps)),
    BaselineKind.LOCAL_LAPLACE: (local_laplace, local_laplace_mse),
    BaselineKind.LOCAL_RR: (local_randomized_response, local_rr_mse),
}


__all__ = [
    "BaselineKind",
    "BASELINES",
    "central_laplace",
    "local_laplace",
    "local_randomized_response",
    "central_laplace_mse",
    "local_laplace_mse",
    "local_rr_mse",
]

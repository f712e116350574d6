"""Checks of the secure-summation analysis on random permutation multigraphs.

The collision probability of two executions of m-share additive summation
on the same random input equals ``q^(-mn) E[q^C(G)]``, where ``G`` is the
multigraph on the ``n`` users whose edges are ``m`` independent uniform
permutations and ``C(G)`` counts its connected components.  This module
estimates that expectation, compares it with the closed-form bound, and
provides an exhaustive total-variation oracle for tiny instances.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cc

from .errors import ParameterError, ResourceError
from .sampling import _gen

ENUM_LOG2_BUDGET = 24
PERM_TUPLE_BUDGET = 2_000_000


@dataclass(frozen=True, eq=False)
class PermutationMultigraph:
    """Multigraph with edges ``(v, perms[i, v])`` for every permutation ``i``."""

    n: int
    perms: np.ndarray

    @property
    def m(self) -> int:
        return self.perms.shape[0]

    def degrees(self) -> np.ndarray:
        """Degree of each vertex counting multiplicity (a self-loop adds 2)."""
        deg = np.zeros(self.n, dtype=np.int64)
        for perm in self.perms:
            np.add.at(deg, np.arange(self.n), 1)
            np.add.at(deg, perm, 1)
        return deg


def sample_multigraph(n: int, m: int, rng) -> PermutationMultigraph:
    """``m`` independent uniform permutations of ``range(n)``."""
    if n < 1 or m < 1:
        raise ParameterError("need n >= 1 and m >= 1")
    g = _gen(rng)
    perms = np.stack([g.permutation(n) for _ in range(m)])
    return PermutationMultigraph(n, perms)


def _batched_components(perms: np.ndarray) -> np.ndarray:
    """Component counts of a batch of graphs; ``perms`` has shape (B, m, n)."""
    b, m, n = perms.shape
    offsets = (np.arange(b) * n)[:, None, None]
    src = np.broadcast_to(np.arange(n)[None, None, :] + offsets, perms.shape).ravel()
    dst = (perms + offsets).ravel()
    adj = coo_matrix((np.ones(src.size, dtype=np.int8), (src, dst)), shape=(b * n, b * n))
    _, labels = _cc(adj.tocsr(), directed=False)
    # labels are assigned in vertex order, so graph k owns a contiguous label range
    first = labels[::n]
    last_plus = np.append(first[1:], labels.max() + 1)
    return last_plus - first


def connected_components(g: PermutationMultigraph) -> int:
    return int(_batched_components(g.perms[None])[0])


def sample_component_counts(n: int, m: int, trials: int, rng, batch: int | None = None) -> np.ndarray:
    """``C(G)`` for ``trials`` independent multigraphs.

    Graphs are generated in batches and their components found with one
    sparse connected-components call per batch.
    """
    if n < 1 or m < 1 or trials < 1:
        raise ParameterError("need n, m, trials >= 1")
    g = _gen(rng)
    batch = batch or max(1, min(trials, 2_000_000 // (n * m)))
    counts = np.empty(trials, dtype=np.int64)
    done = 0
    base = np.arange(n)
    while done < trials:
        b = min(batch, trials - done)
        perms = g.permuted(np.broadcast_to(base, (b * m, n)), axis=1).reshape(b, m, n)
        counts[done : done + b] = _batched_components(perms)
        done += b
    return counts


def q_power_mean(counts, q: float, z: float = 1.96) -> tuple[float, float]:
    """Sample mean of ``q^C`` and its normal-approximation half-width."""
    values = np.power(float(q), np.asarray(counts, dtype=float))
    half = z * float(values.std(ddof=1)) / math.sqrt(len(values)) if len(values) > 1 else math.inf
    return float(values.mean()), half


def estimate_q_power_components(
    n: int, m: int, q: float, trials: int, rng, z: float = 1.96
) -> tuple[float, float]:
    """Monte Carlo estimate of ``E[q^C(G)]`` with a normal-approximation half-width."""
    if trials < 1000:
        raise ParameterError("need at least 1000 trials")
    if q < 1:
        raise ParameterError("need q >= 1")
    return q_power_mean(sample_component_counts(n, m, trials, rng), q, z)


def _max_q(n: int, m: int) -> float:
    return 0.5 * (n / math.e) ** (m - 1)


def max_admissible_q(n: int, m: int) -> int:
    """Largest integer q with ``q <= (n/e)^(m-1) / 2``."""
    return int(math.floor(_max_q(n, m) * (1 + 1e-12)))


def component_bound(n: int, m: int, q: float) -> float:
    """``q + q^2 (n/e)^(1-m)``, valid for ``n >= 19``, ``m >= 3``, ``q <= (n/e)^(m-1)/2``."""
    if n < 19 or m < 3:
        raise ParameterError("bound needs n >= 19 and m >= 3")
    if q > _max_q(n, m) * (1 + 1e-12):
        raise ParameterError(f"q={q} exceeds (n/e)^(m-1)/2 = {_max_q(n, m):.6g}")
    return q + q * q * (n / math.e) ** (1 - m)


def component_count_bound(c: int, n: int, m: int) -> float:
    """Per-count bound ``1.5^(c-1) / c! * (e/n)^((m-1)(c-1))`` on ``P[C = c]``."""
    return 1.5 ** (c - 1) / math.factorial(c) * (math.e / n) ** ((m - 1) * (c - 1))


def avg_security_sigma(n: int, m_shuffled: int, log2q: float) -> float:
    """``((m-1)(log2 n - log2 e) - log2 q) / 2``; the guarantee needs the result >= 1."""
    if n < 19 or m_shuffled < 3:
        raise ParameterError("needs n >= 19 and m >= 3")
    return ((m_shuffled - 1) * (math.log2(n) - math.log2(math.e)) - log2q) / 2


def exact_component_distribution(n: int, m: int) -> np.ndarray:
    """Exact ``P[C(G) = c]`` for ``c = 0..n`` by enumerating all permutation tuples.

    Components are found for every tuple at once by min-label propagation.

    Raises:
        ResourceError: if ``(n!)^m`` exceeds the enumeration budget.
    """
    total = math.factorial(n) ** m
    if total > PERM_TUPLE_BUDGET:
        raise ResourceError(f"(n!)^m = {total} exceeds budget {PERM_TUPLE_BUDGET}")
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    k = len(perms)
    idx = np.array(list(itertools.product(range(k), repeat=m)), dtype=np.int64)
    fwd = [perms[idx[:, i]] for i in range(m)]
    inv = [np.argsort(f, axis=1) for f in fwd]
    labels = np.broadcast_to(np.arange(n), (total, n)).copy()
    while True:
        old = labels
        for f in fwd + inv:
            labels = np.minimum(labels, np.take_along_axis(labels, f, axis=1))
        if np.array_equal(old, labels):
            break
    comps = np.sum(labels == np.arange(n), axis=1)
    return np.bincount(comps, minlength=n + 1) / total


@dataclass(frozen=True)
class TinyInstance:
    """Exhaustively enumerable secure-summation instance over ``Z_q``."""

    n: int
    m: int
    q: int

    def validate(self, extra_columns: int = 0):
        if self.n < 1 or self.m < 1 or self.q < 2:
            raise ParameterError("need n, m >= 1 and q >= 2")
        cols = self.m + extra_columns
        if self.n * cols * math.log2(self.q) > ENUM_LOG2_BUDGET:
            raise ResourceError("instance too large to enumerate")


def _digits(count: int, width: int, q: int) -> np.ndarray:
    """All vectors of ``Z_q^width`` as rows, in lexicographic order."""
    idx = np.arange(count, dtype=np.int64)
    out = np.empty((count, width), dtype=np.int64)
    for k in range(width - 1, -1, -1):
        out[:, k] = idx % q
        idx //= q
    return out


def _view_table(n: int, k: int, q: int, unshuffled_last: bool):
    """Exact view distribution of k-share additive summation.

    Enumerates every share matrix in ``Z_q^(n x k)``; each is equally
    likely given its row sums, so counts divided by ``q^((k-1) n)`` give
    ``P[view | x]``.

    Returns:
        ``(counts, orderings)``: an integer array indexed by ``(x, view)``
        with ``x`` in lexicographic order, and for each view the number of
        ordered shuffler outputs that collapse to it.
    """
    total = q ** (n * k)
    y = _digits(total, n * k, q).reshape(total, n, k)
    x_key = np.zeros(total, dtype=np.int64)
    for i in range(n):
        x_key = x_key * q + y[:, i, :].sum(axis=1) % q
    cols = []
    for j in range(k):
        col = y[:, :, j]
        cols.append(col if (unshuffled_last and j == k - 1) else np.sort(col, axis=1))
    flat = np.concatenate(cols, axis=1)
    view_key = np.zeros(total, dtype=np.int64)
    for c in range(flat.shape[1]):
        view_key = view_key * q + flat[:, c]
    views, view_idx = np.unique(view_key, return_inverse=True)
    counts = np.zeros((q**n, len(views)), dtype=np.int64)
    np.add.at(counts, (x_key, view_idx.ravel()), 1)
    # distinct orderings of each shuffled column of a representative matrix
    rep = np.zeros(len(views), dtype=np.int64)
    rep[view_idx.ravel()] = np.arange(total)
    orderings = np.ones(len(views), dtype=float)
    n_fact = math.factorial(n)
    for j in range(k):
        if unshuffled_last and j == k - 1:
            continue
        col = cols[j][rep]
        mult = np.ones(len(views), dtype=float)
        for v in range(q):
            c = np.sum(col == v, axis=1)
            mult *= np.array([math.factorial(int(t)) for t in c])
        orderings *= n_fact / mult
    return counts, orderings


def _tv_stats(counts: np.ndarray, n: int, q: int, denom: float):
    """Worst and average TV over equal-sum pairs (pairs with x == x' included in the average)."""
    xs = _digits(q**n, n, q)
    sums = xs.sum(axis=1) % q
    probs = counts / denom
    worst, acc, pairs = 0.0, 0.0, 0
    for s in range(q):
        block = probs[sums == s]
        tv = 0.5 * np.abs(block[:, None, :] - block[None, :, :]).sum(axis=2)
        worst = max(worst, float(tv.max()))
        acc += float(tv.sum())
        pairs += tv.size
    return worst, acc / pairs


@dataclass(frozen=True)
class TVReport:
    n: int
    m: int
    q: int
    worst_tv: float
    avg_tv: float
    pr_collision: float
    collision_bound: float
    expected_q_components: float
    graph_identity_gap: float
    randomized_worst_tv: float | None

    @property
    def avg_bound_holds(self) -> bool:
        return self.avg_tv <= self.collision_bound + 1e-12

    @property
    def randomized_claim_holds(self) -> bool | None:
        """Whether worst-case TV with one extra unshuffled share <= base average TV."""
        if self.randomized_worst_tv is None:
            return None
        return self.randomized_worst_tv <= self.avg_tv + 1e-12

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["avg_bound_holds"] = self.avg_bound_holds
        d["randomized_claim_holds"] = self.randomized_claim_holds
        return d


def exact_tv_oracle(instance: TinyInstance, randomized_variant: bool = True) -> TVReport:
    """Exhaustive security report for m-share additive summation.

    Computes the exact view law for every input in ``Z_q^n``, the worst and
    average total variation over equal-sum input pairs, the probability
    ``Pr[E]`` that two executions on the same uniform input produce the same
    ordered shuffler outputs, and ``sqrt(q^(mn-1) Pr[E] - 1)``.  ``Pr[E]`` is
    cross-checked against ``q^(-mn) E[q^C(G)]`` from the exact component
    distribution.  With ``randomized_variant`` the worst-case TV of the
    protocol with an additional unshuffled share is reported too.

    Raises:
        ResourceError: if the instance exceeds the enumeration budget.
    """
    n, m, q = instance.n, instance.m, instance.q
    instance.validate(1 if randomized_variant else 0)
    counts, orderings = _view_table(n, m, q, unshuffled_last=False)
    denom = float(q ** ((m - 1) * n))
    worst, avg = _tv_stats(counts, n, q, denom)
    probs = counts / denom
    pr_e = float(np.sum(probs**2 / orderings[None, :])) / q**n
    bound = math.sqrt(max(0.0, q ** (m * n - 1) * pr_e - 1.0))
    dist = exact_component_distribution(n, m)
    eqc = float(np.sum(dist * np.power(float(q), np.arange(n + 1))))
    gap = abs(pr_e - eqc / q ** (m * n))
    rworst = None
    if randomized_variant:
        rcounts, _ = _view_table(n, m + 1, q, unshuffled_last=True)
        rworst, _ = _tv_stats(rcounts, n, q, float(q ** (m * n)))
    return TVReport(n, m, q, worst, avg, pr_e, bound, eqc, gap, rworst)


def collision_probability_bruteforce(n: int, m: int, q: int) -> float:
    """``Pr[E]`` by enumerating every share matrix and every tuple of shuffles.

    Slow reference for the multiset-based computation in :func:`exact_tv_oracle`.
    """
    total = q ** (n * m) * math.factorial(n) ** m
    if total > 200_000:
        raise ResourceError("brute-force collision enumeration too large")
    perms = list(itertools.permutations(range(n)))
    acc = 0.0
    for x in itertools.product(range(q), repeat=n):
        law: dict = {}
        for free in itertools.product(range(q), repeat=n * (m - 1)):
            rows = [list(free[i * (m - 1) : (i + 1) * (m - 1)]) for i in range(n)]
            for i in range(n):
                rows[i].append((x[i] - sum(rows[i])) % q)
            for pt in itertools.product(perms, repeat=m):
                key = tuple(tuple(rows[pt[j][i]][j] for i in range(n)) for j in range(m))
                law[key] = law.get(key, 0) + 1
        norm = q ** (n * (m - 1)) * math.factorial(n) ** m
        acc += sum((c / norm) ** 2 for c in law.values())
    return acc / q**n


__all__ = [
    "PermutationMultigraph",
    "sample_multigraph",
    "connected_components",
    "sample_component_counts",
    "q_power_mean",
    "estimate_q_power_components",
    "max_admissible_q",
    "component_bound",
    "component_count_bound",
    "avg_security_sigma",
    "exact_component_distribution",
    "TinyInstance",
    "TVReport",
    "exact_tv_oracle",
    "collision_probability_bruteforce",
]

"""Parallel-shuffler execution engine.

A protocol is a pair (local randomizer, analyzer).  The randomizer is
vectorized over users: it maps the length-``n`` input vector to an
``(n, m)`` message matrix whose column ``j`` is the message each user sends
to shuffler ``j``.  Every column goes through its own independent shuffler,
except for at most one column flagged as sent outside the shuffle.

Shuffling only hides the order of a column, so a shuffled column is
informationally the same as its multiset.  :class:`View` stores every
shuffled column in sorted order, which makes view equality well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .errors import ProtocolError
from .sampling import RngStream, _gen


def shuffle(messages, rng: RngStream):
    """Uniformly random permutation of ``messages`` (Fisher-Yates in numpy)."""
    arr = np.asarray(messages)
    if arr.shape[0] == 0:
        raise ProtocolError("cannot shuffle an empty sequence")
    return _gen(rng).permutation(arr)


@dataclass(frozen=True, eq=False)
class View:
    """What the analyzer observes: one canonical multiset per shuffler.

    Attributes:
        columns: tuple of 1-D integer arrays.  Shuffled columns are sorted;
            the unshuffled column (if any) keeps user order.
        unshuffled: index of the column sent outside the shuffle, or None.
    """

    columns: tuple
    unshuffled: int | None = None

    @property
    def m(self) -> int:
        return len(self.columns)

    @property
    def n(self) -> int:
        return len(self.columns[0])

    def all_messages(self) -> np.ndarray:
        return np.concatenate(self.columns)

    def __eq__(self, other):
        if not isinstance(other, View):
            return NotImplemented
        return (
            self.unshuffled == other.unshuffled
            and self.m == other.m
            and all(np.array_equal(a, b) for a, b in zip(self.columns, other.columns))
        )

    def __hash__(self):
        return hash((self.unshuffled,) + tuple(c.tobytes() for c in self.columns))


def canonical_view(columns, unshuffled: int | None = None) -> View:
    """Sort every shuffled column; leave the unshuffled one in user order."""
    cols = []
    for j, col in enumerate(columns):
        col = np.asarray(col)
        cols.append(col.copy() if j == unshuffled else np.sort(col, kind="stable"))
    return View(tuple(cols), unshuffled)


@dataclass(frozen=True)
class ShuffleProtocol:
    """An ``m``-message protocol in the parallel shuffle model.

    Attributes:
        name: short identifier used in reports.
        randomizer: ``(x: ndarray[n], rng) -> ndarray[n, m]``.
        analyzer: ``(view) -> float``.
        m: messages per user.
        unshuffled: column index sent outside the shuffle, or None.
        params: the planned parameter record (for provenance only).
    """

    name: str
    randomizer: Callable[[np.ndarray, RngStream], np.ndarray]
    analyzer: Callable[[View], float]
    m: int
    unshuffled: int | None = None
    params: Any = field(default=None, compare=False)
    baseline: bool = False


def run_shufflers(matrix: np.ndarray, rng: RngStream, unshuffled: int | None = None) -> View:
    """Send column ``j`` of the message matrix through shuffler ``j``."""
    g = _gen(rng)
    cols = []
    for j in range(matrix.shape[1]):
        col = matrix[:, j]
        cols.append(col if j == unshuffled else g.permutation(col))
    return canonical_view(cols, unshuffled)


def execute(protocol: ShuffleProtocol, inputs, rng: RngStream) -> tuple[View, float]:
    """Run one execution of ``protocol`` on ``inputs``.

    Returns:
        ``(view, output)``: the analyzer's canonical view and its estimate.

    Raises:
        ProtocolError: when the randomizer returns the wrong arity or there
            are fewer than two users for a non-baseline protocol.
    """
    x = np.asarray(inputs, dtype=float)
    if x.ndim != 1:
        raise ProtocolError("inputs must be a 1-D sequence")
    if len(x) < 2 and not protocol.baseline:
        raise ProtocolError("shuffle protocols need at least two users")
    matrix = np.asarray(protocol.randomizer(x, rng))
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    if matrix.shape != (len(x), protocol.m):
        raise ProtocolError(
            f"{protocol.name}: randomizer produced shape {matrix.shape}, "
            f"expected {(len(x), protocol.m)}"
        )
    view = run_shufflers(matrix, rng, protocol.unshuffled)
    return view, float(protocol.analyzer(view))


def identity_protocol() -> ShuffleProtocol:
    """Non-private reference: each user sends its input, the analyzer sums."""
    return ShuffleProtocol(
        name="identity",
        randomizer=lambda x, rng: x[:, None],
        analyzer=lambda view: math.fsum(view.columns[0]),
        m=1,
        baseline=True,
    )

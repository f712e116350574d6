import math

import numpy as np
import pytest

from shufflesum.errors import ProtocolError
from shufflesum.ikos import IkosParams, ikos_protocol
from shufflesum.sampling import RngStream, randomized_round
from shufflesum.shuffle import (
    ShuffleProtocol,
    View,
    canonical_view,
    execute,
    identity_protocol,
    shuffle,
)


def test_shuffle_trivial(rng):
    assert shuffle([5], rng).tolist() == [5]
    assert shuffle([2, 2, 2], rng).tolist() == [2, 2, 2]
    with pytest.raises(ProtocolError):
        shuffle([], rng)


def test_shuffle_uniform_over_orderings(rng):
    draws = 600_000
    base = np.arange(3)
    keys = np.fromiter(
        (int(np.dot(shuffle(base, rng), (9, 3, 1))) for _ in range(draws)), dtype=np.int64, count=draws
    )
    _, counts = np.unique(keys, return_counts=True)
    assert len(counts) == 6
    se = math.sqrt(draws * (1 / 6) * (5 / 6))
    assert np.all(np.abs(counts - draws / 6) <= 3 * se)


def test_identity_protocol(rng):
    view, out = execute(identity_protocol(), [1, 2, 3], rng)
    assert out == 6
    assert view.columns[0].tolist() == [1, 2, 3]


def test_view_canonical_equality():
    a = canonical_view([np.array([3, 1, 2]), np.array([0, 5, 5])])
    b = canonical_view([np.array([2, 3, 1]), np.array([5, 0, 5])])
    assert a == b and hash(a) == hash(b)
    c = canonical_view([np.array([3, 1, 2]), np.array([0, 5, 5])], unshuffled=1)
    d = canonical_view([np.array([3, 1, 2]), np.array([5, 0, 5])], unshuffled=1)
    assert c != d
    assert a.m == 2 and a.n == 3 and len(a.all_messages()) == 6


def test_execute_arity_check(rng):
    bad = ShuffleProtocol("bad", lambda x, r: np.zeros((len(x), 3)), lambda v: 0.0, m=2)
    with pytest.raises(ProtocolError):
        execute(bad, [0.1, 0.2], rng)


def test_execute_needs_two_users(rng):
    proto = ShuffleProtocol("p", lambda x, r: x[:, None], lambda v: 0.0, m=1)
    with pytest.raises(ProtocolError):
        execute(proto, [0.5], rng)
    assert execute(identity_protocol(), [0.5], rng)[1] == 0.5


def test_unshuffled_column_keeps_order(rng):
    proto = ShuffleProtocol(
        "two", lambda x, r: np.stack([x, x], axis=1).astype(int), lambda v: 0.0, m=2, unshuffled=1
    )
    view, _ = execute(proto, np.arange(10)[::-1], rng)
    assert view.columns[1].tolist() == list(range(9, -1, -1))
    assert view.columns[0].tolist() == list(range(10))


def test_analyzer_permutation_invariance(rng):
    params = IkosParams(n=20, p=5, q=1000, alpha=0.5, m_total=4)
    proto = ikos_protocol(params)
    x = RngStream(4).generator.random(20)
    view, out = execute(proto, x, rng)
    g = RngStream(5).generator
    for _ in range(10):
        cols = [g.permutation(c) if j != view.unshuffled else c for j, c in enumerate(view.columns)]
        assert proto.analyzer(View(tuple(cols), view.unshuffled)) == out


def test_ikos_exact_without_noise():
    n, p = 30, 7
    params = IkosParams(n=n, p=p, q=2 * n * p, alpha=0.0, m_total=3)
    proto = ikos_protocol(params)
    x = RngStream(1).generator.random(n)
    for seed in range(50):
        _, out = execute(proto, x, RngStream(seed))
        expected = np.sum(randomized_round(x, p, RngStream(seed))) / p
        assert out == expected

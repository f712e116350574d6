import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from conftest import within_ci
from shufflesum.errors import ParameterError
from shufflesum.sampling import (
    RngStream,
    bernoulli,
    discrete_laplace_pmf,
    discrete_laplace_variance,
    laplace,
    randomized_round,
    sample_discrete_laplace,
    sample_polya,
    uniform_int,
)


def test_stream_reproducible_and_distinct():
    a = RngStream(7, 3).generator.random(5)
    b = RngStream(7, 3).generator.random(5)
    c = RngStream(7, 4).generator.random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    s = RngStream(7)
    assert np.array_equal(s.substream(2).generator.random(3), RngStream(7, (0, 2)).generator.random(3))


def test_stream_rejects_negative_seed():
    with pytest.raises(ParameterError):
        RngStream(-1)


def test_substreams_uncorrelated():
    a = RngStream(1).substream(0).generator.random(100_000)
    b = RngStream(1).substream(1).generator.random(100_000)
    assert abs(np.corrcoef(a, b)[0, 1]) < 4 / math.sqrt(100_000)


def test_bernoulli_degenerate(rng):
    assert not bernoulli(0.0, rng, size=1000).any()
    assert bernoulli(1.0, rng, size=1000).all()
    assert bernoulli(0.0, rng) == 0 and bernoulli(1.0, rng) == 1


def test_bernoulli_half(rng):
    draws = bernoulli(0.5, rng, size=10**6)
    assert abs(draws.mean() - 0.5) <= 3 * math.sqrt(0.25 / 10**6)


@pytest.mark.parametrize("prob", [-0.1, 1.1, float("nan")])
def test_bernoulli_rejects(prob, rng):
    with pytest.raises(ParameterError):
        bernoulli(prob, rng)


def test_uniform_int(rng):
    assert (uniform_int(3, 3, rng, size=100) == 3).all()
    bits = uniform_int(0, 1, rng, size=10**6)
    assert abs(bits.mean() - 0.5) <= 3 * math.sqrt(0.25 / 10**6)
    draws = uniform_int(0, 10, rng, size=10**6)
    counts = np.bincount(draws, minlength=11)
    assert stats.chisquare(counts).pvalue > 0.01
    with pytest.raises(ParameterError):
        uniform_int(2, 1, rng)


def test_randomized_round_examples(rng):
    draws = randomized_round(np.full(10**5, 0.2342), 10, rng)
    assert set(np.unique(draws)) == {2, 3}
    assert abs((draws == 3).mean() - 0.342) <= 3 * math.sqrt(0.342 * 0.658 / 10**5)
    assert randomized_round(0.5, 2, rng) == 1
    assert randomized_round(1.0, 7, rng) == 7
    assert isinstance(randomized_round(0.3, 4, rng), int)


@pytest.mark.parametrize("x", [-0.01, 1.01])
def test_randomized_round_rejects(x, rng):
    with pytest.raises(ParameterError):
        randomized_round(x, 10, rng)


@settings(max_examples=25, deadline=None)
@given(x=st.floats(0, 1), p=st.integers(1, 1000), seed=st.integers(0, 2**32))
def test_randomized_round_unbiased(x, p, seed):
    draws = randomized_round(np.full(10**5, x), p, RngStream(seed))
    assert draws.min() >= 0 and draws.max() <= p
    frac = x * p - math.floor(x * p)
    assert within_ci(draws / p, x, k=4.5, var=frac * (1 - frac) / p**2)


def test_rounding_mse_bound(rng):
    x = RngStream(3).generator.random(200)
    p = 5
    errs = [np.sum(randomized_round(x, p, rng)) / p - x.sum() for _ in range(4000)]
    sq = np.square(errs)
    assert sq.mean() <= len(x) / (4 * p**2) + 3 * sq.std(ddof=1) / math.sqrt(len(sq))


def test_polya_degenerate_and_moments(rng):
    assert (sample_polya(0.3, 0.0, rng, 100) == 0).all()
    r, b = 0.01, 0.9
    draws = sample_polya(r, b, rng, 10**6)
    mean, var = r * b / (1 - b), r * b / (1 - b) ** 2
    assert within_ci(draws, mean, var=var)
    assert abs(draws.var() - var) / var < 0.1
    with pytest.raises(ParameterError):
        sample_polya(1.0, 1.0, rng)
    with pytest.raises(ParameterError):
        sample_polya(0.0, 0.5, rng)


def test_polya_matches_negative_binomial_pmf(rng):
    # independent oracle: scipy's negative binomial with real shape
    r, b = 2.5, 0.6
    draws = sample_polya(r, b, rng, 10**5)
    top = 15
    obs = np.bincount(np.minimum(draws, top), minlength=top + 1)
    pmf = stats.nbinom.pmf(np.arange(top), r, 1 - b)
    exp = np.append(pmf, 1 - pmf.sum()) * len(draws)
    assert stats.chisquare(obs, exp).pvalue > 0.01


def _dlap_gof(samples, alpha, cut):
    k = np.arange(-cut, cut + 1)
    pmf = discrete_laplace_pmf(k, alpha)
    obs = np.array([np.sum(samples == v) for v in k] + [np.sum(np.abs(samples) > cut)])
    exp = np.append(pmf, 1 - pmf.sum()) * len(samples)
    return stats.chisquare(obs, exp).pvalue


def test_polya_difference_divisibility(rng):
    n, alpha, trials = 100, 0.8, 10**5
    a = sample_polya(1 / n, alpha, rng, (trials, n)).sum(axis=1)
    b = sample_polya(1 / n, alpha, rng, (trials, n)).sum(axis=1)
    assert _dlap_gof(a - b, alpha, 12) > 0.01


def test_discrete_laplace(rng):
    assert (sample_discrete_laplace(0.0, rng, 50) == 0).all()
    draws = sample_discrete_laplace(0.5, rng, 10**6)
    var = discrete_laplace_variance(0.5)
    assert var == 4.0
    # variance of the sample variance via the fourth moment
    m4 = np.mean(draws.astype(float) ** 4)
    assert abs(draws.var() - var) <= 3 * math.sqrt((m4 - var**2) / len(draws))
    for k in (1, 2, 3):
        pk, pmk = np.mean(draws == k), np.mean(draws == -k)
        se = math.sqrt((pk + pmk) / len(draws))
        assert abs(pk - pmk) <= 3 * se
    assert _dlap_gof(draws, 0.5, 10) > 0.01
    with pytest.raises(ParameterError):
        sample_discrete_laplace(1.0, rng)


def test_discrete_laplace_pmf_sums_to_one():
    k = np.arange(-500, 501)
    assert math.isclose(discrete_laplace_pmf(k, 0.9).sum(), 1.0, rel_tol=1e-12)


def test_laplace(rng):
    draws = laplace(2.0, rng, 10**5)
    assert stats.kstest(draws, stats.laplace(scale=2.0).cdf).pvalue > 0.01
    assert laplace(0.0, rng) == 0.0


def test_samplers_reproducible():
    def draw(seed):
        r = RngStream(seed, 9)
        return (
            bernoulli(0.3, r, 5).tolist(),
            uniform_int(0, 9, r, 5).tolist(),
            randomized_round(np.full(5, 0.37), 10, r).tolist(),
            sample_polya(0.5, 0.7, r, 5).tolist(),
            sample_discrete_laplace(0.6, r, 5).tolist(),
        )

    assert draw(5) == draw(5)
    assert draw(5) != draw(6)

import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fitness_tails.exact_oracle import (
    OracleTooLarge,
    exact_cdf,
    exact_lower_tail,
    exact_pmf,
    exact_upper_tail,
)
from fitness_tails.tail_bounds import GeometricSumSpec, lower_tail_bound, upper_tail_bound


def brute_force_pmf(probs, t_max):
    """Enumerate all (j_1, ..., j_n) with sum <= t_max."""
    n = len(probs)
    out = [0.0] * (t_max + 1)
    for js in itertools.product(range(1, t_max + 1), repeat=n):
        t = sum(js)
        if t <= t_max:
            out[t] += math.prod(p * (1 - p) ** (j - 1) for p, j in zip(probs, js))
    return out


def test_single_geometric():
    pmf = exact_pmf(GeometricSumSpec([0.5]), 3)
    np.testing.assert_allclose(pmf.masses, [0.5, 0.25, 0.125], atol=1e-15)
    assert pmf.residual == pytest.approx(0.125, abs=1e-15)
    assert pmf.support_start == 1 and pmf.t_max == 3


def test_deterministic_sum():
    pmf = exact_pmf(GeometricSumSpec([1.0, 1.0]), 2)
    np.testing.assert_allclose(pmf.masses, [1.0])
    assert pmf.residual == 0.0


def test_two_halves_vs_enumeration():
    pmf = exact_pmf(GeometricSumSpec([0.5, 0.5]), 4)
    brute = brute_force_pmf([0.5, 0.5], 4)
    np.testing.assert_allclose(pmf.masses, [0.25, 0.25, 0.1875], atol=1e-15)
    np.testing.assert_allclose(pmf.masses, brute[2:], atol=1e-15)


@pytest.mark.parametrize("probs", [[0.3, 0.7, 0.9], [0.25, 0.5, 1.0, 0.6]])
def test_matches_enumeration(probs):
    t_max = 10
    pmf = exact_pmf(GeometricSumSpec(probs), t_max)
    np.testing.assert_allclose(pmf.masses, brute_force_pmf(probs, t_max)[len(probs):], atol=1e-14)


def test_rejects_small_t_max():
    with pytest.raises(ValueError):
        exact_pmf(GeometricSumSpec([0.5, 0.5]), 1)


def test_size_guard():
    with pytest.raises(OracleTooLarge):
        exact_pmf(GeometricSumSpec([0.5] * 1000), 10**6)


def test_truncation_flag():
    assert exact_pmf(GeometricSumSpec([0.1]), 3).truncated
    assert not exact_pmf(GeometricSumSpec([0.9]), 20).truncated


@pytest.mark.parametrize(
    "probs, t, expected",
    [([1.0], 1, 0.0), ([0.5, 0.5], 3, 0.5), ([0.5, 0.5], 1, 1.0)],
)
def test_upper_tail_examples(probs, t, expected):
    assert exact_upper_tail(GeometricSumSpec(probs), t) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize(
    "probs, t, expected",
    [([0.5, 0.5], 2, 0.0), ([0.5, 0.5], 4, 0.5), ([1.0], 2, 1.0)],
)
def test_lower_tail_examples(probs, t, expected):
    assert exact_lower_tail(GeometricSumSpec(probs), t) == pytest.approx(expected, abs=1e-15)


def test_fractional_and_inclusive_thresholds():
    spec = GeometricSumSpec([0.5, 0.5])
    # X in {2, 3, ...}; P(X<=3) = 0.5
    assert exact_lower_tail(spec, 3.5) == pytest.approx(0.5)
    assert exact_lower_tail(spec, 3, inclusive=True) == pytest.approx(0.5)
    assert exact_upper_tail(spec, 3.5) == pytest.approx(0.5)
    assert exact_upper_tail(spec, 4, inclusive=True) == pytest.approx(0.5)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.2, 1.0), min_size=2, max_size=6), st.randoms())
def test_permutation_invariance(probs, rnd):
    shuffled = probs[:]
    rnd.shuffle(shuffled)
    a = exact_pmf(GeometricSumSpec(probs), 40)
    b = exact_pmf(GeometricSumSpec(shuffled), 40)
    np.testing.assert_allclose(a.masses, b.masses, atol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("p", [0.2, 0.5, 0.9])
def test_negative_binomial(n, p):
    pmf = exact_pmf(GeometricSumSpec([p] * n), 50)
    t = np.arange(n, 51)
    closed = np.array([math.comb(int(k) - 1, n - 1) * p**n * (1 - p) ** (int(k) - n) for k in t])
    np.testing.assert_allclose(pmf.masses, closed, atol=1e-10)


def test_mass_conservation_and_mean():
    spec = GeometricSumSpec([0.3, 0.6, 0.45])
    pmf = exact_pmf(spec, 400)
    assert math.fsum(pmf.masses) + pmf.residual == pytest.approx(1.0, abs=1e-10)
    mean = float(np.dot(pmf.support(), pmf.masses))
    assert mean == pytest.approx(spec.mean(), abs=1e-9)


def test_residual_decreases():
    spec = GeometricSumSpec([0.3, 0.6])
    res = [exact_pmf(spec, t).residual for t in range(2, 30)]
    assert all(b <= a for a, b in zip(res, res[1:]))


def test_exact_cdf():
    spec = GeometricSumSpec([0.5, 0.5])
    np.testing.assert_allclose(exact_cdf(spec, np.array([0, 1, 2, 3, 4])), [0, 0, 0.25, 0.5, 0.6875])


def test_dominance_randomized():
    rnd = random.Random(7)
    for _ in range(50):
        spec = GeometricSumSpec([rnd.uniform(0.2, 1.0) for _ in range(rnd.randint(1, 8))])
        mean = spec.mean()
        for d in np.linspace(0.25, 12, 12):
            assert exact_upper_tail(spec, mean + d) <= upper_tail_bound(spec, d).bound + 1e-12
            if mean - d >= 0:
                assert exact_lower_tail(spec, mean - d) <= lower_tail_bound(spec, d).bound + 1e-12

"""RLS on OneMax: level probabilities, harmonic sums and the specialised tail bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma
from scipy.stats import binom

from .fitness_levels import LevelPartition
from .tail_bounds import GeometricSumSpec, upper_log_exponents

EULER_GAMMA = 0.57721566490153286
PI2_OVER_6 = math.pi**2 / 6.0

# bracket on the linear coefficient of E(T); gamma - ln 2 = -0.1159315...
LINEAR_COEF_LOW = -0.11594
LINEAR_COEF_HIGH = -0.11593


def onemax_partition(n: int, k: int = 0) -> LevelPartition:
    """Levels ``k..n-1``; from level ``i`` a step succeeds with probability ``(n - i)/n``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 <= k < n:
        raise ValueError(f"start level {k} must satisfy 0 <= k < n = {n}")
    return LevelPartition([(n - i) / n for i in range(k, n)], start_level=k, no_skip=True)


def onemax_spec(n: int, k: int = 0) -> GeometricSumSpec:
    return onemax_partition(n, k).spec()


def harmonic(m: int) -> float:
    if m < 1:
        raise ValueError("harmonic number needs m >= 1")
    return math.fsum(1.0 / i for i in range(m, 0, -1))


def harmonic_asymptotic(m: int) -> float:
    return math.log(m) + EULER_GAMMA


def harmonic_array(m: int) -> np.ndarray:
    """``H_0, ..., H_m`` with ``H_0 = 0``."""
    j = np.arange(m + 1, dtype=np.float64)
    return digamma(j + 1.0) + EULER_GAMMA


@dataclass(frozen=True)
class OneMaxAnalysis:
    n: int
    gamma: float = EULER_GAMMA

    @property
    def s_paper(self) -> float:
        """``n^2 pi^2 / 6``, an upper bound on ``sum 1/p_i^2`` from any start level."""
        return _paper_delta_s(self.n, 1.0)[1]

    @property
    def h(self) -> float:
        return 1.0 / self.n

    def s_exact(self, k: int = 0) -> float:
        return onemax_spec(self.n, k).s_exact()


@dataclass(frozen=True)
class RuntimeBand:
    lower: float
    upper: float
    exact_expectation: float
    o_n_omitted: bool = True


def expected_runtime_from(n: int, k: int) -> float:
    """``E(T)`` from a fixed start level ``k``: ``1 + n H_{n-k}``."""
    return 1.0 + (n * harmonic(n - k) if k < n else 0.0)


def exact_expected_runtime(n: int) -> float:
    """``E(T)`` under uniform initialisation: binomial mixture of ``1 + n H_{n-k}``."""
    k = np.arange(n + 1)
    weights = binom.pmf(k, n, 0.5)
    h = harmonic_array(n)[n - k]
    return 1.0 + n * math.fsum(weights * h)


def expected_runtime_band(n: int) -> RuntimeBand:
    """Asymptotic band ``n ln n + c n`` for ``c`` in ``[-0.11594, -0.11593]``.

    The ``o(n)`` terms are not included (``o_n_omitted`` is always set);
    ``exact_expectation`` is the finite-``n`` value for comparison.
    """
    if n < 2:
        raise ValueError("the band needs n >= 2")
    nln = n * math.log(n)
    return RuntimeBand(
        nln + LINEAR_COEF_LOW * n, nln + LINEAR_COEF_HIGH * n, exact_expected_runtime(n)
    )


def _paper_delta_s(n: int, r: float) -> tuple[float, float]:
    if not r > 0:
        raise ValueError(f"r must be positive, got {r!r}")
    return r * n, n * n * PI2_OVER_6


def onemax_lower_tail(n: int, r: float) -> float:
    """Bound on ``P(T <= E(T) - r n)``: ``exp(-3 r^2 / pi^2)``.

    Evaluated as ``exp(-delta^2 / (2 s))`` with ``delta = r n`` and
    ``s = n^2 pi^2 / 6`` so that it matches the generic bound bit for bit.
    """
    delta, s = _paper_delta_s(n, r)
    return math.exp(-(delta * delta) / (2.0 * s))


def onemax_upper_tail(n: int, r: float) -> float:
    """Bound on ``P(T >= E(T) + r n)``.

    ``exp(-3 r^2 / (2 pi^2))`` for ``r <= pi^2/6`` and ``exp(-r/4)`` beyond;
    the switch is the generic ``delta <= s h`` test with ``h = 1/n``.
    """
    delta, s = _paper_delta_s(n, r)
    h = 1.0 / n
    quad, lin = upper_log_exponents(delta, s, h)
    return math.exp(quad if delta <= s * h else lin)

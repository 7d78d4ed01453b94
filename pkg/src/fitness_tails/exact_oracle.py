"""Exact distribution of a geometric sum by dynamic-programming convolution.

Adding one ``Geom(p)`` summand to a pmf ``f`` gives ``g[t] = p f[t-1] + (1-p) g[t-1]``,
a first-order linear recurrence, so each convolution is a single ``lfilter`` pass.
The mass beyond the truncation point is carried explicitly, which makes upper
tails exact rather than truncated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .tail_bounds import GeometricSumSpec

MAX_CELLS = 10**8
RESIDUAL_WARN = 0.01


class OracleTooLarge(ValueError):
    """Requested instance exceeds the desk-scale size guard."""


@dataclass(frozen=True)
class ExactPmf:
    support_start: int
    masses: np.ndarray
    residual: float
    truncated: bool = False  # residual above RESIDUAL_WARN

    @property
    def t_max(self) -> int:
        return self.support_start + len(self.masses) - 1

    def support(self) -> np.ndarray:
        return np.arange(self.support_start, self.t_max + 1)

    def cdf(self) -> np.ndarray:
        return np.minimum(np.cumsum(self.masses), 1.0)


def oracle_feasible(spec: GeometricSumSpec, t_max: int) -> bool:
    return t_max * spec.n <= MAX_CELLS


def exact_pmf(spec: GeometricSumSpec, t_max: int) -> ExactPmf:
    n = spec.n
    t_max = int(t_max)
    if t_max < n:
        raise ValueError(f"t_max = {t_max} is below the minimum value {n} of the sum")
    if not oracle_feasible(spec, t_max):
        raise OracleTooLarge(
            f"{n} summands x t_max {t_max} exceeds {MAX_CELLS} cells; use a smaller instance"
        )
    f = np.zeros(t_max + 1)
    f[0] = 1.0
    for p in spec.probs:
        f = lfilter([0.0, p], [1.0, -(1.0 - p)], f)
    masses = np.clip(f[n:], 0.0, None)
    residual = max(0.0, 1.0 - math.fsum(masses))
    return ExactPmf(n, masses, residual, residual > RESIDUAL_WARN)


def exact_upper_tail(spec: GeometricSumSpec, t: float, inclusive: bool = False) -> float:
    """``P(X > t)``, or ``P(X >= t)`` with ``inclusive=True``."""
    if t < 0:
        raise ValueError(f"threshold must be >= 0, got {t!r}")
    # largest integer value NOT in the event
    last_excluded = math.ceil(t) - 1 if inclusive else math.floor(t)
    if last_excluded < spec.n:
        return 1.0
    return exact_pmf(spec, last_excluded).residual


def exact_lower_tail(spec: GeometricSumSpec, t: float, inclusive: bool = False) -> float:
    """``P(X < t)``, or ``P(X <= t)`` with ``inclusive=True``."""
    if t < 0:
        raise ValueError(f"threshold must be >= 0, got {t!r}")
    last_included = math.floor(t) if inclusive else math.ceil(t) - 1
    if last_included < spec.n:
        return 0.0
    return min(1.0, math.fsum(exact_pmf(spec, last_included).masses))


def exact_cdf(spec: GeometricSumSpec, values: np.ndarray) -> np.ndarray:
    """``P(X <= v)`` for each integer ``v`` in ``values``."""
    values = np.asarray(values, dtype=np.int64)
    top = int(values.max()) if values.size else spec.n
    if top < spec.n:
        return np.zeros(values.shape)
    pmf = exact_pmf(spec, top)
    cdf = pmf.cdf()
    idx = values - spec.n
    out = np.zeros(values.shape)
    ok = idx >= 0
    out[ok] = cdf[idx[ok]]
    return out

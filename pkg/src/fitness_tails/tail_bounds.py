"""Tail bounds for sums of independent geometric random variables.

Geometric variables use the *trials* convention: ``P(X_i = j) = p_i (1 - p_i)^(j - 1)``
for ``j = 1, 2, ...``, so ``E[X_i] = 1 / p_i``. Mixing this up with the
``{0, 1, ...}`` convention shifts every threshold by ``n``.

All bounds are evaluated as log-probabilities and exponentiated at the end, so
specs with millions of levels neither overflow nor underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

Regime = Literal["quadratic", "linear", "degenerate"]

# relative slack when comparing a user-supplied s or h with the exact value
_REL_SLACK = 1e-12

GOLDEN_TOL = 1e-12
LOWER_T_MAX = 50.0


@dataclass(frozen=True)
class GeometricSumSpec:
    """Success probabilities of the independent geometric summands."""

    probs: tuple[float, ...]

    def __init__(self, probs: Sequence[float]):
        probs = tuple(float(p) for p in probs)
        if not probs:
            raise ValueError("a geometric sum needs at least one summand")
        for i, p in enumerate(probs):
            if not (0.0 < p <= 1.0) or math.isnan(p):
                raise ValueError(f"probability #{i} = {p!r} is not in (0, 1]")
        object.__setattr__(self, "probs", probs)

    @property
    def n(self) -> int:
        return len(self.probs)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=np.float64)

    def mean(self) -> float:
        return math.fsum(1.0 / p for p in self.probs)

    def s_exact(self) -> float:
        return math.fsum(1.0 / (p * p) for p in self.probs)

    def h(self) -> float:
        return min(self.probs)


@dataclass(frozen=True)
class TailBoundResult:
    bound: float
    regime: Regime
    delta: float
    s_used: float
    h_used: Optional[float] = None
    log_bound: float = 0.0

    @property
    def confidence(self) -> float:
        """``1 - bound``, computed without cancellation."""
        return -math.expm1(self.log_bound)


def _check_delta(delta: float) -> float:
    delta = float(delta)
    if not delta >= 0.0:
        raise ValueError(f"delta must be nonnegative, got {delta!r}")
    return delta


def _resolve_s(spec: GeometricSumSpec, s_override: Optional[float]) -> float:
    s_exact = spec.s_exact()
    if s_override is None:
        return s_exact
    s = float(s_override)
    if not math.isfinite(s) or s < s_exact * (1.0 - _REL_SLACK):
        raise ValueError(
            f"s = {s!r} is below sum(1/p_i^2) = {s_exact!r}; the bound would not hold"
        )
    return s


def _resolve_h(spec: GeometricSumSpec, h_override: Optional[float]) -> float:
    h_min = spec.h()
    if h_override is None:
        return h_min
    h = float(h_override)
    if not (0.0 < h <= h_min * (1.0 + _REL_SLACK)):
        raise ValueError(f"h = {h!r} must lie in (0, min p_i = {h_min!r}]")
    return h


def lower_tail_bound(
    spec: GeometricSumSpec, delta: float, s_override: Optional[float] = None
) -> TailBoundResult:
    """Bound ``P(X < E[X] - delta) <= exp(-delta^2 / (2 s))``."""
    delta = _check_delta(delta)
    s = _resolve_s(spec, s_override)
    if delta == 0.0:
        return TailBoundResult(1.0, "degenerate", 0.0, s, None, 0.0)
    log_bound = -(delta * delta) / (2.0 * s)
    return TailBoundResult(math.exp(log_bound), "quadratic", delta, s, None, log_bound)


def upper_log_exponents(delta: float, s: float, h: float) -> tuple[float, float]:
    """Both candidate log-bounds of the upper tail: ``(-delta^2/(4s), -delta*h/4)``."""
    return -(delta * delta) / (4.0 * s), -(delta * h) / 4.0


def upper_tail_bound(
    spec: GeometricSumSpec,
    delta: float,
    s_override: Optional[float] = None,
    h_override: Optional[float] = None,
) -> TailBoundResult:
    """Bound ``P(X > E[X] + delta) <= exp(-(delta/4) * min(delta/s, h))``.

    The regime is ``quadratic`` when ``delta <= s*h`` and ``linear`` otherwise;
    the flag is decided by that comparison alone, never by the bound's value.
    """
    delta = _check_delta(delta)
    s = _resolve_s(spec, s_override)
    h = _resolve_h(spec, h_override)
    if delta == 0.0:
        return TailBoundResult(1.0, "degenerate", 0.0, s, h, 0.0)
    quad, lin = upper_log_exponents(delta, s, h)
    if delta <= s * h:
        regime: Regime = "quadratic"
        log_bound = quad
    else:
        regime = "linear"
        log_bound = lin
    return TailBoundResult(math.exp(log_bound), regime, delta, s, h, log_bound)


def check_lemma2_part1(x: float) -> float:
    """Log-margin of ``e^x / (1 + x) <= e^(x^2/2)`` for ``x >= 0``.

    Returns ``log(rhs) - log(lhs)``; nonnegative whenever the inequality holds.
    """
    x = float(x)
    if not x >= 0.0:
        raise ValueError(f"x must be >= 0, got {x!r}")
    return x * x / 2.0 - x + math.log1p(x)


def check_lemma2_part2(x: float) -> float:
    """Log-margin of ``e^-x / (1 - x) <= e^(x^2/(2 - 2x))`` on ``[0, 1)``."""
    x = float(x)
    if not 0.0 <= x < 1.0:
        raise ValueError(f"x must lie in [0, 1), got {x!r}")
    return x * x / (2.0 - 2.0 * x) + x + math.log1p(-x)


def golden_section_min(f, lo: float, hi: float, tol: float = GOLDEN_TOL) -> tuple[float, float]:
    """Minimise a unimodal ``f`` on ``[lo, hi]``; returns ``(t, f(t))``."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
        # interval stops shrinking once it reaches float resolution
        if c >= d:
            break
    t = c if fc <= fd else d
    return t, min(fc, fd)


def log_mgf(probs: np.ndarray, r: float) -> float:
    """``sum_i log E[e^(r X_i)]`` for geometric ``X_i`` (trials convention).

    Requires ``r < -log(1 - p_i)`` for every ``i``.
    """
    q = 1.0 - probs
    with np.errstate(divide="ignore"):
        log_q = np.log(q)
    # 1 - e^r q, written via expm1 to keep precision for small r
    denom = -np.expm1(r + log_q)
    return float(np.sum(np.log(probs) + r - np.log(denom)))


def chernoff_lower_log(spec: GeometricSumSpec, delta: float) -> float:
    probs = spec.as_array()
    d = spec.mean() - delta

    def objective(t: float) -> float:
        return t * d + log_mgf(probs, -t)

    _, best = golden_section_min(objective, 0.0, LOWER_T_MAX)
    # the t used by the closed form is also a valid choice
    s = spec.s_exact()
    t_closed = min(delta / s, LOWER_T_MAX)
    return min(best, objective(t_closed), 0.0)


def chernoff_lower_bound(spec: GeometricSumSpec, delta: float) -> float:
    """Optimised exponential-method bound on ``P(X < E[X] - delta)``.

    Minimises ``t (E[X] - delta) + log E[e^(-tX)]`` over ``t in (0, 50]``
    with the exact geometric mgf. Never larger than :func:`lower_tail_bound`.
    """
    delta = float(delta)
    if not delta > 0.0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    return math.exp(chernoff_lower_log(spec, delta))


def upper_t_limit(spec: GeometricSumSpec) -> float:
    h = spec.h()
    if h >= 1.0:
        return LOWER_T_MAX
    return min(-math.log1p(-h) * (1.0 - 1e-9), LOWER_T_MAX)


def chernoff_upper_log(spec: GeometricSumSpec, delta: float) -> float:
    probs = spec.as_array()
    d = spec.mean() + delta

    def objective(t: float) -> float:
        return -t * d + log_mgf(probs, t)

    t_hi = upper_t_limit(spec)
    _, best = golden_section_min(objective, 0.0, t_hi)
    s, h = spec.s_exact(), spec.h()
    t_closed = min(delta / (2.0 * s), h / 2.0, t_hi)
    return min(best, objective(t_closed), 0.0)


def chernoff_upper_bound(spec: GeometricSumSpec, delta: float) -> float:
    """Optimised exponential-method bound on ``P(X > E[X] + delta)``.

    Searches the whole mgf existence domain ``0 < t < -log(1 - min p_i)``,
    which contains the ``t <= h/2`` range used by the closed form.
    """
    delta = float(delta)
    if not delta > 0.0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    return math.exp(chernoff_upper_log(spec, delta))


def zllh_comparison_bound(expected_time: float, worst_waiting_time: float, budget: float) -> float:
    """Earlier fitness-level tail bound ``P(T > 2E[T] + 2 d w) = e^-d``.

    ``worst_waiting_time`` is the largest expected waiting time on any level
    (the reciprocal of ``min p_i``). Only meaningful for ``budget >= 2 E[T]``.
    """
    if expected_time <= 0 or worst_waiting_time <= 0:
        raise ValueError("expected_time and worst_waiting_time must be positive")
    if budget < 2.0 * expected_time:
        raise ValueError(
            f"budget {budget!r} is below 2*E[T] = {2.0 * expected_time!r}; the bound is silent there"
        )
    d = (budget - 2.0 * expected_time) / (2.0 * worst_waiting_time)
    return math.exp(-d)

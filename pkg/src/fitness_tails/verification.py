"""Check tail bounds against the exact law and against simulated hitting times.

Every comparison is made on ``X = T - 1``, the number of steps after
initialisation, which is the geometric sum the bounds talk about.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

from .exact_oracle import MAX_CELLS, exact_lower_tail, exact_upper_tail
from .onemax import exact_expected_runtime, onemax_lower_tail, onemax_upper_tail
from .simulator import EmpiricalDistribution
from .tail_bounds import (
    GeometricSumSpec,
    chernoff_lower_bound,
    chernoff_upper_bound,
    lower_tail_bound,
    upper_tail_bound,
)

# slack for floating-point noise in the exact <= chernoff <= closed-form chain
ABS_TOL = 1e-12
SE_SLACK = 3.0

GridKind = Literal["delta", "r"]


@dataclass(frozen=True)
class Target:
    """The random variable under test.

    ``spec`` is the exact law of ``X`` when it is a single geometric sum (fixed
    start level); ``onemax_n`` switches the closed form to the OneMax
    specialisation with ``s = n^2 pi^2 / 6`` and ``h = 1/n``.
    """

    spec: Optional[GeometricSumSpec]
    mean_x: float
    onemax_n: Optional[int] = None

    @classmethod
    def geometric(cls, spec: GeometricSumSpec) -> "Target":
        return cls(spec, spec.mean())

    @classmethod
    def onemax(cls, n: int, spec: Optional[GeometricSumSpec]) -> "Target":
        """``spec`` is ``None`` for uniformly random initialisation."""
        mean_x = spec.mean() if spec is not None else exact_expected_runtime(n) - 1.0
        return cls(spec, mean_x, n)


def _se(p: float, total: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / total)


def verdict_for(
    closed: float,
    chernoff: Optional[float],
    exact: Optional[float],
    empirical: Optional[float],
    se: Optional[float],
) -> str:
    ok = True
    if chernoff is not None:
        ok &= chernoff <= closed + ABS_TOL
    if exact is not None and chernoff is not None:
        ok &= exact <= chernoff + ABS_TOL
    elif exact is not None:
        ok &= exact <= closed + ABS_TOL
    if empirical is not None:
        ok &= empirical <= closed + SE_SLACK * se
    return "pass" if ok else "fail"


def _exact_tail(spec, tail, threshold, inclusive):
    if threshold < 0:
        return 0.0 if tail == "lower" else 1.0
    if (math.floor(threshold) + 1) * spec.n > MAX_CELLS:
        return None
    if tail == "lower":
        return exact_lower_tail(spec, threshold, inclusive=inclusive)
    return exact_upper_tail(spec, threshold, inclusive=inclusive)


def verify_grid(
    target: Target,
    grid: Sequence[float],
    grid_kind: GridKind = "delta",
    dist: Optional[EmpiricalDistribution] = None,
    corrupt: float = 1.0,
) -> list[dict]:
    """One row per (tail, grid point), lower tail first.

    ``corrupt`` scales the closed-form bound; values below 1 make the check
    fail and serve as a self-test of the harness.
    """
    if grid_kind == "r" and target.onemax_n is None:
        raise ValueError("an r grid needs a OneMax target")
    onemax = target.onemax_n is not None and (grid_kind == "r" or target.spec is None)
    # OneMax statements use T <= E - rn and T >= E + rn
    inclusive = onemax
    if dist is not None:
        xs = dist.values() - 1
        ws = dist.weights()
    rows = []
    for tail in ("lower", "upper"):
        for g in grid:
            g = float(g)
            if onemax:
                n = target.onemax_n
                r = g if grid_kind == "r" else g / n
                delta = r * n
                if r == 0:
                    closed = 1.0
                elif tail == "lower":
                    closed = onemax_lower_tail(n, r)
                else:
                    closed = onemax_upper_tail(n, r)
            else:
                delta = g
                if tail == "lower":
                    closed = lower_tail_bound(target.spec, delta).bound
                else:
                    closed = upper_tail_bound(target.spec, delta).bound
            closed *= corrupt
            threshold = target.mean_x - delta if tail == "lower" else target.mean_x + delta

            chernoff = exact = None
            if target.spec is not None:
                if delta == 0:
                    chernoff = 1.0
                elif tail == "lower":
                    chernoff = chernoff_lower_bound(target.spec, delta)
                else:
                    chernoff = chernoff_upper_bound(target.spec, delta)
                exact = _exact_tail(target.spec, tail, threshold, inclusive)

            empirical = se = None
            if dist is not None:
                if tail == "lower":
                    mask = xs <= threshold if inclusive else xs < threshold
                else:
                    mask = xs >= threshold if inclusive else xs > threshold
                empirical = int(ws[mask].sum()) / dist.total
                se = _se(empirical, dist.total)

            rows.append(
                {
                    "tail": tail,
                    "delta_or_r": g,
                    "closed_form_bound": closed,
                    "chernoff_bound": chernoff,
                    "exact_tail": exact,
                    "empirical_tail": empirical,
                    "empirical_se": se,
                    "verdict": verdict_for(closed, chernoff, exact, empirical, se),
                }
            )
    return rows

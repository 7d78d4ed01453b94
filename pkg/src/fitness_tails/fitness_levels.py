"""Hitting-time bounds from a fitness-level partition.

A :class:`LevelPartition` lists, for the levels ``k, ..., m-1``, the probability
that one step leaves the level. Whether these are exact probabilities, lower
bounds (for :func:`upper_time_bound`) or upper bounds (for
:func:`lower_time_bound`) is up to the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

from .tail_bounds import (
    GeometricSumSpec,
    Regime,
    lower_tail_bound,
    upper_tail_bound,
)

Direction = Literal["upper", "lower"]


@dataclass(frozen=True)
class LevelPartition:
    level_probs: tuple[float, ...]
    start_level: int = 0
    no_skip: bool = True

    def __init__(self, level_probs: Sequence[float], start_level: int = 0, no_skip: bool = True):
        if start_level < 0:
            raise ValueError(f"start level must be >= 0, got {start_level}")
        spec = GeometricSumSpec(level_probs)
        object.__setattr__(self, "level_probs", spec.probs)
        object.__setattr__(self, "start_level", int(start_level))
        object.__setattr__(self, "no_skip", bool(no_skip))

    @property
    def m(self) -> int:
        """Index of the target level."""
        return self.start_level + len(self.level_probs)

    def spec(self) -> GeometricSumSpec:
        return GeometricSumSpec(self.level_probs)


@dataclass(frozen=True)
class HittingTimeBound:
    time_bound: float
    confidence: float
    direction: Direction
    delta: float
    regime: Regime


def upper_time_bound(
    part: LevelPartition,
    delta: float,
    s: Optional[float] = None,
    h: Optional[float] = None,
) -> HittingTimeBound:
    """Hitting time is at most ``sum 1/p_i + delta`` with the returned confidence."""
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    spec = part.spec()
    res = upper_tail_bound(spec, delta, s_override=s, h_override=h)
    return HittingTimeBound(spec.mean() + delta, res.confidence, "upper", float(delta), res.regime)


def lower_time_bound(part: LevelPartition, delta: float, s: Optional[float] = None) -> HittingTimeBound:
    """Hitting time is at least ``sum 1/p_i - delta`` (clamped at 0).

    Only valid when the process cannot gain more than one level per step.
    """
    if not part.no_skip:
        raise ValueError("lower bound requires a process that never skips a level (no_skip=True)")
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    spec = part.spec()
    res = lower_tail_bound(spec, delta, s_override=s)
    return HittingTimeBound(
        max(spec.mean() - delta, 0.0), res.confidence, "lower", float(delta), res.regime
    )


def delta_for_confidence(
    part: LevelPartition,
    target_confidence: float,
    direction: Direction,
    s: Optional[float] = None,
    h: Optional[float] = None,
) -> float:
    """Smallest ``delta`` whose bound reaches ``target_confidence``."""
    if not 0.0 < target_confidence < 1.0:
        raise ValueError(f"target confidence must lie in (0, 1), got {target_confidence!r}")
    spec = part.spec()
    s = spec.s_exact() if s is None else float(s)
    h = spec.h() if h is None else float(h)
    log_inv = -math.log1p(-target_confidence)
    if direction == "lower":
        return math.sqrt(2.0 * s * log_inv)
    if direction != "upper":
        raise ValueError(f"direction must be 'upper' or 'lower', got {direction!r}")
    quadratic = math.sqrt(4.0 * s * log_inv)
    if quadratic <= s * h:
        return quadratic
    return 4.0 * log_inv / h

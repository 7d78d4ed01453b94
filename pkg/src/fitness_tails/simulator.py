"""Seeded samplers of hitting times: RLS, the abstract level chain, coupon collecting.

Randomness comes from numpy's Philox-4x64 counter-based generator, keyed
directly with a 64-bit seed. Replication ``i`` of an experiment with master seed
``M`` uses the first 8 bytes (little endian) of ``blake2b(b"M:i", digest_size=8)``
as its seed, so a replication's outcome does not depend on how replications are
spread across worker processes.

Uniform bit/coupon indices are drawn with ``Generator.integers``, which uses
rejection (Lemire's method) and is therefore exactly uniform.
"""

from __future__ import annotations

import hashlib
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional, Sequence, Union

import numpy as np
from numba import njit

from .fitness_levels import LevelPartition

DEFAULT_CAP = 10**10
QUANTILES = (0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99)

Process = Literal["rls-onemax", "level-chain", "coupon-collector"]
Init = Union[Literal["uniform"], int]


class IterationCapExceeded(RuntimeError):
    def __init__(self, cap: int, replication: Optional[int] = None):
        self.cap = cap
        self.replication = replication
        where = "" if replication is None else f" in replication {replication}"
        super().__init__(f"iteration cap {cap} exceeded{where}")


def derive_seed(master_seed: int, index: int) -> int:
    """64-bit seed for replication ``index``; a pure function of its arguments."""
    digest = hashlib.blake2b(f"{int(master_seed)}:{int(index)}".encode(), digest_size=8)
    return int.from_bytes(digest.digest(), "little")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed)))


@dataclass(frozen=True)
class RunRecord:
    seed: int
    n: int
    start_level: int
    hitting_time: int


class OneMax:
    """Number of one-bits. Black-box contract: bit array -> int, plus its optimum."""

    name = "onemax"

    def __call__(self, x: np.ndarray) -> int:
        return int(np.count_nonzero(x))

    def optimum(self, n: int) -> int:
        return n


ONEMAX = OneMax()


@njit(cache=True)
def _rls_onemax_chunk(x, fx, flips):
    """Apply RLS steps for the flip indices in ``flips`` until OneMax hits ``len(x)``.

    Returns (steps consumed, new fitness, reached flag). Candidate fitness is
    ``fx + 1 - 2 x[i]``; ties are accepted.
    """
    n = x.shape[0]
    for j in range(flips.shape[0]):
        i = flips[j]
        candidate = fx + 1 - 2 * x[i]
        if candidate >= fx:
            x[i] = 1 - x[i]
            fx = candidate
            if fx == n:
                return j + 1, fx, True
    return flips.shape[0], fx, False


def _chunk_size(n: int) -> int:
    # roughly twice the expected number of RLS steps; fixed per n so draws are reproducible
    return max(64, int(2.0 * n * (math.log(n) + 1.0)))


def _initial_string(rng: np.random.Generator, n: int, init: Init) -> np.ndarray:
    if init == "uniform":
        return rng.integers(0, 2, size=n, dtype=np.int8)
    k = int(init)
    if not 0 <= k <= n:
        raise ValueError(f"initial level {k} outside [0, {n}]")
    x = np.zeros(n, dtype=np.int8)
    x[rng.choice(n, size=k, replace=False)] = 1
    return x


def rls_run(
    n: int,
    seed: int,
    fitness: Callable[[np.ndarray], int] = ONEMAX,
    init: Init = "uniform",
    cap: int = DEFAULT_CAP,
    check: bool = False,
) -> RunRecord:
    """One run of randomized local search; returns ``T = 1 + iterations``.

    Each iteration flips one uniformly chosen bit and keeps the result if the
    fitness did not decrease. OneMax runs through a compiled kernel; any other
    fitness (or ``check=True``) uses the plain loop, which consumes random
    numbers identically and asserts that the fitness trajectory is
    non-decreasing and moves by at most one per step.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = make_rng(seed)
    x = _initial_string(rng, n, init)
    fx = int(fitness(x))
    start = int(np.count_nonzero(x))
    target = fitness.optimum(n) if hasattr(fitness, "optimum") else n
    iterations = 0
    fast = fitness is ONEMAX and not check
    chunk = _chunk_size(n)
    while fx < target:
        flips = rng.integers(0, n, size=chunk)
        if fast:
            used, fx, _ = _rls_onemax_chunk(x, fx, flips)
        else:
            used, fx = _rls_generic_chunk(x, fx, flips, fitness, target, check)
        iterations += int(used)
        if iterations > cap:
            raise IterationCapExceeded(cap)
    return RunRecord(int(seed), n, start, iterations + 1)


def _rls_generic_chunk(x, fx, flips, fitness, target, check):
    for j, i in enumerate(flips):
        x[i] ^= 1
        candidate = int(fitness(x))
        if candidate >= fx:
            if check:
                assert candidate - fx <= 1, "fitness jumped by more than one level"
            fx = candidate
            if fx >= target:
                return j + 1, fx
        else:
            x[i] ^= 1
    return len(flips), fx


def level_chain_run(part: LevelPartition, seed: int, cap: int = DEFAULT_CAP) -> RunRecord:
    """Walk the abstract no-skip chain: leave level ``i`` with probability ``p_i`` per step.

    The waiting time on each level is drawn as a single geometric variate
    (number of trials until the first success).
    """
    if not part.no_skip:
        raise ValueError("level chain simulation requires a no-skip partition")
    rng = make_rng(seed)
    waits = rng.geometric(np.asarray(part.level_probs))
    steps = int(waits.sum())
    if steps > cap:
        raise IterationCapExceeded(cap)
    return RunRecord(int(seed), part.m, part.start_level, steps + 1)


def coupon_collector_run(n: int, k: int, seed: int, cap: int = DEFAULT_CAP) -> RunRecord:
    """Draw uniform coupons of ``n`` types, ``k`` types already held, until all are held."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 <= k <= n:
        raise ValueError(f"prefilled count {k} outside [0, {n}]")
    rng = make_rng(seed)
    held = np.zeros(n, dtype=bool)
    held[:k] = True
    missing = n - k
    draws = 0
    chunk = _chunk_size(n)
    while missing > 0:
        batch = rng.integers(0, n, size=chunk)
        types, first = np.unique(batch, return_index=True)
        fresh = np.sort(first[~held[types]])
        if fresh.size >= missing:
            draws += int(fresh[missing - 1]) + 1
            missing = 0
        else:
            held[types] = True
            missing -= fresh.size
            draws += chunk
        if draws > cap:
            raise IterationCapExceeded(cap)
    return RunRecord(int(seed), n, k, draws + 1)


@dataclass(frozen=True)
class ProcessConfig:
    """What one replication runs. ``init`` is ``"uniform"`` or a fixed start level."""

    process: Process
    n: Optional[int] = None
    init: Init = "uniform"
    level_probs: Optional[tuple[float, ...]] = None
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.process not in ("rls-onemax", "level-chain", "coupon-collector"):
            raise ValueError(f"unknown process {self.process!r}")
        if self.process == "level-chain":
            if not self.level_probs:
                raise ValueError("level-chain needs level probabilities")
        elif self.n is None or self.n < 1:
            raise ValueError(f"{self.process} needs n >= 1")
        if self.process == "coupon-collector" and self.init == "uniform":
            raise ValueError("coupon-collector needs a fixed number of prefilled types")


def run_one(config: ProcessConfig, seed: int) -> RunRecord:
    if config.process == "rls-onemax":
        return rls_run(config.n, seed, init=config.init, cap=config.cap)
    if config.process == "coupon-collector":
        return coupon_collector_run(config.n, int(config.init), seed, cap=config.cap)
    start = 0 if config.init == "uniform" else int(config.init)
    part = LevelPartition(config.level_probs, start_level=start)
    return level_chain_run(part, seed, cap=config.cap)


@dataclass
class EmpiricalDistribution:
    counts: dict[int, int]
    total: int
    summary: dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_counts(cls, counts: dict[int, int]) -> "EmpiricalDistribution":
        counts = {int(t): int(c) for t, c in sorted(counts.items())}
        dist = cls(counts, sum(counts.values()))
        dist.summary = dist._summarize()
        return dist

    def values(self) -> np.ndarray:
        return np.fromiter(self.counts.keys(), dtype=np.int64, count=len(self.counts))

    def weights(self) -> np.ndarray:
        return np.fromiter(self.counts.values(), dtype=np.int64, count=len(self.counts))

    def mean(self) -> float:
        return math.fsum(t * c for t, c in self.counts.items()) / self.total

    def variance(self) -> float:
        if self.total < 2:
            return 0.0
        mu = self.mean()
        return math.fsum(c * (t - mu) ** 2 for t, c in self.counts.items()) / (self.total - 1)

    def quantile(self, q: float) -> int:
        """Smallest value whose empirical CDF reaches ``q``."""
        need = q * self.total
        acc = 0
        for t, c in self.counts.items():
            acc += c
            if acc >= need:
                return t
        return max(self.counts)

    def cdf(self, t: np.ndarray | float) -> np.ndarray:
        """Empirical ``P(T <= t)``."""
        cum = np.cumsum(self.weights()) / self.total
        idx = np.searchsorted(self.values(), np.asarray(t), side="right")
        return np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)

    def frequency(self, predicate: Callable[[np.ndarray], np.ndarray]) -> float:
        mask = predicate(self.values())
        return int(self.weights()[mask].sum()) / self.total

    def _summarize(self) -> dict[str, float]:
        out = {
            "replications": float(self.total),
            "mean": self.mean(),
            "variance": self.variance(),
            "min": float(min(self.counts)),
            "max": float(max(self.counts)),
        }
        for q in QUANTILES:
            out[f"q{q:g}"] = float(self.quantile(q))
        return out


def max_cdf_gap(a: EmpiricalDistribution, b: EmpiricalDistribution | Callable) -> float:
    """Kolmogorov distance between ``a`` and another sample or a CDF callable."""
    if isinstance(b, EmpiricalDistribution):
        grid = np.union1d(a.values(), b.values())
        return float(np.max(np.abs(a.cdf(grid) - b.cdf(grid))))
    grid = np.arange(int(a.values().min()) - 1, int(a.values().max()) + 1)
    return float(np.max(np.abs(a.cdf(grid) - b(grid))))


def _run_block(config: ProcessConfig, master_seed: int, start: int, stop: int) -> Counter:
    hist: Counter = Counter()
    for i in range(start, stop):
        try:
            rec = run_one(config, derive_seed(master_seed, i))
        except IterationCapExceeded as exc:
            raise IterationCapExceeded(exc.cap, i) from None
        hist[rec.hitting_time] += 1
    return hist


def replicate(
    config: ProcessConfig, replications: int, master_seed: int, workers: int = 1
) -> EmpiricalDistribution:
    """Run ``replications`` independent runs; the result ignores ``workers``."""
    if replications < 1:
        raise ValueError("need at least one replication")
    workers = max(1, int(workers))
    if workers == 1 or replications < 2:
        return EmpiricalDistribution.from_counts(_run_block(config, master_seed, 0, replications))
    edges = np.linspace(0, replications, min(workers, replications) + 1).astype(int)
    total: Counter = Counter()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_run_block, config, master_seed, int(lo), int(hi))
            for lo, hi in zip(edges[:-1], edges[1:])
        ]
        for fut in futures:
            total.update(fut.result())
    return EmpiricalDistribution.from_counts(total)

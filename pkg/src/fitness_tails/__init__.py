"""Tail bounds for fitness levels and randomized local search on OneMax."""

from .exact_oracle import ExactPmf, exact_lower_tail, exact_pmf, exact_upper_tail
from .fitness_levels import (
    HittingTimeBound,
    LevelPartition,
    delta_for_confidence,
    lower_time_bound,
    upper_time_bound,
)
from .onemax import (
    OneMaxAnalysis,
    expected_runtime_band,
    harmonic,
    onemax_lower_tail,
    onemax_partition,
    onemax_upper_tail,
)
from .simulator import (
    EmpiricalDistribution,
    ProcessConfig,
    RunRecord,
    coupon_collector_run,
    level_chain_run,
    replicate,
    rls_run,
)
from .tail_bounds import (
    GeometricSumSpec,
    TailBoundResult,
    check_lemma2_part1,
    check_lemma2_part2,
    chernoff_lower_bound,
    chernoff_upper_bound,
    lower_tail_bound,
    upper_tail_bound,
    zllh_comparison_bound,
)

__version__ = "0.1.0"

"""Normalized solving cost and budget-capped sample collection.

The scalar cost of a strategy on a problem is the raw backend metric divided
by a baseline metric recorded for that problem, so the in-force strategy costs
exactly 1.  Collection runs get a metric budget of ``abort_multiplier`` times
the baseline; a run that exhausts it enters the dataset at cost
``abort_multiplier`` with the aborted flag set, so the oracle still learns
that the region is bad.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .backends import Verdict
from .space import Strategy

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CostConfig:
    metric_kind: str = "conflicts"
    abort_multiplier: float = 10.0

    def __post_init__(self) -> None:
        if self.metric_kind not in ("conflicts", "virtual_time"):
            raise ValueError(f"unknown metric kind {self.metric_kind!r}")
        if not self.abort_multiplier > 1:
            raise ValueError("abort_multiplier must exceed 1")


@dataclass(frozen=True)
class CostRecord:
    strategy: Strategy
    index: int
    raw_metric: float
    baseline_metric: float
    cost: float
    aborted: bool


def normalize(raw: float, baseline: float) -> float:
    """raw / baseline; the baseline must be positive."""
    if not baseline > 0:
        raise ValueError(f"baseline must be positive, got {baseline!r}")
    if raw < 0 or not math.isfinite(raw):
        raise ValueError(f"raw metric must be finite and nonnegative, got {raw!r}")
    return raw / baseline


def collect_cost(backend, index: int, strategy: Strategy, baseline_metric: float, config: CostConfig = CostConfig()) -> CostRecord:
    """Run the backend under a metric budget and return the normalized cost.

    The solver's verdict is discarded: the problem's status is already known
    from the run that recorded the baseline.
    """
    if not baseline_metric > 0:
        raise ValueError(f"baseline must be positive, got {baseline_metric!r}")
    budget = config.abort_multiplier * baseline_metric
    outcome = backend.solve(index, strategy, budget=budget)
    aborted = outcome.verdict is Verdict.ABORTED or outcome.metric > budget
    if aborted:
        logger.info(
            "collect run on problem %d aborted (metric %.6g, budget %.6g); cost capped at %.6g",
            index, outcome.metric, budget, config.abort_multiplier,
        )
        cost = config.abort_multiplier
    else:
        cost = normalize(outcome.metric, baseline_metric)
    return CostRecord(
        strategy=strategy,
        index=index,
        raw_metric=float(outcome.metric),
        baseline_metric=float(baseline_metric),
        cost=cost,
        aborted=aborted,
    )

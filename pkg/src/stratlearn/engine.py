"""Transition-rule engine for solving an ordered problem set while learning.

The base rules walk an index through the problem sequence: an UNSAT answer on
a non-final problem advances the index, a SAT answer ends the run with
Success, and UNSAT on the final problem ends it with Failure.  On top of
that, learning epochs gather (strategy, index, cost) samples by rerunning the
just-solved problem under sampled strategies, a random forest is refit on the
growing dataset, and after every index advance the active strategy switches
to the candidate the forest predicts to be cheapest.

Time is accounted on a virtual clock by default: every backend call reports a
deterministic effort metric which the engine treats as time, so runs replay
bit-identically under a fixed seed.  A wall-clock mode exists for production
runs at the price of determinism.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .backends import Verdict
from .cost import CostConfig, CostRecord, collect_cost
from .forest import DataPoint, Dataset, RandomForest, fit_adaptive, fit_forest, predict
from .sampler import CostFunctionError, SamplerConfig, run_chain
from .space import Strategy, StrategySpace, default_strategy, encode_features

logger = logging.getLogger(__name__)

_COLLECT_STREAM = 11
_TRAIN_STREAM = 12
_STRATEGIZE_STREAM = 13
_PAST_INDEX_STREAM = 14


def _substream_seed(seed: int, stream: int, step: int) -> int:
    """Stable labeled split of the master seed into independent generator streams."""
    return int(np.random.SeedSequence([seed, stream, step]).generate_state(1)[0])


class Outcome(Enum):
    SUCCESS = "SUCCESS"
    FAILURE = "FAILURE"
    TIME_LIMIT = "TIME_LIMIT"


class InapplicableRuleError(RuntimeError):
    """A transition rule was applied in a configuration that does not admit it."""


class UntrainedOracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class EpochPolicy:
    """How much learning a run may do.

    ``samples_per_epoch`` is the chain length of one collection burst,
    ``learning_budget`` the total (virtual) time learning may consume, and
    ``strategize_samples`` the candidate count when switching strategies.
    """

    samples_per_epoch: int = 100
    learning_budget: float = 0.0
    strategize_samples: int = 500

    def __post_init__(self) -> None:
        if self.samples_per_epoch < 1:
            raise ValueError("samples_per_epoch must be at least 1")
        if self.learning_budget < 0:
            raise ValueError("learning_budget must be nonnegative")
        if self.strategize_samples < 1:
            raise ValueError("strategize_samples must be at least 1")


@dataclass(frozen=True)
class ForestConfig:
    """Oracle training knobs; ``fixed_depth`` disables the adaptive deepening."""

    trees: int = 50
    init_depth: int | None = None
    fixed_depth: int | None = None
    score_threshold: float = 0.9
    depth_cap: int | None = None
    bootstrap: bool = True


@dataclass(frozen=True)
class TrajectoryEvent:
    phase: str  # solve | collect | train | strategize
    index: int
    strategy: tuple[str, ...]
    verdict: str | None
    raw_metric: float | None
    cost: float | None
    virtual_time: float
    cumulative_time: float


class Trajectory:
    """Ordered event log of one run; cumulative time is nondecreasing."""

    def __init__(self) -> None:
        self.events: list[TrajectoryEvent] = []
        self._cumulative = 0.0

    def record(
        self,
        phase: str,
        index: int,
        strategy: Strategy,
        *,
        verdict: str | None = None,
        raw_metric: float | None = None,
        cost: float | None = None,
        virtual_time: float = 0.0,
    ) -> TrajectoryEvent:
        if virtual_time < 0:
            raise ValueError("event times must be nonnegative")
        self._cumulative += virtual_time
        event = TrajectoryEvent(
            phase, index, strategy.assignments, verdict, raw_metric, cost,
            virtual_time, self._cumulative,
        )
        self.events.append(event)
        return event

    @property
    def cumulative_time(self) -> float:
        return self._cumulative

    def phase_events(self, phase: str) -> list[TrajectoryEvent]:
        return [e for e in self.events if e.phase == phase]

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)


@dataclass
class EngineState:
    """Mutable run configuration: current index and strategy, dataset, oracle."""

    space: StrategySpace
    num_problems: int
    strategy: Strategy
    dataset: Dataset
    index: int = 1
    oracle: RandomForest | None = None
    learning_time_spent: float = 0.0
    epochs: int = 0
    baselines: dict[int, float] = field(default_factory=dict)
    terminal: Outcome | None = None


def initial_state(space: StrategySpace, num_problems: int, start: Strategy | None = None) -> EngineState:
    if num_problems < 1:
        raise ValueError("need at least one problem")
    strategy = default_strategy(space) if start is None else start
    space.validate(strategy)
    return EngineState(space=space, num_problems=num_problems, strategy=strategy, dataset=Dataset())


def _require_live(state: EngineState) -> None:
    if state.terminal is not None:
        raise InapplicableRuleError(f"terminal state {state.terminal.value} is absorbing")


def rule_next(state: EngineState, backend, outcome=None) -> EngineState:
    """Advance to the next problem after an UNSAT answer on a non-final one.

    Solves the current problem through ``backend`` unless a precomputed
    outcome is supplied; records its metric as the baseline for this index.
    """
    _require_live(state)
    if outcome is None:
        outcome = backend.solve(state.index, state.strategy)
    if outcome.verdict is Verdict.SAT:
        raise InapplicableRuleError("verdict is SAT; the success rule applies")
    if outcome.verdict is not Verdict.UNSAT:
        raise InapplicableRuleError(f"verdict {outcome.verdict.value} admits no rule")
    if state.index >= state.num_problems:
        raise InapplicableRuleError("final problem is UNSAT; the failure rule applies")
    state.baselines[state.index] = outcome.metric
    state.index += 1
    return state


def rule_success(state: EngineState) -> EngineState:
    _require_live(state)
    state.terminal = Outcome.SUCCESS
    return state


def rule_failure(state: EngineState) -> EngineState:
    _require_live(state)
    if state.index != state.num_problems:
        raise InapplicableRuleError("failure requires the final problem index")
    state.terminal = Outcome.FAILURE
    return state


def should_learn(state: EngineState, policy: EpochPolicy, t_current: float) -> bool:
    """Budget check: time already spent plus the estimated epoch cost must fit.

    ``t_current`` is the solve time of the current problem under the current
    strategy; one epoch reruns it ``samples_per_epoch`` times at worst.
    """
    estimate = state.learning_time_spent + policy.samples_per_epoch * t_current
    return estimate <= policy.learning_budget


def _resolved_depths(config: ForestConfig, feature_width: int) -> tuple[int, int]:
    init = config.init_depth if config.init_depth is not None else math.ceil(feature_width / 3)
    cap = config.depth_cap if config.depth_cap is not None else feature_width
    return init, cap


def _absorb_evaluations(
    state: EngineState,
    evaluated: list[CostRecord],
    cost_config: CostConfig,
    trajectory: Trajectory | None,
) -> None:
    """Charge learning time (and log events) for the backend calls of an epoch."""
    for record in evaluated:
        charge = (
            record.baseline_metric * cost_config.abort_multiplier
            if record.aborted
            else record.raw_metric
        )
        state.learning_time_spent += charge
        if trajectory is not None:
            trajectory.record(
                "collect", record.index, record.strategy,
                raw_metric=record.raw_metric, cost=record.cost, virtual_time=charge,
            )


def learning_epoch(
    state: EngineState,
    backend,
    policy: EpochPolicy,
    sampler_config: SamplerConfig,
    *,
    cost_config: CostConfig = CostConfig(),
    forest_config: ForestConfig = ForestConfig(),
    seed: int = 0,
    trajectory: Trajectory | None = None,
    collect_index: int | None = None,
) -> EngineState:
    """One burst of sample collection on a solved problem, then an oracle refit.

    The chain starts at the engine's current strategy, whose cost on the
    current problem is 1 by construction, so it costs no extra backend call.
    A backend failure mid-chain aborts the epoch but keeps the samples
    already measured.
    """
    _require_live(state)
    index = state.index if collect_index is None else collect_index
    baseline = state.baselines.get(index)
    if baseline is None or baseline <= 0:
        raise ValueError(f"no positive baseline recorded for problem {index}")

    chain_config = dataclasses.replace(
        sampler_config, seed=_substream_seed(seed, _COLLECT_STREAM, state.epochs)
    )
    in_force = state.strategy
    evaluated: list[CostRecord] = []

    def cost_fn(strategy: Strategy) -> float:
        # The in-force strategy's run *is* the baseline run when collecting on
        # the current index; skip the redundant solver call.
        if collect_index is None and strategy == in_force:
            return 1.0
        record = collect_cost(backend, index, strategy, baseline, cost_config)
        evaluated.append(record)
        return record.cost

    try:
        samples = run_chain(
            state.space, cost_fn, in_force, policy.samples_per_epoch, chain_config
        )
    except CostFunctionError:
        _absorb_evaluations(state, evaluated, cost_config, trajectory)
        for record in evaluated:
            state.dataset.append(
                DataPoint(encode_features(state.space, record.strategy, index), record.cost)
            )
        raise

    _absorb_evaluations(state, evaluated, cost_config, trajectory)
    for sample in samples:
        state.dataset.append(
            DataPoint(encode_features(state.space, sample.strategy, index), sample.cost)
        )

    forest_seed = _substream_seed(seed, _TRAIN_STREAM, state.epochs)
    if forest_config.fixed_depth is not None:
        oracle = fit_forest(
            state.dataset, forest_config.trees, forest_config.fixed_depth,
            forest_seed, forest_config.bootstrap,
        )
    else:
        init, cap = _resolved_depths(forest_config, state.dataset.feature_width)
        oracle = fit_adaptive(
            state.dataset, forest_config.trees, init,
            forest_config.score_threshold, cap, forest_seed, forest_config.bootstrap,
        )
    state.oracle = oracle
    state.epochs += 1
    if trajectory is not None:
        trajectory.record("train", index, state.strategy, cost=oracle.training_score)
    logger.debug(
        "epoch %d on problem %d: %d backend calls, dataset size %d, score %.3f at depth %d",
        state.epochs, index, len(evaluated), len(state.dataset),
        oracle.training_score, oracle.trained_depth,
    )
    return state


def rule_strategize(
    state: EngineState,
    sampler_config: SamplerConfig,
    policy: EpochPolicy,
    *,
    seed: int = 0,
    trajectory: Trajectory | None = None,
) -> EngineState:
    """Switch to the candidate with the lowest predicted cost at the current index.

    Candidates are the current strategy plus a chain of ``strategize_samples - 1``
    steps over the oracle's predictions; ties keep the earliest candidate, so a
    constant oracle never moves the strategy.
    """
    _require_live(state)
    if state.oracle is None:
        raise UntrainedOracleError("strategize requires a trained oracle")
    oracle = state.oracle
    index = state.index

    def predicted_cost(strategy: Strategy) -> float:
        return predict(oracle, encode_features(state.space, strategy, index))

    best = state.strategy
    best_cost = predicted_cost(best)
    if policy.strategize_samples > 1:
        chain_config = dataclasses.replace(
            sampler_config, seed=_substream_seed(seed, _STRATEGIZE_STREAM, index)
        )
        chain = run_chain(
            state.space, predicted_cost, state.strategy,
            policy.strategize_samples - 1, chain_config,
        )
        for record in chain:
            if record.cost < best_cost:
                best, best_cost = record.strategy, record.cost
    state.strategy = best
    if trajectory is not None:
        trajectory.record("strategize", index, best, cost=best_cost)
    return state


@dataclass(frozen=True)
class RunResult:
    outcome: Outcome
    state: EngineState
    trajectory: Trajectory


@dataclass(frozen=True)
class RunSummary:
    outcome: str
    largest_solved_index: int | None
    epochs: int
    learning_time: float
    solving_time: float
    cumulative_time: float
    solved_times: tuple[tuple[int, float], ...]


def summarize(trajectory: Trajectory, outcome: Outcome | None = None) -> RunSummary:
    solves = trajectory.phase_events("solve")
    learning = sum(
        e.virtual_time for e in trajectory if e.phase in ("collect", "train", "strategize")
    )
    return RunSummary(
        outcome=outcome.value if outcome is not None else "UNKNOWN",
        largest_solved_index=max((e.index for e in solves), default=None),
        epochs=len(trajectory.phase_events("train")),
        learning_time=learning,
        solving_time=sum(e.virtual_time for e in solves),
        cumulative_time=trajectory.cumulative_time,
        solved_times=tuple((e.index, e.cumulative_time) for e in solves),
    )


def run(
    backend,
    policy: EpochPolicy,
    *,
    space: StrategySpace,
    sampler_config: SamplerConfig | None = None,
    strategize_config: SamplerConfig | None = None,
    cost_config: CostConfig = CostConfig(),
    forest_config: ForestConfig = ForestConfig(),
    seed: int = 0,
    time_limit: float | None = None,
    start: Strategy | None = None,
    collect_past: bool = False,
    clock: str = "virtual",
) -> RunResult:
    """Drive the rules until Success, Failure, or the external time limit.

    After every index advance the engine may issue one learning epoch on the
    problem it just solved (budget permitting) and, once the oracle exists,
    switches the strategy via its predictions at the new index.  All random
    streams derive from ``seed`` through fixed labeled splits, so identical
    inputs replay identical trajectories in virtual-clock mode.

    ``collect_past`` redirects each epoch to a uniformly drawn already-solved
    index instead of the current one (off by default).
    """
    if clock not in ("virtual", "wall"):
        raise ValueError(f"unknown clock mode {clock!r}")
    if sampler_config is None:
        sampler_config = SamplerConfig(seed=seed)
    if strategize_config is None:
        strategize_config = sampler_config
    n = backend.num_problems
    state = initial_state(space, n, start)
    trajectory = Trajectory()
    wall_start = time.perf_counter()

    def elapsed() -> float:
        return trajectory.cumulative_time if clock == "virtual" else time.perf_counter() - wall_start

    while state.terminal is None:
        if time_limit is not None and elapsed() >= time_limit:
            logger.info("time limit reached before problem %d", state.index)
            return RunResult(Outcome.TIME_LIMIT, state, trajectory)

        solve_started = time.perf_counter()
        outcome = backend.solve(state.index, state.strategy)
        duration = outcome.metric if clock == "virtual" else time.perf_counter() - solve_started
        trajectory.record(
            "solve", state.index, state.strategy,
            verdict=outcome.verdict.value, raw_metric=outcome.metric, virtual_time=duration,
        )
        state.baselines[state.index] = outcome.metric

        if outcome.verdict is Verdict.SAT:
            rule_success(state)
            break
        if outcome.verdict is not Verdict.UNSAT:
            raise RuntimeError(
                f"backend returned {outcome.verdict.value} for problem {state.index}; "
                "the engine needs a decisive verdict"
            )
        if state.index == n:
            rule_failure(state)
            break

        if policy.learning_budget > 0 and should_learn(state, policy, duration):
            if state.baselines[state.index] > 0:
                collect_index = None
                if collect_past:
                    rng = np.random.default_rng(
                        np.random.SeedSequence(
                            [seed, _PAST_INDEX_STREAM, state.epochs]
                        )
                    )
                    collect_index = int(rng.integers(1, state.index + 1))
                learning_epoch(
                    state, backend, policy, sampler_config,
                    cost_config=cost_config, forest_config=forest_config,
                    seed=seed, trajectory=trajectory, collect_index=collect_index,
                )
            else:
                logger.info("skipping epoch at problem %d: zero-effort baseline", state.index)
        elif policy.learning_budget > 0:
            logger.info(
                "epoch refused at problem %d: spent %.6g + estimate %.6g exceeds budget %.6g",
                state.index, state.learning_time_spent,
                policy.samples_per_epoch * duration, policy.learning_budget,
            )

        rule_next(state, backend, outcome=outcome)
        if state.oracle is not None:
            rule_strategize(
                state, strategize_config, policy, seed=seed, trajectory=trajectory
            )

    return RunResult(state.terminal, state, trajectory)

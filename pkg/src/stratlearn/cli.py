"""Command-line front end: run configuration, trajectory emission, ablation grids.

Trajectory files are line-delimited text with a versioned header: one
tab-separated record per event, followed by per-index cumulative solve times
and a final summary record.  The format is diff-able in CI and trivial to
load from any plotting stack.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
from dataclasses import dataclass
from pathlib import Path

from .backends import (
    ExternalBackend,
    SyntheticBackend,
    load_adapter_config,
    load_landscape,
    load_manifest,
)
from .engine import (
    EpochPolicy,
    ForestConfig,
    Outcome,
    RunResult,
    RunSummary,
    Trajectory,
    run,
    summarize,
)
from .sampler import SamplerConfig
from .space import load_space

logger = logging.getLogger(__name__)

TRAJECTORY_FORMAT = "stratlearn-trajectory v1"
_FIELDS = ("phase", "index", "strategy", "verdict", "raw_metric", "cost", "virtual_time", "cumulative_time")


@dataclass(frozen=True)
class RunConfig:
    """Everything one run needs; mirrors the command-line flags."""

    space_path: str
    manifest_path: str | None = None
    landscape_path: str | None = None
    adapter_path: str | None = None
    budget_fraction: float = 0.15
    budget_seconds: float | None = None
    samples_per_epoch: int = 100
    strategize_samples: int = 500
    trees: int = 50
    init_depth: int | None = None
    fixed_depth: int | None = None
    seed: int = 0
    time_limit: float | None = None
    no_learn: bool = False
    virtual_clock: bool = False
    step_size: int | None = None
    out: str | None = None


def _fraction(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{text!r} is not a fraction in [0, 1]")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text!r} is not a positive integer")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"{text!r} is not a nonnegative integer")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"{text!r} is not a positive number")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stratlearn",
        description="Solve an ordered problem set while learning which solver "
        "configuration to use for each successive problem.",
    )
    parser.add_argument("--space", required=True, help="strategy space CSV (name,default,alternatives)")
    problems = parser.add_mutually_exclusive_group(required=True)
    problems.add_argument("--manifest", help="problem manifest (index<TAB>locator<TAB>key=value,...)")
    problems.add_argument("--landscape", help="synthetic landscape JSON")
    parser.add_argument("--adapter", help="solver adapter config (key=value lines); required with --manifest")
    parser.add_argument("--budget-frac", type=_fraction, default=0.15,
                        help="learning budget as a fraction of the time limit (default 0.15)")
    parser.add_argument("--budget-seconds", type=_positive_float, default=None,
                        help="absolute learning budget; overrides --budget-frac")
    parser.add_argument("--samples-per-epoch", type=_positive_int, default=100)
    parser.add_argument("--strategize-samples", type=_positive_int, default=500)
    parser.add_argument("--trees", type=_positive_int, default=50)
    parser.add_argument("--init-depth", type=_positive_int, default=None,
                        help="initial tree depth (default: a third of the feature count, rounded up)")
    parser.add_argument("--fixed-depth", type=_positive_int, default=None,
                        help="train at this exact depth instead of deepening adaptively")
    parser.add_argument("--seed", type=_nonneg_int, default=0)
    parser.add_argument("--time-limit", type=_positive_float, default=None)
    parser.add_argument("--no-learn", action="store_true", help="baseline mode: learning budget forced to 0")
    parser.add_argument("--virtual-clock", action="store_true",
                        help="account time in backend effort units (deterministic replay)")
    parser.add_argument("--step-size", type=_positive_int, default=None,
                        help="recorded in outputs only; the unrolling step that produced the problems")
    parser.add_argument("--out", default=None, help="trajectory output path")
    return parser


def parse_args(argv) -> RunConfig:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    if ns.manifest and not ns.adapter:
        parser.error("--manifest requires --adapter")
    return RunConfig(
        space_path=ns.space,
        manifest_path=ns.manifest,
        landscape_path=ns.landscape,
        adapter_path=ns.adapter,
        budget_fraction=0.0 if ns.no_learn else ns.budget_frac,
        budget_seconds=None if ns.no_learn else ns.budget_seconds,
        samples_per_epoch=ns.samples_per_epoch,
        strategize_samples=ns.strategize_samples,
        trees=ns.trees,
        init_depth=ns.init_depth,
        fixed_depth=ns.fixed_depth,
        seed=ns.seed,
        time_limit=ns.time_limit,
        no_learn=ns.no_learn,
        virtual_clock=ns.virtual_clock,
        step_size=ns.step_size,
        out=ns.out,
    )


def render_args(config: RunConfig) -> list[str]:
    """Inverse of parse_args: an argv list that parses back to ``config``."""
    argv = ["--space", config.space_path]
    if config.manifest_path:
        argv += ["--manifest", config.manifest_path]
    if config.landscape_path:
        argv += ["--landscape", config.landscape_path]
    if config.adapter_path:
        argv += ["--adapter", config.adapter_path]
    if config.no_learn:
        argv += ["--no-learn"]
    else:
        if config.budget_fraction != 0.15:
            argv += ["--budget-frac", str(config.budget_fraction)]
        if config.budget_seconds is not None:
            argv += ["--budget-seconds", str(config.budget_seconds)]
    if config.samples_per_epoch != 100:
        argv += ["--samples-per-epoch", str(config.samples_per_epoch)]
    if config.strategize_samples != 500:
        argv += ["--strategize-samples", str(config.strategize_samples)]
    if config.trees != 50:
        argv += ["--trees", str(config.trees)]
    if config.init_depth is not None:
        argv += ["--init-depth", str(config.init_depth)]
    if config.fixed_depth is not None:
        argv += ["--fixed-depth", str(config.fixed_depth)]
    if config.seed != 0:
        argv += ["--seed", str(config.seed)]
    if config.time_limit is not None:
        argv += ["--time-limit", str(config.time_limit)]
    if config.virtual_clock:
        argv += ["--virtual-clock"]
    if config.step_size is not None:
        argv += ["--step-size", str(config.step_size)]
    if config.out is not None:
        argv += ["--out", config.out]
    return argv


def resolve_budget(config: RunConfig) -> float:
    if config.no_learn:
        return 0.0
    if config.budget_seconds is not None:
        return config.budget_seconds
    if config.time_limit is not None:
        return config.budget_fraction * config.time_limit
    if config.budget_fraction > 0:
        logger.warning("no time limit and no absolute budget given; learning is disabled")
    return 0.0


def execute(config: RunConfig) -> tuple[RunResult, RunSummary]:
    """Load inputs, run, and (when --out is set) emit the trajectory file."""
    space = load_space(config.space_path)
    if config.landscape_path:
        backend = SyntheticBackend(load_landscape(config.landscape_path))
    else:
        if not config.adapter_path:
            raise ValueError("a manifest run needs an adapter config")
        backend = ExternalBackend(
            load_adapter_config(config.adapter_path),
            space,
            load_manifest(config.manifest_path),
        )
    policy = EpochPolicy(
        samples_per_epoch=config.samples_per_epoch,
        learning_budget=resolve_budget(config),
        strategize_samples=config.strategize_samples,
    )
    forest_config = ForestConfig(
        trees=config.trees,
        init_depth=config.init_depth,
        fixed_depth=config.fixed_depth,
    )
    result = run(
        backend,
        policy,
        space=space,
        sampler_config=SamplerConfig(seed=config.seed),
        forest_config=forest_config,
        seed=config.seed,
        time_limit=config.time_limit,
        clock="virtual" if config.virtual_clock else "wall",
    )
    summary = summarize(result.trajectory, result.outcome)
    if config.out:
        emit_trajectory(result.trajectory, config.out, outcome=result.outcome, meta=_run_meta(config))
    return result, summary


def _run_meta(config: RunConfig) -> dict[str, str]:
    meta = {"seed": str(config.seed), "space": config.space_path}
    if config.step_size is not None:
        meta["step_size"] = str(config.step_size)
    meta["clock"] = "virtual" if config.virtual_clock else "wall"
    return meta


def _cell(value) -> str:
    return "-" if value is None else (str(value) if not isinstance(value, float) else repr(value))


def emit_trajectory(
    trajectory: Trajectory,
    path: str | Path,
    *,
    outcome: Outcome | None = None,
    meta: dict[str, str] | None = None,
) -> RunSummary:
    """Write the event log plus a summary; returns the summary.

    The summary carries epoch count, learning time, the cumulative time at
    which each index was solved, and the largest solved index.
    """
    summary = summarize(trajectory, outcome)
    lines = [f"#{TRAJECTORY_FORMAT}"]
    if meta:
        lines.append("#meta\t" + "\t".join(f"{k}={v}" for k, v in sorted(meta.items())))
    lines.append("#fields\t" + "\t".join(_FIELDS))
    for event in trajectory:
        lines.append(
            "\t".join(
                (
                    event.phase,
                    str(event.index),
                    ";".join(event.strategy),
                    _cell(event.verdict),
                    _cell(event.raw_metric),
                    _cell(event.cost),
                    repr(event.virtual_time),
                    repr(event.cumulative_time),
                )
            )
        )
    for index, cumulative in summary.solved_times:
        lines.append(f"solved\t{index}\t{cumulative!r}")
    lines.append(
        "summary"
        f"\toutcome={summary.outcome}"
        f"\tlargest_solved_index={_cell(summary.largest_solved_index)}"
        f"\tepochs={summary.epochs}"
        f"\tlearning_time={summary.learning_time!r}"
        f"\tsolving_time={summary.solving_time!r}"
        f"\tcumulative_time={summary.cumulative_time!r}"
    )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return summary


@dataclass
class GridResult:
    """Largest solved index per (budget, depth) cell; failed cells carry their error."""

    budgets: tuple[float, ...]
    depths: tuple[int, ...]
    largest_solved: list[list[int | None]]
    errors: dict[tuple[int, int], str]

    def cell(self, budget_pos: int, depth_pos: int) -> int | None:
        return self.largest_solved[budget_pos][depth_pos]


def ablation_grid(config: RunConfig, budgets, depths) -> GridResult:
    """Run the (budget x depth) cartesian grid, one fresh seeded run per cell.

    Budgets are absolute learning budgets; each cell trains at its fixed tree
    depth.  Per-cell failures are recorded, not raised, so one bad cell does
    not abort the sweep.
    """
    budgets = tuple(float(b) for b in budgets)
    depths = tuple(int(d) for d in depths)
    matrix: list[list[int | None]] = []
    errors: dict[tuple[int, int], str] = {}
    for bi, budget in enumerate(budgets):
        row: list[int | None] = []
        for di, depth in enumerate(depths):
            cell_config = dataclasses.replace(
                config,
                budget_seconds=budget if budget > 0 else None,
                no_learn=budget <= 0,
                fixed_depth=depth,
                out=None,
            )
            try:
                _, summary = execute(cell_config)
                row.append(summary.largest_solved_index)
            except Exception as exc:  # keep sweeping; report per cell
                logger.warning("grid cell (budget=%s, depth=%s) failed: %s", budget, depth, exc)
                errors[(bi, di)] = str(exc)
                row.append(None)
        matrix.append(row)
    grid = GridResult(budgets, depths, matrix, errors)
    if config.out:
        write_grid(grid, config.out)
    return grid


def write_grid(grid: GridResult, path: str | Path) -> None:
    """Heat-map-ready matrix: rows are budgets, columns are depths."""
    lines = ["#stratlearn-grid v1", "budget\\depth\t" + "\t".join(str(d) for d in grid.depths)]
    for budget, row in zip(grid.budgets, grid.largest_solved):
        lines.append(f"{budget:g}\t" + "\t".join(_cell(v) for v in row))
    for (bi, di), message in sorted(grid.errors.items()):
        lines.append(f"#error\tbudget={grid.budgets[bi]:g}\tdepth={grid.depths[di]}\t{message}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    config = parse_args(argv)
    result, summary = execute(config)
    print(
        f"outcome={summary.outcome} largest_solved_index={summary.largest_solved_index} "
        f"epochs={summary.epochs} learning_time={summary.learning_time:.6g} "
        f"solving_time={summary.solving_time:.6g} cumulative_time={summary.cumulative_time:.6g}"
    )
    if config.out:
        print(f"trajectory written to {config.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

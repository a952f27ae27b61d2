"""Solving backends behind a uniform interface: (index, strategy) -> verdict + metric.

Problem payloads are opaque to the engine; only an adapter interprets them.
Two adapters ship here: a deterministic synthetic landscape for experiments
and tests, and a subprocess adapter for external DIMACS-convention solvers.
"""

from __future__ import annotations

import json
import logging
import math
import re
import shlex
import string
import subprocess
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .space import Strategy, StrategySpace

logger = logging.getLogger(__name__)


class Verdict(Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    ABORTED = "ABORTED"


@dataclass(frozen=True)
class SolveOutcome:
    """Backend verdict plus the raw effort metric (conflicts or synthetic units)."""

    verdict: Verdict
    metric: float
    wall_time: float | None = None

    def __post_init__(self) -> None:
        if self.metric < 0 or not math.isfinite(self.metric):
            raise ValueError(f"metric must be finite and nonnegative, got {self.metric!r}")


class SolverError(RuntimeError):
    """Base class for external-adapter failures."""


class SolverLaunchError(SolverError):
    pass


class MetricParseError(SolverError):
    pass


class UnexpectedExitCodeError(SolverError):
    pass


# --------------------------------------------------------------------------
# External subprocess adapter


@dataclass(frozen=True)
class SolverAdapterConfig:
    """How to launch an external solver and read its answer.

    ``command_template`` must reference ``{problem}`` and every space
    parameter by name exactly once.  Exit codes follow the DIMACS solver
    convention by default (10 = SAT, 20 = UNSAT); ``exit_code_aborted``
    covers budget-limited runs that finish without an answer.
    ``metric_pattern`` is a regex whose first group captures the metric.
    """

    command_template: str
    exit_code_sat: int = 10
    exit_code_unsat: int = 20
    exit_code_aborted: int = 0
    metric_pattern: str = r"^c conflicts:\s*([0-9.]+)"
    metric_budget_flag: str | None = None


def validate_template(config: SolverAdapterConfig, space: StrategySpace) -> None:
    """Check that the command template mentions {problem} and each parameter exactly once."""
    fields = [f for _, f, _, _ in string.Formatter().parse(config.command_template) if f]
    expected = ("problem",) + space.names
    for name in expected:
        n = fields.count(name)
        if n != 1:
            raise ValueError(f"command template must reference {{{name}}} exactly once, found {n}")
    unknown = set(fields) - set(expected)
    if unknown:
        raise ValueError(f"command template references unknown fields {sorted(unknown)}")


def _parse_metric(config: SolverAdapterConfig, stdout: str) -> float | None:
    match = re.search(config.metric_pattern, stdout, re.MULTILINE)
    if match is None:
        return None
    text = match.group(1) if match.groups() else match.group(0)
    return float(text)


def evaluate_external(
    config: SolverAdapterConfig,
    space: StrategySpace,
    problem: str,
    strategy: Strategy,
    budget: float | None = None,
) -> SolveOutcome:
    """Launch the templated command, map its exit code, and parse the metric.

    When ``budget`` is given it is passed through ``metric_budget_flag`` if the
    solver supports one; either way a run whose metric exceeds the budget is
    reported as ABORTED, so budgeted calls never report metric > budget with a
    decisive verdict.
    """
    space.validate(strategy)
    mapping = {"problem": str(problem), **dict(zip(space.names, strategy.assignments))}
    try:
        args = shlex.split(config.command_template.format(**mapping))
    except KeyError as exc:
        raise SolverLaunchError(f"command template references unknown field {exc}") from exc
    if budget is not None and config.metric_budget_flag:
        budget_value = int(budget) if float(budget).is_integer() else budget
        args += shlex.split(config.metric_budget_flag.format(budget=budget_value))
    logger.debug("launching %s", " ".join(args))
    started = time.perf_counter()
    try:
        proc = subprocess.run(args, capture_output=True, text=True)
    except OSError as exc:
        raise SolverLaunchError(f"failed to launch {args[0]!r}: {exc}") from exc
    wall = time.perf_counter() - started

    code = proc.returncode
    if code == config.exit_code_sat:
        verdict = Verdict.SAT
    elif code == config.exit_code_unsat:
        verdict = Verdict.UNSAT
    elif code == config.exit_code_aborted:
        verdict = Verdict.ABORTED
    else:
        raise UnexpectedExitCodeError(f"unexpected exit code {code}")

    metric = _parse_metric(config, proc.stdout)
    if metric is None:
        if verdict is Verdict.ABORTED and budget is not None:
            metric = float(budget)
        else:
            raise MetricParseError(
                f"no metric matching {config.metric_pattern!r} in solver output"
            )
    if budget is not None and metric > budget:
        verdict = Verdict.ABORTED
    return SolveOutcome(verdict, metric, wall_time=wall)


_ADAPTER_KEYS = {
    "command": "command_template",
    "exit_sat": "exit_code_sat",
    "exit_unsat": "exit_code_unsat",
    "exit_aborted": "exit_code_aborted",
    "metric_pattern": "metric_pattern",
    "budget_flag": "metric_budget_flag",
}


def load_adapter_config(path: str | Path) -> SolverAdapterConfig:
    """Read a key=value adapter file (# comments allowed)."""
    kwargs: dict[str, object] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _ADAPTER_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown adapter key {key!r}")
        attr = _ADAPTER_KEYS[key]
        kwargs[attr] = int(value) if attr.startswith("exit_code") else value
    if "command_template" not in kwargs:
        raise ValueError(f"{path}: adapter file must set 'command'")
    return SolverAdapterConfig(**kwargs)  # type: ignore[arg-type]


# --------------------------------------------------------------------------
# Synthetic landscape


@dataclass(frozen=True)
class SyntheticLandscape:
    """Deterministic stand-in for a real problem sequence.

    The effort metric is ``base_metrics[i-1] * (1 + sum of weights of
    mismatched parameters)`` against a hidden optimum, which may drift:
    ``drift`` lists (from_index, optimum) pairs and the latest entry whose
    index is <= i wins.
    """

    optimum: tuple[str, ...]
    weights: tuple[float, ...]
    base_metrics: tuple[float, ...]
    verdicts: tuple[Verdict, ...]
    drift: tuple[tuple[int, tuple[str, ...]], ...] = ()

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.optimum):
            raise ValueError("weights and optimum must have equal length")
        if any(w < 0 for w in self.weights):
            raise ValueError("penalty weights must be nonnegative")
        if len(self.base_metrics) != len(self.verdicts):
            raise ValueError("base_metrics and verdicts must have equal length")
        if any(b <= 0 for b in self.base_metrics):
            raise ValueError("base metrics must be positive")
        for from_index, opt in self.drift:
            if len(opt) != len(self.optimum):
                raise ValueError("drifted optimum must match the optimum length")
            if from_index < 1:
                raise ValueError("drift indices start at 1")

    @property
    def num_problems(self) -> int:
        return len(self.verdicts)

    def optimum_at(self, index: int) -> tuple[str, ...]:
        chosen = self.optimum
        for from_index, opt in sorted(self.drift):
            if from_index <= index:
                chosen = opt
        return chosen

    def metric(self, index: int, strategy: Strategy) -> float:
        opt = self.optimum_at(index)
        if self.weights and len(strategy.assignments) != len(self.weights):
            raise ValueError("strategy length does not match landscape weights")
        penalty = 1.0 + sum(
            w for w, a, o in zip(self.weights, strategy.assignments, opt) if a != o
        )
        return self.base_metrics[index - 1] * penalty


def evaluate_synthetic(
    landscape: SyntheticLandscape,
    index: int,
    strategy: Strategy,
    budget: float | None = None,
) -> SolveOutcome:
    """Pure function of (landscape, index, strategy, budget)."""
    if not 1 <= index <= landscape.num_problems:
        raise IndexError(f"index {index} out of range 1..{landscape.num_problems}")
    metric = landscape.metric(index, strategy)
    verdict = landscape.verdicts[index - 1]
    if budget is not None and metric > budget:
        verdict = Verdict.ABORTED
    return SolveOutcome(verdict, metric)


def geometric_schedule(first: float, growth: float, n: int) -> tuple[float, ...]:
    """Per-index base metrics growing geometrically, the typical harness shape."""
    if first <= 0 or growth <= 0 or n < 1:
        raise ValueError("need positive first term, positive growth, n >= 1")
    return tuple(first * growth**i for i in range(n))


def landscape_to_dict(landscape: SyntheticLandscape) -> dict:
    return {
        "optimum": list(landscape.optimum),
        "weights": list(landscape.weights),
        "base_metrics": list(landscape.base_metrics),
        "verdicts": [v.value for v in landscape.verdicts],
        "drift": [[i, list(opt)] for i, opt in landscape.drift],
    }


def landscape_from_dict(data: dict) -> SyntheticLandscape:
    return SyntheticLandscape(
        optimum=tuple(str(v) for v in data["optimum"]),
        weights=tuple(float(w) for w in data["weights"]),
        base_metrics=tuple(float(b) for b in data["base_metrics"]),
        verdicts=tuple(Verdict(v) for v in data["verdicts"]),
        drift=tuple((int(i), tuple(str(v) for v in opt)) for i, opt in data.get("drift", [])),
    )


def save_landscape(landscape: SyntheticLandscape, path: str | Path) -> None:
    Path(path).write_text(json.dumps(landscape_to_dict(landscape), indent=2) + "\n", encoding="utf-8")


def load_landscape(path: str | Path) -> SyntheticLandscape:
    return landscape_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# --------------------------------------------------------------------------
# Problem manifests


class ManifestError(ValueError):
    pass


@dataclass
class ManifestEntry:
    index: int
    locator: str
    metadata: dict[str, str] = field(default_factory=dict)


@dataclass
class ProblemManifest:
    """Ordered problem locators with contiguous indices starting at 1."""

    entries: list[ManifestEntry]

    def __post_init__(self) -> None:
        for position, entry in enumerate(self.entries, start=1):
            if entry.index != position:
                raise ManifestError(
                    f"non-contiguous indices: expected {position}, got {entry.index}"
                )
            if not entry.locator:
                raise ManifestError(f"entry {entry.index} has no locator")

    def __len__(self) -> int:
        return len(self.entries)

    def locator(self, index: int) -> str:
        return self.entries[index - 1].locator

    def metadata(self, index: int) -> dict[str, str]:
        return self.entries[index - 1].metadata


def parse_manifest(text: str) -> ProblemManifest:
    """One entry per line: ``index<TAB>locator<TAB>key=value,...`` (metadata optional)."""
    entries: list[ManifestEntry] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cells = line.split("\t")
        if len(cells) < 2:
            raise ManifestError(f"line {lineno}: expected index<TAB>locator, got {line!r}")
        try:
            index = int(cells[0])
        except ValueError:
            raise ManifestError(f"line {lineno}: bad index {cells[0]!r}") from None
        locator = cells[1].strip()
        if not locator:
            raise ManifestError(f"line {lineno}: missing locator")
        metadata: dict[str, str] = {}
        if len(cells) >= 3 and cells[2].strip():
            for item in cells[2].split(","):
                if "=" not in item:
                    raise ManifestError(f"line {lineno}: bad metadata item {item!r}")
                key, value = item.split("=", 1)
                metadata[key.strip()] = value.strip()
        entries.append(ManifestEntry(index, locator, metadata))
    return ProblemManifest(entries)


def load_manifest(path: str | Path) -> ProblemManifest:
    return parse_manifest(Path(path).read_text(encoding="utf-8"))


def serialize_manifest(manifest: ProblemManifest) -> str:
    lines = []
    for entry in manifest.entries:
        meta = ",".join(f"{k}={v}" for k, v in entry.metadata.items())
        lines.append(f"{entry.index}\t{entry.locator}" + (f"\t{meta}" if meta else ""))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Backend objects consumed by the engine


class SyntheticBackend:
    """Always safe for concurrent calls: evaluation is a pure function."""

    concurrent_safe = True

    def __init__(self, landscape: SyntheticLandscape):
        self.landscape = landscape

    @property
    def num_problems(self) -> int:
        return self.landscape.num_problems

    def solve(self, index: int, strategy: Strategy, budget: float | None = None) -> SolveOutcome:
        return evaluate_synthetic(self.landscape, index, strategy, budget)


class ExternalBackend:
    """Subprocess-based backend; concurrent use needs distinct working directories."""

    concurrent_safe = False

    def __init__(self, config: SolverAdapterConfig, space: StrategySpace, manifest: ProblemManifest):
        validate_template(config, space)
        self.config = config
        self.space = space
        self.manifest = manifest

    @property
    def num_problems(self) -> int:
        return len(self.manifest)

    def solve(self, index: int, strategy: Strategy, budget: float | None = None) -> SolveOutcome:
        return evaluate_external(
            self.config, self.space, self.manifest.locator(index), strategy, budget
        )


def stub_backend(verdicts, metrics=None) -> SyntheticBackend:
    """Strategy-independent backend with a fixed verdict schedule, for tests.

    ``verdicts`` may hold Verdict members or the strings "SAT"/"UNSAT".
    ``metrics`` defaults to 10.0 per problem.
    """
    schedule = tuple(v if isinstance(v, Verdict) else Verdict(str(v)) for v in verdicts)
    if metrics is None:
        metrics = [10.0] * len(schedule)
    landscape = SyntheticLandscape(
        optimum=(),
        weights=(),
        base_metrics=tuple(float(m) for m in metrics),
        verdicts=schedule,
    )
    return SyntheticBackend(landscape)

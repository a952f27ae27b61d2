"""Finite solver-parameter spaces and their CSV table format.

A strategy space is the cartesian product of per-parameter value domains;
a strategy assigns one value to every parameter.  Values are plain strings
throughout: the engine never does arithmetic on them, and only a solver
adapter gives them meaning.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

_HEADER = ("name", "default", "alternatives")
_RESERVED = set(",;#") | set(" \t\r\n")


class SpaceFormatError(ValueError):
    """A strategy-space table that cannot be parsed."""


def _check_token(token: str, what: str) -> None:
    if not token:
        raise ValueError(f"{what} must be a nonempty string")
    bad = _RESERVED.intersection(token)
    if bad:
        raise ValueError(f"{what} {token!r} contains reserved character {sorted(bad)[0]!r}")


@dataclass(frozen=True)
class ParameterDomain:
    """A single tunable parameter: its default value plus the allowed alternatives."""

    name: str
    default_value: str
    alternatives: tuple[str, ...]

    def __post_init__(self) -> None:
        _check_token(self.name, "parameter name")
        _check_token(self.default_value, f"default value of {self.name!r}")
        if not self.alternatives:
            raise ValueError(f"parameter {self.name!r} needs at least one alternative")
        for alt in self.alternatives:
            _check_token(alt, f"alternative value of {self.name!r}")
        values = (self.default_value, *self.alternatives)
        if len(set(values)) != len(values):
            raise ValueError(f"parameter {self.name!r} lists a value twice")

    @property
    def values(self) -> tuple[str, ...]:
        """All values, default first; the position here is the ordinal feature code."""
        return (self.default_value, *self.alternatives)

    @property
    def size(self) -> int:
        return 1 + len(self.alternatives)


@dataclass(frozen=True)
class Strategy:
    """One point in a strategy space: a value per parameter, in domain order."""

    assignments: tuple[str, ...]


@dataclass(frozen=True)
class StrategySpace:
    """Ordered collection of parameter domains."""

    domains: tuple[ParameterDomain, ...]

    def __post_init__(self) -> None:
        if not self.domains:
            raise ValueError("a strategy space needs at least one parameter")
        names = [d.name for d in self.domains]
        if len(set(names)) != len(names):
            raise ValueError("duplicate parameter names in strategy space")

    @property
    def k(self) -> int:
        return len(self.domains)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.domains)

    def validate(self, strategy: Strategy) -> None:
        """Raise ValueError unless ``strategy`` assigns a legal value to every domain."""
        if len(strategy.assignments) != self.k:
            raise ValueError(
                f"strategy has {len(strategy.assignments)} assignments, space has {self.k} parameters"
            )
        for domain, value in zip(self.domains, strategy.assignments):
            if value not in domain.values:
                raise ValueError(f"value {value!r} is not legal for parameter {domain.name!r}")


def parse_space(table_text: str) -> StrategySpace:
    """Parse a ``name,default,alternatives`` table into a StrategySpace.

    Alternatives are ``;``-separated.  Blank lines and lines starting with
    ``#`` are ignored.  Domain order equals row order.
    """
    rows: list[tuple[int, str]] = []
    for lineno, raw in enumerate(table_text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rows.append((lineno, line))
    if not rows:
        raise SpaceFormatError("empty table: no header row")
    header_no, header = rows[0]
    if tuple(cell.strip() for cell in header.split(",")) != _HEADER:
        raise SpaceFormatError(
            f"row {header_no}: expected header 'name,default,alternatives', got {header!r}"
        )
    domains: list[ParameterDomain] = []
    seen: dict[str, int] = {}
    for lineno, line in rows[1:]:
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != 3:
            raise SpaceFormatError(f"row {lineno}: expected 3 comma-separated cells, got {len(cells)}")
        name, default, alts_cell = cells
        if not alts_cell:
            raise SpaceFormatError(f"row {lineno}: empty alternatives cell for {name!r}")
        if name in seen:
            raise SpaceFormatError(
                f"row {lineno}: duplicate parameter name {name!r} (first seen in row {seen[name]})"
            )
        seen[name] = lineno
        try:
            domains.append(ParameterDomain(name, default, tuple(a.strip() for a in alts_cell.split(";"))))
        except ValueError as exc:
            raise SpaceFormatError(f"row {lineno}: {exc}") from exc
    if not domains:
        raise SpaceFormatError("table has a header but no parameter rows")
    return StrategySpace(tuple(domains))


def serialize_space(space: StrategySpace) -> str:
    """Inverse of parse_space on valid spaces."""
    lines = [",".join(_HEADER)]
    for d in space.domains:
        lines.append(f"{d.name},{d.default_value},{';'.join(d.alternatives)}")
    return "\n".join(lines) + "\n"


def load_space(path: str | Path) -> StrategySpace:
    return parse_space(Path(path).read_text(encoding="utf-8"))


def builtin_space(name: str) -> StrategySpace:
    """Load a packaged space: ``kissat_large`` (13 options) or ``kissat_small`` (6)."""
    res = resources.files("stratlearn").joinpath("data").joinpath(f"{name}.csv")
    try:
        text = res.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ValueError(f"no builtin space named {name!r}") from None
    return parse_space(text)


def space_size(space: StrategySpace) -> int:
    return math.prod(d.size for d in space.domains)


def default_strategy(space: StrategySpace) -> Strategy:
    return Strategy(tuple(d.default_value for d in space.domains))


def neighbors(space: StrategySpace, strategy: Strategy, k_diff: int = 1) -> list[Strategy]:
    """All strategies at Hamming distance exactly ``k_diff`` from ``strategy``.

    The output order is deterministic: positions in domain order, then values
    in (default, alternatives...) order.
    """
    space.validate(strategy)
    if k_diff < 1:
        raise ValueError("k_diff must be at least 1")
    if k_diff > space.k:
        raise ValueError(f"k_diff {k_diff} exceeds the parameter count {space.k}")
    out: list[Strategy] = []
    for positions in itertools.combinations(range(space.k), k_diff):
        pools = [
            [v for v in space.domains[p].values if v != strategy.assignments[p]]
            for p in positions
        ]
        for combo in itertools.product(*pools):
            assigned = list(strategy.assignments)
            for p, value in zip(positions, combo):
                assigned[p] = value
            out.append(Strategy(tuple(assigned)))
    return out


def encode_features(space: StrategySpace, strategy: Strategy, index: int) -> tuple[int, ...]:
    """Ordinal code of each assignment followed by the raw problem index.

    The default value of each parameter encodes to 0, its first alternative
    to 1, and so on.  The encoding is injective over (strategy, index).
    """
    space.validate(strategy)
    codes = tuple(d.values.index(a) for d, a in zip(space.domains, strategy.assignments))
    return codes + (int(index),)

"""Shared fixtures-in-spirit: small spaces, calibration landscapes, brute-force oracles."""

from __future__ import annotations

import itertools

from stratlearn.backends import (
    SyntheticBackend,
    SyntheticLandscape,
    Verdict,
    geometric_schedule,
)
from stratlearn.space import ParameterDomain, Strategy, StrategySpace


def binary_space(k: int, prefix: str = "p") -> StrategySpace:
    return StrategySpace(
        tuple(ParameterDomain(f"{prefix}{i}", "1", ("0",)) for i in range(k))
    )


def space_from(rows: list[tuple[str, str, tuple[str, ...]]]) -> StrategySpace:
    return StrategySpace(tuple(ParameterDomain(*row) for row in rows))


def all_strategies(space: StrategySpace) -> list[Strategy]:
    return [
        Strategy(combo)
        for combo in itertools.product(*(d.values for d in space.domains))
    ]


def penalty(assignments, optimum, weights) -> float:
    return 1.0 + sum(w for w, a, o in zip(weights, assignments, optimum) if a != o)


# Convergence calibration: hidden optimum inside the compact kissat space,
# effort growing geometrically with the problem index.  A learning budget of
# 52000 affords exactly three epochs for seeds 0..9.
CONV_OPTIMUM = ("0", "1", "2", "1", "2", "9")
CONV_WEIGHTS = (0.9, 0.4, 0.7, 0.3, 0.5, 1.1)
CONV_BUDGET = 52000.0


def convergence_landscape(n: int = 12) -> SyntheticLandscape:
    return SyntheticLandscape(
        optimum=CONV_OPTIMUM,
        weights=CONV_WEIGHTS,
        base_metrics=geometric_schedule(50.0, 1.6, n),
        verdicts=(Verdict.UNSAT,) * n,
    )


# Ablation calibration: four binary parameters, a binding time limit, and a
# steep effort schedule, so better strategies certify visibly more indices.
ABLATION_OPTIMUM = ("0", "0", "0", "0")
ABLATION_WEIGHTS = (0.5, 0.8, 1.1, 1.4)
ABLATION_TIME_LIMIT = 40000.0
ABLATION_BUDGETS = (500.0, 12000.0)

ABLATION_SPACE_TEXT = """name,default,alternatives
alpha,1,0
beta,1,0
gamma,1,0
delta,1,0
"""


def ablation_landscape(n: int = 20) -> SyntheticLandscape:
    return SyntheticLandscape(
        optimum=ABLATION_OPTIMUM,
        weights=ABLATION_WEIGHTS,
        base_metrics=geometric_schedule(20.0, 1.5, n),
        verdicts=(Verdict.UNSAT,) * n,
    )


def verdicts_from_bits(bits: int, n: int) -> list[Verdict]:
    """Bit i of ``bits`` decides whether problem i+1 is SAT."""
    return [Verdict.SAT if bits & (1 << i) else Verdict.UNSAT for i in range(n)]


def backend_for(verdicts, metrics=None) -> SyntheticBackend:
    from stratlearn.backends import stub_backend

    return stub_backend(verdicts, metrics)

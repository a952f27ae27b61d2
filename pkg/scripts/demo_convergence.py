#!/usr/bin/env python3
"""Convergence demo on a synthetic landscape over the compact kissat space.

Runs the same problem sequence with and without learning and prints the
per-index cumulative times plus the final strategies, alongside the ground
truth computed by brute force over all 216 strategies.
"""

import argparse
import itertools

from stratlearn import (
    EpochPolicy,
    SyntheticBackend,
    SyntheticLandscape,
    Verdict,
    builtin_space,
    run,
    summarize,
)
from stratlearn.backends import geometric_schedule

OPTIMUM = ("0", "1", "2", "1", "2", "9")
WEIGHTS = (0.9, 0.4, 0.7, 0.3, 0.5, 1.1)


def demo_landscape(n: int = 12) -> SyntheticLandscape:
    return SyntheticLandscape(
        optimum=OPTIMUM,
        weights=WEIGHTS,
        base_metrics=geometric_schedule(50.0, 1.6, n),
        verdicts=(Verdict.UNSAT,) * n,
    )


def penalty(assignments) -> float:
    return 1.0 + sum(w for w, a, o in zip(WEIGHTS, assignments, OPTIMUM) if a != o)


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--budget", type=float, default=30000.0)
    args = parser.parse_args()

    space = builtin_space("kissat_small")
    backend = SyntheticBackend(demo_landscape())

    learned = run(
        backend,
        EpochPolicy(samples_per_epoch=100, learning_budget=args.budget, strategize_samples=500),
        space=space,
        seed=args.seed,
    )
    baseline = run(
        backend,
        EpochPolicy(samples_per_epoch=100, learning_budget=0.0, strategize_samples=500),
        space=space,
        seed=args.seed,
    )

    all_penalties = sorted(
        penalty(combo)
        for combo in itertools.product(*(d.values for d in space.domains))
    )
    ls, bs = summarize(learned.trajectory, learned.outcome), summarize(baseline.trajectory, baseline.outcome)

    print(f"{'index':>5} {'learned t':>12} {'baseline t':>12}")
    base_times = dict(bs.solved_times)
    for index, cumulative in ls.solved_times:
        print(f"{index:>5} {cumulative:>12.1f} {base_times.get(index, float('nan')):>12.1f}")
    print()
    print(f"learned:  epochs={ls.epochs} final={';'.join(learned.state.strategy.assignments)} "
          f"penalty={penalty(learned.state.strategy.assignments):.2f}")
    print(f"baseline: final={';'.join(baseline.state.strategy.assignments)} "
          f"penalty={penalty(baseline.state.strategy.assignments):.2f}")
    print(f"ground truth: best penalty {all_penalties[0]:.2f}, "
          f"5th percentile {all_penalties[len(all_penalties) // 20]:.2f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

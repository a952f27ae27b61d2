#!/usr/bin/env python3
"""Fake DIMACS-convention solver for the test suite and CI.

Problem files are key=value lines:

    verdict=SAT          (or UNSAT)
    conflicts=42
    exit=3               optional: force this exit code instead of answering

Exit codes follow the usual solver convention: 10 for SAT, 20 for UNSAT.
A ``--conflicts N`` budget below the problem's conflict count aborts the run:
the conflict line reports N and the exit code is 0.  Any other option is
accepted and ignored, so arbitrary parameter flags can be passed through.
"""

import argparse
import sys


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("problem")
    parser.add_argument("--conflicts", type=int, default=None, help="conflict budget")
    args, extra = parser.parse_known_args()

    data = {}
    with open(args.problem, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            data[key.strip()] = value.strip()

    print("c stub solver")
    if extra:
        print("c options:", " ".join(extra))

    if "exit" in data:
        return int(data["exit"])

    conflicts = int(data.get("conflicts", 0))
    verdict = data.get("verdict", "UNSAT").upper()

    if args.conflicts is not None and conflicts > args.conflicts:
        print(f"c conflicts: {args.conflicts}")
        print("s UNKNOWN")
        return 0

    print(f"c conflicts: {conflicts}")
    if verdict == "SAT":
        print("s SATISFIABLE")
        return 10
    print("s UNSATISFIABLE")
    return 20


if __name__ == "__main__":
    sys.exit(main())

"""Random formulas and their negations on every engine: checks engine agreement, duality and the clock bound.

Prints one CSV row per formula and a summary line on stderr. Exit status 1 if any check fails.
"""

import argparse
import csv
import random
import sys

from mitl.formula import Not, random_formula
from mitl.solver import ENGINES, RunConfig, run_sat


def sweep(count: int, seed: int, timeout: float, modalities: int = 3, cmax: int = 4):
    """Yields (formula text, {(engine, reduced): report} for f, same for its negation)."""
    rng = random.Random(seed)
    for _ in range(count):
        f = random_formula(rng, modalities=modalities, cmax=cmax)
        runs = []
        for g in (f, Not(f)):
            runs.append({(e, red): run_sat(g, RunConfig(e, red, timeout)) for e in ENGINES for red in (False, True)})
        yield str(f), runs[0], runs[1]


def verdict(reports) -> str:
    """The common verdict, TIMEOUT when no engine finished, DISAGREE when two finished differently."""
    seen = {r.verdict for r in reports.values()} - {"TIMEOUT"}
    if len(seen) > 1:
        return "DISAGREE"
    return seen.pop() if seen else "TIMEOUT"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--timeout", type=float, default=60.0)
    args = ap.parse_args(argv)
    out = csv.writer(sys.stdout)
    out.writerow(["formula", "verdict", "negation", "timeouts", "max_ms", "over_bound"])
    bad = timeouts = 0
    for text, pos, neg in sweep(args.count, args.seed, args.timeout):
        both = list(pos.values()) + list(neg.values())
        v, nv = verdict(pos), verdict(neg)
        t = sum(r.verdict == "TIMEOUT" for r in both)
        over = sum(r.max_clocks > r.bound for r in both)
        bad += v == "DISAGREE" or nv == "DISAGREE" or (v == nv == "UNSAT") or over > 0
        timeouts += t
        out.writerow([text, v, nv, t, round(max(r.ms for r in both)), over])
        sys.stdout.flush()
    print(f"failures={bad} timeouts={timeouts}", file=sys.stderr)
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())

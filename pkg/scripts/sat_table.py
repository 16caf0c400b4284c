"""Run the satisfiability benchmark families on every engine and print one CSV row per run."""

import argparse
import csv
import sys

from mitl.solver import ENGINES, RunConfig, gen_formula, run_sat

INSTANCES = [
    ("E", 5, "[0,inf)"),
    ("E", 5, "[5,8)"),
    ("A", 10, "[0,inf)"),
    ("A", 10, "[5,8)"),
    ("U", 10, "[0,inf)"),
    ("U", 2, "[5,8]"),
    ("T", 10, "[5,8)"),
    ("Q", 5, "[0,inf)"),
    ("Q", 5, "[5,8)"),
    ("R", 5, "[0,inf)"),
    ("R", 5, "[5,8)"),
]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--timeout", type=float, default=300.0)
    ap.add_argument("--engines", default=",".join(ENGINES))
    ap.add_argument("--only", help="comma-separated family letters")
    args = ap.parse_args(argv)
    out = csv.writer(sys.stdout)
    out.writerow(["instance", "engine", "reduced", "verdict", "ms", "visited", "max_clocks", "bound"])
    for fam, k, itv in INSTANCES:
        if args.only and fam not in args.only.split(","):
            continue
        text = gen_formula(fam, k, itv)
        for engine in args.engines.split(","):
            for reduced in (False, True):
                r = run_sat(text, RunConfig(engine, reduced, args.timeout))
                out.writerow([f"{fam}({k},{itv})", engine, reduced, r.verdict, round(r.ms), r.visited, r.max_clocks, r.bound])
                sys.stdout.flush()


if __name__ == "__main__":
    main()

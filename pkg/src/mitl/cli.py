"""Command-line front end: satisfiability, model checking, generators and benchmark runs.

Letters are mutually exclusive: every position of a timed word carries exactly one letter, so a
formula such as `p1 & p2` is unsatisfiable.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from .buchi import compile_buchi
from .formula import ParseError
from .product import ModelError, lift_model, parse_ta
from .solver import ENGINES, RunConfig, RunReport, gen_formula, run_mc, run_sat

EXIT_USAGE = 2
EXIT_RESOURCE = 3


def _limit_memory(mb):
    if mb is None:
        return
    import resource

    cap = int(mb) * 1024 * 1024
    resource.setrlimit(resource.RLIMIT_AS, (cap, cap))


def _report(r: RunReport, stats: bool, out=None):
    out = out or sys.stdout
    print(r.verdict, file=out)
    if stats:
        print(
            f"engine={r.engine} reduced={r.reduced} visited={r.visited} ms={r.ms:.0f} "
            f"peak_frontier={r.peak_frontier} max_clocks={r.max_clocks} bound={r.bound}",
            file=out,
        )


def _config(args) -> RunConfig:
    return RunConfig(args.engine, args.reduced, args.timeout, args.subsume, not args.fixpoint_only)


def _write(text: str, path):
    if path in (None, "-"):
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def cmd_sat(args) -> int:
    alphabet = args.alphabet.split(",") if args.alphabet else None
    r = run_sat(args.formula, _config(args), alphabet)
    _report(r, args.stats)
    return r.exit_code


def cmd_mc(args) -> int:
    r = run_mc(parse_ta(args.model), args.formula, _config(args))
    _report(r, args.stats)
    return r.exit_code


def cmd_gen(args) -> int:
    print(gen_formula(args.family, args.k, args.interval))
    return 0


def cmd_lift(args) -> int:
    _write(json.dumps(lift_model(args.floors).to_json(), indent=2), args.output)
    return 0


def cmd_compile_ta(args) -> int:
    alphabet = args.alphabet.split(",") if args.alphabet else None
    _write(json.dumps(compile_buchi(args.formula, alphabet, args.clocks).to_json(), indent=2), args.output)
    return 0


def read_suite(path) -> list:
    """Suite lines are `FAMILY K INTERVAL [EXPECTED]` or `formula: TEXT [=> EXPECTED]`; # starts a comment."""
    entries = []
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("formula:"):
                body = line[len("formula:") :]
                text, _, expected = body.partition("=>")
                entries.append((text.strip(), expected.strip() or None))
                continue
            parts = line.split()
            if len(parts) not in (3, 4):
                raise ValueError(f"malformed suite line: {raw.strip()!r}")
            expected = parts[3] if len(parts) == 4 else None
            entries.append((gen_formula(parts[0], int(parts[1]), parts[2]), expected))
    return entries


def cmd_bench(args) -> int:
    engines = args.engines.split(",")
    flags = {"both": (False, True), "yes": (True,), "no": (False,)}[args.reduced_mode]
    out = csv.writer(sys.stdout)
    out.writerow(["formula", "engine", "reduced", "verdict", "ms", "visited", "expected", "agree"])
    worst = 0
    for text, expected in read_suite(args.suite):
        rows = []
        for engine in engines:
            for reduced in flags:
                rows.append(run_sat(text, RunConfig(engine, reduced, args.timeout)))
        verdicts = {r.verdict for r in rows if r.verdict != "TIMEOUT"}
        agree = len(verdicts) <= 1
        for r in rows:
            out.writerow([text, r.engine, r.reduced, r.verdict, round(r.ms), r.visited, expected or "", agree])
            if expected and r.verdict not in (expected, "TIMEOUT"):
                worst = max(worst, 1)
            if r.verdict == "TIMEOUT":
                worst = max(worst, EXIT_RESOURCE)
        sys.stdout.flush()
    return worst


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mitl", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--memory-mb", type=int, help="address-space cap for the whole process")
    sub = ap.add_subparsers(dest="command", required=True)

    def engine_opts(p):
        p.add_argument("--engine", choices=ENGINES, default="zone")
        p.add_argument("--reduced", action="store_true", help="drop clocks of locations whose value never matters")
        p.add_argument("--timeout", type=float, default=300.0, help="seconds (default 300)")
        p.add_argument("--subsume", action="store_true", help="prune zones included in an explored zone")
        p.add_argument("--fixpoint-only", action="store_true", help="explore everything before the fixpoint (no early cycle exit)")
        p.add_argument("--stats", action="store_true")

    p = sub.add_parser("sat", help="decide satisfiability of a formula")
    p.add_argument("formula")
    p.add_argument("--alphabet", help="comma-separated letters (default: the letters of the formula)")
    engine_opts(p)
    p.set_defaults(run=cmd_sat)

    p = sub.add_parser("mc", help="check that every run of a TA satisfies a formula")
    p.add_argument("model", help="TA file in JSON")
    p.add_argument("formula")
    engine_opts(p)
    p.set_defaults(run=cmd_mc)

    p = sub.add_parser("gen", help="print a benchmark formula")
    p.add_argument("--family", choices=list("EAUTQR"), required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--interval", default="[0,inf)")
    p.set_defaults(run=cmd_gen)

    p = sub.add_parser("lift", help="write the lift model with k floors")
    p.add_argument("--floors", type=int, required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(run=cmd_lift)

    p = sub.add_parser("compile-ta", help="write the Büchi TA of a formula")
    p.add_argument("formula")
    p.add_argument("--alphabet")
    p.add_argument("--clocks", type=int, help="clock count (default: the copy bound max(2|L|, M))")
    p.add_argument("-o", "--output")
    p.set_defaults(run=cmd_compile_ta)

    p = sub.add_parser("bench", help="run a suite on several engines and print CSV")
    p.add_argument("--suite", required=True)
    p.add_argument("--engines", default=",".join(ENGINES))
    p.add_argument("--reduced-mode", choices=("both", "yes", "no"), default="both")
    p.add_argument("--timeout", type=float, default=300.0)
    p.set_defaults(run=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    try:
        _limit_memory(args.memory_mb)
        return args.run(args)
    except (ParseError, ModelError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MemoryError:
        print("OOM", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())

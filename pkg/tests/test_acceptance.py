"""One test per acceptance criterion; each records a pass/fail line shown in the terminal summary."""

import subprocess
import sys
import time
from fractions import Fraction as Q
from pathlib import Path

import pytest

from conftest import ACCEPTANCE
from mitl.formula import parse, to_nnf
from mitl.intervals import minimal_models, state
from mitl.ocata import ClockConstraint, Verdict, compile_formula
from mitl.regions import dump, encode, state_of
from mitl.solver import LIFT_BOUNDS, gen_formula, lift_property

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "scripts"))
from random_sweep import sweep, verdict  # noqa: E402

TIMEOUT = 300
MEMORY_MB = 4096
VARIANTS = [(e, r) for e in ("region", "zone") for r in (False, True)]

TABLE = [
    ("E", 5, "[0,inf)"),
    ("E", 5, "[5,8)"),
    ("A", 10, "[0,inf)"),
    ("A", 10, "[5,8)"),
    ("U", 10, "[0,inf)"),
    ("T", 10, "[5,8)"),
    ("Q", 5, "[0,inf)"),
    ("Q", 5, "[5,8)"),
    ("R", 5, "[0,inf)"),
    ("R", 5, "[5,8)"),
]
UNGATED = ("U", 2, "[5,8]")


def record(n: int, title: str, ok: bool, detail: str = ""):
    ACCEPTANCE[n] = f"criterion {n} ({title}): {'PASS' if ok else 'FAIL'}" + (f"  {detail}" if detail else "")
    print(ACCEPTANCE[n])


def cli(*argv) -> dict:
    """Runs the command line in a fresh process under the memory cap and parses --stats."""
    cmd = [sys.executable, "-m", "mitl.cli", "--memory-mb", str(MEMORY_MB), *argv, "--stats", "--timeout", str(TIMEOUT)]
    done = subprocess.run(cmd, capture_output=True, text=True, timeout=TIMEOUT + 120)
    lines = done.stdout.strip().splitlines()
    report = {"verdict": lines[0] if lines else "ERROR", "exit": done.returncode, "stderr": done.stderr}
    for field in lines[1].split() if len(lines) > 1 else []:
        key, _, value = field.partition("=")
        report[key] = value
    for key in ("visited", "max_clocks", "bound"):
        report[key] = int(report.get(key, 0))
    report["ms"] = float(report.get("ms", 0))
    return report


def engine_args(engine, reduced):
    return ["--engine", engine] + (["--reduced"] if reduced else [])


@pytest.fixture(scope="module")
def table_runs():
    runs = {}
    for inst in TABLE + [UNGATED]:
        text = gen_formula(*inst)
        for engine, reduced in VARIANTS:
            runs[(inst, engine, reduced)] = cli("sat", text, *engine_args(engine, reduced))
    return runs


@pytest.fixture(scope="module")
def lift_runs(tmp_path_factory):
    runs = {}
    for floors in (2, 3):
        model = tmp_path_factory.mktemp("lift") / f"lift{floors}.json"
        subprocess.run([sys.executable, "-m", "mitl.cli", "lift", "--floors", str(floors), "-o", str(model)], check=True)
        button, call = LIFT_BOUNDS[floors]
        props = {
            "close": (lift_property("close", floors), "VIOLATED"),
            "button": (lift_property("button", floors, button), "HOLDS"),
            "call": (lift_property("call", floors, call), "HOLDS"),
        }
        for name, (text, expected) in props.items():
            for engine, reduced in VARIANTS:
                runs[(floors, name, engine, reduced)] = (expected, cli("mc", str(model), text, *engine_args(engine, reduced)))
    return runs


@pytest.fixture(scope="module")
def random_runs():
    return list(sweep(200, seed=7, timeout=TIMEOUT))


# ---------------------------------------------------------------- 1. worked examples


def test_criterion_1_worked_examples():
    start = time.monotonic()
    f = to_nnf(parse("G (a -> F[1,2] b)"))
    a = compile_formula(f, ("a", "b"))
    box, ev = a.location_of(f), a.location_of(f.right.right)
    arcs = lambda loc, x: {(arc.guard, arc.targets_keep, arc.targets_reset, arc.verdict) for arc in a.arcs(loc, x)}
    none = frozenset()
    normal = Verdict.NORMAL
    window = (ClockConstraint(">=", 1), ClockConstraint("<=", 2))
    arcs_ok = (
        a.accepting == {box}
        and arcs(box, "a") == {((), frozenset({box}), frozenset({ev}), normal)}
        and arcs(box, "b") == {((), frozenset({box}), none, normal)}
        and arcs(ev, "a") == {((), frozenset({ev}), none, normal)}
        and arcs(ev, "b") == {((), frozenset({ev}), none, normal), (window, none, none, Verdict.ACCEPT)}
    )
    models_ok = minimal_models(a, state(ev, Q(3, 2), 2), "b") == [frozenset()]
    s = state_of([(1, 0, Q(13, 10), False), (1, Q(18, 10), Q(27, 10), True)], [Q(3, 10)], ta_mark=False)
    word = dump(encode(s, 2), 2, names=lambda loc: "ℓ₁")
    word_ok = word == "{(ℓ₁,{0},⊥,1),(ℓ₁,(2,+∞),⊤,2)}{(ℓ₁,(1,2),⊥,1),(ℓ^B,(0,1),⊥,1)}{(ℓ₁,(1,2),⊤,2)}"
    seconds = time.monotonic() - start
    ok = arcs_ok and models_ok and word_ok and seconds < 1
    record(1, "worked examples", ok, f"arcs={arcs_ok} models={models_ok} word={word_ok} {seconds:.3f}s")
    assert ok


# ---------------------------------------------------------------- 2. benchmark verdicts


def test_criterion_2_benchmark_verdicts(table_runs):
    wrong = []
    for inst in TABLE:
        for engine, reduced in VARIANTS:
            r = table_runs[(inst, engine, reduced)]
            if r["verdict"] != "SAT" or r["ms"] > TIMEOUT * 1000:
                wrong.append(f"{inst[0]}({inst[1]},{inst[2]}) {engine}{'/reduced' if reduced else ''}={r['verdict']}")
    ungated = {f"{e}{'/r' if r else ''}": table_runs[(UNGATED, e, r)]["verdict"] for e, r in VARIANTS}
    record(2, "benchmark verdicts", not wrong, f"wrong={wrong} U(2,[5,8]) not gated: {ungated}")
    assert not wrong


# ---------------------------------------------------------------- 3. lift model checking


def test_criterion_3_lift(lift_runs):
    hard, soft = [], []
    for (floors, name, engine, reduced), (expected, r) in lift_runs.items():
        if r["verdict"] != expected or r["ms"] > TIMEOUT * 1000:
            (hard if floors == 2 else soft).append(f"k={floors} {name} {engine}{'/reduced' if reduced else ''}={r['verdict']}")
    record(3, "lift model checking", not hard and not soft, f"k=2 wrong={hard} k=3 wrong={soft}")
    assert not hard and not soft


# ---------------------------------------------------------------- 4-6. random formulas


def test_criterion_4_engine_agreement(table_runs, lift_runs, random_runs):
    disagree, unresolved = [], []
    for inst in TABLE + [UNGATED]:
        seen = {table_runs[(inst, e, r)]["verdict"] for e, r in VARIANTS}
        if len(seen - {"TIMEOUT"}) > 1:
            disagree.append(gen_formula(*inst))
    for key in {k[:2] for k in lift_runs}:
        seen = {lift_runs[key + v][1]["verdict"] for v in VARIANTS}
        if len(seen - {"TIMEOUT"}) > 1:
            disagree.append(f"lift {key}")
    for text, pos, neg in random_runs:
        for label, reports in ((text, pos), (f"!({text})", neg)):
            v = verdict(reports)
            if v == "DISAGREE":
                disagree.append(label)
            elif any(r.verdict == "TIMEOUT" for r in reports.values()):
                unresolved.append(f"{label} timeouts={[k for k, r in reports.items() if r.verdict == 'TIMEOUT']}")
    ok = not disagree and not unresolved
    record(4, "engine agreement", ok, f"disagreements={disagree} runs without a verdict={unresolved}")
    assert ok


def test_criterion_5_duality(random_runs):
    both_unsat = [text for text, pos, neg in random_runs if verdict(pos) == verdict(neg) == "UNSAT"]
    record(5, "duality", not both_unsat, f"violations={both_unsat}")
    assert not both_unsat


def test_criterion_6_copy_bound(table_runs, lift_runs, random_runs):
    over = [f"{k}: {r['max_clocks']}>{r['bound']}" for k, r in table_runs.items() if r["max_clocks"] > r["bound"]]
    over += [f"{k}: {r['max_clocks']}>{r['bound']}" for k, (_, r) in lift_runs.items() if r["max_clocks"] > r["bound"]]
    for text, pos, neg in random_runs:
        for reports in (pos, neg):
            over += [f"{text} {k}" for k, r in reports.items() if r.max_clocks > r.bound]
    record(6, "copy bound", not over, f"violations={over}")
    assert not over


# ---------------------------------------------------------------- 7-8. oracles and the explicit TA


def test_criterion_7_oracles():
    from test_emptiness import oracle_disagreements
    from test_regions import AB, TOGGLE, bisimulation_violations, encoding_agreement
    from mitl.product import Product, parse_ta

    graphs = oracle_disagreements(200)
    pairs, _, encoding = encoding_agreement(600)
    a = compile_formula(to_nnf(parse("G (a -> F[1,2] b)")), AB)
    bisim = bisimulation_violations(Product(a, parse_ta(TOGGLE), 8), 120)
    ok = graphs == bisim == encoding == 0
    record(7, "oracle equivalence", ok, f"scc graphs=200 bad={graphs}; encode pairs={pairs} bad={encoding}; bisim pairs=120 bad={bisim}")
    assert ok


def test_criterion_8_buchi_cross_check():
    from test_buchi import buchi_disagreements

    checked, bad, timeouts = buchi_disagreements(40, timeout=60)
    ok = bad == timeouts == 0
    record(8, "explicit Büchi TA", ok, f"formulas={checked} disagreements={bad} over 60s={timeouts}")
    assert ok

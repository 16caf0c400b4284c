import json
import subprocess
import sys
from pathlib import Path

import pytest

from mitl.cli import main, read_suite
from mitl.product import parse_ta
from mitl.solver import gen_formula, lift_property

SMOKE = Path(__file__).resolve().parents[1] / "scripts" / "smoke_suite.txt"


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_sat_and_unsat_exit_codes(capsys):
    code, out = run(capsys, "sat", "F[0,inf) p1")
    assert code == 0 and out.out.strip() == "SAT"
    code, out = run(capsys, "sat", "false")
    assert code == 1 and out.out.strip() == "UNSAT"


def test_exclusive_letters(capsys):
    code, out = run(capsys, "sat", "p1 & p2")
    assert code == 1 and out.out.strip() == "UNSAT"


@pytest.mark.parametrize("engine", ["region", "zone"])
@pytest.mark.parametrize("extra", [[], ["--reduced"], ["--fixpoint-only"], ["--subsume"]])
def test_engine_options_agree(capsys, engine, extra):
    code, out = run(capsys, "sat", "G (a -> F[1,2] b)", "--engine", engine, *extra)
    assert code == 0 and out.out.strip() == "SAT"


def test_usage_errors(capsys):
    assert run(capsys, "sat", "a U[2,1] b")[0] == 2
    assert run(capsys, "sat", "a &")[0] == 2
    assert run(capsys, "sat", "a", "--engine", "bdd")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_timeout_exit_code(capsys):
    code, out = run(capsys, "sat", gen_formula("R", 5, "[0,inf)"), "--timeout", "1e-9")
    assert code == 3 and out.out.strip() == "TIMEOUT"


def test_stats_and_determinism(capsys):
    _, first = run(capsys, "sat", gen_formula("Q", 3, "[5,8)"), "--stats")
    _, second = run(capsys, "sat", gen_formula("Q", 3, "[5,8)"), "--stats")
    verdict, stats = first.out.strip().splitlines()
    assert verdict == "SAT" and "visited=" in stats
    strip_time = lambda text: [w for w in text.split() if not w.startswith("ms=")]
    assert strip_time(first.out) == strip_time(second.out)


def test_gen_examples(capsys):
    code, out = run(capsys, "gen", "--family", "E", "--k", "2")
    assert code == 0 and out.out.strip() == "F[0,inf) p1 & F[0,inf) p2"
    assert gen_formula("U", 2, "[5,8]") == "p1 U[5,8] p2"
    assert gen_formula("R", 1, "[0,inf)") == "(G[0,inf) F[0,inf) p1 | F[0,inf) G[0,inf) p2)"
    assert gen_formula("A", 3, "[5,8)") == "G[5,8) p1 & G[5,8) p2 & G[5,8) p3"


def test_lift_and_model_checking(capsys, tmp_path):
    model = tmp_path / "lift2.json"
    assert run(capsys, "lift", "--floors", "2", "-o", str(model))[0] == 0
    assert len(parse_ta(str(model)).locations) == 10
    code, out = run(capsys, "mc", str(model), lift_property("close", 2))
    assert code == 1 and out.out.strip() == "VIOLATED"
    code, out = run(capsys, "mc", str(model), lift_property("button", 2, 4))
    assert code == 0 and out.out.strip() == "HOLDS"
    code, out = run(capsys, "mc", str(model), "true")
    assert code == 0 and out.out.strip() == "HOLDS"


def test_model_checking_alphabet_mismatch(capsys, tmp_path):
    model = tmp_path / "lift2.json"
    run(capsys, "lift", "--floors", "2", "-o", str(model))
    code, out = run(capsys, "mc", str(model), "F zz")
    assert code == 2 and "alphabet" in out.err


def test_missing_model_file(capsys, tmp_path):
    assert run(capsys, "mc", str(tmp_path / "absent.json"), "true")[0] == 2


def test_compile_ta(capsys):
    code, out = run(capsys, "compile-ta", "G (a -> F[1,2] b)", "--alphabet", "a,b")
    assert code == 0
    ta = json.loads(out.out)
    assert set(ta["alphabet"]) == {"a", "b"} and ta["clocks"]
    code, out = run(capsys, "compile-ta", "F a", "--clocks", "3")
    assert len(json.loads(out.out)["clocks"]) == 3


def test_bench_smoke_suite(capsys):
    code, out = run(capsys, "bench", "--suite", str(SMOKE), "--timeout", "60")
    rows = out.out.strip().splitlines()
    assert code == 0
    assert rows[0] == "formula,engine,reduced,verdict,ms,visited,expected,agree"
    body = [r.rsplit(",", 5) for r in rows[1:]]
    assert len(body) == 4 * len(read_suite(SMOKE))
    assert all(r[-1] == "True" for r in body)
    assert all(r[1] == r[4] for r in body)  # verdict matches the expected column


def test_bench_reports_wrong_expectation(capsys, tmp_path):
    suite = tmp_path / "suite.txt"
    suite.write_text("formula: a & b => SAT\n")
    assert run(capsys, "bench", "--suite", str(suite), "--engines", "zone")[0] == 1
    suite.write_text("E 2\n")
    assert run(capsys, "bench", "--suite", str(suite))[0] == 2


def test_memory_cap_in_a_subprocess():
    done = subprocess.run(
        [sys.executable, "-m", "mitl.cli", "--memory-mb", "2048", "sat", "F a"], capture_output=True, text=True, timeout=120
    )
    assert done.returncode == 0 and done.stdout.strip() == "SAT"

"""Satisfiability and model-checking drivers shared by the CLI, scripts and tests."""

from __future__ import annotations

import time
from dataclasses import dataclass

from .emptiness import Timeout, check
from .formula import Formula, Not, letters, parse, to_nnf
from .intervals import fstar_k
from .ocata import compile_formula
from .product import BuchiTA, ModelError, Product, universal_ta
from .regions import RegionSpace
from .zones import ZoneSpace

ENGINES = ("region", "zone")
PLACEHOLDER = "_"  # sole letter when a formula mentions none


@dataclass(frozen=True)
class RunConfig:
    engine: str = "zone"
    reduced: bool = False
    timeout: float | None = 300.0
    subsume: bool = False
    early: bool = True  # stop at the first accepting cycle found while exploring


@dataclass
class RunReport:
    verdict: str  # SAT, UNSAT, HOLDS, VIOLATED or TIMEOUT
    engine: str
    reduced: bool
    visited: int
    ms: float
    peak_frontier: int = 0
    max_clocks: int = 0
    bound: int = 0

    @property
    def exit_code(self) -> int:
        return {"SAT": 0, "HOLDS": 0, "UNSAT": 1, "VIOLATED": 1}.get(self.verdict, 3)


def make_space(product: Product, engine: str):
    if engine == "region":
        return RegionSpace(product)
    if engine == "zone":
        return ZoneSpace(product)
    raise ValueError(f"unknown engine {engine!r}")


def _as_formula(f) -> Formula:
    return parse(f) if isinstance(f, str) else f


def _run(product: Product, cfg: RunConfig, yes: str, no: str) -> RunReport:
    space = make_space(product, cfg.engine)
    start = time.monotonic()
    try:
        empty, stats = check(space, cfg.timeout, cfg.subsume, cfg.early)
    except Timeout:
        return RunReport("TIMEOUT", cfg.engine, cfg.reduced, 0, (time.monotonic() - start) * 1000, 0, 0, product.k)
    clocks = space.max_clocks
    return RunReport(
        no if empty else yes, cfg.engine, cfg.reduced, stats.visited, stats.seconds * 1000, stats.peak_frontier, clocks, product.k
    )


def sat_product(f, alphabet=None, reduced: bool = False) -> Product:
    f = _as_formula(f)
    sigma = set(alphabet) if alphabet else (letters(f) or {PLACEHOLDER})
    nnf = to_nnf(f)
    a = compile_formula(nnf, sigma)
    return Product(a, universal_ta(sigma), fstar_k(nnf), reduced)


def run_sat(f, cfg: RunConfig = RunConfig(), alphabet=None) -> RunReport:
    return _run(sat_product(f, alphabet, cfg.reduced), cfg, "SAT", "UNSAT")


def mc_product(b: BuchiTA, f, reduced: bool = False) -> Product:
    f = _as_formula(f)
    missing = letters(f) - set(b.alphabet)
    if missing:
        raise ModelError(f"letters {sorted(missing)} are not in the model's alphabet")
    neg = to_nnf(Not(f))
    a = compile_formula(neg, b.alphabet)
    return Product(a, b, fstar_k(neg), reduced)


def run_mc(b: BuchiTA, f, cfg: RunConfig = RunConfig()) -> RunReport:
    return _run(mc_product(b, f, cfg.reduced), cfg, "VIOLATED", "HOLDS")


def is_sat(f, engine: str = "zone", reduced: bool = False, alphabet=None, timeout=None) -> bool:
    r = run_sat(f, RunConfig(engine, reduced, timeout), alphabet)
    if r.verdict == "TIMEOUT":
        raise Timeout()
    return r.verdict == "SAT"


# ---------------------------------------------------------------- benchmark families


def _itv(interval: str) -> str:
    return interval.replace(" ", "")


def gen_formula(family: str, k: int, interval: str) -> str:
    """Parametric benchmark formulas over letters p1..pk (p1..p(k+1) for Q and R)."""
    if k < 1:
        raise ValueError("k must be positive")
    i = _itv(interval)
    p = [f"p{j}" for j in range(1, k + 2)]
    if family == "E":
        return " & ".join(f"F{i} {p[j]}" for j in range(k))
    if family == "A":
        return " & ".join(f"G{i} {p[j]}" for j in range(k))
    if family == "U":
        text = p[0]
        for j in range(1, k):
            text = f"({text} U{i} {p[j]})" if j < k - 1 else f"{text} U{i} {p[j]}"
        return text
    if family == "T":
        text = p[k - 1]
        for j in range(k - 2, -1, -1):
            text = f"{p[j]} R{i} ({text})" if j < k - 2 else f"{p[j]} R{i} {text}"
        return text
    if family == "Q":
        return " & ".join(f"(F{i} {p[j]} | G{i} {p[j + 1]})" for j in range(k))
    if family == "R":
        return " & ".join(f"(G{i} F{i} {p[j]} | F{i} G{i} {p[j + 1]})" for j in range(k))
    raise ValueError(f"unknown family {family!r}")


def lift_property(kind: str, floors: int, bound=None) -> str:
    """Lift requirements over floors 0..floors-1: 'close', 'button' or 'call'."""
    if kind == "close":
        body = [f"(o{i} -> F(1,2] c{i})" for i in range(floors)]
    elif kind == "button":
        body = [f"(b{i} -> F[0,{bound}] o{i})" for i in range(floors)]
    elif kind == "call":
        body = [f"(l{i} -> F[0,{bound}] o{i})" for i in range(floors)]
    else:
        raise ValueError(kind)
    return "G (" + " & ".join(body) + ")"


# response-time bounds (button, call) checked per floor count
LIFT_BOUNDS = {2: (4, 6), 3: (12, 14), 4: (20, 22), 5: (28, 30)}

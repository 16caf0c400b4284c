"""Interval semantics of OCATA: configurations of (location, interval) states,
minimal-model successors, the Merge / F^k approximation family and reduced configurations."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .formula import Formula, is_modal, m_bounds, subformulas, to_nnf
from .ocata import Ocata, Verdict, compile_formula


class IState(NamedTuple):
    loc: int
    lo: Fraction
    hi: Fraction

    @property
    def punctual(self) -> bool:
        return self.lo == self.hi


def state(loc: int, lo, hi=None) -> IState:
    lo = Fraction(lo)
    return IState(loc, lo, lo if hi is None else Fraction(hi))


def config(states) -> tuple:
    """Canonical configuration: sorted tuple, same-location overlaps fused to their hull."""
    return fuse(states)


def fuse(states) -> tuple:
    out = []
    for s in sorted(set(states)):
        if out and out[-1].loc == s.loc and s.lo <= out[-1].hi:
            prev = out.pop()
            out.append(IState(s.loc, prev.lo, max(prev.hi, s.hi)))
        else:
            out.append(s)
    return tuple(out)


def nbclocks(c) -> int:
    return sum(1 if s.lo == s.hi else 2 for s in c)


def elapse(c, t) -> tuple:
    t = Fraction(t)
    return tuple(IState(s.loc, s.lo + t, s.hi + t) for s in c)


def arc_model(arc, s: IState) -> frozenset | None:
    """States created by firing `arc` from `s`, or None when the guard fails somewhere on the interval."""
    if arc.verdict is Verdict.REJECT or not arc.guard_holds(s.lo, s.hi):
        return None
    zero = Fraction(0)
    out = [IState(l, s.lo, s.hi) for l in arc.targets_keep]
    out += [IState(l, zero, zero) for l in arc.targets_reset]
    return frozenset(out)


def minimal_of(models) -> list:
    models = set(models)
    keep = [m for m in models if not any(o < m for o in models)]
    return sorted(keep, key=lambda m: sorted(m))


def minimal_models(a: Ocata, s: IState, letter: str) -> list:
    models = (arc_model(arc, s) for arc in a.arcs(s.loc, letter))
    return minimal_of(m for m in models if m is not None)


@dataclass(frozen=True)
class Successor:
    config: tuple
    models: tuple  # models[i] is the minimal model chosen for the i-th source state

    def dest(self, i: int) -> frozenset:
        """States of `config` that contain an element of the i-th source's model."""
        return frozenset(
            t for t in self.config for m in self.models[i] if m.loc == t.loc and t.lo <= m.lo and m.hi <= t.hi
        )


def succ(a: Ocata, c, letter: str) -> list:
    c = tuple(c)
    choices = [minimal_models(a, s, letter) for s in c]
    if any(not ch for ch in choices):
        return []
    out = {}
    for pick in itertools.product(*choices):
        cfg = fuse(itertools.chain.from_iterable(pick))
        out.setdefault((cfg, pick), Successor(cfg, pick))
    return list(out.values())


def succ_configs(a: Ocata, c, letter: str) -> set:
    return {s.config for s in succ(a, c, letter)}


def dest_of(a: Ocata, c, c_next, s: IState, letter: str) -> frozenset:
    """dest(C, C', s) for a C' reached from C by reading `letter` (first matching model choice)."""
    i = tuple(c).index(s)
    for sc in succ(a, c, letter):
        if sc.config == tuple(c_next):
            return sc.dest(i)
    raise ValueError("c_next is not a successor of c")


def merge(states) -> list:
    """Group a leading [0,0] with the next interval of the same location."""
    states = sorted(states)
    if len(states) >= 2 and states[0].lo == 0 and states[0].hi == 0:
        first, second = states[0], states[1]
        return [IState(first.loc, first.lo, second.hi)] + states[2:]
    return states


def by_location(c) -> dict:
    out = {}
    for s in c:
        out.setdefault(s.loc, []).append(s)
    return out


def approx_fk(c, k: int) -> list:
    groups = by_location(c)
    options = []
    for loc in sorted(groups):
        plain = tuple(sorted(groups[loc]))
        merged = tuple(merge(plain))
        options.append((plain,) if merged == plain else (plain, merged))
    out = []
    for pick in itertools.product(*options):
        cand = tuple(sorted(itertools.chain.from_iterable(pick)))
        if nbclocks(cand) <= k:
            out.append(cand)
    if out:
        return out
    hull = [IState(loc, min(s.lo for s in g), max(s.hi for s in g)) for loc, g in groups.items()]
    return [tuple(sorted(hull))]


def location_count(f: Formula) -> int:
    return 1 + sum(1 for g in subformulas(to_nnf(f)) if is_modal(g))


def fstar_k(f: Formula) -> int:
    nnf = to_nnf(f)
    return max(2 * location_count(nnf), m_bounds(nnf).m)


def bound_for(a: Ocata, f: Formula) -> int:
    return max(2 * len(a.names), m_bounds(to_nnf(f)).m)


# ---------------------------------------------------------------- reduced configurations


def sub_ltl(f: Formula, a: Ocata | None = None) -> frozenset:
    """Location ids whose clock value never matters: the initial copy and [0,inf) modalities."""
    a = a if a is not None else compile_formula(to_nnf(f))
    out = {a.initial}
    for loc, g in enumerate(a.formulas):
        if g is not None and g.interval.is_zero_to_inf():
            out.add(loc)
    return frozenset(out)


@dataclass(frozen=True)
class ReducedConfiguration:
    ltl: frozenset
    timed: tuple


def reduce(c, ltl) -> ReducedConfiguration:
    present = frozenset(s.loc for s in c if s.loc in ltl)
    return ReducedConfiguration(present, tuple(s for s in c if s.loc not in ltl))

"""Explicit Büchi timed automaton for an MITL formula, and zone-based emptiness for plain TAs.

A location maps each OCATA location to a sequence of triples (x, y, marker), x and y being the clocks
holding the infimum and supremum of one interval copy. Only locations reachable from the initial one
are generated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .emptiness import check
from .formula import letters, parse, to_nnf
from .intervals import bound_for
from .ocata import Ocata, Verdict, compile_formula
from .product import BuchiTA, Edge
from .solver import PLACEHOLDER
from .zones import apply_atom, extrapolate_matrix, flatten, reset, up, zero_matrix

# a triple location is a tuple indexed by OCATA location of tuples of (x, y, marker), x and y clock indices


def location_name(a: Ocata, loc) -> str:
    parts = []
    for l, seq in enumerate(loc):
        if seq:
            body = "".join(f"(c{x},c{y},{'T' if m else 'F'})" for x, y, m in seq)
            parts.append(f"{a.names[l]}:{body}")
    return "; ".join(parts) or "{}"


def is_final(loc) -> bool:
    return all(m for seq in loc for _, _, m in seq)


def _used(loc) -> set:
    return {c for seq in loc for x, y, _ in seq for c in (x, y)}


@dataclass(frozen=True)
class _Step:
    guard: tuple  # (clock, op, bound)
    reset: frozenset
    target: tuple


def _steps(a: Ocata, loc, letter: str, nclocks: int):
    if is_final(loc):
        loc = tuple(tuple((x, y, False) for x, y, _ in seq) for seq in loc)
    triples = [(l, t) for l, seq in enumerate(loc) for t in seq]
    choices = []
    for l, _ in triples:
        arcs = [arc for arc in a.arcs(l, letter) if arc.verdict is not Verdict.REJECT]
        if not arcs:
            return
        choices.append(arcs)
    for pick in itertools.product(*choices):
        guard = []
        kept = [[] for _ in loc]
        fresh_from = {}  # reset target -> markers of the triples whose arc resets into it
        for (l, (x, y, m)), arc in zip(triples, pick):
            guard += [(c, g.op, g.bound) for c in (x, y) for g in arc.guard]
            if l in arc.targets_keep:
                kept[l].append((x, y, True if l in a.accepting else m))
            for t in arc.targets_reset:
                fresh_from.setdefault(t, []).append(m)
        # every reset target either takes two fresh clocks or resets the x of its first kept triple
        targets = sorted(fresh_from)
        for modes in itertools.product(("fresh", "merge"), repeat=len(targets)):
            seqs = [list(s) for s in kept]
            free = sorted(set(range(nclocks)) - _used(seqs))
            resets = set()
            ok = True
            for t, mode in zip(targets, modes):
                if t in a.accepting:
                    mark = True
                elif False in fresh_from[t]:
                    mark = False
                else:
                    mark = None  # case of only marked contributors: the new copy keeps or gets T
                if mode == "fresh":
                    if len(free) < 2:
                        ok = False
                        break
                    x, y = free.pop(0), free.pop(0)
                    seqs[t].insert(0, (x, y, True if mark is None else mark))
                    resets |= {x, y}
                else:
                    if not seqs[t]:
                        ok = False
                        break
                    x1, y1, m1 = seqs[t][0]
                    seqs[t][0] = (x1, y1, m1 if mark is None else mark)
                    resets.add(x1)
            if ok:
                yield _Step(tuple(sorted(set(guard))), frozenset(resets), tuple(tuple(s) for s in seqs))


def compile_buchi(f, alphabet=None, clocks: int | None = None) -> BuchiTA:
    """Büchi TA accepting the same timed words as the approximated OCATA of f.

    The clock count defaults to K = max(2|L|, M(f)), the copy bound of the approximation: with only
    M(f) clocks two copies spawned by one step into different locations may not both fit, which
    loses runs (G[1,3) b & G(1,2] !a has M = 2 but needs two pairs)."""
    f = parse(f) if isinstance(f, str) else f
    nnf = to_nnf(f)
    sigma = tuple(sorted(set(alphabet) if alphabet else (letters(nnf) or {PLACEHOLDER})))
    a = compile_formula(nnf, sigma)
    nclocks = clocks if clocks is not None else bound_for(a, nnf)
    start = tuple(((0, 1, False),) if l == a.initial else () for l in a.locations)
    names = {start: location_name(a, start)}
    todo, edges = [start], set()
    while todo:
        loc = todo.pop()
        for letter in sigma:
            for step in _steps(a, loc, letter, nclocks):
                if step.target not in names:
                    names[step.target] = location_name(a, step.target)
                    todo.append(step.target)
                edges.add(Edge(names[loc], letter, step.guard, step.reset, names[step.target]))
    order = sorted(names, key=lambda l: (l != start, names[l]))
    return BuchiTA(
        sigma,
        tuple(names[l] for l in order),
        names[start],
        tuple(f"c{i}" for i in range(nclocks)),
        frozenset(names[l] for l in order if is_final(l)),
        tuple(sorted(edges, key=lambda e: (e.source, e.letter, e.target, e.guard, sorted(e.reset)))),
    )


# ---------------------------------------------------------------- plain TA emptiness


class TASpace:
    """Zone graph of a Büchi TA: states are (location, flattened DBM) with extrapolation at cmax."""

    def __init__(self, b: BuchiTA):
        self.b = b
        self.n = 1 + len(b.clocks)
        self.cmax = b.cmax
        self.max_clocks = len(b.clocks)

    def _finish(self, loc, d) -> tuple:
        up(d)
        extrapolate_matrix(d, self.cmax)
        return loc, flatten(d)

    def initial(self) -> tuple:
        return self._finish(self.b.initial, zero_matrix(self.n))

    def successors(self, state) -> set:
        loc, dbm = state
        out = set()
        for letter in self.b.alphabet:
            for e in self.b.out(loc, letter):
                d = [list(dbm[i * self.n : (i + 1) * self.n]) for i in range(self.n)]
                if not all(apply_atom(d, 1 + i, op, c) for i, op, c in e.guard):
                    continue
                for i in e.reset:
                    reset(d, 1 + i)
                out.add(self._finish(e.target, d))
        return out

    def is_accepting(self, state) -> bool:
        return state[0] in self.b.accepting


def ta_empty(b: BuchiTA, timeout: float | None = None) -> bool:
    """Büchi emptiness of a TA, Zeno runs included."""
    empty, _ = check(TASpace(b), timeout)
    return empty

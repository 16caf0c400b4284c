"""One-clock alternating timed automata: data model, compilation from MITL,
DNF normalisation of transition formulas, dualisation and tree-likeness check."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .formula import (
    INF,
    And,
    Bottom,
    Formula,
    Letter,
    NotLetter,
    Or,
    Release,
    Top,
    Until,
    is_modal,
    is_nnf,
    letters,
    subformulas,
    to_text,
)


@dataclass(frozen=True, order=True)
class ClockConstraint:
    op: str  # one of < <= > >=
    bound: int

    def holds(self, v) -> bool:
        if self.op == "<":
            return v < self.bound
        if self.op == "<=":
            return v <= self.bound
        if self.op == ">":
            return v > self.bound
        if self.op == ">=":
            return v >= self.bound
        raise ValueError(self.op)

    def negate(self) -> ClockConstraint:
        flip = {"<": ">=", "<=": ">", ">": "<=", ">=": "<"}
        return ClockConstraint(flip[self.op], self.bound)

    @property
    def is_upper(self) -> bool:
        return self.op in ("<", "<=")

    def __str__(self):
        return f"x{self.op}{self.bound}"


class Verdict(Enum):
    NORMAL = "normal"
    ACCEPT = "accept-all"
    REJECT = "reject"


@dataclass(frozen=True)
class Arc:
    source: int
    letter: str
    guard: tuple = ()
    targets_keep: frozenset = frozenset()
    targets_reset: frozenset = frozenset()
    verdict: Verdict = Verdict.NORMAL

    def guard_holds(self, lo, hi) -> bool:
        """Guard satisfied by every clock value in [lo, hi] (convex guard: endpoints suffice)."""
        return all(c.holds(lo) and c.holds(hi) for c in self.guard)

    def sort_key(self):
        return (
            self.verdict.value,
            tuple(sorted(self.targets_keep)),
            tuple(sorted(self.targets_reset)),
            tuple((c.op, c.bound) for c in self.guard),
        )


# ---------------------------------------------------------------- transition formulas


class TF:
    pass


@dataclass(frozen=True)
class TConst(TF):
    value: bool


@dataclass(frozen=True)
class TLoc(TF):
    loc: int


@dataclass(frozen=True)
class TClock(TF):
    constraint: ClockConstraint


@dataclass(frozen=True)
class TReset(TF):
    body: TF


@dataclass(frozen=True)
class TAnd(TF):
    parts: tuple


@dataclass(frozen=True)
class TOr(TF):
    parts: tuple


TTRUE = TConst(True)
TFALSE = TConst(False)


def t_and(*parts) -> TF:
    return TAnd(tuple(parts))


def t_or(*parts) -> TF:
    return TOr(tuple(parts))


@dataclass(frozen=True)
class _Term:
    keep: frozenset = frozenset()
    reset: frozenset = frozenset()
    guard: frozenset = frozenset()


def _tighten(guard) -> tuple | None:
    """Tightest lower/upper pair for a conjunction of constraints, or None if unsatisfiable."""
    lower = None  # (bound, strict)
    upper = None
    for c in guard:
        if c.is_upper:
            cand = (c.bound, c.op == "<")
            if upper is None or cand[0] < upper[0] or (cand[0] == upper[0] and cand[1]):
                upper = cand
        else:
            cand = (c.bound, c.op == ">")
            if lower is None or cand[0] > lower[0] or (cand[0] == lower[0] and cand[1]):
                lower = cand
    if lower is not None and lower == (0, False):
        lower = None
    if lower is not None and upper is not None:
        if lower[0] > upper[0] or (lower[0] == upper[0] and (lower[1] or upper[1])):
            return None
    out = []
    if lower is not None:
        out.append(ClockConstraint(">" if lower[1] else ">=", lower[0]))
    if upper is not None:
        if upper == (0, True):
            return None  # x < 0
        out.append(ClockConstraint("<" if upper[1] else "<=", upper[0]))
    return tuple(out)


def _normalize(term: _Term) -> _Term | None:
    guard = _tighten(term.guard)
    if guard is None:
        return None
    return _Term(term.keep, term.reset, frozenset(guard))


def _dnf_terms(tf: TF) -> set:
    if isinstance(tf, TConst):
        return {_Term()} if tf.value else set()
    if isinstance(tf, TLoc):
        return {_Term(keep=frozenset([tf.loc]))}
    if isinstance(tf, TClock):
        return {_Term(guard=frozenset([tf.constraint]))}
    if isinstance(tf, TReset):
        out = set()
        for t in _dnf_terms(tf.body):
            # a reset constraint becomes a static test 0 op c
            if not all(c.holds(0) for c in t.guard):
                continue
            out.add(_Term(reset=t.keep | t.reset))
        return out
    if isinstance(tf, TOr):
        out = set()
        for p in tf.parts:
            out |= _dnf_terms(p)
        return out
    if isinstance(tf, TAnd):
        out = {_Term()}
        for p in tf.parts:
            sub = _dnf_terms(p)
            nxt = set()
            for a in out:
                for b in sub:
                    t = _normalize(_Term(a.keep | b.keep, a.reset | b.reset, a.guard | b.guard))
                    if t is not None:
                        nxt.add(t)
            out = nxt
            if not out:
                break
        return out
    raise TypeError(tf)


def _bounds(guard):
    lower, upper = (0, False), (INF, False)
    for c in guard:
        if c.is_upper:
            upper = (c.bound, c.op == "<")
        else:
            lower = (c.bound, c.op == ">")
    return lower, upper


def _weaker_guard(g1, g2) -> bool:
    """Every value allowed by g2 is allowed by g1."""
    (l1, u1), (l2, u2) = _bounds(g1), _bounds(g2)
    lower_ok = l1[0] < l2[0] or (l1[0] == l2[0] and (not l1[1] or l2[1]))
    upper_ok = u1[0] > u2[0] or (u1[0] == u2[0] and (not u1[1] or u2[1]))
    return lower_ok and upper_ok


def _absorbs(t1: _Term, t2: _Term) -> bool:
    return t1.keep <= t2.keep and t1.reset <= t2.reset and _weaker_guard(t1.guard, t2.guard)


def dnf(tf: TF, source: int = -1, letter: str = "") -> list:
    """Flatten a transition formula into a canonically ordered list of arcs.

    Terms implied by another term are dropped (absorption), which keeps
    dualisation an involution on arc sets."""
    terms = {t for t in (_normalize(t) for t in _dnf_terms(tf)) if t is not None}
    terms = {t for t in terms if not any(u != t and _absorbs(u, t) for u in terms)}
    if not terms:
        return [Arc(source, letter, verdict=Verdict.REJECT)]
    arcs = []
    for t in terms:
        guard = tuple(sorted(t.guard, key=lambda c: (c.is_upper, c.bound, c.op)))
        if not t.keep and not t.reset:
            arcs.append(Arc(source, letter, guard, verdict=Verdict.ACCEPT))
        else:
            arcs.append(Arc(source, letter, guard, frozenset(t.keep), frozenset(t.reset)))
    return sorted(arcs, key=Arc.sort_key)


def arcs_to_tf(arcs) -> TF:
    disjuncts = []
    for a in arcs:
        if a.verdict is Verdict.REJECT:
            continue
        parts = [TClock(c) for c in a.guard]
        parts += [TLoc(l) for l in sorted(a.targets_keep)]
        parts += [TReset(TLoc(l)) for l in sorted(a.targets_reset)]
        disjuncts.append(TAnd(tuple(parts)))
    return TOr(tuple(disjuncts))


def dual_tf(tf: TF) -> TF:
    if isinstance(tf, TConst):
        return TConst(not tf.value)
    if isinstance(tf, TLoc):
        return tf
    if isinstance(tf, TClock):
        return TClock(tf.constraint.negate())
    if isinstance(tf, TReset):
        return TReset(dual_tf(tf.body))
    if isinstance(tf, TAnd):
        return TOr(tuple(dual_tf(p) for p in tf.parts))
    if isinstance(tf, TOr):
        return TAnd(tuple(dual_tf(p) for p in tf.parts))
    raise TypeError(tf)


# ---------------------------------------------------------------- automaton


@dataclass(frozen=True)
class Ocata:
    alphabet: tuple
    names: tuple  # display name per location id
    initial: int
    accepting: frozenset
    delta: dict = field(hash=False, compare=False)  # (loc, letter) -> list of Arc
    cmax: int = 0
    formulas: tuple = ()  # source formula per location when compiled, else empty

    @property
    def locations(self) -> range:
        return range(len(self.names))

    def arcs(self, loc: int, letter: str) -> list:
        return self.delta[(loc, letter)]

    def location_of(self, f: Formula) -> int:
        return self.formulas.index(f)

    def __post_init__(self):
        for l in self.locations:
            for s in self.alphabet:
                if (l, s) not in self.delta:
                    raise ValueError(f"delta undefined on ({self.names[l]}, {s})")
                for a in self.delta[(l, s)]:
                    for t in a.targets_keep | a.targets_reset:
                        if t not in self.locations:
                            raise ValueError(f"arc targets undeclared location {t}")


def _guard_cmax(delta) -> int:
    return max((c.bound for arcs in delta.values() for a in arcs for c in a.guard), default=0)


def _interval_tf(interval) -> TF:
    parts = []
    if interval.lo > 0 or not interval.lo_closed:
        parts.append(TClock(ClockConstraint(">=" if interval.lo_closed else ">", interval.lo)))
    if interval.hi != INF:
        parts.append(TClock(ClockConstraint("<=" if interval.hi_closed else "<", interval.hi)))
    return TAnd(tuple(parts))


def _outside_tf(interval) -> TF:
    # x not in I, split into two convex disjuncts
    parts = []
    if interval.lo > 0 or not interval.lo_closed:
        parts.append(TClock(ClockConstraint("<" if interval.lo_closed else "<=", interval.lo)))
    if interval.hi != INF:
        parts.append(TClock(ClockConstraint(">" if interval.hi_closed else ">=", interval.hi)))
    return TOr(tuple(parts))


def _beyond_tf(interval) -> TF:
    if interval.hi == INF:
        return TFALSE
    return TClock(ClockConstraint(">", interval.hi))


def compile_formula(f: Formula, alphabet=None) -> Ocata:
    """Translate an NNF formula into an OCATA; location 0 is the initial copy."""
    if not is_nnf(f):
        raise ValueError("compile expects a formula in negative normal form")
    sigma = tuple(sorted(set(alphabet) if alphabet is not None else letters(f)))
    if not sigma:
        raise ValueError("empty alphabet")
    missing = letters(f) - set(sigma)
    if missing:
        raise ValueError(f"letters {sorted(missing)} are not in the alphabet")
    modal = sorted((g for g in subformulas(f) if is_modal(g)), key=lambda g: (_depth(g), to_text(g)))
    formulas = (None,) + tuple(modal)
    index = {g: i + 1 for i, g in enumerate(modal)}

    def tf(g: Formula, s: str) -> TF:
        if isinstance(g, Top):
            return TTRUE
        if isinstance(g, Bottom):
            return TFALSE
        if isinstance(g, Letter):
            return TConst(g.name == s)
        if isinstance(g, NotLetter):
            return TConst(g.name != s)
        if isinstance(g, And):
            return t_and(tf(g.left, s), tf(g.right, s))
        if isinstance(g, Or):
            return t_or(tf(g.left, s), tf(g.right, s))
        here = TLoc(index[g])
        if isinstance(g, Until):
            # the loop disjunct carries no x <= sup(I) guard: a copy past sup(I) can only loop
            # in a non-accepting location, so dropping the guard leaves the language unchanged
            return t_or(
                t_and(TReset(tf(g.right, s)), _interval_tf(g.interval)),
                t_and(TReset(tf(g.left, s)), here),
            )
        if isinstance(g, Release):
            return t_and(
                t_or(TReset(tf(g.right, s)), _outside_tf(g.interval)),
                t_or(TReset(tf(g.left, s)), here, _beyond_tf(g.interval)),
            )
        raise TypeError(g)

    delta = {}
    for s in sigma:
        delta[(0, s)] = dnf(TReset(tf(f, s)), 0, s)
        for g in modal:
            delta[(index[g], s)] = dnf(tf(g, s), index[g], s)
    names = ("init",) + tuple(to_text(g) for g in modal)
    accepting = frozenset(index[g] for g in modal if isinstance(g, Release))
    return Ocata(sigma, names, 0, accepting, delta, _guard_cmax(delta), formulas)


def _depth(g: Formula) -> int:
    if isinstance(g, (And, Or, Until, Release)):
        return 1 + max(_depth(g.left), _depth(g.right))
    return 0


def dualize(a: Ocata) -> Ocata:
    tocata_partition(a)  # raises if not tree-like
    delta = {}
    for (l, s), arcs in a.delta.items():
        delta[(l, s)] = dnf(dual_tf(arcs_to_tf(arcs)), l, s)
    accepting = frozenset(a.locations) - a.accepting
    return Ocata(a.alphabet, a.names, a.initial, accepting, delta, _guard_cmax(delta), a.formulas)


def arc_set(a: Ocata) -> set:
    return {(k, arc) for k, arcs in a.delta.items() for arc in arcs}


# ---------------------------------------------------------------- tree-like check


class NotTreeLike(ValueError):
    pass


@dataclass(frozen=True)
class TocataPartition:
    blocks: tuple  # tuple of frozensets
    below: frozenset  # pairs (i, j): block i <= block j, reflexive-transitive

    def leq(self, i: int, j: int) -> bool:
        return (i, j) in self.below

    def block_of(self, loc: int) -> int:
        for i, b in enumerate(self.blocks):
            if loc in b:
                return i
        raise KeyError(loc)


def _successors(a: Ocata, loc: int) -> set:
    out = set()
    for s in a.alphabet:
        for arc in a.arcs(loc, s):
            out |= arc.targets_keep | arc.targets_reset
    return out


def tocata_partition(a: Ocata) -> TocataPartition:
    """Blocks of mutually reachable locations, ordered by reachability."""
    succ = {l: _successors(a, l) for l in a.locations}
    reach = {}
    for l in a.locations:
        seen = set()
        stack = [l]
        while stack:
            u = stack.pop()
            for v in succ[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        reach[l] = seen | {l}
    blocks = []
    assigned = {}
    for l in a.locations:
        if l in assigned:
            continue
        block = frozenset(m for m in reach[l] if l in reach[m])
        for m in block:
            assigned[m] = len(blocks)
        blocks.append(block)
    for b in blocks:
        acc = {l in a.accepting for l in b}
        if len(acc) > 1:
            names = ", ".join(a.names[l] for l in sorted(b))
            raise NotTreeLike(f"block {{{names}}} mixes accepting and non-accepting locations")
    below = set()
    for i, bi in enumerate(blocks):
        rep = next(iter(bi))
        for j, bj in enumerate(blocks):
            if next(iter(bj)) in reach[rep]:
                below.add((j, i))
    return TocataPartition(tuple(blocks), frozenset(below))


# ---------------------------------------------------------------- debug export


def _arc_text(a: Ocata, arc: Arc) -> str:
    if arc.verdict is Verdict.REJECT:
        return "false"
    parts = [str(c) for c in arc.guard]
    parts += [a.names[l] for l in sorted(arc.targets_keep)]
    parts += [f"x.{a.names[l]}" for l in sorted(arc.targets_reset)]
    return " & ".join(parts) if parts else "true"


def dump(a: Ocata) -> str:
    lines = ["locations:"]
    for l in a.locations:
        tags = []
        if l == a.initial:
            tags.append("initial")
        if l in a.accepting:
            tags.append("accepting")
        lines.append(f"  {l}: {a.names[l]}" + (f" [{', '.join(tags)}]" if tags else ""))
    lines.append("arcs:")
    for l in a.locations:
        for s in a.alphabet:
            for arc in a.arcs(l, s):
                lines.append(f"  {l} --{s}--> {_arc_text(a, arc)}")
    return "\n".join(lines)

"""Büchi timed automata, model generators and the marked product of an OCATA with a TA.

Markers are booleans: True is the "visited F since the last breakpoint" mark, False the pending one.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .intervals import IState, approx_fk, fuse
from .ocata import Ocata, Verdict

_ATOM = re.compile(r"^\s*([A-Za-z_][A-Za-z_0-9]*)\s*(<=|>=|<|>|=)\s*(\d+)\s*$")
_OPS = {
    "<": lambda v, c: v < c,
    "<=": lambda v, c: v <= c,
    ">": lambda v, c: v > c,
    ">=": lambda v, c: v >= c,
}


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    source: str
    letter: str
    guard: tuple  # of (clock index, op, bound)
    reset: frozenset  # clock indices
    target: str

    def enabled(self, vals) -> bool:
        return all(_OPS[op](vals[i], c) for i, op, c in self.guard)


@dataclass(frozen=True)
class BuchiTA:
    alphabet: tuple
    locations: tuple
    initial: str
    clocks: tuple
    accepting: frozenset
    edges: tuple
    _out: dict = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if not self.alphabet:
            raise ModelError("empty alphabet")
        locs = set(self.locations)
        if self.initial not in locs:
            raise ModelError(f"initial location {self.initial!r} is not declared")
        if not self.accepting <= locs:
            raise ModelError("accepting locations must be declared")
        out = {}
        for e in self.edges:
            if e.source not in locs or e.target not in locs:
                raise ModelError(f"edge {e.source}->{e.target} uses an undeclared location")
            if e.letter not in self.alphabet:
                raise ModelError(f"edge letter {e.letter!r} is not in the alphabet")
            if any(i >= len(self.clocks) for i, _, _ in e.guard) or any(i >= len(self.clocks) for i in e.reset):
                raise ModelError("edge uses an undeclared clock")
            out.setdefault((e.source, e.letter), []).append(e)
        object.__setattr__(self, "_out", out)

    def out(self, loc: str, letter: str) -> list:
        return self._out.get((loc, letter), [])

    @property
    def cmax(self) -> int:
        return max((c for e in self.edges for _, _, c in e.guard), default=0)

    def to_json(self) -> dict:
        def atom(i, op, c):
            return f"{self.clocks[i]}{op}{c}"

        return {
            "alphabet": list(self.alphabet),
            "clocks": list(self.clocks),
            "locations": [{"name": l, "accepting": l in self.accepting} for l in self.locations],
            "initial": self.initial,
            "edges": [
                {
                    "from": e.source,
                    "to": e.target,
                    "letter": e.letter,
                    "guard": [atom(*g) for g in e.guard],
                    "reset": [self.clocks[i] for i in sorted(e.reset)],
                }
                for e in self.edges
            ],
        }


def parse_guard(atoms, clocks) -> tuple:
    index = {c: i for i, c in enumerate(clocks)}
    out = []
    for text in atoms:
        m = _ATOM.match(text)
        if not m:
            raise ModelError(f"malformed guard atom {text!r}")
        name, op, bound = m.group(1), m.group(2), int(m.group(3))
        if name not in index:
            raise ModelError(f"unknown clock {name!r}")
        if op == "=":
            out += [(index[name], ">=", bound), (index[name], "<=", bound)]
        else:
            out.append((index[name], op, bound))
    return tuple(out)


def ta_from_dict(d: dict) -> BuchiTA:
    try:
        clocks = tuple(d.get("clocks", []))
        locs = d["locations"]
        names = tuple(l["name"] if isinstance(l, dict) else l for l in locs)
        accepting = frozenset(l["name"] for l in locs if isinstance(l, dict) and l.get("accepting"))
        edges = []
        for e in d.get("edges", []):
            reset = set()
            for c in e.get("reset", []):
                if c not in clocks:
                    raise ModelError(f"unknown clock {c!r}")
                reset.add(clocks.index(c))
            edges.append(Edge(e["from"], e["letter"], parse_guard(e.get("guard", []), clocks), frozenset(reset), e["to"]))
        return BuchiTA(tuple(d["alphabet"]), names, d["initial"], clocks, accepting, tuple(edges))
    except KeyError as exc:
        raise ModelError(f"missing field {exc}") from None


def parse_ta(source) -> BuchiTA:
    """Read a TA from a path, an open file or JSON text."""
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, str) and source.lstrip().startswith("{"):
        text = source
    else:
        with open(source) as fh:
            text = fh.read()
    try:
        return ta_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON: {exc}") from None


def universal_ta(alphabet) -> BuchiTA:
    alphabet = tuple(sorted(set(alphabet)))
    if not alphabet:
        raise ModelError("empty alphabet")
    edges = tuple(Edge("u", s, (), frozenset(), "u") for s in alphabet)
    return BuchiTA(alphabet, ("u",), "u", (), frozenset({"u"}), edges)


# ---------------------------------------------------------------- lift models


def lift_location(n, direction, go, opened) -> str:
    floors = ",".join(str(i) for i in sorted(go))
    return f"({n},{direction},{{{floors}}},{'T' if opened else 'F'})"


def lift_alphabet(k: int) -> tuple:
    return tuple(f"{p}{i}" for p in "lbocp" for i in range(k))


_LIFT2 = [
    # (source, letters, guard value, reset, target) over the locations drawn for two floors
    ((0, "h", (), 1), ("l1", "b1"), None, True, (0, "u", (1,), 1)),
    ((0, "u", (1,), 1), ("c0",), 2, True, (0, "u", (1,), 0)),
    ((0, "u", (1,), 0), ("l0",), None, False, (0, "u", (0, 1), 0)),
    ((0, "u", (1,), 0), ("o1",), 2, True, (1, "d", (), 1)),
    ((0, "u", (0, 1), 0), ("o1",), 2, True, (1, "d", (0,), 1)),
    ((1, "d", (), 0), ("o0",), 2, True, (0, "h", (), 1)),
    ((1, "d", (), 0), ("l0", "b0"), None, False, (1, "d", (0,), 0)),
    ((1, "d", (), 0), ("l1",), None, False, (1, "d", (1,), 0)),
    ((1, "d", (0,), 0), ("l1",), None, False, (1, "d", (0, 1), 0)),
    ((1, "d", (0,), 0), ("o0",), 2, True, (0, "h", (), 1)),
    ((1, "d", (1,), 0), ("l0", "b0"), None, False, (1, "d", (0, 1), 0)),
    ((1, "d", (1,), 0), ("p0",), 1, True, (0, "u", (1,), 0)),
    ((1, "d", (0, 1), 0), ("o0",), 1, True, (0, "u", (1,), 1)),
    ((1, "d", (), 1), ("l0", "b0"), None, False, (1, "d", (0,), 1)),
    ((1, "d", (), 1), ("c1",), 2, True, (1, "d", (), 0)),
    ((1, "d", (0,), 1), ("c1",), 2, True, (1, "d", (0,), 0)),
]


def _lift_ta(k, initial, transitions) -> BuchiTA:
    locs, edges = [], []

    def name(t):
        n = lift_location(*t)
        if n not in locs:
            locs.append(n)
        return n

    name(initial)
    for src, letters, at, reset, dst in transitions:
        s, d = name(src), name(dst)
        guard = () if at is None else ((0, ">=", at), (0, "<=", at))
        for letter in letters:
            edges.append(Edge(s, letter, guard, frozenset({0}) if reset else frozenset(), d))
    return BuchiTA(lift_alphabet(k), tuple(locs), name(initial), ("x",), frozenset(locs), tuple(edges))


def _direction(n, current, go, home) -> str:
    """Keep heading while calls remain ahead, else turn; with no calls head for the home floor."""
    above = any(i > n for i in go)
    below = any(i < n for i in go)
    if current == "u" and above or current == "d" and below:
        return current
    if above:
        return "u"
    if below:
        return "d"
    if n == home:
        return "h"
    return "u" if home > n else "d"


def _lift_transitions(k: int):
    home = (k - 1) // 2
    start = (home, "h", (), 1)
    seen, todo, out = {start}, [start], []

    def add(src, letters, at, reset, dst):
        out.append((src, letters, at, reset, dst))
        if dst not in seen:
            seen.add(dst)
            todo.append(dst)

    while todo:
        loc = todo.pop(0)
        n, d, go, opened = loc
        if d == "h":
            for i in range(k):
                if i != n:
                    add(loc, (f"l{i}", f"b{i}"), None, True, (n, "u" if i > n else "d", (i,), 1))
            continue
        for i in range(k):
            if i not in go and not (opened and i == n):
                go2 = tuple(sorted(go + (i,)))
                d2 = _direction(n, d, go2, home) if opened else d
                # the cabin button of the floor the lift stands at is inert while the doors are shut
                letters = (f"l{i}",) if i == n else (f"l{i}", f"b{i}")
                add(loc, letters, None, False, (n, d2, go2, opened))
        if opened:
            add(loc, (f"c{n}",), 2, True, (n, _direction(n, d, go, home), go, 0))
            continue
        nxt = n + 1 if d == "u" else n - 1
        # heading down from a floor called again since its doors shut takes one unit, not two
        at = 1 if n in go and d == "d" else 2
        if nxt in go or (not go and nxt == home):
            rest = tuple(i for i in go if i != nxt)
            d2 = _direction(nxt, d, rest, home)
            add(loc, (f"o{nxt}",), at, True, (nxt, d2, rest if d2 != "h" else (), 1))
        else:
            add(loc, (f"p{nxt}",), at, True, (nxt, _direction(nxt, d, go, home), go, 0))
    return start, out


def lift_model(k: int) -> BuchiTA:
    """Lift with k floors and one clock x; two floors gives the hand-drawn ten-location model,
    larger k uses a generator that extrapolates its pattern (2 time units per door or floor move)."""
    if k < 2:
        raise ValueError("a lift needs at least two floors")
    if k == 2:
        return _lift_ta(2, (0, "h", (), 1), _LIFT2)
    start, transitions = _lift_transitions(k)
    return _lift_ta(k, start, transitions)


# ---------------------------------------------------------------- marked product


@dataclass(frozen=True, order=True)
class MarkedState:
    copies: tuple = ()  # sorted (loc, lo, hi, marker)
    ta_loc: str | None = None
    ta_vals: tuple = ()
    ta_mark: bool = True
    untimed: tuple = ()  # sorted (loc, marker); presence-only locations in reduced mode

    def configuration(self) -> tuple:
        return tuple(IState(l, lo, hi) for l, lo, hi, _ in self.copies)

    @property
    def nbclocks(self) -> int:
        return sum(1 if lo == hi else 2 for _, lo, hi, _ in self.copies)


def is_alpha(s: MarkedState) -> bool:
    return s.ta_mark and all(c[3] for c in s.copies) and all(m for _, m in s.untimed)


def flip_all(s: MarkedState) -> MarkedState:
    return MarkedState(
        tuple((l, lo, hi, False) for l, lo, hi, _ in s.copies),
        s.ta_loc,
        s.ta_vals,
        False,
        tuple((l, False) for l, _ in s.untimed),
    )


def elapse_marked(s: MarkedState, t) -> MarkedState:
    t = Fraction(t)
    return replace(
        s,
        copies=tuple((l, lo + t, hi + t, m) for l, lo, hi, m in s.copies),
        ta_vals=tuple(v + t for v in s.ta_vals),
    )


def ltl_locations(a: Ocata) -> frozenset:
    out = {a.initial}
    for loc, g in enumerate(a.formulas):
        if g is not None and g.interval.is_zero_to_inf():
            out.add(loc)
    return frozenset(out)


def _upper(arc):
    ups = [c for c in arc.guard if c.is_upper]
    if not ups:
        return None
    c = min(ups, key=lambda c: (c.bound, c.op == "<="))
    return (c.bound, c.op == "<")


def dead_thresholds(a: Ocata) -> dict:
    """Per non-accepting location, the (bound, strict) past which a copy can only loop there forever.

    A copy whose interval supremum passes the bound has no arc left except ones keeping it in place
    (whatever else they spawn), so its branch never reaches F again and any run through it is rejecting."""
    out = {}
    for loc in a.locations:
        if loc in a.accepting:
            continue
        best = (-1, False)
        for s in a.alphabet:
            for arc in a.arcs(loc, s):
                if arc.verdict is Verdict.REJECT:
                    continue
                if arc.verdict is Verdict.NORMAL and loc in arc.targets_keep:
                    continue
                up = _upper(arc)
                if up is None:
                    best = None
                    break
                if best is not None and (up[0] > best[0] or up[0] == best[0] and best[1] and not up[1]):
                    best = up
            if best is None:
                break
        if best is not None:
            out[loc] = best
    return out


def clock_blind(a: Ocata) -> frozenset:
    """Locations none of whose arcs test the clock."""
    return frozenset(l for l in a.locations if not any(arc.guard for s in a.alphabet for arc in a.arcs(l, s)))


def collapse_above(cfg, limit, blind=frozenset()) -> tuple:
    """Join same-location copies no guard can tell apart: wholly above the largest constant, or in a
    location that never tests its clock."""
    out, high = [], {}
    for s in cfg:
        if s.lo > limit or s.loc in blind:
            h = high.get(s.loc)
            high[s.loc] = s if h is None else IState(s.loc, min(h.lo, s.lo), max(h.hi, s.hi))
        else:
            out.append(s)
    return tuple(sorted(out + list(high.values()))) if high else cfg


class Product:
    """Marked product of an OCATA with a Büchi TA (a TA of None gives the plain marked OCATA)."""

    def __init__(self, a: Ocata, b: BuchiTA | None, k: int, reduced: bool = False, prune: bool = True, scale: int = 1):
        if b is not None and set(a.alphabet) != set(b.alphabet):
            raise ModelError("the OCATA and the TA must share one alphabet")
        self.a, self.b, self.k = a, b, k
        self.reduced = reduced
        self.ltl = ltl_locations(a) if reduced else frozenset()
        # clock values may live in a scaled integer space; constants are multiplied by `scale`
        self.scale = scale
        self.dead = {l: (c * scale, st) for l, (c, st) in dead_thresholds(a).items()} if prune else {}
        self.alphabet = a.alphabet
        self.cmax = max(a.cmax, b.cmax if b is not None else 0)
        self.limit = self.cmax * scale
        self.blind = clock_blind(a) - self.ltl
        self._models = {}
        self.max_clocks = 0 if a.initial in self.ltl else 1
        for loc in self.ltl:
            for s in a.alphabet:
                if any(arc.guard for arc in a.arcs(loc, s)):
                    raise ValueError("untimed locations must not carry clock guards")

    def initial(self) -> MarkedState:
        a, b = self.a, self.b
        zero = Fraction(0)
        if a.initial in self.ltl:
            copies, untimed = (), ((a.initial, False),)
        else:
            copies, untimed = ((a.initial, zero, zero, False),), ()
        if b is None:
            return MarkedState(copies, None, (), True, untimed)
        return MarkedState(copies, b.initial, tuple(zero for _ in b.clocks), b.initial in b.accepting, untimed)

    def is_dead(self, loc, hi) -> bool:
        t = self.dead.get(loc)
        return t is not None and (hi > t[0] or (t[1] and hi >= t[0]))

    def _has_dead(self, copies) -> bool:
        return any(self.is_dead(c[0], c[2]) for c in copies)

    def models(self, loc, lo, hi, letter) -> list:
        """Minimal models of δ(loc, letter) on [lo, hi]; elements are (loc, lo, hi) or (loc,) when untimed."""
        key = (loc, lo, hi, letter)
        hit = self._models.get(key)
        if hit is not None:
            return hit
        cands = set()
        for arc in self.a.arcs(loc, letter):
            if arc.verdict is Verdict.REJECT:
                continue
            if lo is not None and not all(
                _OPS[g.op](lo, g.bound * self.scale) and _OPS[g.op](hi, g.bound * self.scale) for g in arc.guard
            ):
                continue
            els = []
            for t in arc.targets_keep:
                if t in self.ltl:
                    els.append((t,))
                elif lo is None:
                    raise ValueError("untimed copy kept in a timed location")
                else:
                    els.append((t, lo, hi))
            els += [(t,) if t in self.ltl else (t, 0, 0) for t in arc.targets_reset]
            cands.add(frozenset(els))
        out = [m for m in cands if not any(o < m for o in cands)]
        self._models[key] = out
        return out

    def ta_moves(self, s: MarkedState, letter: str) -> list:
        if self.b is None:
            return [(None, (), True)]
        out = []
        for e in self.b.out(s.ta_loc, letter):
            if all(_OPS[op](s.ta_vals[i], c * self.scale) for i, op, c in e.guard):
                vals = tuple(0 if i in e.reset else v for i, v in enumerate(s.ta_vals))
                out.append((e.target, vals, s.ta_mark or e.target in self.b.accepting))
        return out

    def discrete(self, s: MarkedState, letter: str) -> set:
        if is_alpha(s):
            s = flip_all(s)
        if self._has_dead(s.copies):
            return set()
        moves = self.ta_moves(s, letter)
        if not moves:
            return set()
        # unions of one minimal model per source copy, deduplicated as they grow;
        # elements carry the source marker: (loc, lo, hi, marker) or (loc, marker) when untimed
        partial = {frozenset()}
        sources = [((loc, lo, hi, letter), m) for loc, lo, hi, m in s.copies]
        sources += [((loc, None, None, letter), m) for loc, m in s.untimed]
        for key, m in sources:
            ms = self.models(*key)
            if not ms:
                return set()
            tagged = [frozenset(el + (m,) for el in model) for model in ms]
            partial = {p | x for p in partial for x in tagged}
        accepting = self.a.accepting
        out = set()
        for union in partial:
            timed = [el for el in union if len(el) == 4]
            untimed = {}
            for l, m in (el for el in union if len(el) == 2):
                untimed[l] = untimed.get(l, True) and m
            pending = [el for el in timed if not el[3]]
            u = tuple(sorted((l, m or l in accepting) for l, m in untimed.items()))
            for cfg in approx_fk(collapse_above(fuse(IState(*el[:3]) for el in timed), self.limit, self.blind), self.k):
                copies = []
                for st in cfg:
                    if st.loc in accepting:
                        mark = True
                    else:
                        mark = not any(l == st.loc and st.lo <= lo and hi <= st.hi for l, lo, hi, _ in pending)
                    copies.append((st.loc, st.lo, st.hi, mark))
                copies = tuple(copies)
                if self._has_dead(copies):
                    continue
                n = sum(1 if c[1] == c[2] else 2 for c in copies)
                if n > self.max_clocks:
                    self.max_clocks = n
                for tl, tv, tm in moves:
                    out.add(MarkedState(copies, tl, tv, tm, u))
        return out


def initial_marked(a: Ocata, b: BuchiTA | None, reduced: bool = False) -> MarkedState:
    return Product(a, b, 2 * len(a.names), reduced, prune=False).initial()


def discrete_marked(a: Ocata, b: BuchiTA | None, s: MarkedState, letter: str, k: int, reduced: bool = False) -> set:
    return Product(a, b, k, reduced).discrete(s, letter)

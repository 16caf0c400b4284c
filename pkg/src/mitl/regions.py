"""Region words: canonical encoding of marked product states up to clock-region equivalence.

Region codes for a maximal constant cmax: the point {n} is 2n, the open interval (n, n+1) is 2n+1
and everything above cmax is 2*cmax+1, so letting time pass moves a value from code r to r+1.
A tuple is (kind, loc, region, marker, index) with kind 0 for OCATA endpoints and 1 for TA clocks.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import NamedTuple

from .product import MarkedState, Product

OCATA, TA = 0, 1


class RegionWord(NamedTuple):
    letters: tuple  # tuple of sorted tuples of region tuples, by increasing fractional part
    ta_loc: str | None = None
    ta_mark: bool = True
    untimed: tuple = ()


def region_of(v: Fraction, cmax: int) -> tuple:
    """(region code, fractional part) of a clock value; values above cmax count as fraction 0."""
    if v > cmax:
        return 2 * cmax + 1, Fraction(0)
    n = math.floor(v)
    if v == n:
        return 2 * n, Fraction(0)
    return 2 * n + 1, v - n


def encode(s: MarkedState, cmax: int) -> RegionWord:
    groups = {}
    index = {}

    def put(v, kind, loc, mark, i):
        r, frac = region_of(v, cmax)
        groups.setdefault(frac, set()).add((kind, loc, r, mark, i))

    for loc, lo, hi, mark in s.copies:
        i = index[loc] = index.get(loc, 0) + 1
        put(lo, OCATA, loc, mark, i)
        put(hi, OCATA, loc, mark, i)
    for p, v in enumerate(s.ta_vals, start=1):
        put(v, TA, 0, s.ta_mark, p)
    letters = tuple(tuple(sorted(groups[f])) for f in sorted(groups))
    return RegionWord(letters, s.ta_loc, s.ta_mark, s.untimed)


def _integral(letter, top: int) -> bool:
    return any(t[2] % 2 == 0 or t[2] == top for t in letter)


def decode(w: RegionWord, cmax: int) -> MarkedState:
    """Canonical representative: letter j gets fractional part (j + offset)/(m + 1)."""
    top = 2 * cmax + 1
    m = len(w.letters)
    offset = 0 if m and _integral(w.letters[0], top) else 1
    ends = {}  # (loc, index) -> list of (region, letter position, marker)
    ta = {}
    for j, letter in enumerate(w.letters):
        frac = Fraction(j + offset, m + 1)
        if j == 0 and offset == 0:
            frac = Fraction(0)
        for kind, loc, r, mark, i in letter:
            if r % 2 == 0 and frac != 0:
                raise ValueError("point region outside the integral letter")
            if kind == TA:
                ta[i] = Fraction(cmax + 1) if r == top else Fraction(r // 2) + frac
            else:
                ends.setdefault((loc, i), []).append((r, j, mark, frac))
    copies = []
    above = {}
    for (loc, i) in sorted(ends):
        pts = sorted(ends[(loc, i)])
        if len(pts) > 2:
            raise ValueError(f"interval {i} of location {loc} has more than two endpoints")
        vals = []
        for r, _, _, frac in pts:
            if r == top:
                above[loc] = above.get(loc, cmax) + 1
                vals.append(Fraction(above[loc]))
            else:
                vals.append(Fraction(r // 2) + frac)
        marks = {p[2] for p in pts}
        if len(marks) != 1:
            raise ValueError("endpoints of one interval disagree on the marker")
        copies.append((loc, vals[0], vals[-1], marks.pop()))
    if sorted(ta) != list(range(1, len(ta) + 1)):
        raise ValueError("TA clock indices are not contiguous")
    vals = tuple(ta[p] for p in sorted(ta))
    return MarkedState(tuple(sorted(copies)), w.ta_loc, vals, w.ta_mark, w.untimed)


def _elapse(s: MarkedState, t: Fraction) -> MarkedState:
    return MarkedState(
        tuple((l, lo + t, hi + t, mk) for l, lo, hi, mk in s.copies), s.ta_loc, tuple(v + t for v in s.ta_vals), s.ta_mark, s.untimed
    )


def _canon(letters) -> tuple:
    return tuple(tuple(sorted(set(letter))) for letter in letters if letter)


def time_successor(w: RegionWord, cmax: int) -> RegionWord | None:
    """Next region word under time elapse, or None once every value is above cmax."""
    top = 2 * cmax + 1
    if not w.letters:
        return None
    first = w.letters[0]
    if _integral(first, top):
        above = [t for t in first if t[2] == top]
        points = [t for t in first if t[2] != top]
        if points:
            # integers leave their point region; {cmax} goes straight above cmax
            moved = [(k, l, r + 1, m, i) for k, l, r, m, i in points]
            above += [t for t in moved if t[2] == top]
            letters = [above, [t for t in moved if t[2] != top]] + list(w.letters[1:])
            return w._replace(letters=_canon(letters))
        if len(w.letters) == 1:
            return None
        rest = list(w.letters[1:])
    else:
        above, rest = [], list(w.letters)
    # the largest fractional part reaches the next integer
    moved = [(k, l, r + 1, m, i) for k, l, r, m, i in rest.pop()]
    return w._replace(letters=_canon([above + moved] + rest))


def time_successors(w: RegionWord, cmax: int) -> list:
    chain = []
    cur = time_successor(w, cmax)
    while cur is not None:
        chain.append(cur)
        cur = time_successor(cur, cmax)
    return chain


# ---------------------------------------------------------------- integer keys
# A clock value is represented by key = region * width + position, where position is the rank of its
# fractional part (0 for integers); keys order values exactly like a rational representative would,
# so the product can run on plain integers with guard constants scaled by 2 * width.


def key_width(product: Product) -> int:
    nta = len(product.b.clocks) if product.b is not None else 0
    return 2 * (product.k + nta) + 8


def decode_keys(w: RegionWord, cmax: int, width: int) -> MarkedState:
    top = 2 * cmax + 1
    offset = 0 if w.letters and _integral(w.letters[0], top) else 1
    ends = {}
    ta = {}
    for j, letter in enumerate(w.letters):
        pos = j + offset
        for kind, loc, r, mark, i in letter:
            if kind == TA:
                ta[i] = r * width + (0 if r % 2 == 0 or r == top else pos)
            else:
                ends.setdefault((loc, i), []).append((r, pos, mark))
    copies = []
    above = {}
    for (loc, i) in sorted(ends):
        pts = sorted(ends[(loc, i)])
        vals = []
        for r, pos, _ in pts:
            if r == top:
                above[loc] = above.get(loc, 0) + 1
                vals.append(r * width + above[loc])
            else:
                vals.append(r * width + (0 if r % 2 == 0 else pos))
        copies.append((loc, vals[0], vals[-1], pts[0][2]))
    vals = tuple(ta[p] for p in sorted(ta))
    return MarkedState(tuple(sorted(copies)), w.ta_loc, vals, w.ta_mark, w.untimed)


def encode_keys(s: MarkedState, cmax: int, width: int) -> RegionWord:
    top = 2 * cmax + 1
    groups = {}
    index = {}

    def put(v, kind, loc, mark, i):
        r, pos = divmod(v, width)
        groups.setdefault(0 if r % 2 == 0 or r == top else pos, set()).add((kind, loc, r, mark, i))

    for loc, lo, hi, mark in s.copies:
        i = index[loc] = index.get(loc, 0) + 1
        put(lo, OCATA, loc, mark, i)
        put(hi, OCATA, loc, mark, i)
    for p, v in enumerate(s.ta_vals, start=1):
        put(v, TA, 0, s.ta_mark, p)
    letters = tuple(tuple(sorted(groups[g])) for g in sorted(groups))
    return RegionWord(letters, s.ta_loc, s.ta_mark, s.untimed)


def word_accepting(w: RegionWord) -> bool:
    return w.ta_mark and all(t[3] for letter in w.letters for t in letter) and all(m for _, m in w.untimed)


def word_clocks(w: RegionWord) -> int:
    ends = {(t[1], t[4]) for letter in w.letters for t in letter if t[0] == OCATA}
    count = {}
    for letter in w.letters:
        for t in letter:
            if t[0] == OCATA:
                count[(t[1], t[4])] = count.get((t[1], t[4]), 0) + 1
    return sum(min(count[e], 2) for e in ends)


class RegionSpace:
    """Symbolic state space over region words for a marked product."""

    def __init__(self, product: Product):
        self.cmax = product.cmax
        self.width = key_width(product)
        # same automata, constants scaled into key space
        self.product = Product(product.a, product.b, product.k, product.reduced, bool(product.dead), 2 * self.width)
        self.source = product
        self._discrete = {}  # word -> encoded discrete successors; time chains overlap heavily

    @property
    def max_clocks(self) -> int:
        return self.product.max_clocks

    def initial(self) -> RegionWord:
        return encode_keys(self.product.initial(), self.cmax, self.width)

    def discrete_successors(self, w: RegionWord) -> set:
        hit = self._discrete.get(w)
        if hit is None:
            p, cmax, width = self.product, self.cmax, self.width
            s = decode_keys(w, cmax, width)
            hit = {encode_keys(nxt, cmax, width) for letter in p.alphabet for nxt in p.discrete(s, letter)}
            self._discrete[w] = hit
        return hit

    def successors(self, w: RegionWord) -> set:
        out = set()
        for cur in [w] + time_successors(w, self.cmax):
            out |= self.discrete_successors(cur)
        return out

    def rank(self, w: RegionWord) -> int:
        return word_clocks(w)

    def is_accepting(self, w: RegionWord) -> bool:
        return word_accepting(w)


def post(words, product: Product) -> set:
    space = RegionSpace(product)
    out = set()
    for w in words:
        out |= space.successors(w)
    return out


# ---------------------------------------------------------------- debug text


def region_text(r: int, cmax: int) -> str:
    if r == 2 * cmax + 1:
        return f"({cmax},+∞)"
    if r % 2 == 0:
        return f"{{{r // 2}}}"
    return f"({r // 2},{r // 2 + 1})"


def dump(w: RegionWord, cmax: int, names=None, ta_name: str = "ℓ^B") -> str:
    """Set-of-tuples text: OCATA tuples first by (location, index), then TA tuples.

    The TA location and the untimed locations are appended only when no tuple already carries them."""
    names = names or (lambda loc: f"ℓ{loc}")
    mark = lambda b: "⊤" if b else "⊥"
    parts = []
    for letter in w.letters:
        items = sorted(letter, key=lambda t: (t[0], t[1], t[4], t[2]))
        body = ",".join(
            f"({names(t[1]) if t[0] == OCATA else ta_name},{region_text(t[2], cmax)},{mark(t[3])},{t[4]})" for t in items
        )
        parts.append("{" + body + "}")
    text = "".join(parts)
    extra = []
    has_ta_tuple = any(t[0] == TA for letter in w.letters for t in letter)
    if w.ta_loc is not None and not has_ta_tuple:
        extra.append(f"{ta_name}={w.ta_loc},{mark(w.ta_mark)}")
    if w.untimed:
        extra.append("untimed=" + ",".join(f"{names(l)}{mark(m)}" for l, m in w.untimed))
    return text + (" [" + "; ".join(extra) + "]" if extra else "")


def state_of(copies, ta_vals=(), ta_mark=True, ta_loc="b") -> MarkedState:
    """Helper for building product states from plain numbers."""
    cs = tuple(sorted((l, Fraction(lo), Fraction(hi), m) for l, lo, hi, m in copies))
    return MarkedState(cs, ta_loc, tuple(Fraction(v) for v in ta_vals), ta_mark)


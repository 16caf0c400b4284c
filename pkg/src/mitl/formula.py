"""MITL formulas: AST, parser, printer, negation normal form and clock-copy bounds."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

INF = math.inf


@dataclass(frozen=True, order=True)
class Interval:
    """Interval with natural endpoints; `hi` may be INF (then open on the right)."""

    lo: int
    hi: float | int
    lo_closed: bool = True
    hi_closed: bool = False

    def __post_init__(self):
        if self.lo < 0:
            raise ValueError("interval bounds must be nonnegative")
        if self.hi < self.lo:
            raise ValueError(f"empty interval: lower bound {self.lo} exceeds upper bound {self.hi}")
        if self.hi == self.lo:
            raise ValueError("singular interval: MITL requires lo < hi")
        if self.hi == INF and self.hi_closed:
            raise ValueError("an infinite upper bound cannot be closed")

    @property
    def bounded(self) -> bool:
        return self.hi != INF

    @property
    def length(self):
        return self.hi - self.lo

    def contains(self, v) -> bool:
        above = v >= self.lo if self.lo_closed else v > self.lo
        below = v <= self.hi if self.hi_closed else v < self.hi
        return above and below

    def is_zero_to_inf(self) -> bool:
        return self.lo == 0 and self.lo_closed and self.hi == INF

    def __str__(self):
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        hi = "inf" if self.hi == INF else str(self.hi)
        return f"{left}{self.lo},{hi}{right}"


UNBOUNDED = Interval(0, INF, True, False)


class Formula:
    """Base class of the AST. Subclasses are frozen dataclasses."""

    def __str__(self):
        return to_text(self)

    def __invert__(self):
        return Not(self)

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True)
class Letter(Formula):
    name: str


@dataclass(frozen=True)
class NotLetter(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula
    interval: Interval = UNBOUNDED


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula
    interval: Interval = UNBOUNDED


TRUE = Top()
FALSE = Bottom()


def eventually(f: Formula, interval: Interval = UNBOUNDED) -> Until:
    return Until(TRUE, f, interval)


def always(f: Formula, interval: Interval = UNBOUNDED) -> Release:
    return Release(FALSE, f, interval)


def implies(a: Formula, b: Formula) -> Or:
    return Or(Not(a), b)


def conj(fs) -> Formula:
    fs = list(fs)
    if not fs:
        return TRUE
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def disj(fs) -> Formula:
    fs = list(fs)
    if not fs:
        return FALSE
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


def is_modal(f: Formula) -> bool:
    return isinstance(f, (Until, Release))


# ---------------------------------------------------------------- parsing


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


_TOKEN = re.compile(
    r"\s*(?:(?P<arrow>->)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<num>\d+)|(?P<sym>[!&|()\[\],]))"
)
_KEYWORDS = {"F", "G", "U", "R", "true", "false", "inf"}


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[start]!r}", start)
        kind = m.lastgroup
        value = m.group(kind)
        tokens.append((kind, value, m.start(kind)))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    # precedence: ! > modal (F, G, U, R) > & > | > ->

    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            raise ParseError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2])
        return tok

    def parse(self) -> Formula:
        f = self.implication()
        tok = self.peek()
        if tok[0] != "eof":
            raise ParseError(f"unexpected token {tok[1]!r}", tok[2])
        return f

    def implication(self):
        left = self.disjunction()
        if self.peek()[0] == "arrow":
            self.take()
            return implies(left, self.implication())
        return left

    def disjunction(self):
        f = self.conjunction()
        while self.peek()[1] == "|":
            self.take()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self):
        f = self.binary_modal()
        while self.peek()[1] == "&":
            self.take()
            f = And(f, self.binary_modal())
        return f

    def binary_modal(self):
        left = self.unary()
        tok = self.peek()
        if tok[1] in ("U", "R"):
            self.take()
            interval = self.maybe_interval()
            right = self.binary_modal()  # right-associative
            cls = Until if tok[1] == "U" else Release
            return cls(left, right, interval)
        return left

    def unary(self):
        kind, value, pos = self.peek()
        if value == "!":
            self.take()
            return Not(self.unary())
        if value in ("F", "G"):
            self.take()
            interval = self.maybe_interval()
            body = self.unary()
            return eventually(body, interval) if value == "F" else always(body, interval)
        return self.atom()

    def atom(self):
        kind, value, pos = self.take()
        if value == "(":
            f = self.implication()
            self.expect(")")
            return f
        if value == "true":
            return TRUE
        if value == "false":
            return FALSE
        if kind == "ident" and value not in _KEYWORDS:
            return Letter(value)
        raise ParseError(f"unexpected token {value or 'end of input'!r}", pos)

    def maybe_interval(self):
        kind, value, pos = self.peek()
        if value not in ("[", "("):
            return UNBOUNDED
        if value == "(" and not (self.tokens[self.i + 1][0] == "num" and self.tokens[self.i + 2][1] == ","):
            return UNBOUNDED  # a parenthesised operand, not an interval
        self.take()
        lo_closed = value == "["
        tok = self.take()
        if tok[0] != "num":
            raise ParseError("expected interval lower bound", tok[2])
        lo = int(tok[1])
        self.expect(",")
        tok = self.take()
        if tok[0] == "num":
            hi = int(tok[1])
        elif tok[1] == "inf":
            hi = INF
        else:
            raise ParseError("expected interval upper bound", tok[2])
        close = self.take()
        if close[1] not in ("]", ")"):
            raise ParseError("expected ']' or ')'", close[2])
        hi_closed = close[1] == "]"
        if hi == INF and hi_closed:
            raise ParseError("infinite upper bound must be open", close[2])
        if lo > hi:
            raise ParseError(f"lower bound {lo} exceeds upper bound {hi}", pos)
        if lo == hi:
            raise ParseError("singular interval", pos)
        return Interval(lo, hi, lo_closed, hi_closed)


def parse(text: str) -> Formula:
    return _Parser(text).parse()


# ---------------------------------------------------------------- printing


def to_text(f: Formula) -> str:
    """Fully parenthesised text that `parse` maps back to `f`."""
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Letter):
        return f.name
    if isinstance(f, NotLetter):
        return "!" + f.name
    if isinstance(f, Not):
        return f"!({to_text(f.child)})"
    if isinstance(f, And):
        return f"({to_text(f.left)} & {to_text(f.right)})"
    if isinstance(f, Or):
        return f"({to_text(f.left)} | {to_text(f.right)})"
    if isinstance(f, Until):
        return f"({to_text(f.left)} U{f.interval} {to_text(f.right)})"
    if isinstance(f, Release):
        return f"({to_text(f.left)} R{f.interval} {to_text(f.right)})"
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------- normal form


def to_nnf(f: Formula) -> Formula:
    if isinstance(f, Not):
        return _negate(f.child)
    if isinstance(f, And):
        return And(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Or):
        return Or(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Until):
        return Until(to_nnf(f.left), to_nnf(f.right), f.interval)
    if isinstance(f, Release):
        return Release(to_nnf(f.left), to_nnf(f.right), f.interval)
    return f


def _negate(f: Formula) -> Formula:
    if isinstance(f, Top):
        return FALSE
    if isinstance(f, Bottom):
        return TRUE
    if isinstance(f, Letter):
        return NotLetter(f.name)
    if isinstance(f, NotLetter):
        return Letter(f.name)
    if isinstance(f, Not):
        return to_nnf(f.child)
    if isinstance(f, And):
        return Or(_negate(f.left), _negate(f.right))
    if isinstance(f, Or):
        return And(_negate(f.left), _negate(f.right))
    if isinstance(f, Until):
        return Release(_negate(f.left), _negate(f.right), f.interval)
    if isinstance(f, Release):
        return Until(_negate(f.left), _negate(f.right), f.interval)
    raise TypeError(f"not a formula: {f!r}")


def is_nnf(f: Formula) -> bool:
    if isinstance(f, Not):
        return False
    if isinstance(f, (And, Or, Until, Release)):
        return is_nnf(f.left) and is_nnf(f.right)
    return True


def subformulas(f: Formula) -> set:
    out = {f}
    if isinstance(f, Not):
        out |= subformulas(f.child)
    elif isinstance(f, NotLetter):
        out.add(Letter(f.name))
    elif isinstance(f, (And, Or, Until, Release)):
        out |= subformulas(f.left)
        out |= subformulas(f.right)
    return out


def size(f: Formula) -> int:
    """Number of U / R modalities, counting every occurrence."""
    if isinstance(f, Not):
        return size(f.child)
    if isinstance(f, (And, Or)):
        return size(f.left) + size(f.right)
    if isinstance(f, (Until, Release)):
        return 1 + size(f.left) + size(f.right)
    return 0


def letters(f: Formula) -> set:
    if isinstance(f, (Letter, NotLetter)):
        return {f.name}
    if isinstance(f, Not):
        return letters(f.child)
    if isinstance(f, (And, Or, Until, Release)):
        return letters(f.left) | letters(f.right)
    return set()


def intervals(f: Formula) -> list:
    if isinstance(f, Not):
        return intervals(f.child)
    if isinstance(f, (And, Or)):
        return intervals(f.left) + intervals(f.right)
    if isinstance(f, (Until, Release)):
        return [f.interval] + intervals(f.left) + intervals(f.right)
    return []


def max_constant(f: Formula) -> int:
    return max((c for i in intervals(f) for c in (i.lo, i.hi) if c != INF), default=0)


# ---------------------------------------------------------------- clock-copy bounds


@dataclass(frozen=True)
class MBounds:
    m: int
    m1: int
    minf: int


def ceil_ratio(num, den) -> int:
    """Ceiling of num/den with num/inf = 0 for finite num and inf/inf = 1."""
    if den == INF:
        return 1 if num == INF else 0
    return math.ceil(Fraction(num) / Fraction(den))


def until_weight(interval: Interval) -> int:
    return 4 * ceil_ratio(interval.lo, interval.length) + 2


def release_weight(interval: Interval) -> int:
    return 2 * ceil_ratio(interval.hi, interval.length) + 2


def m_bounds(f: Formula) -> MBounds:
    if isinstance(f, (Top, Bottom, Letter, NotLetter)):
        return MBounds(2, 0, 0)
    if isinstance(f, Not):
        raise ValueError("m_bounds expects a formula in negative normal form")
    a = m_bounds(f.left)
    b = m_bounds(f.right)
    if isinstance(f, And):
        return MBounds(max(2, a.m1 + b.m1), a.m1 + b.m1, a.minf + b.minf)
    if isinstance(f, Or):
        return MBounds(max(2, a.m1, b.m1), max(a.m1, b.m1), max(a.minf, b.minf))
    if isinstance(f, Until):
        m1 = a.minf + b.m1 + 1
        return MBounds(max(2, m1), m1, until_weight(f.interval) + a.minf + b.minf)
    if isinstance(f, Release):
        m1 = a.m1 + b.minf + 1
        return MBounds(max(2, m1), m1, release_weight(f.interval) + a.minf + b.minf)
    raise TypeError(f"not a formula: {f!r}")


def footnote_bound(f: Formula) -> int:
    """Coarse bound size(f) * max weight over the intervals of f."""
    weights = [max(until_weight(i), release_weight(i)) for i in intervals(f)]
    return size(f) * max(weights, default=0)


# ---------------------------------------------------------------- random corpus


def random_interval(rng, cmax: int = 4) -> Interval:
    lo = rng.randint(0, cmax - 1)
    if rng.random() < 0.25:
        return Interval(lo, INF, rng.random() < 0.5, False)
    hi = rng.randint(lo + 1, cmax)
    return Interval(lo, hi, rng.random() < 0.5, rng.random() < 0.5)


def random_formula(rng, props=("a", "b"), modalities: int = 3, cmax: int = 4) -> Formula:
    """Random formula with at most `modalities` temporal operators and constants at most `cmax`."""

    def build(budget: int) -> Formula:
        # budget is the number of modal operators still to place
        if budget == 0:
            leaf = Letter(rng.choice(props))
            return Not(leaf) if rng.random() < 0.3 else leaf
        kind = rng.choice(("U", "R", "F", "G", "and", "or", "not"))
        if kind in ("and", "or"):
            left = rng.randint(0, budget)
            node = And if kind == "and" else Or
            return node(build(left), build(budget - left))
        if kind == "not":
            return Not(build(budget))
        interval = random_interval(rng, cmax)
        if kind == "F":
            return eventually(build(budget - 1), interval)
        if kind == "G":
            return always(build(budget - 1), interval)
        left = rng.randint(0, budget - 1)
        node = Until if kind == "U" else Release
        return node(build(left), build(budget - 1 - left), interval)

    return build(rng.randint(1, modalities))

import pytest
from hypothesis import given

from conftest import formulas
from mitl.formula import intervals, is_modal, parse, subformulas, to_nnf
from mitl.ocata import (
    Arc,
    ClockConstraint,
    NotTreeLike,
    Ocata,
    TClock,
    TLoc,
    TReset,
    Verdict,
    arc_set,
    compile_formula,
    dnf,
    dualize,
    t_and,
    t_or,
    TFALSE,
    tocata_partition,
)

AB = ("a", "b")
GE1, LE2 = ClockConstraint(">=", 1), ClockConstraint("<=", 2)


@pytest.fixture
def response():
    """Automaton of G (a -> F[1,2] b): locations init, the eventuality and the invariant."""
    f = to_nnf(parse("G (a -> F[1,2] b)"))
    a = compile_formula(f, AB)
    ev = a.location_of(f.right.right)
    box = a.location_of(f)
    return a, box, ev


def arcs(a, loc, letter):
    return {(arc.guard, arc.targets_keep, arc.targets_reset, arc.verdict) for arc in a.arcs(loc, letter)}


def test_response_arcs(response):
    a, box, ev = response
    keep, reset, normal = frozenset, frozenset, Verdict.NORMAL
    assert a.accepting == {box}
    assert arcs(a, box, "a") == {((), keep({box}), reset({ev}), normal)}
    assert arcs(a, box, "b") == {((), keep({box}), reset(), normal)}
    assert arcs(a, ev, "a") == {((), keep({ev}), reset(), normal)}
    assert arcs(a, ev, "b") == {((), keep({ev}), reset(), normal), ((GE1, LE2), keep(), reset(), Verdict.ACCEPT)}
    assert arcs(a, a.initial, "a") == {((), keep(), reset({box, ev}), normal)}
    assert arcs(a, a.initial, "b") == {((), keep(), reset({box}), normal)}
    assert a.cmax == 2


def test_letter_automaton():
    a = compile_formula(parse("a"), AB)
    assert len(a.names) == 1
    assert [arc.verdict for arc in a.arcs(a.initial, "a")] == [Verdict.ACCEPT]
    assert [arc.verdict for arc in a.arcs(a.initial, "b")] == [Verdict.REJECT]


def test_eventually_automaton():
    a = compile_formula(parse("F[1,2] b"), AB)
    assert len(a.names) == 2
    ev = 1 - a.initial
    assert arcs(a, ev, "b") == {((), frozenset({ev}), frozenset(), Verdict.NORMAL), ((GE1, LE2), frozenset(), frozenset(), Verdict.ACCEPT)}
    assert arcs(a, ev, "a") == {((), frozenset({ev}), frozenset(), Verdict.NORMAL)}


def test_dnf_examples():
    one, two = TLoc(1), TLoc(2)
    assert len(dnf(t_or(one, two))) == 2
    g = TClock(GE1)
    out = dnf(t_and(t_or(one, g), TReset(two)))
    assert {(a.guard, a.targets_keep, a.targets_reset) for a in out} == {
        ((), frozenset({1}), frozenset({2})),
        ((GE1,), frozenset(), frozenset({2})),
    }
    rejected = dnf(TFALSE)
    assert len(rejected) == 1 and rejected[0].verdict is Verdict.REJECT


def test_dualize_involution(response):
    a = response[0]
    assert arc_set(dualize(dualize(a))) == arc_set(a)


def test_dual_of_guarded_eventuality(response):
    a, _, ev = response
    d = dualize(a)
    lt1, gt2 = ClockConstraint("<", 1), ClockConstraint(">", 2)
    assert arcs(d, ev, "b") == {((lt1,), frozenset({ev}), frozenset(), Verdict.NORMAL), ((gt2,), frozenset({ev}), frozenset(), Verdict.NORMAL)}


def test_dual_of_accept_is_reject():
    d = dualize(compile_formula(parse("a"), AB))
    assert [arc.verdict for arc in d.arcs(d.initial, "a")] == [Verdict.REJECT]


def test_partition_of_response(response):
    a, box, ev = response
    part = tocata_partition(a)
    assert all(len(b) == 1 for b in part.blocks)
    assert part.leq(part.block_of(ev), part.block_of(box))
    assert not part.leq(part.block_of(box), part.block_of(ev))


def _two_loops(accepting):
    delta = {
        (0, "a"): [Arc(0, "a", targets_keep=frozenset({1}))],
        (1, "a"): [Arc(1, "a", targets_keep=frozenset({0}))],
    }
    return Ocata(("a",), ("p", "q"), 0, frozenset(accepting), delta)


def test_partition_rejects_mixed_cycle():
    with pytest.raises(NotTreeLike):
        tocata_partition(_two_loops({0}))
    assert len(tocata_partition(_two_loops({0, 1})).blocks) == 1


def test_partition_single_location():
    a = compile_formula(parse("a"), AB)
    assert len(tocata_partition(a).blocks) == 1


@given(formulas())
def test_compiled_automata_are_tree_like(f):
    nnf = to_nnf(f)
    a = compile_formula(nnf, AB)
    tocata_partition(a)
    assert len(a.names) == 1 + sum(1 for g in subformulas(nnf) if is_modal(g))
    finite = [e for i in intervals(nnf) for e in (i.lo, i.hi) if e != float("inf")]
    constants = [c.bound for out in a.delta.values() for arc in out for c in arc.guard]
    assert all(isinstance(c, ClockConstraint) for out in a.delta.values() for arc in out for c in arc.guard)
    # simplification can drop every guard on a constant, so the endpoints only bound cmax
    assert a.cmax == max(constants, default=0) <= max(finite, default=0)


def test_cmax_ignores_constants_of_undischargeable_obligations():
    # (!b & (b U b)) has no satisfying letter, so the (1,4] guard never survives
    a = compile_formula(to_nnf(parse("G(0,1) (!a | F(1,4] (!b & (b U(3,inf) b)))")), AB)
    assert a.cmax == 3


@given(formulas())
def test_dualize_is_an_involution(f):
    a = compile_formula(to_nnf(f), AB)
    assert arc_set(dualize(dualize(a))) == arc_set(a)

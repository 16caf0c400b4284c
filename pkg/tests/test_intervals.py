import random
from fractions import Fraction as Q

import pytest
from hypothesis import given, strategies as st

from conftest import formulas
from mitl.formula import parse, to_nnf
from mitl.intervals import (
    IState,
    ReducedConfiguration,
    approx_fk,
    config,
    elapse,
    fstar_k,
    location_count,
    merge,
    minimal_models,
    nbclocks,
    reduce,
    state,
    sub_ltl,
    succ,
    succ_configs,
)
from mitl.ocata import compile_formula
from mitl.solver import gen_formula

AB = ("a", "b")


@pytest.fixture
def response():
    f = to_nnf(parse("G (a -> F[1,2] b)"))
    a = compile_formula(f, AB)
    return a, a.location_of(f), a.location_of(f.right.right)


def test_nbclocks():
    assert nbclocks([state(0, 0)]) == 1
    assert nbclocks([state(0, 0, Q(1, 2)), state(0, 2)]) == 3
    assert nbclocks([state(1, Q(19, 10)), state(2, 0), state(2, Q(17, 10), Q(18, 10))]) == 4


def test_elapse():
    assert elapse([state(0, 0)], Q(17, 10)) == (state(0, Q(17, 10)),)
    c = config([state(0, 1), state(1, 0, 2)])
    assert elapse(c, 0) == c
    before = (state(1, Q(2, 10)), state(2, 0, Q(1, 10)))
    assert elapse(before, Q(17, 10)) == (state(1, Q(19, 10)), state(2, Q(17, 10), Q(18, 10)))


def test_minimal_models(response):
    a, box, ev = response
    assert minimal_models(a, state(ev, Q(3, 2), 2), "b") == [frozenset()]
    v = Q(3, 10)
    assert minimal_models(a, state(box, v), "a") == [frozenset({state(box, v), state(ev, 0)})]
    half = state(ev, Q(1, 2), Q(3, 2))
    assert minimal_models(a, half, "b") == [frozenset({half})]


def test_succ_first_step(response):
    a, box, ev = response
    c = elapse([state(box, 0)], Q(1, 10))
    assert succ_configs(a, c, "a") == {config([state(box, Q(1, 10)), state(ev, 0)])}


def test_succ_single_state_is_its_models(response):
    a, box, _ = response
    s = state(box, Q(1, 2))
    assert succ_configs(a, [s], "a") == {config(m) for m in minimal_models(a, s, "a")}


def test_succ_blocked():
    a = compile_formula(parse("a"), AB)
    assert succ(a, [state(a.initial, 0)], "b") == []


def test_merge():
    l = 0
    assert merge([state(l, 0), state(l, Q(3, 10), Q(1, 2)), state(l, 2)]) == [state(l, 0, Q(1, 2)), state(l, 2)]
    assert merge([state(l, Q(1, 10))]) == [state(l, Q(1, 10))]
    assert merge([state(l, 0)]) == [state(l, 0)]


def test_approx_identity_member():
    c = config([state(0, 0), state(0, Q(1, 3)), state(1, 1, 2)])
    assert c in approx_fk(c, nbclocks(c))


def test_approx_groups_fresh_copy(response):
    a, box, ev = response
    c = config([state(box, Q(2, 10)), state(ev, 0), state(ev, Q(1, 10))])
    assert config([state(box, Q(2, 10)), state(ev, 0, Q(1, 10))]) in approx_fk(c, 4)


def test_approx_fallback_hull():
    c = config([state(0, Q(1, 10)), state(0, Q(1, 2)), state(0, 1)])
    assert nbclocks(c) == 3
    many = config([state(0, Q(1, 10), Q(2, 10)), state(0, Q(1, 2), Q(6, 10)), state(0, 1, 2)])
    assert nbclocks(many) == 6
    assert approx_fk(many, 2) == [(state(0, Q(1, 10), 2),)]


def test_fstar_k():
    assert fstar_k(parse("G (a -> F[1,2] b)")) == 7
    assert fstar_k(parse("a")) == 2
    f = parse("G F G a")
    assert fstar_k(f) == 2 * location_count(f)


def test_sub_ltl(response):
    a, box, ev = response
    assert sub_ltl(parse("G (a -> F[1,2] b)"), a) == {a.initial, box}
    single = parse("F[1,2] b")
    assert sub_ltl(single) == {compile_formula(single).initial}
    nested = parse("G G a")
    assert sub_ltl(nested) == frozenset(compile_formula(to_nnf(nested)).locations)


def test_reduce(response):
    a, box, ev = response
    c = config([state(box, Q(1, 10)), state(ev, 0)])
    assert reduce(c, {box}) == ReducedConfiguration(frozenset({box}), (state(ev, 0),))
    assert reduce((), {box}) == ReducedConfiguration(frozenset(), ())
    assert reduce(c, set()) == ReducedConfiguration(frozenset(), c)


# ---------------------------------------------------------------- properties

rationals = st.fractions(min_value=0, max_value=5, max_denominator=4)


@st.composite
def configurations(draw, locations: int = 3):
    out = []
    for loc in range(locations):
        points = sorted(set(draw(st.lists(rationals, max_size=6))))
        i = 0
        while i < len(points):
            if i + 1 < len(points) and draw(st.booleans()):
                out.append(IState(loc, points[i], points[i + 1]))
                i += 2
            else:
                out.append(IState(loc, points[i], points[i]))
                i += 1
    return config(out)


@given(configurations(), st.integers(min_value=6, max_value=12))
def test_approx_outputs_are_bounded_coarsenings(c, k):
    ends = {(s.loc, e) for s in c for e in (s.lo, s.hi)}
    for out in approx_fk(c, k):
        assert nbclocks(out) <= k
        for s in out:
            assert (s.loc, s.lo) in ends and (s.loc, s.hi) in ends
        # every source state lies in one output interval of its location
        for s in c:
            assert any(t.loc == s.loc and t.lo <= s.lo and s.hi <= t.hi for t in out)


def _disjoint_sorted(c) -> bool:
    c = list(c)
    if c != sorted(c):
        return False
    return all(not (x.loc == y.loc and y.lo <= x.hi) for x, y in zip(c, c[1:]))


def _timed_words(rng, length):
    return [(rng.choice(AB), Q(rng.randint(0, 6), 4)) for _ in range(length)]


def _step(a, cfgs, letter, delay, k=None):
    out = set()
    for c in cfgs:
        for nxt in succ_configs(a, elapse(c, delay), letter):
            out |= set(approx_fk(nxt, k)) if k is not None else {nxt}
    return out


def _covers(coarse, fine) -> bool:
    return all(any(t.loc == s.loc and t.lo <= s.lo and s.hi <= t.hi for t in coarse) for s in fine) and all(
        any(t.loc == s.loc and t.lo <= s.lo and s.hi <= t.hi for s in fine) for t in coarse
    )


@given(formulas(modalities=2), st.integers(min_value=0, max_value=2**31))
def test_approximation_soundness_on_prefixes(f, seed):
    nnf = to_nnf(f)
    a = compile_formula(nnf, AB)
    k = 2 * len(a.names)  # the smallest admissible budget forces the most grouping
    rng = random.Random(seed)
    exact = approx = {(state(a.initial, 0),)}
    for letter, delay in _timed_words(rng, rng.randint(1, 5)):
        exact = _step(a, exact, letter, delay)
        approx = _step(a, approx, letter, delay, k)
        for c in exact | approx:
            assert _disjoint_sorted(c)
        for c in approx:
            assert any(_covers(c, e) for e in exact)


@pytest.mark.parametrize("family,k,interval", [("E", 2, "[0,2)"), ("Q", 2, "[1,3)"), ("R", 1, "[1,2)"), ("U", 3, "[0,2)")])
def test_bound_on_benchmark_prefixes(family, k, interval):
    f = parse(gen_formula(family, k, interval))
    nnf = to_nnf(f)
    sigma = sorted({f"p{i}" for i in range(1, k + 2)})
    a = compile_formula(nnf, sigma)
    bound = fstar_k(nnf)
    frontier = {(state(a.initial, 0),)}
    for _ in range(4):
        nxt = set()
        for c in frontier:
            for delay in (Q(0), Q(1, 2), Q(3, 2)):
                for letter in sigma:
                    for s in succ_configs(a, elapse(c, delay), letter):
                        nxt |= set(approx_fk(s, bound))
        assert all(nbclocks(c) <= bound for c in nxt)
        frontier = set(random.Random(0).sample(sorted(nxt), min(len(nxt), 60)))

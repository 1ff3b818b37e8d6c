import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import forced_literals, random_assumptions, random_xors, variables_of
from xorcraft.core import XorClause
from xorcraft.engines import (
    BOTTOM,
    ENGINES,
    ParityUnionFind,
    UsageError,
    XorModule,
    ec_saturate,
    gauss_closure,
    subst_saturate,
    up_saturate,
)

X = XorClause.of


@st.composite
def problems(draw, widths=(1, 4)):
    rng = random.Random(draw(st.integers(0, 10**9)))
    n = draw(st.integers(1, 10))
    xors = random_xors(rng, n, draw(st.integers(0, 10)), widths)
    assumptions = random_assumptions(rng, variables_of(xors) or [1], draw(st.integers(1, 5)))
    return xors, assumptions


def test_unit_rules():
    c = up_saturate([X((1, 2, 3)), X((3, 4), 0)], [1, -2])
    assert c.literals() == {1, -2, -3, -4}
    assert c.reasons[3].rule == "unit"


def test_input_units_and_conflicts():
    assert up_saturate([X((5,), 0)]).literals() == {-5}
    c = up_saturate([X((1, 2))], [1, 2])
    assert c.conflict and c.conflict_deps == {1, 2}
    assert gauss_closure([X((), 1)]).conflict


def test_subst_uses_equivalences():
    xors = [X((1, 2), 0), X((1, 2, 3))]
    assert 3 not in up_saturate(xors).literals()
    assert 3 in subst_saturate(xors).literals()
    assert 3 in ec_saturate(xors).literals()


def test_ec_rejects_wide_clauses():
    with pytest.raises(UsageError):
        ec_saturate([X((1, 2, 3, 4))])


@given(problems())
def test_engines_are_sound_and_ordered(problem):
    xors, assumptions = problem
    truth = gauss_closure(xors, assumptions)
    results = [up_saturate(xors, assumptions), subst_saturate(xors, assumptions)]
    if all(len(c) <= 3 for c in xors):
        results.append(ec_saturate(xors, assumptions))
    for r in results:
        if r.conflict:
            assert truth.conflict
        elif not truth.conflict:
            assert r.literals() <= truth.literals()
    up, subst = results[0], results[1]
    if not subst.conflict:
        assert up.conflict or up.literals() <= subst.literals()


@given(problems())
def test_gauss_matches_brute_force(problem):
    xors, assumptions = problem
    truth = forced_literals(xors, assumptions)
    got = gauss_closure(xors, assumptions)
    assert got.conflict == (truth is None)
    if truth is not None:
        assert got.literals() == truth


@given(problems(widths=(1, 3)))
def test_dependencies_are_sufficient(problem):
    xors, assumptions = problem
    for name, engine in ENGINES.items():
        c = engine(xors, assumptions)
        assert set(c.conflict_deps) <= set(assumptions)
        if c.conflict:
            assert forced_literals(xors, sorted(c.conflict_deps)) is None
            continue
        for v, bit in c.implied.items():
            lit = v if bit else -v
            assert set(c.deps[v]) <= set(assumptions)
            forced = forced_literals(xors, sorted(c.deps[v]))
            assert forced is None or lit in forced, (name, lit)


def test_parity_union_find():
    uf = ParityUnionFind()
    assert uf.union(1, 2, 1, frozenset({7}))[0]
    assert uf.union(2, 3, 0, frozenset())[0]
    r1, p1, _ = uf.find(1)
    r3, p3, d = uf.find(3)
    assert r1 == r3 and p1 ^ p3 == 1 and 7 in d
    changed, bad = uf.set_value(3, 1, frozenset({8}))
    assert changed and bad is None
    assert uf.value_of(1)[0] == 0
    _, bad = uf.union(1, 3, 0, frozenset({9}))
    assert bad is not None and {7, 8, 9} >= bad


class TestXorModule:
    xors = [X((1, 2, 3)), X((3, 4), 0), X((1, 5))]

    def test_deduce_and_explain(self):
        m = XorModule(self.xors, "up")
        m.assign(1)
        assert set(m.deduce()) == {-5}
        m.new_level()
        m.assign(2)
        assert set(m.deduce()) == {3, 4}
        assert m.explain(4) == (-1, -2, 4)
        assert m.deduce() == []

    def test_conflict_and_backjump(self):
        m = XorModule(self.xors, "gauss")
        m.new_level()
        m.assign(1)
        m.new_level()
        m.assign(5)
        assert m.deduce() == [BOTTOM]
        assert m.explain(BOTTOM) == (-1, -5)
        m.backjump(1)
        assert m.trail == [1] and m.level == 1
        assert m.deduce() == [-5]
        m.backjump(0)
        assert m.trail == []

    def test_usage_errors(self):
        m = XorModule(self.xors)
        m.assign(1)
        with pytest.raises(UsageError):
            m.assign(-1)
        with pytest.raises(UsageError):
            m.assign(0)
        with pytest.raises(UsageError):
            m.explain(4)
        with pytest.raises(UsageError):
            m.backjump(3)
        with pytest.raises(UsageError):
            XorModule(self.xors, "dpll")

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import (
    oracle_cycle_partition,
    random_3xnf,
    random_assumptions,
    random_cycle_partitionable,
    random_tree_like,
    variables_of,
)
from xorcraft.classify import (
    DeducibilityReport,
    classify_instance,
    compare_with_oracle,
    find_cycle_partition,
    random_deducibility_test,
    trial_assumptions,
)
from xorcraft.core import CnfXorFormula, XorClause
from xorcraft.engines import UsageError, gauss_closure, subst_saturate, up_saturate

X = XorClause.of
seeds = st.integers(0, 10**9)


@given(seeds, st.integers(4, 12))
def test_partition_matches_cycle_enumeration(seed, n):
    rng = random.Random(seed)
    xors = random_3xnf(rng, n, rng.randint(1, n))
    ours = find_cycle_partition(xors)
    oracle = oracle_cycle_partition(xors)
    assert (ours is None) == (oracle is None)
    if ours is not None:
        assert ours.inner == oracle[0]
        assert oracle[1] <= ours.outer
        assert ours.inner | ours.outer == set(variables_of(xors))


def test_partition_rejects_wide_and_ignores_short_clauses():
    with pytest.raises(UsageError):
        find_cycle_partition([X((1, 2, 3, 4))])
    part = find_cycle_partition([X((1, 2)), X((1, 3, 4)), X((3, 5, 6)), X((1, 5, 7))])
    assert part.inner == {1, 3, 5} and part.outer == {2, 4, 6, 7}


def test_non_partitionable_instance():
    # every variable of the four clauses sits on several cycles in both roles
    xors = [X((1, 2, 3)), X((1, 4, 5)), X((3, 4, 6)), X((2, 5, 6))]
    assert find_cycle_partition(xors) is None


def _agrees(engine, xors, assumptions):
    got, truth = engine(xors, assumptions), gauss_closure(xors, assumptions)
    if got.conflict or truth.conflict:
        return got.conflict == truth.conflict
    return got.literals() == truth.literals()


@given(seeds)
def test_tree_like_is_up_deducible(seed):
    rng = random.Random(seed)
    xors = random_tree_like(rng, 20)
    for _ in range(5):
        assert _agrees(up_saturate, xors, random_assumptions(rng, variables_of(xors), 6))


@given(seeds)
def test_cycle_partitionable_is_subst_deducible(seed):
    rng = random.Random(seed)
    xors = random_cycle_partitionable(rng, 16)
    for _ in range(5):
        assert _agrees(subst_saturate, xors, random_assumptions(rng, variables_of(xors), 4))


def test_the_classes_are_strict():
    # UP misses equivalence reasoning on a cycle; Subst misses parity reasoning elsewhere
    cycle = [X((1, 2, 3), 0), X((3, 4, 5)), X((2, 4, 10))]
    assert not _agrees(up_saturate, cycle, [1, -10])
    assert _agrees(subst_saturate, cycle, [1, -10])
    dense = [X((1, 4, 6), 0), X((1, 5, 7), 0), X((2, 3, 4)), X((2, 5, 6), 0)]
    assert find_cycle_partition(dense) is None
    assert not _agrees(subst_saturate, dense, [3])


def test_trial_assumptions_are_deterministic():
    variables = list(range(1, 30))
    a = [trial_assumptions(variables, 7, t) for t in range(10)]
    b = [trial_assumptions(variables, 7, t) for t in range(10)]
    assert a == b
    assert a != [trial_assumptions(variables, 8, t) for t in range(10)]
    assert all(1 <= len(x) <= len(variables) for x in a)
    assert trial_assumptions([], 0, 0) == []


def test_deducibility_report():
    xors = [X((1, 2, 3), 0), X((3, 4, 5)), X((2, 4, 10))]
    up = random_deducibility_test(xors, "up", 300, 1)
    assert up.verdict == "not-deducible"
    failure = up.failures[0]
    assert set(failure) == {"assumptions", "missedConflict", "missed", "trial"}
    assert compare_with_oracle(xors, "up", failure["assumptions"]) is not None
    subst = random_deducibility_test(CnfXorFormula.from_xors(xors), "subst", 300, 1)
    assert subst.verdict == "probably-deducible"
    assert subst.to_json()["assumptionSizes"] == "uniform 1..|vars|"
    assert random_deducibility_test(xors, "up", 50, 3).failures == random_deducibility_test(xors, "up", 50, 3).failures
    with pytest.raises(UsageError):
        random_deducibility_test(xors, "gauss", 5)
    with pytest.raises(UsageError):
        random_deducibility_test(xors, "up", 0)
    assert DeducibilityReport("up", 1, 0).verdict == "probably-deducible"


def test_classify_instance():
    a, b, c, d, e, f, g, h, i, j, k, m = range(1, 13)
    xors = [X((a, b, c), 0), X((c, d, e)), X((b, d, j)), X((e, f, g)), X((g, h, i), 0), X((i,)),
            X((d, k, m), 0)]
    info = classify_instance(CnfXorFormula.from_xors(xors))
    assert info == {
        "xorCount": 7,
        "treeLike": False,
        "treePartFraction": 4 / 7,
        "cyclePartitionable": True,
        "connectedComponentCount": 1,
        "cycleCountBound": 1,
    }
    unsat = classify_instance(CnfXorFormula.from_xors([X((1, 2)), X((1, 2), 0)]))
    assert unsat["cyclePartitionable"] is None
    assert classify_instance(CnfXorFormula())["treePartFraction"] == 1.0


@given(seeds)
def test_tree_like_instances_classify_consistently(seed):
    f = CnfXorFormula.from_xors(random_tree_like(random.Random(seed), 20))
    info = classify_instance(f)
    assert info["treeLike"] and info["treePartFraction"] == 1.0 and info["cycleCountBound"] == 0
    assert info["cyclePartitionable"] in (True, None)

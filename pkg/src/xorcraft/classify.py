"""Structural classification of xor-clause conjunctions and the randomized
deducibility test against the Gaussian-elimination oracle."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from xorcraft.core import CnfXorFormula, XorClause
from xorcraft.engines import ENGINES, UsageError, gauss_closure
from xorcraft.graph import (
    biconnected_components,
    build_graph,
    connected_components,
    cyclomatic_number,
    is_tree_like,
    tree_part,
)
from xorcraft.translate import to_3xor_normal_form

ASSUMPTION_SIZES = "uniform 1..|vars|"


@dataclass(frozen=True)
class CyclePartition:
    inner: frozenset[int]
    outer: frozenset[int]


def find_cycle_partition(xors: Sequence[XorClause]) -> Optional[CyclePartition]:
    """Split variables into inner/outer so no variable is inner on one
    xor-cycle and outer on another; None when impossible.

    Works on biconnected components of the graph of the ternary clauses:
    two edges of a clause inside a cyclic component lie on a common cycle,
    making those variables inner and the third outer.  A clause with all
    three edges in one cyclic component has every variable in both roles.
    Unary and binary clauses are on no xor-cycle and are ignored.
    """
    for c in xors:
        if len(c) > 3:
            raise UsageError(f"expected clauses with at most 3 variables, got {c}")
    ternary = [c for c in xors if len(c) == 3]
    g = build_graph(ternary)
    bic = biconnected_components(g)
    inner: set[int] = set()
    outer: set[int] = set()
    for i, c in enumerate(ternary):
        comps = [bic.edge_component[(v, i)] for v in c.vars]
        for cid in set(comps):
            if bic.component_size(cid) == 1:
                continue
            on = [v for v, k in zip(c.vars, comps) if k == cid]
            if len(on) == 3:
                return None
            inner.update(on)
            outer.update(v for v in c.vars if v not in on)
    if inner & outer:
        return None
    everything = {v for c in xors for v in c.vars}
    return CyclePartition(frozenset(inner), frozenset(everything - inner))


@dataclass
class DeducibilityReport:
    engine: str
    trials: int
    seed: int
    failures: list[dict] = field(default_factory=list)
    assumption_sizes: str = ASSUMPTION_SIZES

    @property
    def verdict(self) -> str:
        return "not-deducible" if self.failures else "probably-deducible"

    def to_json(self) -> dict:
        return {
            "engine": self.engine,
            "trials": self.trials,
            "seed": self.seed,
            "assumptionSizes": self.assumption_sizes,
            "verdict": self.verdict,
            "failures": self.failures,
        }


def trial_assumptions(variables: Sequence[int], seed: int, trial: int) -> list[int]:
    """Assumption set of one trial; depends only on (seed, trial)."""
    if not variables:
        return []
    rng = random.Random(f"{seed}:{trial}")
    size = rng.randint(1, len(variables))
    chosen = rng.sample(list(variables), size)
    return [v if rng.getrandbits(1) else -v for v in chosen]


def compare_with_oracle(xors: Sequence[XorClause], engine: str, assumptions: list[int]) -> Optional[dict]:
    """A failure record when the oracle derives a conflict or literal the engine misses."""
    got = ENGINES[engine](xors, assumptions)
    truth = gauss_closure(xors, assumptions)
    if truth.conflict:
        if got.conflict:
            return None
        return {"assumptions": assumptions, "missedConflict": True, "missed": []}
    missed = sorted(truth.literals() - got.literals(), key=abs)
    if not missed:
        return None
    return {"assumptions": assumptions, "missedConflict": False, "missed": missed}


def random_deducibility_test(formula: CnfXorFormula | Sequence[XorClause], engine: str = "up",
                             trials: int = 100, seed: int = 0) -> DeducibilityReport:
    if trials < 1:
        raise UsageError("trials must be positive")
    if engine not in ("up", "subst", "ec"):
        raise UsageError(f"unknown engine {engine!r}")
    xors = formula.xor_clauses if isinstance(formula, CnfXorFormula) else list(formula)
    variables = sorted({v for c in xors for v in c.vars})
    report = DeducibilityReport(engine, trials, seed)
    for t in range(trials):
        failure = compare_with_oracle(xors, engine, trial_assumptions(variables, seed, t))
        if failure is not None:
            failure["trial"] = t
            report.failures.append(failure)
    return report


def classify_instance(formula: CnfXorFormula) -> dict:
    xors = formula.xor_clauses
    g = build_graph(xors)
    tree, _ = tree_part(xors)
    nf = to_3xor_normal_form(CnfXorFormula([], list(xors), formula.num_vars))
    partitionable = None if nf.conflict else find_cycle_partition(nf.formula.xor_clauses) is not None
    fraction = Fraction(len(tree), len(xors)) if xors else Fraction(1)
    return {
        "xorCount": len(xors),
        "treeLike": is_tree_like(g),
        "treePartFraction": float(fraction),
        "cyclePartitionable": partitionable,
        "connectedComponentCount": len(connected_components(g)),
        "cycleCountBound": cyclomatic_number(g),
    }

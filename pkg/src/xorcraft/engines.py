"""Propagation engines over xor-clauses.

* ``up_saturate``    -- unit propagation (substitute derived unit clauses).
* ``subst_saturate`` -- UP plus substitution of derived binary equivalences.
* ``ec_saturate``    -- equivalence-class rules on clauses with <= 3 variables.
* ``gauss_closure``  -- complete propagation by GF(2) row reduction.

All engines return a :class:`Closure`.  Every implied literal carries the
set of assumption literals it depends on, which is what
:meth:`XorModule.explain` reports.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Optional, Sequence

from xorcraft.core import XorClause

BOTTOM = 0  # the "false" literal returned by deduce() on an xor-conflict

EMPTY: frozenset[int] = frozenset()


class UsageError(ValueError):
    pass


class Reason(NamedTuple):
    rule: str
    premises: tuple[int, ...]


@dataclass
class Closure:
    implied: dict[int, int] = field(default_factory=dict)
    conflict: bool = False
    reasons: dict[int, Reason] = field(default_factory=dict)
    deps: dict[int, frozenset[int]] = field(default_factory=dict)
    conflict_deps: frozenset[int] = EMPTY

    def literals(self) -> set[int]:
        return {v if b else -v for v, b in self.implied.items()}

    def restricted(self, variables: Iterable[int]) -> set[int]:
        keep = set(variables)
        return {l for l in self.literals() if abs(l) in keep}


def _lit(var: int, value: int) -> int:
    return var if value else -var


def up_saturate(xors: Sequence[XorClause], assumptions: Iterable[int] = ()) -> Closure:
    """Least fixpoint of the two unit rules; stops at the first empty clause."""
    closure = Closure()
    occ: dict[int, list[int]] = defaultdict(list)
    unassigned = [len(c) for c in xors]
    parity = [0] * len(xors)
    for i, c in enumerate(xors):
        for v in c.vars:
            occ[v].append(i)
    value = closure.implied
    deps = closure.deps
    pending: list[int] = []

    def conflict(d: frozenset[int]) -> Closure:
        closure.conflict = True
        closure.conflict_deps = d
        return closure

    def assign(var: int, bit: int, d: frozenset[int], reason: Reason) -> Optional[frozenset[int]]:
        if var in value:
            return None if value[var] == bit else d | deps[var]
        value[var] = bit
        deps[var] = d
        closure.reasons[var] = reason
        for i in occ[var]:
            unassigned[i] -= 1
            parity[i] ^= bit
            if unassigned[i] <= 1:
                pending.append(i)
        return None

    for i, c in enumerate(xors):
        if c.is_conflict:
            return conflict(EMPTY)
        if len(c) == 1:
            pending.append(i)
    for lit in assumptions:
        bad = assign(abs(lit), int(lit > 0), frozenset((lit,)), Reason("assume", ()))
        if bad is not None:
            return conflict(bad)

    while pending:
        i = pending.pop()
        c = xors[i]
        if unassigned[i] == 0:
            if parity[i] != c.rhs:
                return conflict(frozenset().union(*(deps[v] for v in c.vars)))
            continue
        if unassigned[i] > 1:
            continue
        free = next(v for v in c.vars if v not in value)
        others = [v for v in c.vars if v != free]
        d = frozenset().union(*(deps[v] for v in others))
        assign(free, c.rhs ^ parity[i], d,
               Reason("unit" if others else "input", tuple(_lit(v, value[v]) for v in others)))
    return closure


class ParityUnionFind:
    """Union-find over variables with parity-labelled links and root values.

    ``find(x)`` returns ``(root, p, deps)`` meaning ``x == root ^ p``, where
    ``deps`` is the set of assumption literals the link chain relies on.
    """

    def __init__(self):
        self.parent: dict[int, int] = {}
        self.parity: dict[int, int] = {}
        self.why: dict[int, frozenset[int]] = {}
        self.size: dict[int, int] = {}
        self.value: dict[int, tuple[int, frozenset[int]]] = {}

    def find(self, x: int) -> tuple[int, int, frozenset[int]]:
        if x not in self.parent:
            self.parent[x] = x
            self.parity[x] = 0
            self.why[x] = EMPTY
            self.size[x] = 1
            return x, 0, EMPTY
        path = []
        while self.parent[x] != x:
            path.append(x)
            x = self.parent[x]
        root = x
        # compress from the node nearest the root outward
        acc_p, acc_d = 0, EMPTY
        for node in reversed(path):
            acc_p ^= self.parity[node]
            acc_d = acc_d | self.why[node]
            self.parent[node] = root
            self.parity[node] = acc_p
            self.why[node] = acc_d
        if not path:
            return root, 0, EMPTY
        first = path[0]
        return root, self.parity[first], self.why[first]

    def value_of(self, x: int) -> Optional[tuple[int, frozenset[int]]]:
        root, p, d = self.find(x)
        if root not in self.value:
            return None
        bit, vd = self.value[root]
        return bit ^ p, d | vd

    def set_value(self, x: int, bit: int, deps: frozenset[int]) -> tuple[bool, Optional[frozenset[int]]]:
        """Returns (changed, conflict_deps)."""
        root, p, d = self.find(x)
        rbit = bit ^ p
        rdeps = deps | d
        if root in self.value:
            have, hd = self.value[root]
            return False, (None if have == rbit else rdeps | hd)
        self.value[root] = (rbit, rdeps)
        return True, None

    def union(self, x: int, y: int, p: int, deps: frozenset[int]) -> tuple[bool, Optional[frozenset[int]]]:
        """Record ``x ^ y == p``.  Returns (changed, conflict_deps)."""
        rx, px, dx = self.find(x)
        ry, py, dy = self.find(y)
        link = p ^ px ^ py  # rx ^ ry == link
        d = deps | dx | dy
        if rx == ry:
            return False, (None if link == 0 else d)
        if self.size[rx] < self.size[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        self.parity[ry] = link
        self.why[ry] = d
        self.size[rx] += self.size[ry]
        if ry in self.value:
            bit, vd = self.value.pop(ry)
            _, bad = self.set_value(rx, bit ^ link, vd | d)
            return True, bad
        return True, None


def _finish(closure: Closure, uf: ParityUnionFind, universe: Iterable[int], rule: str) -> Closure:
    for v in sorted(universe):
        got = uf.value_of(v)
        if got is None:
            continue
        bit, d = got
        closure.implied[v] = bit
        closure.deps[v] = d
        closure.reasons[v] = Reason(rule, tuple(sorted(d, key=abs)))
    return closure


def subst_saturate(xors: Sequence[XorClause], assumptions: Iterable[int] = ()) -> Closure:
    """Least fixpoint of UP plus substitution of derived binary clauses.

    Derived equivalences live in a parity union-find.  Each stored clause is
    read through it: variables map to their class representative, valued
    classes fold into the parity, repeated representatives cancel.  The
    resulting clause is exactly what repeated substitution derives, and a
    0/1/2-variable result fires the conflict/unit/equivalence step.
    """
    closure = Closure()
    uf = ParityUnionFind()
    assumptions = list(assumptions)
    universe = {v for c in xors for v in c.vars} | {abs(l) for l in assumptions}
    for lit in assumptions:
        _, bad = uf.set_value(abs(lit), int(lit > 0), frozenset((lit,)))
        if bad is not None:
            closure.conflict, closure.conflict_deps = True, bad
            return _finish(closure, uf, universe, "subst")
    changed = True
    while changed:
        changed = False
        for c in xors:
            rhs = c.rhs
            d = EMPTY
            reps: set[int] = set()
            for v in c.vars:
                root, p, vd = uf.find(v)
                d = d | vd
                rhs ^= p
                if root in uf.value:
                    bit, bd = uf.value[root]
                    rhs ^= bit
                    d = d | bd
                else:
                    reps ^= {root}
            if len(reps) > 2:
                continue
            if not reps:
                if rhs:
                    closure.conflict, closure.conflict_deps = True, d
                    return _finish(closure, uf, universe, "subst")
                continue
            if len(reps) == 1:
                step, bad = uf.set_value(reps.pop(), rhs, d)
            else:
                a, b = reps
                step, bad = uf.union(a, b, rhs, d)
            if bad is not None:
                closure.conflict, closure.conflict_deps = True, bad
                return _finish(closure, uf, universe, "subst")
            changed |= step
    return _finish(closure, uf, universe, "subst")


def ec_saturate(xors: Sequence[XorClause], assumptions: Iterable[int] = ()) -> Closure:
    """Least fixpoint of the equivalence-class rules.

    Unit clauses value a class (Conflict on disagreement); binary clauses
    link classes (xor-Conflict on an odd cycle); a ternary clause with one
    valued variable links the other two (Unit3); a ternary clause with two
    variables in one class values the third (xor-Imply).
    """
    for c in xors:
        if len(c) > 3:
            raise UsageError(f"EC needs clauses with at most 3 variables, got {c}")
    closure = Closure()
    uf = ParityUnionFind()
    assumptions = list(assumptions)
    universe = {v for c in xors for v in c.vars} | {abs(l) for l in assumptions}

    def stop(bad: frozenset[int]) -> Closure:
        closure.conflict, closure.conflict_deps = True, bad
        return _finish(closure, uf, universe, "ec")

    for c in xors:
        if c.is_conflict:
            return stop(EMPTY)
    for lit in assumptions:
        _, bad = uf.set_value(abs(lit), int(lit > 0), frozenset((lit,)))
        if bad is not None:
            return stop(bad)
    changed = True
    while changed:
        changed = False
        for c in xors:
            if len(c) == 1:
                step, bad = uf.set_value(c.vars[0], c.rhs, EMPTY)
            elif len(c) == 2:
                step, bad = uf.union(c.vars[0], c.vars[1], c.rhs, EMPTY)
            elif len(c) == 3:
                step, bad = _ec_ternary(uf, c)
            else:
                continue
            if bad is not None:
                return stop(bad)
            changed |= step
    return _finish(closure, uf, universe, "ec")


def _ec_ternary(uf: ParityUnionFind, c: XorClause) -> tuple[bool, Optional[frozenset[int]]]:
    x, y, z = c.vars
    for a, b, t in ((x, y, z), (x, z, y), (y, z, x)):
        got = uf.value_of(t)
        if got is not None:
            bit, d = got
            return uf.union(a, b, c.rhs ^ bit, d)  # Unit3
    fx, fy, fz = uf.find(x), uf.find(y), uf.find(z)
    for (ra, pa, da), (rb, pb, db), t in ((fx, fy, z), (fx, fz, y), (fy, fz, x)):
        if ra == rb:
            return uf.set_value(t, c.rhs ^ pa ^ pb, da | db)  # xor-Imply
    return False, None


def gauss_closure(xors: Sequence[XorClause], assumptions: Iterable[int] = ()) -> Closure:
    """Complete propagation: reduced row echelon form over GF(2).

    Rows are Python ints; bit ``v`` is variable ``v`` and the bits above the
    largest variable tag the assumption rows a row was combined from.
    Pivots are taken lowest column first.
    """
    assumptions = list(dict.fromkeys(assumptions))
    universe = {v for c in xors for v in c.vars} | {abs(l) for l in assumptions}
    top = max(universe, default=0) + 1
    var_mask = (1 << top) - 1
    rows: list[tuple[int, int]] = [(c.mask, c.rhs) for c in xors]
    for k, lit in enumerate(assumptions):
        rows.append(((1 << abs(lit)) | (1 << (top + k)), int(lit > 0)))

    pivots: list[tuple[int, int, int]] = []  # (pivot bit, row, rhs), kept fully reduced
    closure = Closure()
    for row, rhs in rows:
        for pbit, prow, prhs in pivots:
            if row & pbit:
                row ^= prow
                rhs ^= prhs
        if row & var_mask == 0:
            if rhs:
                closure.conflict = True
                closure.conflict_deps = _tags(row >> top, assumptions)
                return closure
            continue
        low = (row & var_mask) & -(row & var_mask)
        for i, (pbit, prow, prhs) in enumerate(pivots):
            if prow & low:
                pivots[i] = (pbit, prow ^ row, prhs ^ rhs)
        pivots.append((low, row, rhs))

    for _, row, rhs in pivots:
        body = row & var_mask
        if body & (body - 1) == 0:
            v = body.bit_length() - 1
            d = _tags(row >> top, assumptions)
            closure.implied[v] = rhs
            closure.deps[v] = d
            closure.reasons[v] = Reason("gauss", tuple(sorted(d, key=abs)))
    closure.implied = dict(sorted(closure.implied.items()))
    return closure


def _tags(bits: int, assumptions: list[int]) -> frozenset[int]:
    out = []
    k = 0
    while bits:
        if bits & 1:
            out.append(assumptions[k])
        bits >>= 1
        k += 1
    return frozenset(out)


ENGINES: dict[str, Callable[..., Closure]] = {
    "up": up_saturate,
    "subst": subst_saturate,
    "ec": ec_saturate,
    "gauss": gauss_closure,
}


class XorModule:
    """Incremental xor-reasoning module: assign / deduce / explain / backjump.

    Each ``deduce`` saturates the chosen engine over the current
    assumptions and reports the literals not reported before.  Explanations
    are the assumption leaves the literal was derived from.
    """

    def __init__(self, xors: Sequence[XorClause], engine: str = "up"):
        if engine not in ENGINES:
            raise UsageError(f"unknown engine {engine!r}")
        self.xors = list(xors)
        self.engine = engine
        self._saturate = ENGINES[engine]
        self.trail: list[int] = []
        self._levels: list[tuple[int, dict[int, frozenset[int]]]] = []
        self._reported: dict[int, frozenset[int]] = {}
        self._closure: Optional[Closure] = None

    @property
    def level(self) -> int:
        return len(self._levels)

    def new_level(self) -> None:
        self._levels.append((len(self.trail), dict(self._reported)))

    def assign(self, lit: int) -> None:
        if lit == 0:
            raise UsageError("0 is not a literal")
        if any(abs(t) == abs(lit) for t in self.trail):
            raise UsageError(f"variable {abs(lit)} is already assigned")
        self.trail.append(lit)
        self._closure = None

    def deduce(self) -> list[int]:
        if self._closure is None:
            self._closure = self._saturate(self.xors, self.trail)
        closure = self._closure
        fresh: list[int] = []
        if closure.conflict:
            if BOTTOM not in self._reported:
                self._reported[BOTTOM] = closure.conflict_deps
                fresh.append(BOTTOM)
            return fresh
        assumed = set(self.trail)
        for v, bit in closure.implied.items():
            lit = _lit(v, bit)
            if lit in assumed or lit in self._reported:
                continue
            self._reported[lit] = closure.deps[v]
            fresh.append(lit)
        return fresh

    def explain(self, lit: int) -> tuple[int, ...]:
        """Or-clause ``-l'1 | ... | -l'k | lit``; for BOTTOM just the negated premises."""
        if lit not in self._reported:
            raise UsageError(f"literal {lit} was not returned by deduce()")
        premises = sorted(self._reported[lit], key=lambda l: self.trail.index(l))
        body = tuple(-l for l in premises)
        return body if lit == BOTTOM else body + (lit,)

    def backjump(self, level: int) -> None:
        if not 0 <= level <= self.level:
            raise UsageError(f"cannot backjump to level {level} from {self.level}")
        if level == self.level:
            return
        size, reported = self._levels[level]
        del self._levels[level:]
        del self.trail[size:]
        self._reported = reported
        self._closure = None

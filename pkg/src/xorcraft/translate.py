"""Formula rewrites: 3-xor normal form, tree-part clausification, and the
redundant-clause translations that let unit propagation simulate
equivalence reasoning (cycles, Eq, Eq*), plus the diamond family D(n).
"""

from __future__ import annotations

import heapq
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from xorcraft.core import CnfXorFormula, XorClause, cnf_of_xor, xor_add
from xorcraft.engines import UsageError
from xorcraft.formats import DEFAULT_EXPANSION_CAP
from xorcraft.graph import biconnected_components, build_graph, tree_part

log = logging.getLogger(__name__)

DEFAULT_MAX_CYCLES = 100_000
DEFAULT_EQ_CEILING = 2_000_000


class CapacityError(RuntimeError):
    """A translation would exceed a configured size bound."""


# --------------------------------------------------------------------------
# 3-xor normal form


@dataclass
class NormalForm:
    formula: Optional[CnfXorFormula]
    # eliminated variable -> (representative, parity): var == rep ^ parity; rep 0 means a constant
    var_map: dict[int, tuple[int, int]] = field(default_factory=dict)
    # fresh cut variable -> the variables whose xor it equals
    cut_vars: dict[int, tuple[int, ...]] = field(default_factory=dict)

    @property
    def conflict(self) -> bool:
        return self.formula is None

    def lift(self, assignment: dict[int, int]) -> dict[int, int]:
        """Extend a model of the normal form to the eliminated variables."""
        out = dict(assignment)
        for var, (rep, p) in self.var_map.items():
            out[var] = (out.get(rep, 0) if rep else 0) ^ p
        return out

    def extend(self, assignment: dict[int, int]) -> dict[int, int]:
        """Values for the fresh cut variables given values of the original ones."""
        out = dict(assignment)
        for y in sorted(self.cut_vars):
            bit = 0
            for v in self.cut_vars[y]:
                bit ^= out[v]
            out[y] = bit
        return out

    def to_json(self) -> dict:
        return {
            "conflict": self.conflict,
            "eliminated": {str(v): {"rep": r, "parity": p} for v, r, p in
                           ((v, *rp) for v, rp in sorted(self.var_map.items()))},
            "cut": {str(y): list(xs) for y, xs in sorted(self.cut_vars.items())},
        }


class _ClauseStore:
    """Indexed clause set used while rewriting to normal form."""

    def __init__(self):
        self.clauses: dict[int, XorClause] = {}
        self.occ: dict[int, set[int]] = defaultdict(set)
        self.pairs: dict[tuple[int, int], set[int]] = defaultdict(set)
        self.next_id = 0

    def add(self, c: XorClause) -> int:
        cid = self.next_id
        self.next_id += 1
        self.clauses[cid] = c
        for v in c.vars:
            self.occ[v].add(cid)
        if len(c) == 3:
            a, b, d = c.vars
            for pair in ((a, b), (a, d), (b, d)):
                self.pairs[pair].add(cid)
        return cid

    def remove(self, cid: int) -> XorClause:
        c = self.clauses.pop(cid)
        for v in c.vars:
            self.occ[v].discard(cid)
        if len(c) == 3:
            a, b, d = c.vars
            for pair in ((a, b), (a, d), (b, d)):
                self.pairs[pair].discard(cid)
        return c


def to_3xor_normal_form(f: CnfXorFormula) -> NormalForm:
    """Rewrite the xor part so every clause has three variables and any two
    clauses share at most one variable.

    Steps run to fixpoint: unit elimination, binary elimination (the larger
    variable becomes an alias of the smaller), cutting of wide clauses with
    a fresh variable equal to the xor of the first two, and merging of
    clauses sharing two variables.  Or-clauses are rewritten through the
    eliminations.  Returns a NormalForm whose formula is None on conflict.
    """
    store = _ClauseStore()
    num_vars = f.num_vars
    var_map: dict[int, tuple[int, int]] = {}
    cut_vars: dict[int, tuple[int, ...]] = {}
    work = [store.add(c) for c in f.xor_clauses]

    def replace(var: int, rep: int, parity: int) -> None:
        var_map[var] = (rep, parity)
        for cid in sorted(store.occ[var]):
            c = store.remove(cid)
            body = set(c.vars)
            body.discard(var)
            if rep:
                body ^= {rep}
            work.append(store.add(XorClause(tuple(sorted(body)), c.rhs ^ parity)))

    while work:
        cid = work.pop()
        c = store.clauses.get(cid)
        if c is None:
            continue
        k = len(c)
        if k == 0:
            store.remove(cid)
            if c.rhs:
                return NormalForm(None, var_map, cut_vars)
        elif k == 1:
            store.remove(cid)
            replace(c.vars[0], 0, c.rhs)
        elif k == 2:
            store.remove(cid)
            keep, gone = c.vars
            replace(gone, keep, c.rhs)
        elif k > 3:
            store.remove(cid)
            num_vars += 1
            y = num_vars
            x1, x2 = c.vars[:2]
            cut_vars[y] = (x1, x2)
            work.append(store.add(XorClause((x1, x2, y), 0)))
            work.append(store.add(XorClause.of((y,) + c.vars[2:], c.rhs)))
        else:
            a, b, d = c.vars
            for pair in ((a, b), (a, d), (b, d)):
                other = next((o for o in sorted(store.pairs[pair]) if o != cid), None)
                if other is not None:
                    store.remove(cid)
                    work.append(store.add(xor_add(c, store.clauses[other])))
                    break

    def resolve(v: int) -> tuple[int, int]:
        parity = 0
        while v in var_map:
            rep, p = var_map[v]
            parity ^= p
            if not rep:
                return 0, parity
            v = rep
        return v, parity

    var_map = {v: resolve(v) for v in var_map}
    out = CnfXorFormula(num_vars=num_vars)
    for cid in sorted(store.clauses):
        out.add_xor(store.clauses[cid])
    for clause in f.or_clauses:
        lits: list[int] = []
        satisfied = False
        for lit in clause:
            v = abs(lit)
            if v not in var_map:
                lits.append(lit)
                continue
            rep, p = var_map[v]
            sign = (lit > 0) ^ bool(p)
            if not rep:
                # constant value p: the literal holds exactly when sign is false
                if not sign:
                    satisfied = True
                    break
                continue
            lits.append(rep if sign else -rep)
        if satisfied:
            continue
        lits = list(dict.fromkeys(lits))
        if any(-l in lits for l in lits):
            continue
        if not lits:
            return NormalForm(None, var_map, cut_vars)
        out.add_or(lits)
    return NormalForm(out, var_map, cut_vars)


def is_3xor_normal_form(xors: Iterable[XorClause]) -> bool:
    seen: set[tuple[int, int]] = set()
    for c in xors:
        if len(c) != 3:
            return False
        a, b, d = c.vars
        for pair in ((a, b), (a, d), (b, d)):
            if pair in seen:
                return False
            seen.add(pair)
    return True


# --------------------------------------------------------------------------
# tree part


def clausify_tree_part(f: CnfXorFormula, expansion_cap: int = DEFAULT_EXPANSION_CAP) -> CnfXorFormula:
    """Move the tree-like part of the xor-clauses into CNF."""
    tree, rest = tree_part(f.xor_clauses)
    out = CnfXorFormula(list(f.or_clauses), [], f.num_vars)
    keep = list(rest)
    for c in tree:
        if len(c) > expansion_cap:
            log.warning("tree clause of width %d kept as xor (cap %d)", len(c), expansion_cap)
            keep.append(c)
            continue
        for oc in cnf_of_xor(c):
            out.add_or(oc)
    order = {id(c): i for i, c in enumerate(f.xor_clauses)}
    for c in sorted(keep, key=lambda c: order[id(c)]):
        out.add_xor(c)
    return out


# --------------------------------------------------------------------------
# xor-cycles


@dataclass(frozen=True)
class XorCycle:
    inner: tuple[int, ...]    # cyclic order x1..xn
    outer: tuple[int, ...]    # outer[i] belongs to the clause joining inner[i] and inner[i+1]
    clauses: tuple[int, ...]  # clause indices, aligned with outer
    parity: int

    @property
    def key(self) -> frozenset[tuple[int, int]]:
        """Edge set in the constraint graph; identical for rotations and reflections."""
        n = len(self.inner)
        return frozenset(
            e for i, c in enumerate(self.clauses)
            for e in ((self.inner[i], c), (self.inner[(i + 1) % n], c)))


def _check_width(xors: Sequence[XorClause]) -> None:
    for c in xors:
        if len(c) > 3:
            raise UsageError(f"expected clauses with at most 3 variables, got {c}")


def enumerate_xor_cycles(xors: Sequence[XorClause], max_cycles: int = DEFAULT_MAX_CYCLES) -> list[XorCycle]:
    """All xor-cycles (simple cycles through ternary clauses), each once.

    A cycle is anchored at its smallest inner variable and reported in the
    direction whose first clause index is smaller than its last.  Only edges
    in non-bridge biconnected components are explored.
    """
    _check_width(xors)
    ternary = [c if len(c) == 3 else XorClause((), 0) for c in xors]
    g = build_graph(ternary)
    bic = biconnected_components(g)
    adj: dict[int, list[int]] = defaultdict(list)
    for (v, ci), cid in bic.edge_component.items():
        if bic.component_size(cid) > 1:
            adj[v].append(ci)
    for v in adj:
        adj[v].sort()

    def on_cycle(v: int, ci: int) -> bool:
        e = (v, ci)
        return e in bic.edge_component and bic.component_size(bic.edge_component[e]) > 1

    cycles: list[XorCycle] = []
    for s in sorted(adj):
        path = [s]
        used: list[int] = []
        in_path = {s}
        stack = [iter(_steps(ternary, adj, s))]
        while stack:
            step = next(stack[-1], None)
            if step is None:
                stack.pop()
                if used:
                    used.pop()
                    in_path.discard(path.pop())
                continue
            ci, w = step
            if ci in used or not on_cycle(w, ci):
                continue
            if w == s:
                if used and used[0] < ci:
                    clauses = tuple(used) + (ci,)
                    inner = tuple(path)
                    n = len(inner)
                    outer = tuple(
                        next(v for v in ternary[c].vars if v != inner[i] and v != inner[(i + 1) % n])
                        for i, c in enumerate(clauses))
                    parity = 0
                    for c in clauses:
                        parity ^= ternary[c].rhs
                    cycles.append(XorCycle(inner, outer, clauses, parity))
                    if len(cycles) > max_cycles:
                        raise CapacityError(
                            f"more than {max_cycles} xor-cycles; use the eq or eqstar translation instead")
                continue
            if w < s or w in in_path:
                continue
            used.append(ci)
            path.append(w)
            in_path.add(w)
            stack.append(iter(_steps(ternary, adj, w)))
    return cycles


def _steps(ternary, adj, v):
    for ci in adj[v]:
        for w in ternary[ci].vars:
            if w != v:
                yield ci, w


# --------------------------------------------------------------------------
# simulation translations


@dataclass
class TranslationResult:
    added: list[XorClause] = field(default_factory=list)
    aux_vars: dict[int, tuple[int, int]] = field(default_factory=dict)
    # aux var e with pair (xi, xk) satisfies xi ^ xk ^ e == parity[e]
    parity: dict[int, int] = field(default_factory=dict)

    def apply(self, f: CnfXorFormula) -> CnfXorFormula:
        out = f.copy()
        if self.aux_vars:
            out.num_vars = max(out.num_vars, max(self.aux_vars))
        for c in self.added:
            out.add_xor(c)
        return out

    def extend(self, assignment: dict[int, int]) -> dict[int, int]:
        """Intended values of the auxiliary variables for a model of the original formula."""
        out = dict(assignment)
        for e in sorted(self.aux_vars):
            xi, xk = self.aux_vars[e]
            out[e] = out[xi] ^ out[xk] ^ self.parity[e]
        return out

    def to_json(self) -> dict:
        return {
            "added": len(self.added),
            "aux": {str(e): {"pair": list(self.aux_vars[e]), "parity": self.parity[e]}
                    for e in sorted(self.aux_vars)},
        }


def _dedup(clauses: Iterable[XorClause], exclude: Iterable[XorClause] = ()) -> list[XorClause]:
    seen = set(exclude)
    out = []
    for c in clauses:
        if c.is_tautology or c in seen:
            continue
        seen.add(c)
        out.append(c)
    return out


def cycles_translation(xors: Sequence[XorClause], max_cycles: int = DEFAULT_MAX_CYCLES) -> TranslationResult:
    """One clause over the outer variables per xor-cycle: the xor of the cycle's clauses."""
    cycles = enumerate_xor_cycles(xors, max_cycles)
    sums = (xor_add(*(xors[i] for i in cyc.clauses)) for cyc in cycles)
    return TranslationResult(_dedup(sums))


def eq_size(num_vars: int, num_clauses: int) -> tuple[int, int]:
    """(auxiliary variables, added clauses) of the Eq translation, without building it."""
    return math.comb(num_vars, 2), 3 * num_clauses + math.comb(num_vars, 3)


def _require_ternary(xors: Sequence[XorClause]) -> None:
    for c in xors:
        if len(c) != 3:
            raise UsageError(f"expected 3-xor normal form, got clause {c}")


def eq_translation(xors: Sequence[XorClause], next_var: Optional[int] = None,
                   ceiling: int = DEFAULT_EQ_CEILING) -> TranslationResult:
    """Equivalence variables e_ij for every variable pair, with transitivity.

    e_ij is true iff x_i and x_j are equal, i.e. ``x_i ^ x_j ^ e_ij == 1``.
    Refuses with CapacityError when the transitivity clause count exceeds
    ``ceiling``.
    """
    _require_ternary(xors)
    variables = sorted({v for c in xors for v in c.vars})
    n = len(variables)
    if math.comb(n, 3) > ceiling:
        raise CapacityError(f"Eq would add {math.comb(n, 3)} transitivity clauses (ceiling {ceiling})")
    nxt = next_var if next_var is not None else (variables[-1] + 1 if variables else 1)
    e: dict[tuple[int, int], int] = {}
    result = TranslationResult()
    for i, a in enumerate(variables):
        for b in variables[i + 1:]:
            e[a, b] = nxt
            result.aux_vars[nxt] = (a, b)
            result.parity[nxt] = 1
            nxt += 1
    added = []
    for c in xors:
        a, b, d = c.vars
        for (p, q), r in (((a, b), d), ((a, d), b), ((b, d), a)):
            added.append(XorClause.of((e[p, q], r), c.rhs ^ 1))
    for i, a in enumerate(variables):
        for j in range(i + 1, n):
            b = variables[j]
            for d in variables[j + 1:]:
                added.append(XorClause.of((e[a, b], e[b, d], e[a, d]), 1))
    result.added = _dedup(added, exclude=xors)
    return result


def eq_star_translation(xors: Sequence[XorClause], next_var: Optional[int] = None) -> TranslationResult:
    """Elimination-ordered subset of Eq that bridges equivalences over each
    eliminated variable, reusing an existing clause as the bridge when one
    already joins the two neighbours.

    The variable eliminated next is the one sharing clauses with the fewest
    not-yet-eliminated variables (lowest id on ties).
    """
    _require_ternary(xors)
    clauses: list[XorClause] = list(xors)
    present = set(clauses)
    occ: dict[int, list[int]] = defaultdict(list)
    pairs: dict[tuple[int, int], list[int]] = defaultdict(list)
    variables = sorted({v for c in xors for v in c.vars})
    nxt = next_var if next_var is not None else (variables[-1] + 1 if variables else 1)
    result = TranslationResult()
    added: list[XorClause] = []

    def index(ci: int) -> None:
        c = clauses[ci]
        for v in c.vars:
            occ[v].append(ci)
        if len(c) == 3:
            a, b, d = c.vars
            for pair in ((a, b), (a, d), (b, d)):
                pairs[pair].append(ci)

    def push(c: XorClause) -> None:
        if c.is_tautology or c in present:
            return
        present.add(c)
        clauses.append(c)
        added.append(c)
        index(len(clauses) - 1)

    for ci in range(len(clauses)):
        index(ci)

    remaining = set(variables)

    def score(v: int) -> int:
        return len({w for ci in occ[v] for w in clauses[ci].vars} & remaining)

    heap = [(score(v), v) for v in variables]
    heapq.heapify(heap)
    while remaining:
        s, xj = heapq.heappop(heap)
        if xj not in remaining:
            continue
        now = score(xj)
        if now != s:
            heapq.heappush(heap, (now, xj))
            continue
        remaining.discard(xj)
        touched = {w for ci in occ[xj] for w in clauses[ci].vars}
        before = len(added)
        through = [ci for ci in occ[xj] if len(clauses[ci]) == 3]
        ends = [(ci, xi) for ci in through for xi in clauses[ci].vars if xi != xj and xi in remaining]
        for n1, (c1, xi) in enumerate(ends):
            for c2, xk in ends[n1 + 1:]:
                if c1 == c2 or xi == xk:
                    continue
                key = (xi, xk) if xi < xk else (xk, xi)
                bridge = next((clauses[ci] for ci in pairs[key]), None)
                if bridge is None:
                    e = nxt
                    nxt += 1
                    result.aux_vars[e] = key
                    result.parity[e] = 1
                    bridge = XorClause.of(key + (e,), 1)
                    push(bridge)
                push(xor_add(clauses[c1], clauses[c2], bridge))
        touched.update(v for c in added[before:] for v in c.vars)
        for w in touched & remaining:
            heapq.heappush(heap, (score(w), w))
    result.added = added
    return result


# --------------------------------------------------------------------------
# D(n)


def diamond_layout(n: int) -> dict[str, int]:
    """Variable ids of D(n): x1..x(n+1), then a..f per diamond, then y."""
    names = {f"x{i}": i for i in range(1, n + 2)}
    for i in range(1, n + 1):
        base = n + 1 + 6 * (i - 1)
        for k, letter in enumerate("abcdef", start=1):
            names[f"x{i}{letter}"] = base + k
    names["y"] = 7 * n + 2
    return names


def generate_diamond(n: int) -> CnfXorFormula:
    if n < 1:
        raise ValueError("n must be at least 1")
    ids = diamond_layout(n)
    f = CnfXorFormula(num_vars=7 * n + 2)
    f.add_xor(XorClause.of((ids["x1"], ids[f"x{n + 1}"], ids["y"]), 1))
    for i in range(1, n + 1):
        xi, xn = ids[f"x{i}"], ids[f"x{i + 1}"]
        a, b, c, d, e, g = (ids[f"x{i}{letter}"] for letter in "abcdef")
        f.add_xor(XorClause.of((xi, a, b), 1))
        f.add_xor(XorClause.of((b, c, xn), 1))
        f.add_xor(XorClause.of((xi, d, e), 1))
        f.add_xor(XorClause.of((e, g, xn), 1))
    return f

"""Random instance generators and brute-force oracles shared by the tests."""

from __future__ import annotations

import itertools
import random
from typing import Iterable, Optional, Sequence

import networkx as nx
import numpy as np

from xorcraft.core import XorClause


# ---------------------------------------------------------------- generators

def random_xors(rng: random.Random, n_vars: int, n_clauses: int, widths=(1, 4)) -> list[XorClause]:
    out = []
    if n_vars < widths[0]:
        return out
    for _ in range(n_clauses):
        k = rng.randint(widths[0], min(widths[1], n_vars))
        out.append(XorClause.of(rng.sample(range(1, n_vars + 1), k), rng.getrandbits(1)))
    return [c for c in out if not c.is_tautology]


def random_tree_like(rng: random.Random, max_vars: int = 30) -> list[XorClause]:
    """Clauses joining at most one variable from each existing component,
    padded with fresh variables, so the constraint graph stays a forest."""
    comp: dict[int, int] = {}  # var -> component id
    clauses = []
    nxt = 1
    while nxt <= max_vars:
        chosen = []
        comps = sorted(set(comp.values()))
        rng.shuffle(comps)
        for cid in comps[:rng.randint(0, min(2, len(comps)))]:
            chosen.append(rng.choice([v for v, c in comp.items() if c == cid]))
        width = rng.randint(max(1, len(chosen)), 4)
        fresh = max(0, width - len(chosen))
        if nxt + fresh - 1 > max_vars:
            break
        chosen.extend(range(nxt, nxt + fresh))
        nxt += fresh
        if not chosen:
            continue
        merged = {comp[v] for v in chosen if v in comp}
        new_id = len(clauses)
        for v, c in list(comp.items()):
            if c in merged:
                comp[v] = new_id
        for v in chosen:
            comp[v] = new_id
        clauses.append(XorClause.of(chosen, rng.getrandbits(1)))
        if rng.random() < 0.08:
            break
    return clauses


def random_3xnf(rng: random.Random, n_vars: int, n_clauses: int) -> list[XorClause]:
    """Ternary clauses, any two sharing at most one variable."""
    used: set[tuple[int, int]] = set()
    out = []
    for _ in range(n_clauses * 20):
        if len(out) == n_clauses:
            break
        vs = tuple(sorted(rng.sample(range(1, n_vars + 1), 3)))
        pairs = {(vs[0], vs[1]), (vs[0], vs[2]), (vs[1], vs[2])}
        if pairs & used:
            continue
        used |= pairs
        out.append(XorClause(vs, rng.getrandbits(1)))
    return out


def random_cycle_partitionable(rng: random.Random, max_vars: int = 24) -> list[XorClause]:
    """3-xor normal form instances whose partition is checked by the
    networkx cycle oracle; built from inner/outer layers plus rejection."""
    while True:
        if rng.random() < 0.5:
            clauses = _layered(rng, max_vars)
        else:
            clauses = random_3xnf(rng, rng.randint(6, max_vars), rng.randint(2, max_vars // 2))
        if clauses and oracle_cycle_partition(clauses) is not None:
            return clauses


def _layered(rng: random.Random, max_vars: int) -> list[XorClause]:
    n_inner = rng.randint(3, max(3, max_vars // 2))
    inner = list(range(1, n_inner + 1))
    nxt = n_inner + 1
    used: set[tuple[int, int]] = set()
    out = []
    for _ in range(rng.randint(2, 2 * n_inner)):
        if nxt > max_vars:
            break
        a, b = sorted(rng.sample(inner, 2))
        if (a, b) in used:
            continue
        used.add((a, b))
        out.append(XorClause.of((a, b, nxt), rng.getrandbits(1)))
        nxt += 1
    return out


# ---------------------------------------------------------------- oracles

def variables_of(xors: Iterable[XorClause], extra: Iterable[int] = ()) -> list[int]:
    return sorted({v for c in xors for v in c.vars} | {abs(l) for l in extra})


def models(xors: Sequence[XorClause], variables: Sequence[int], assumptions: Iterable[int] = ()) -> np.ndarray:
    """All satisfying assignments as integers; bit i is the value of variables[i]."""
    pos = {v: i for i, v in enumerate(variables)}
    space = np.arange(1 << len(variables), dtype=np.uint64)
    keep = np.ones(space.shape, dtype=bool)
    for c in xors:
        mask = np.uint64(sum(1 << pos[v] for v in c.vars))
        keep &= (np.bitwise_count(space & mask) & np.uint8(1)) == c.rhs
    for l in assumptions:
        bit = (space >> np.uint64(pos[abs(l)])) & np.uint64(1)
        keep &= bit == (1 if l > 0 else 0)
    return space[keep]


def forced_literals(xors: Sequence[XorClause], assumptions: Sequence[int] = ()) -> Optional[set[int]]:
    """Literals true in every model; None when there is no model."""
    variables = variables_of(xors, assumptions)
    sols = models(xors, variables, assumptions)
    if sols.size == 0:
        return None
    out = set()
    for i, v in enumerate(variables):
        bits = (sols >> np.uint64(i)) & np.uint64(1)
        if bits.all():
            out.add(v)
        elif not bits.any():
            out.add(-v)
    return out


def entails_clause(xors: Sequence[XorClause], or_clause: Sequence[int]) -> bool:
    """Brute force: every model of xors satisfies the or-clause."""
    variables = variables_of(xors, or_clause)
    return models(xors, variables, [-l for l in or_clause]).size == 0


def assignment_of(bits: int, variables: Sequence[int]) -> dict[int, int]:
    return {v: (bits >> i) & 1 for i, v in enumerate(variables)}


def random_assumptions(rng: random.Random, variables: Sequence[int], max_size: Optional[int] = None) -> list[int]:
    if not variables:
        return []
    k = rng.randint(1, max_size or len(variables))
    return [v if rng.getrandbits(1) else -v for v in rng.sample(list(variables), min(k, len(variables)))]


def constraint_nx(xors: Sequence[XorClause]) -> nx.Graph:
    g = nx.Graph()
    for i, c in enumerate(xors):
        g.add_node(("c", i))
        for v in c.vars:
            g.add_edge(("v", v), ("c", i))
    return g


def oracle_xor_cycles(xors: Sequence[XorClause]) -> list[tuple[frozenset, list]]:
    """Simple cycles of the constraint graph that pass only through ternary
    clauses, via networkx; each as (edge set, node list)."""
    ternary = [c if len(c) == 3 else XorClause((), 0) for c in xors]
    g = constraint_nx(ternary)
    out = []
    for cyc in nx.simple_cycles(g):
        if len(cyc) < 4:
            continue
        edges = set()
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            v, c = (a, b) if a[0] == "v" else (b, a)
            edges.add((v[1], c[1]))
        out.append((frozenset(edges), cyc))
    return out


def oracle_cycle_partition(xors: Sequence[XorClause]) -> Optional[tuple[set, set]]:
    """Inner/outer sets forced by the xor-cycles; None when they overlap."""
    inner: set[int] = set()
    outer: set[int] = set()
    for edges, _ in oracle_xor_cycles(xors):
        for ci in {c for _, c in edges}:
            on = {v for v, c in edges if c == ci}
            inner |= on
            outer |= set(xors[ci].vars) - on
    if inner & outer:
        return None
    return inner, outer


def all_assignments(variables: Sequence[int]):
    for bits in itertools.product((0, 1), repeat=len(variables)):
        yield dict(zip(variables, bits))


def formula_models(formula, variables: Sequence[int]) -> np.ndarray:
    """Models of a cnf-xor formula over ``variables`` (which must cover it)."""
    pos = {v: i for i, v in enumerate(variables)}
    space = models(formula.xor_clauses, variables)
    keep = np.ones(space.shape, dtype=bool)
    for clause in formula.or_clauses:
        pos_mask = np.uint64(sum(1 << pos[l] for l in clause if l > 0))
        neg_mask = np.uint64(sum(1 << pos[-l] for l in clause if l < 0))
        keep &= ((space & pos_mask) != 0) | ((~space & neg_mask) != 0)
    return space[keep]

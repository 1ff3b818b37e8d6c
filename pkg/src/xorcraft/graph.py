"""Constraint graphs of xor-clause conjunctions.

The constraint graph is bipartite: one vertex per variable, one per
clause, and an edge ``(var, clause_index)`` whenever the variable occurs in
the clause.  Clause vertices carry the clause parity as label.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from xorcraft.core import XorClause

Edge = tuple[int, int]  # (variable, clause index)


@dataclass(frozen=True)
class ConstraintGraph:
    clauses: tuple[XorClause, ...]
    variables: tuple[int, ...]
    occurrences: dict[int, tuple[int, ...]] = field(compare=False, repr=False)

    @property
    def labels(self) -> dict[int, int]:
        return {i: c.rhs for i, c in enumerate(self.clauses)}

    def edges(self) -> list[Edge]:
        return [(v, i) for i, c in enumerate(self.clauses) for v in c.vars]

    @property
    def num_edges(self) -> int:
        return sum(len(c) for c in self.clauses)

    @property
    def num_vertices(self) -> int:
        return len(self.variables) + len(self.clauses)


def build_graph(xors: Iterable[XorClause]) -> ConstraintGraph:
    clauses = tuple(xors)
    occ: dict[int, list[int]] = defaultdict(list)
    for i, c in enumerate(clauses):
        for v in c.vars:
            occ[v].append(i)
    return ConstraintGraph(clauses, tuple(sorted(occ)), {v: tuple(ix) for v, ix in occ.items()})


def connected_components(g: ConstraintGraph) -> list[tuple[set[int], set[int]]]:
    """Components as (variables, clause indices); clause-only components come from empty clauses."""
    seen_c: set[int] = set()
    out = []
    for start in range(len(g.clauses)):
        if start in seen_c:
            continue
        vs: set[int] = set()
        cs = {start}
        seen_c.add(start)
        stack = [start]
        while stack:
            ci = stack.pop()
            for v in g.clauses[ci].vars:
                if v in vs:
                    continue
                vs.add(v)
                for cj in g.occurrences[v]:
                    if cj not in seen_c:
                        seen_c.add(cj)
                        cs.add(cj)
                        stack.append(cj)
        out.append((vs, cs))
    return out


def is_tree_like(g: ConstraintGraph) -> bool:
    return g.num_edges == g.num_vertices - len(connected_components(g))


def cyclomatic_number(g: ConstraintGraph) -> int:
    """Number of independent cycles, E - V + components."""
    return g.num_edges - g.num_vertices + len(connected_components(g))


def tree_part(xors: Sequence[XorClause]) -> tuple[list[XorClause], list[XorClause]]:
    """Split clauses into the tree-like part and the rest.

    A clause over n >= 1 variables is peeled when at least n - 1 of its
    variables occur in no other remaining clause.  Peeling only lowers
    occurrence counts, so the fixpoint does not depend on the order.
    Returned lists keep input order.
    """
    count: dict[int, int] = defaultdict(int)
    occ: dict[int, list[int]] = defaultdict(list)
    for i, c in enumerate(xors):
        for v in c.vars:
            count[v] += 1
            occ[v].append(i)

    def peelable(i: int) -> bool:
        c = xors[i]
        if not c.vars:
            return False
        shared = sum(1 for v in c.vars if count[v] > 1)
        return shared <= 1

    removed = [False] * len(xors)
    work = list(range(len(xors)))
    while work:
        i = work.pop()
        if removed[i] or not peelable(i):
            continue
        removed[i] = True
        for v in xors[i].vars:
            count[v] -= 1
            if count[v] == 1:
                work.extend(j for j in occ[v] if not removed[j])
    tree = [c for c, r in zip(xors, removed) if r]
    rest = [c for c, r in zip(xors, removed) if not r]
    return tree, rest


@dataclass
class BicompAnnotation:
    """Biconnected decomposition of the edges of a constraint graph."""

    edge_component: dict[Edge, int]
    component_edges: list[list[Edge]]

    def component_size(self, cid: int) -> int:
        return len(self.component_edges[cid])

    def is_bridge(self, edge: Edge) -> bool:
        return len(self.component_edges[self.edge_component[edge]]) == 1

    def cyclic_components(self) -> list[int]:
        return [cid for cid, es in enumerate(self.component_edges) if len(es) > 1]


def biconnected_components(g: ConstraintGraph) -> BicompAnnotation:
    """Tarjan's lowpoint DFS with an edge stack, iterative.

    Vertices are encoded as ``('v', var)`` and ``('c', index)``.
    """
    def neighbours(node):
        kind, key = node
        if kind == "v":
            return [("c", i) for i in g.occurrences[key]]
        return [("v", v) for v in g.clauses[key].vars]

    def edge_of(a, b) -> Edge:
        return (a[1], b[1]) if a[0] == "v" else (b[1], a[1])

    disc: dict[tuple, int] = {}
    low: dict[tuple, int] = {}
    edge_component: dict[Edge, int] = {}
    components: list[list[Edge]] = []
    counter = 0
    roots = [("v", v) for v in g.variables] + [("c", i) for i in range(len(g.clauses))]
    for root in roots:
        if root in disc:
            continue
        disc[root] = low[root] = counter
        counter += 1
        edge_stack: list[Edge] = []
        stack = [(root, None, iter(neighbours(root)))]
        while stack:
            node, parent, it = stack[-1]
            advanced = False
            for nxt in it:
                if nxt == parent:
                    continue
                e = edge_of(node, nxt)
                if nxt not in disc:
                    disc[nxt] = low[nxt] = counter
                    counter += 1
                    edge_stack.append(e)
                    stack.append((nxt, node, iter(neighbours(nxt))))
                    advanced = True
                    break
                if disc[nxt] < disc[node]:
                    # back edge; simple graph so no parallel edges to skip
                    edge_stack.append(e)
                    low[node] = min(low[node], disc[nxt])
            if advanced:
                continue
            stack.pop()
            if parent is None:
                continue
            low[parent] = min(low[parent], low[node])
            if low[node] >= disc[parent]:
                tree_edge = edge_of(parent, node)
                comp: list[Edge] = []
                while True:
                    e = edge_stack.pop()
                    comp.append(e)
                    if e == tree_edge:
                        break
                cid = len(components)
                for e in comp:
                    edge_component[e] = cid
                components.append(comp)
    return BicompAnnotation(edge_component, components)


def to_dot(g: ConstraintGraph, name: str = "constraints") -> str:
    """Graphviz text: circles for variables, boxes labelled with the parity for clauses."""
    lines = [f"graph {name} {{"]
    for v in g.variables:
        lines.append(f'  v{v} [shape=circle, label="x{v}"];')
    for i, c in enumerate(g.clauses):
        lines.append(f'  c{i} [shape=box, label="{c.rhs}"];')
    for v, i in g.edges():
        lines.append(f"  v{v} -- c{i};")
    lines.append("}")
    return "\n".join(lines) + "\n"

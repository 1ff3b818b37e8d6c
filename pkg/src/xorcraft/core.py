"""Xor-clauses in equation form and the cnf-xor formula container.

Variables are positive ints and literals are signed ints, as in DIMACS.
An :class:`XorClause` stores a strictly sorted variable tuple and a parity
bit ``rhs`` and asserts ``x1 ^ ... ^ xk == rhs``.  The clause with no
variables and ``rhs == 1`` is the unsatisfiable empty clause; with
``rhs == 0`` it is a tautology.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

OrClause = tuple[int, ...]
Assignment = Mapping[int, int]


@dataclass(frozen=True, order=True)
class XorClause:
    vars: tuple[int, ...]
    rhs: int

    def __post_init__(self):
        if self.rhs not in (0, 1):
            raise ValueError(f"rhs must be 0 or 1, got {self.rhs!r}")
        prev = 0
        for v in self.vars:
            if v <= prev:
                raise ValueError(f"variables must be positive and strictly increasing: {self.vars}")
            prev = v

    @classmethod
    def of(cls, variables: Iterable[int], rhs: int = 1) -> "XorClause":
        """Build a clause from any iterable of variables, cancelling repeats pairwise."""
        odd: set[int] = set()
        for v in variables:
            odd ^= {v}
        return cls(tuple(sorted(odd)), rhs & 1)

    def __len__(self) -> int:
        return len(self.vars)

    def __contains__(self, var: int) -> bool:
        return var in self.vars

    @property
    def is_tautology(self) -> bool:
        return not self.vars and self.rhs == 0

    @property
    def is_conflict(self) -> bool:
        return not self.vars and self.rhs == 1

    @property
    def mask(self) -> int:
        m = 0
        for v in self.vars:
            m |= 1 << v
        return m

    def literals(self) -> tuple[int, ...]:
        """Literal form: the listed literals xor to true (first literal absorbs rhs)."""
        if not self.vars:
            raise ValueError("the empty clause has no literal form")
        first = self.vars[0] if self.rhs == 1 else -self.vars[0]
        return (first,) + self.vars[1:]

    def __str__(self) -> str:
        body = " ^ ".join(f"x{v}" for v in self.vars) or "0"
        return f"({body} = {self.rhs})"


def normalize(literals: Iterable[int], constants: int = 0) -> XorClause:
    """Normal form of the literal-form clause ``l1 ^ ... ^ ln ^ T^constants``.

    Negations fold into the parity, repeated atoms cancel.  The literal
    form asserts that the xor of its literals (and constants) is true.
    """
    rhs = 1 ^ (constants & 1)
    odd: set[int] = set()
    for lit in literals:
        if lit == 0:
            raise ValueError("0 is not a literal")
        if lit < 0:
            rhs ^= 1
        odd ^= {abs(lit)}
    return XorClause(tuple(sorted(odd)), rhs)


def xor_add(a: XorClause, *rest: XorClause) -> XorClause:
    """Linear combination over GF(2): symmetric difference of variables, sum of parities."""
    odd = set(a.vars)
    rhs = a.rhs
    for b in rest:
        odd.symmetric_difference_update(b.vars)
        rhs ^= b.rhs
    return XorClause(tuple(sorted(odd)), rhs)


def substitute(clause: XorClause, var: int, body: Iterable[int] = (), constant: int = 0) -> XorClause:
    """Replace ``var`` in ``clause`` by the expression ``xor(body) ^ constant``."""
    if var not in clause.vars:
        return clause
    odd = set(clause.vars)
    odd.discard(var)
    for v in body:
        odd ^= {v}
    return XorClause(tuple(sorted(odd)), clause.rhs ^ (constant & 1))


def evaluate(clause: XorClause, assignment: Assignment) -> Optional[bool]:
    """True/False when ``assignment`` covers the clause, otherwise None."""
    parity = 0
    for v in clause.vars:
        value = assignment.get(v)
        if value is None:
            return None
        parity ^= value
    return parity == clause.rhs


def cnf_of_xor(clause: XorClause) -> list[OrClause]:
    """The 2^(k-1) or-clauses that forbid exactly the falsifying assignments."""
    if clause.is_conflict:
        raise ValueError("the empty xor-clause is unsatisfiable and has no CNF expansion")
    if clause.is_tautology:
        return []
    out = []
    for bits in itertools.product((0, 1), repeat=len(clause.vars)):
        if sum(bits) % 2 == clause.rhs:
            continue
        out.append(tuple(-v if b else v for v, b in zip(clause.vars, bits)))
    return out


def or_clause_satisfied(clause: Sequence[int], assignment: Assignment) -> bool:
    return any(assignment.get(abs(lit)) == (lit > 0) for lit in clause)


@dataclass
class CnfXorFormula:
    """Conjunction of or-clauses and xor-clauses over variables ``1..num_vars``."""

    or_clauses: list[OrClause] = field(default_factory=list)
    xor_clauses: list[XorClause] = field(default_factory=list)
    num_vars: int = 0

    @property
    def next_fresh_var(self) -> int:
        return self.num_vars + 1

    def fresh(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def add_xor(self, clause: XorClause) -> None:
        if clause.is_tautology:
            raise ValueError("tautological xor-clauses are not stored in a formula")
        if clause.vars:
            self.num_vars = max(self.num_vars, clause.vars[-1])
        self.xor_clauses.append(clause)

    def add_or(self, clause: Iterable[int]) -> None:
        lits = tuple(dict.fromkeys(clause))
        for lit in lits:
            self.num_vars = max(self.num_vars, abs(lit))
        self.or_clauses.append(lits)

    def xor_vars(self) -> set[int]:
        return {v for c in self.xor_clauses for v in c.vars}

    def variables(self) -> set[int]:
        out = self.xor_vars()
        out.update(abs(lit) for c in self.or_clauses for lit in c)
        return out

    def copy(self) -> "CnfXorFormula":
        return CnfXorFormula(list(self.or_clauses), list(self.xor_clauses), self.num_vars)

    def is_satisfied_by(self, assignment: Assignment) -> bool:
        return all(evaluate(c, assignment) for c in self.xor_clauses) and all(
            or_clause_satisfied(c, assignment) for c in self.or_clauses
        )

    @classmethod
    def from_xors(cls, clauses: Iterable[XorClause], num_vars: int = 0) -> "CnfXorFormula":
        f = cls(num_vars=num_vars)
        for c in clauses:
            f.add_xor(c)
        return f

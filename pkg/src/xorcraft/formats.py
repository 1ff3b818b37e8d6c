"""DIMACS CNF / xcnf reading and writing, and xor recovery from plain CNF.

xcnf is DIMACS plus clause lines starting with ``x`` whose literals xor
to true (the cryptominisat convention)::

    p cnf 3 2
    1 -2 0
    x1 2 3 0
"""

from __future__ import annotations

import logging
from collections import defaultdict
from pathlib import Path
from typing import Union

from xorcraft.core import CnfXorFormula, XorClause, cnf_of_xor, normalize

log = logging.getLogger(__name__)

DEFAULT_MAX_ARITY = 6
DEFAULT_EXPANSION_CAP = 20


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _literals(tokens: list[str], lineno: int) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        bad = next(t for t in tokens if not t.lstrip("-").isdigit())
        raise ParseError(f"malformed token {bad!r}", lineno) from None


def parse(text: str, strict: bool = False) -> CnfXorFormula:
    """Parse DIMACS CNF or xcnf text.

    With ``strict`` a variable above the header count is an error; otherwise
    ``num_vars`` grows to the largest variable seen.  A clause-count mismatch
    is only logged.  Or-clauses lose duplicate literals and tautologies are
    dropped; xor lines are normalized.
    """
    formula = CnfXorFormula()
    declared_vars = declared_clauses = None
    pending: list[int] = []
    pending_line = 0
    seen = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"bad problem line {line!r}", lineno)
            if declared_vars is not None:
                raise ParseError("duplicate problem line", lineno)
            nums = _literals(parts[2:], lineno)
            if min(nums) < 0:
                raise ParseError("negative count in problem line", lineno)
            declared_vars, declared_clauses = nums
            formula.num_vars = declared_vars
            continue
        if declared_vars is None:
            raise ParseError("clause before problem line", lineno)
        if line.startswith("x"):
            if pending:
                raise ParseError("xor line inside an unterminated clause", lineno)
            lits = _literals(line[1:].split(), lineno)
            if not lits or lits[-1] != 0 or 0 in lits[:-1]:
                raise ParseError("xor clause must be a single line terminated by 0", lineno)
            lits.pop()
            if not lits:
                raise ParseError("zero-length clause", lineno)
            _check_range(lits, declared_vars, strict, lineno)
            clause = normalize(lits)
            seen += 1
            formula.num_vars = max(formula.num_vars, max(abs(l) for l in lits))
            if not clause.is_tautology:
                formula.add_xor(clause)
            continue
        lits = _literals(line.split(), lineno)
        for lit in lits:
            if lit == 0:
                if not pending:
                    raise ParseError("zero-length clause", lineno)
                _check_range(pending, declared_vars, strict, pending_line)
                seen += 1
                clause = tuple(dict.fromkeys(pending))
                if not any(-l in clause for l in clause):
                    formula.add_or(clause)
                else:
                    formula.num_vars = max(formula.num_vars, max(abs(l) for l in clause))
                pending = []
            else:
                if not pending:
                    pending_line = lineno
                pending.append(lit)
    if pending:
        raise ParseError("clause not terminated by 0", pending_line)
    if declared_vars is None:
        raise ParseError("missing problem line")
    if seen != declared_clauses:
        log.warning("header declares %d clauses, found %d", declared_clauses, seen)
    return formula


def _check_range(lits: list[int], declared: int, strict: bool, lineno: int) -> None:
    top = max(abs(l) for l in lits)
    if top > declared:
        if strict:
            raise ParseError(f"literal {top} out of range 1..{declared}", lineno)
        log.warning("line %d: variable %d exceeds header count %d", lineno, top, declared)


def read(source: Union[str, Path], strict: bool = False) -> CnfXorFormula:
    """Parse a file; ``-`` reads stdin."""
    if str(source) == "-":
        import sys

        return parse(sys.stdin.read(), strict)
    return parse(Path(source).read_text(encoding="utf-8"), strict)


def emit(formula: CnfXorFormula, mode: str = "xcnf", expansion_cap: int = DEFAULT_EXPANSION_CAP,
         comments: tuple[str, ...] = ()) -> str:
    """Serialize ``formula``; ``mode`` is ``"xcnf"`` or ``"pure-cnf"``."""
    if mode not in ("xcnf", "pure-cnf"):
        raise ValueError(f"unknown mode {mode!r}")
    body: list[str] = [" ".join(map(str, c)) + " 0" for c in formula.or_clauses]
    num_vars = formula.num_vars
    for clause in formula.xor_clauses:
        if clause.is_conflict:
            # no literal form; a repeated variable cancels to the empty clause
            v = max(num_vars, 1)
            num_vars = v
            body.append(f"x{v} {v} 0" if mode == "xcnf" else f"{v} 0\n-{v} 0")
            continue
        if mode == "xcnf":
            body.append("x" + " ".join(map(str, clause.literals())) + " 0")
        else:
            if len(clause) > expansion_cap:
                raise ValueError(
                    f"xor-clause of width {len(clause)} exceeds the CNF expansion cap {expansion_cap}")
            body.extend(" ".join(map(str, c)) + " 0" for c in cnf_of_xor(clause))
    count = sum(line.count("\n") + 1 for line in body)
    lines = [f"c {c}" for c in comments]
    lines.append(f"p cnf {num_vars} {count}")
    lines.extend(body)
    return "\n".join(lines) + "\n"


def extract_xors(formula: CnfXorFormula, max_arity: int = DEFAULT_MAX_ARITY) -> CnfXorFormula:
    """Replace complete CNF encodings of xor-clauses by the xor-clauses themselves.

    Or-clauses are grouped by variable set.  For a group over k variables
    (2 <= k <= max_arity) and a parity p, if every clause of
    ``cnf_of_xor`` of the candidate is present, those clauses are replaced by
    the xor-clause.  Everything else is kept, so models are unchanged.
    """
    if max_arity < 2:
        raise ValueError("max_arity must be at least 2")
    groups: dict[tuple[int, ...], set[frozenset[int]]] = defaultdict(set)
    for clause in formula.or_clauses:
        key = tuple(sorted({abs(l) for l in clause}))
        if 2 <= len(key) <= max_arity and len(key) == len(clause):
            groups[key].add(frozenset(clause))
    consumed: set[frozenset[int]] = set()
    found: list[XorClause] = []
    for key in sorted(groups):
        members = groups[key]
        if len(members) < 2 ** (len(key) - 1):
            continue
        for rhs in (1, 0):
            candidate = XorClause(key, rhs)
            encoding = {frozenset(c) for c in cnf_of_xor(candidate)}
            if encoding <= members:
                found.append(candidate)
                consumed |= encoding
    out = CnfXorFormula(num_vars=formula.num_vars)
    for clause in formula.or_clauses:
        if frozenset(clause) not in consumed:
            out.add_or(clause)
    for clause in list(formula.xor_clauses) + found:
        out.add_xor(clause)
    return out

"""Propositional formulas in CNF with native parity constraints.

Literals are plain non-zero ints in DIMACS convention: ``v`` is the positive
literal of variable ``v`` and ``-v`` its negation. Clauses are stored as sorted
tuples so that equal clauses compare equal.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field


@dataclass(frozen=True)
class XorConstraint:
    """``sum(vars) mod 2 == parity``."""

    vars: frozenset
    parity: int

    def __init__(self, vars, parity):
        object.__setattr__(self, "vars", frozenset(vars))
        object.__setattr__(self, "parity", int(parity) & 1)

    def satisfied_by(self, assignment) -> bool:
        """``assignment`` maps var -> bool (or anything truthy)."""
        return sum(bool(assignment[v]) for v in self.vars) % 2 == self.parity


def normalize_clause(lits):
    """Sort by variable, drop duplicates. Returns None for a tautology."""
    seen = set()
    for lit in lits:
        lit = int(lit)
        if lit == 0:
            raise ValueError("0 is not a literal")
        if -lit in seen:
            return None
        seen.add(lit)
    return tuple(sorted(seen, key=lambda l: (abs(l), l < 0)))


@dataclass
class Formula:
    num_vars: int = 0
    clauses: list = field(default_factory=list)
    xors: list = field(default_factory=list)
    projection: set = field(default_factory=set)

    def new_var(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def new_vars(self, k):
        return [self.new_var() for _ in range(k)]

    def _check_var(self, v):
        if not 1 <= v <= self.num_vars:
            raise ValueError(f"variable {v} is not allocated (num_vars={self.num_vars})")

    def add_clause(self, lits):
        clause = normalize_clause(lits)
        if clause is None:
            return
        for lit in clause:
            self._check_var(abs(lit))
        self.clauses.append(clause)

    def add_clauses(self, clauses):
        for c in clauses:
            self.add_clause(c)

    def add_xor(self, xor: XorConstraint):
        for v in xor.vars:
            self._check_var(v)
        self.xors.append(xor)

    def add_projection(self, variables):
        for v in variables:
            self._check_var(v)
            self.projection.add(v)

    @property
    def is_trivially_unsat(self) -> bool:
        return any(len(c) == 0 for c in self.clauses)

    def copy(self) -> "Formula":
        # clause tuples are immutable, so shallow list copies are independent
        return Formula(self.num_vars, list(self.clauses), list(self.xors), set(self.projection))

    def materialize_xors(self, chunk_size: int = 4):
        """Lower every stored XOR to CNF and clear the XOR list."""
        xors, self.xors = self.xors, []
        for x in xors:
            add_xor_as_cnf(self, x, chunk_size)

    def evaluate(self, assignment) -> bool:
        """True iff a total assignment (var -> bool) satisfies clauses and XORs."""
        for c in self.clauses:
            if not any(assignment[abs(l)] == (l > 0) for l in c):
                return False
        return all(x.satisfied_by(assignment) for x in self.xors)


def parity_clauses(variables, parity):
    """Clauses forbidding every assignment of ``variables`` with the wrong parity."""
    variables = list(variables)
    out = []
    for signs in itertools.product((0, 1), repeat=len(variables)):
        if sum(signs) % 2 != parity:
            # block the assignment where var_j takes signs[j]
            out.append(tuple(-v if s else v for v, s in zip(variables, signs)))
    return out


def xor_clauses(variables, parity, chunk_size, top_var):
    """Chunked Tseitin clauses for ``xor(variables) == parity``.

    Auxiliaries are numbered from ``top_var + 1``; returns ``(clauses, top)``.
    Every block constrains at most ``chunk_size`` inputs and each auxiliary is
    the parity of its block, so a satisfying assignment of ``variables``
    extends uniquely.
    """
    if chunk_size < 2:
        raise ValueError("chunk_size must be >= 2")
    todo = sorted(variables)
    if not todo:
        return ([()] if parity else []), top_var
    out = []
    while len(todo) > chunk_size:
        block, todo = todo[:chunk_size], todo[chunk_size:]
        top_var += 1
        # carry == xor(block)  <=>  xor(block + [carry]) == 0
        out.extend(parity_clauses(block + [top_var], 0))
        todo.insert(0, top_var)
    out.extend(parity_clauses(todo, parity))
    return out, top_var


def add_xor_as_cnf(formula: Formula, xor: XorConstraint, chunk_size: int = 4):
    """Lower a parity constraint into ``formula``; auxiliaries stay out of the projection."""
    for v in xor.vars:
        formula._check_var(v)
    clauses, formula.num_vars = xor_clauses(xor.vars, xor.parity, chunk_size, formula.num_vars)
    formula.clauses.extend(normalize_clause(c) for c in clauses)


def to_dimacs(formula: Formula) -> str:
    if formula.xors:
        raise ValueError("formula has unmaterialized XOR constraints; call materialize_xors() first")
    lines = [f"p cnf {formula.num_vars} {len(formula.clauses)}"]
    proj = sorted(formula.projection)
    for i in range(0, len(proj), 10):
        lines.append("c ind " + " ".join(map(str, proj[i:i + 10])) + " 0")
    for c in formula.clauses:
        lines.append(" ".join(map(str, c + (0,))))
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> Formula:
    """Read DIMACS CNF, collecting ``c ind ... 0`` lines into the projection."""
    formula = Formula()
    declared = None
    pending = []
    proj = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("c"):
            parts = line.split()
            if len(parts) > 1 and parts[0] == "c" and parts[1] == "ind":
                proj.extend(int(t) for t in parts[2:] if t != "0")
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {lineno}: bad problem line {raw!r}")
            formula.num_vars = int(parts[2])
            declared = int(parts[3])
            continue
        try:
            pending.extend(int(t) for t in line.split())
        except ValueError:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}") from None
    if declared is None:
        raise ValueError("missing 'p cnf' header")
    clause = []
    for lit in pending:
        if lit == 0:
            normalized = normalize_clause(clause)
            if normalized is not None:
                formula.clauses.append(normalized)
            clause = []
        else:
            if abs(lit) > formula.num_vars:
                formula.num_vars = abs(lit)
            clause.append(lit)
    if clause:
        normalized = normalize_clause(clause)
        if normalized is not None:
            formula.clauses.append(normalized)
    formula.add_projection(proj)
    return formula

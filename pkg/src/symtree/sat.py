"""Complete SAT decision procedure and projected model enumeration.

The built-in engine is a conflict-driven clause-learning solver (two watched
literals, first-UIP learning, Luby restarts). Branching is static: lowest
unassigned variable, positive phase first, unless a seed is given, in which
case variable order and phases are drawn from it.

Two other backends share the same tiny interface (``add_clause``, ``solve``,
``values``): :class:`PysatSolver` wraps MiniSat through python-sat, and
:class:`ExternalSolver` shells out to any DIMACS-conformant binary.
"""

from __future__ import annotations

import logging
import os
import random
import shlex
import subprocess
import tempfile
from dataclasses import dataclass

from .cnf import Formula, to_dimacs

logger = logging.getLogger(__name__)

SAT = "SAT"
UNSAT = "UNSAT"


class BudgetExhausted(RuntimeError):
    """The conflict budget ran out before the solver reached a verdict."""


@dataclass
class SolveResult:
    status: str
    model: dict | None = None

    @property
    def satisfiable(self) -> bool:
        return self.status == SAT

    def __bool__(self):
        return self.satisfiable


def _luby(i):
    # 1 1 2 1 1 2 4 1 1 2 ...
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i = i % size
    return 2 ** seq


def _ilit(d):
    return 2 * d if d > 0 else 2 * (-d) + 1


class CDCLSolver:
    """Incremental CDCL solver over DIMACS-style integer literals.

    Internally literal ``2v`` is ``v`` and ``2v+1`` is ``-v``; ``lval[l]`` is
    1, -1 or 0 (unassigned).
    """

    restart_base = 100

    def __init__(self, num_vars=0, seed=None, max_conflicts=None):
        self.seed = seed
        self.max_conflicts = max_conflicts
        self._rng = random.Random(seed) if seed is not None else None
        self.nv = 0
        self.lval = [0, 0]
        self.level = [0]
        self.reason = [None]
        self.seen = [0]
        self.watches = [[], []]
        self.rank = [0.0]
        self.phase = [0]
        self.trail = []
        self.trail_lim = []
        self.qhead = 0
        self.ok = True
        self.clauses = []
        self.learnts = []
        self.max_learnts = 4000
        self.order = []
        self.order_pos = [0]
        self.next_idx = 0
        self._order_dirty = True
        self.conflicts = 0
        self.ensure_vars(num_vars)

    def ensure_vars(self, n):
        while self.nv < n:
            self.nv += 1
            self.lval += (0, 0)
            self.level.append(0)
            self.reason.append(None)
            self.seen.append(0)
            self.watches += ([], [])
            self.order_pos.append(0)
            if self._rng is None:
                self.rank.append(float(self.nv))
                self.phase.append(0)
            else:
                self.rank.append(self._rng.random())
                self.phase.append(self._rng.randrange(2))
            self._order_dirty = True

    def _rebuild_order(self):
        self.order = sorted(range(1, self.nv + 1), key=self.rank.__getitem__)
        for i, v in enumerate(self.order):
            self.order_pos[v] = i
        self.next_idx = 0
        self._order_dirty = False

    # -- trail ---------------------------------------------------------------

    def _enqueue(self, lit, reason):
        self.lval[lit] = 1
        self.lval[lit ^ 1] = -1
        v = lit >> 1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _cancel_until(self, lvl):
        if len(self.trail_lim) <= lvl:
            return
        lval, reason, pos = self.lval, self.reason, self.order_pos
        stop = self.trail_lim[lvl]
        nxt = self.next_idx
        for lit in self.trail[stop:]:
            v = lit >> 1
            lval[lit] = 0
            lval[lit ^ 1] = 0
            reason[v] = None
            if pos[v] < nxt:
                nxt = pos[v]
        self.next_idx = nxt
        del self.trail[stop:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    # -- clauses -------------------------------------------------------------

    def add_clause(self, lits) -> bool:
        """Add a clause; returns False once the clause set is known UNSAT."""
        if not self.ok:
            return False
        self._cancel_until(0)
        internal = set()
        for d in lits:
            d = int(d)
            self.ensure_vars(abs(d))
            internal.add(_ilit(d))
        lval = self.lval
        clause = []
        for l in internal:
            if l ^ 1 in internal or lval[l] == 1:
                return True
            if lval[l] == 0:
                clause.append(l)
        if not clause:
            self.ok = False
            return False
        if len(clause) == 1:
            self._enqueue(clause[0], None)
            if self._propagate() is not None:
                self.ok = False
            return self.ok
        clause.sort()
        self.clauses.append(clause)
        self.watches[clause[0]].append(clause)
        self.watches[clause[1]].append(clause)
        return True

    def add_clauses(self, clauses):
        for c in clauses:
            self.add_clause(c)
        return self.ok

    def _propagate(self):
        lval, watches, trail = self.lval, self.watches, self.trail
        level, reason = self.level, self.reason
        lvl = len(self.trail_lim)
        while self.qhead < len(trail):
            fl = trail[self.qhead] ^ 1
            self.qhead += 1
            ws = watches[fl]
            n = len(ws)
            i = j = 0
            while i < n:
                c = ws[i]
                i += 1
                if c[0] == fl:
                    c[0] = c[1]
                    c[1] = fl
                first = c[0]
                if lval[first] == 1:
                    ws[j] = c
                    j += 1
                    continue
                for k in range(2, len(c)):
                    lk = c[k]
                    if lval[lk] != -1:
                        c[1] = lk
                        c[k] = fl
                        watches[lk].append(c)
                        break
                else:
                    ws[j] = c
                    j += 1
                    if lval[first] == -1:
                        while i < n:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        self.qhead = len(trail)
                        return c
                    lval[first] = 1
                    lval[first ^ 1] = -1
                    v = first >> 1
                    level[v] = lvl
                    reason[v] = c
                    trail.append(first)
            del ws[j:]
        return None

    def _analyze(self, confl):
        seen, level, reason, trail = self.seen, self.level, self.reason, self.trail
        cur = len(self.trail_lim)
        learnt = [0]
        path = 0
        p = -1
        idx = len(trail) - 1
        while True:
            for q in confl:
                if q == p:
                    continue
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = 1
                    if level[v] >= cur:
                        path += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            v = p >> 1
            confl = reason[v]
            seen[v] = 0
            path -= 1
            if path == 0:
                break
        learnt[0] = p ^ 1
        for q in learnt[1:]:
            seen[q >> 1] = 0
        if len(learnt) == 1:
            return learnt, 0
        best = max(range(1, len(learnt)), key=lambda k: level[learnt[k] >> 1])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, level[learnt[1] >> 1]

    def _reduce_learnts(self):
        # only called at level 0, where no learnt clause is a live reason
        self.learnts.sort(key=len)
        self.learnts = self.learnts[: len(self.learnts) // 2]
        for ws in self.watches:
            ws.clear()
        for c in self.clauses:
            self.watches[c[0]].append(c)
            self.watches[c[1]].append(c)
        for c in self.learnts:
            self.watches[c[0]].append(c)
            self.watches[c[1]].append(c)

    def _pick_branch(self):
        lval, order = self.lval, self.order
        i = self.next_idx
        while i < len(order):
            v = order[i]
            if lval[2 * v] == 0:
                self.next_idx = i
                return 2 * v + self.phase[v]
            i += 1
        self.next_idx = i
        return -1

    # -- search --------------------------------------------------------------

    def solve(self, assumptions=()) -> bool:
        """Decide satisfiability under ``assumptions`` (DIMACS literals).

        Raises :class:`BudgetExhausted` if ``max_conflicts`` conflicts occur
        within this call.
        """
        if not self.ok:
            return False
        self._cancel_until(0)
        assumps = []
        for a in assumptions:
            self.ensure_vars(abs(a))
            assumps.append(_ilit(a))
        if self._order_dirty:
            self._rebuild_order()
        self.next_idx = 0
        if self._propagate() is not None:
            self.ok = False
            return False
        lval = self.lval
        conflicts = 0
        restarts = 0
        restart_limit = _luby(0) * self.restart_base
        since_restart = 0
        while True:
            confl = self._propagate()
            if confl is not None:
                conflicts += 1
                since_restart += 1
                self.conflicts += 1
                if not self.trail_lim:
                    self.ok = False
                    return False
                if self.max_conflicts is not None and conflicts > self.max_conflicts:
                    self._cancel_until(0)
                    raise BudgetExhausted(f"conflict budget of {self.max_conflicts} exhausted")
                learnt, bt = self._analyze(confl)
                self._cancel_until(bt)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self.learnts.append(learnt)
                    self.watches[learnt[0]].append(learnt)
                    self.watches[learnt[1]].append(learnt)
                    self._enqueue(learnt[0], learnt)
                continue
            if since_restart >= restart_limit:
                restarts += 1
                since_restart = 0
                restart_limit = _luby(restarts) * self.restart_base
                self._cancel_until(0)
                if len(self.learnts) > self.max_learnts:
                    self._reduce_learnts()
                continue
            lvl = len(self.trail_lim)
            if lvl < len(assumps):
                p = assumps[lvl]
                if lval[p] == -1:
                    return False
                self.trail_lim.append(len(self.trail))
                if lval[p] == 0:
                    self._enqueue(p, None)
                continue
            lit = self._pick_branch()
            if lit < 0:
                return True
            self.trail_lim.append(len(self.trail))
            self._enqueue(lit, None)

    def value(self, v) -> bool:
        return self.lval[2 * v] == 1

    def values(self, variables):
        lval = self.lval
        return tuple(lval[2 * v] == 1 for v in variables)


class PysatSolver:
    """Same interface as :class:`CDCLSolver`, backed by MiniSat via python-sat."""

    def __init__(self, num_vars=0, seed=None, max_conflicts=None, name="minisat22"):
        from pysat.solvers import Solver

        self._s = Solver(name=name)
        self.max_conflicts = max_conflicts
        self._model = None
        self.ok = True

    def add_clause(self, lits):
        self._s.add_clause(lits)
        return True

    def add_clauses(self, clauses):
        self._s.append_formula([list(c) for c in clauses])
        return True

    def solve(self, assumptions=()):
        if self.max_conflicts is None:
            res = self._s.solve(assumptions=assumptions)
        else:
            self._s.conf_budget(self.max_conflicts)
            res = self._s.solve_limited(assumptions=assumptions)
            if res is None:
                raise BudgetExhausted(f"conflict budget of {self.max_conflicts} exhausted")
        self._model = self._s.get_model() if res else None
        return bool(res)

    # variables that occur in no clause are absent from MiniSat's model
    def value(self, v):
        return v <= len(self._model) and self._model[v - 1] > 0

    def values(self, variables):
        m = self._model
        n = len(m)
        return tuple(v <= n and m[v - 1] > 0 for v in variables)

    def delete(self):
        self._s.delete()


def pysat_available() -> bool:
    try:
        import pysat.solvers  # noqa: F401
    except ImportError:
        return False
    return True


def make_solver(engine="builtin", num_vars=0, seed=None, max_conflicts=None):
    """Incremental solver for ``engine``: "builtin", "auto", "pysat" or
    "pysat:<name>" for any python-sat backend (default MiniSat 2.2)."""
    if engine == "auto":
        engine = "pysat" if pysat_available() else "builtin"
    if engine == "builtin":
        return CDCLSolver(num_vars, seed=seed, max_conflicts=max_conflicts)
    if engine == "pysat" or engine.startswith("pysat:"):
        name = engine.partition(":")[2] or "minisat22"
        return PysatSolver(num_vars, seed=seed, max_conflicts=max_conflicts, name=name)
    raise ValueError(f"unknown engine {engine!r}")


class ExternalSolver:
    """Run a DIMACS solver binary: ``<command> <file.cnf>``.

    The command must print ``s SATISFIABLE`` / ``s UNSATISFIABLE`` and, when
    satisfiable, ``v`` lines with the model.
    """

    def __init__(self, command, timeout=None):
        self.command = command
        self.timeout = timeout

    def solve(self, formula: Formula, assumptions=()) -> SolveResult:
        f = formula.copy()
        if f.xors:
            f.materialize_xors()
        for a in assumptions:
            f.add_clause([a])
        fd, path = tempfile.mkstemp(suffix=".cnf")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(to_dimacs(f))
            proc = subprocess.run(
                shlex.split(self.command) + [path],
                capture_output=True, text=True, timeout=self.timeout,
            )
        finally:
            os.unlink(path)
        status = None
        lits = []
        for line in proc.stdout.splitlines():
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "s":
                status = " ".join(parts[1:])
            elif parts[0] == "v":
                lits.extend(int(t) for t in parts[1:])
        if status == "UNSATISFIABLE":
            return SolveResult(UNSAT)
        if status != "SATISFIABLE":
            raise RuntimeError(
                f"external solver {self.command!r} gave no verdict (exit {proc.returncode}): "
                f"{proc.stderr.strip()[:200]}"
            )
        model = {v: False for v in range(1, formula.num_vars + 1)}
        for lit in lits:
            if lit and abs(lit) <= formula.num_vars:
                model[abs(lit)] = lit > 0
        return SolveResult(SAT, model)


def _load(solver, formula: Formula):
    f = formula
    if f.xors:
        f = f.copy()
        f.materialize_xors()
    if hasattr(solver, "ensure_vars"):
        solver.ensure_vars(f.num_vars)
    solver.add_clauses(f.clauses)
    return f


def solve(formula: Formula, assumptions=(), engine="builtin", seed=None, max_conflicts=None) -> SolveResult:
    """Decide ``formula`` under ``assumptions``; the input is never modified.

    ``engine`` is "builtin", "pysat", "auto" or an :class:`ExternalSolver`.
    A returned model covers variables ``1..formula.num_vars`` and is checked
    against every clause and XOR before it is handed out.
    """
    for a in assumptions:
        if not 1 <= abs(a) <= formula.num_vars:
            raise ValueError(f"assumption {a} refers to an unallocated variable")
    if isinstance(engine, ExternalSolver):
        result = engine.solve(formula, assumptions)
    else:
        solver = make_solver(engine, formula.num_vars, seed=seed, max_conflicts=max_conflicts)
        _load(solver, formula)
        if not solver.solve(assumptions):
            return SolveResult(UNSAT)
        variables = range(1, formula.num_vars + 1)
        result = SolveResult(SAT, dict(zip(variables, solver.values(variables))))
    if result.satisfiable:
        if not formula.evaluate(result.model) or any(result.model[abs(a)] != (a > 0) for a in assumptions):
            raise RuntimeError("solver returned a model that does not satisfy the formula")
    return result


def enumerate_projected(formula: Formula, limit, engine="builtin", max_conflicts=None):
    """Enumerate distinct projected models with blocking clauses.

    Returns ``(models, exhausted)`` where each model is a dict over the
    projection variables and ``exhausted`` tells whether no further projected
    model exists. The input formula is left untouched.
    """
    if not formula.projection:
        raise ValueError("projection set is empty")
    if limit < 1:
        raise ValueError("limit must be >= 1")
    proj = sorted(formula.projection)
    solver = make_solver(engine, formula.num_vars, max_conflicts=max_conflicts)
    _load(solver, formula)
    models = []
    while len(models) < limit:
        if not solver.solve():
            return models, True
        vals = solver.values(proj)
        models.append(dict(zip(proj, vals)))
        solver.add_clause([-v if b else v for v, b in zip(proj, vals)])
    return models, not solver.solve()

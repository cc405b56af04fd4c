"""Projected model counting, exact and (epsilon, delta)-approximate.

The exact counter is a DPLL search that branches on projection variables only,
splits the residual formula into independent components and caches component
counts. Auxiliary variables are existentially quantified: they are assigned by
unit propagation, eliminated when pure, and checked for satisfiability once no
projection variable remains in a component.

The approximate counter partitions the projected solution space with random
parity constraints (each projection variable kept with probability 1/2, random
parity bit), looks for the number of constraints at which a cell holds fewer
than ``pivot`` solutions, and reports the median of ``cell size * 2**m`` over
independent rounds.
"""

from __future__ import annotations

import logging
import math
import random
import statistics
from dataclasses import dataclass

from .cnf import Formula, xor_clauses
from .encoding import VarLayout, add_observation
from .sat import BudgetExhausted, CDCLSolver, make_solver

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.8
DEFAULT_DELTA = 0.2


class CapExceeded(Exception):
    """The exact count reached the requested cap."""

    def __init__(self, cap):
        super().__init__(f"projected count is at least {cap}")
        self.cap = cap


class CountingFailure(RuntimeError):
    """No hashing round produced an estimate."""


@dataclass(frozen=True)
class CountEstimate:
    value: int
    epsilon: float | None = None
    delta: float | None = None
    seed: int | None = None
    exact: bool = False

    def __int__(self):
        return int(self.value)

    def within(self, truth, epsilon=None) -> bool:
        """``truth / (1 + eps) <= value <= truth * (1 + eps)``."""
        eps = self.epsilon if epsilon is None else epsilon
        return truth / (1 + eps) <= self.value <= truth * (1 + eps)


def pivot(epsilon) -> int:
    return math.ceil(9.84 * (1 + epsilon / (1 + epsilon)) * (1 + 1 / epsilon) ** 2)


def n_rounds(delta) -> int:
    return math.ceil(17 * math.log2(3 / delta))


def _check_params(epsilon, delta):
    if not epsilon > 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")


def _lowered(formula: Formula, chunk_size=4) -> Formula:
    if not formula.xors:
        return formula
    f = formula.copy()
    f.materialize_xors(chunk_size)
    return f


# -- exact ---------------------------------------------------------------------

def _aux_satisfiable(clauses) -> bool:
    if all(any(l < 0 for l in c) for c in clauses):
        return True
    if all(any(l > 0 for l in c) for c in clauses):
        return True
    s = CDCLSolver()
    s.add_clauses(clauses)
    return s.solve()


def _components(clauses):
    parent = {}

    def find(v):
        root = v
        while parent.get(root, root) != root:
            root = parent[root]
        while v != root:
            parent[v], v = root, parent[v]
        return root

    for c in clauses:
        r = find(abs(c[0]))
        for l in c[1:]:
            s = find(abs(l))
            if s != r:
                parent[s] = r
    groups = {}
    for c in clauses:
        groups.setdefault(find(abs(c[0])), []).append(c)
    return list(groups.values())


class _ExactCounter:
    def __init__(self, projection, max_nodes=None, cache=None):
        self.proj = frozenset(projection)
        # keys are component clause sets, whose counts do not depend on the
        # surrounding formula, so one cache may serve many calls
        self.cache = {} if cache is None else cache
        self.nodes = 0
        self.max_nodes = max_nodes

    def reduce(self, clauses, lits):
        """Unit propagation plus pure-literal elimination of auxiliary vars.

        Returns ``(residual, assignment)`` or None on conflict.
        """
        val = {}
        pending = list(lits)
        first = True
        while pending or first:
            first = False
            for l in pending:
                v = l if l > 0 else -l
                b = l > 0
                old = val.get(v)
                if old is None:
                    val[v] = b
                elif old != b:
                    return None
            pending = []
            new = []
            get = val.get
            for c in clauses:
                keep = None
                for idx, l in enumerate(c):
                    b = get(l if l > 0 else -l)
                    if b is None:
                        if keep is not None:
                            keep.append(l)
                        continue
                    if b == (l > 0):
                        break
                    if keep is None:
                        keep = list(c[:idx])
                else:
                    if keep is None:
                        new.append(c)
                    elif not keep:
                        return None
                    elif len(keep) == 1:
                        pending.append(keep[0])
                    else:
                        new.append(tuple(keep))
            clauses = new
        proj = self.proj
        while True:
            polarity = {}
            for c in clauses:
                for l in c:
                    v = l if l > 0 else -l
                    if v not in proj:
                        polarity[v] = polarity.get(v, 0) | (1 if l > 0 else 2)
            pure = {v if p == 1 else -v for v, p in polarity.items() if p != 3}
            if not pure:
                break
            clauses = [c for c in clauses if not any(l in pure for l in c)]
        return clauses, val

    def count_component(self, clauses):
        key = frozenset(clauses)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        occ = {}
        for c in clauses:
            for l in c:
                v = l if l > 0 else -l
                if v in self.proj:
                    occ[v] = occ.get(v, 0) + 1
        if not occ:
            result = 1 if _aux_satisfiable(clauses) else 0
            self.cache[key] = result
            return result
        self.nodes += 1
        if self.max_nodes is not None and self.nodes > self.max_nodes:
            raise BudgetExhausted(f"exact counter exceeded {self.max_nodes} search nodes")
        var = max(occ, key=lambda v: (occ[v], -v))
        result = 0
        for lit in (var, -var):
            reduced = self.reduce(clauses, [lit])
            if reduced is None:
                continue
            result += self.count_residual(reduced, len(occ))
        self.cache[key] = result
        return result

    def count_residual(self, reduced, n_proj_before):
        residual, val = reduced
        remaining = {abs(l) for c in residual for l in c} & self.proj
        assigned = sum(1 for v in val if v in self.proj)
        free = n_proj_before - assigned - len(remaining)
        total = 1 << free
        for comp in _components(residual):
            total *= self.count_component(comp)
            if total == 0:
                break
        return total


def exact_count_projected(formula: Formula, cap=None, max_nodes=None, cache=None) -> CountEstimate:
    """Exact number of projection assignments that extend to a model.

    Raises :class:`CapExceeded` when the count is ``>= cap``. ``cache`` is an
    optional dict reused across calls on formulas sharing one projection set.
    """
    if not formula.projection:
        raise ValueError("projected counting needs a non-empty projection set")
    f = _lowered(formula)
    counter = _ExactCounter(f.projection, max_nodes, cache)
    if any(len(c) == 0 for c in f.clauses):
        value = 0
    else:
        reduced = counter.reduce(f.clauses, [])
        value = 0 if reduced is None else counter.count_residual(reduced, len(f.projection))
    if cap is not None and value >= cap:
        raise CapExceeded(cap)
    return CountEstimate(value, exact=True)


# -- approximate -----------------------------------------------------------------

class _HashedCells:
    """Nested cells ``F and h_1 and ... and h_m`` for one hashing round.

    Rows are lowered to CNF on demand behind activation literals, so a single
    incremental solver serves every level. Solutions found at any level are
    remembered; since cells are nested, membership at another level is decided
    by evaluating the rows directly.
    """

    def __init__(self, base: Formula, proj, rng, engine, chunk_size, max_conflicts):
        self.proj = proj
        self.rng = rng
        self.chunk_size = chunk_size
        self.solver = make_solver(engine, base.num_vars, max_conflicts=max_conflicts)
        self.solver.add_clauses(base.clauses)
        self.top_var = base.num_vars
        self.rows = []
        self.acts = []
        self.found = []
        self.complete_at = None
        self.cache = {}

    def _extend_rows(self, m):
        p = len(self.proj)
        while len(self.rows) < m:
            mask = self.rng.getrandbits(p)
            parity = self.rng.getrandbits(1)
            self.rows.append((mask, parity))
            members = [self.proj[k] for k in range(p) if mask >> k & 1]
            clauses, top = xor_clauses(members, parity, self.chunk_size, self.top_var)
            act = self.top_var = top + 1
            self.solver.add_clauses([c + (-act,) for c in clauses])
            self.acts.append(act)

    def _in_cell(self, sol, m):
        for mask, parity in self.rows[:m]:
            if (sol & mask).bit_count() & 1 != parity:
                return False
        return True

    def count(self, m, thresh):
        """``min(|cell(m)|, thresh)``."""
        if m in self.cache:
            return self.cache[m]
        self._extend_rows(m)
        known = sum(1 for s in self.found if self._in_cell(s, m))
        if not (known >= thresh or (self.complete_at is not None and m >= self.complete_at)):
            proj = self.proj
            assumptions = self.acts[:m]
            while known < thresh:
                if not self.solver.solve(assumptions):
                    if self.complete_at is None or m < self.complete_at:
                        self.complete_at = m
                    break
                vals = self.solver.values(proj)
                sol = 0
                for k, b in enumerate(vals):
                    if b:
                        sol |= 1 << k
                self.found.append(sol)
                known += 1
                self.solver.add_clause([-v if b else v for v, b in zip(proj, vals)])
        result = min(known, thresh)
        self.cache[m] = result
        return result


def _search_level(cells, thresh, n_proj, start):
    """Smallest m with ``|cell(m)| < thresh``, galloping from ``start``.

    ``|cell(0)| >= thresh`` is known. Returns None if even ``n_proj`` rows
    leave a large cell.
    """
    m = min(max(start, 1), n_proj)
    step = 1
    if cells.count(m, thresh) >= thresh:
        lo = m
        while True:
            if lo == n_proj:
                return None
            nxt = min(lo + step, n_proj)
            if cells.count(nxt, thresh) < thresh:
                hi = nxt
                break
            lo = nxt
            step *= 2
    else:
        hi = m
        while True:
            nxt = max(hi - step, 0)
            if nxt == 0 or cells.count(nxt, thresh) >= thresh:
                lo = nxt
                break
            hi = nxt
            step *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if cells.count(mid, thresh) >= thresh:
            lo = mid
        else:
            hi = mid
    return hi


def approx_count(formula: Formula, epsilon=DEFAULT_EPSILON, delta=DEFAULT_DELTA, seed=0,
                 engine="auto", chunk_size=4, max_conflicts=None) -> CountEstimate:
    """Hashing-based projected count with a ``(1 + epsilon)`` multiplicative
    guarantee holding with probability at least ``1 - delta``.

    Deterministic in ``(formula, epsilon, delta, seed)``: cell sizes do not
    depend on the order in which a solver finds solutions, so the engine only
    affects speed. When the unhashed formula has fewer than ``pivot`` projected
    solutions the exact count is returned.
    """
    _check_params(epsilon, delta)
    if not formula.projection:
        raise ValueError("projected counting needs a non-empty projection set")
    base = _lowered(formula, chunk_size)
    if base.is_trivially_unsat:
        return CountEstimate(0, epsilon, delta, seed, exact=True)
    proj = sorted(base.projection)
    thresh = pivot(epsilon)

    cells = _HashedCells(base, proj, None, engine, chunk_size, max_conflicts)
    small = cells.count(0, thresh)
    if small < thresh:
        return CountEstimate(small, epsilon, delta, seed, exact=True)

    estimates = []
    m = 1
    for r in range(n_rounds(delta)):
        rng = random.Random(f"{seed}:{r}")
        cells = _HashedCells(base, proj, rng, engine, chunk_size, max_conflicts)
        level = _search_level(cells, thresh, len(proj), m)
        if level is None:
            logger.debug("round %d: no level below threshold", r)
            continue
        m = level
        estimates.append(cells.count(level, thresh) << level)
    if not estimates:
        raise CountingFailure("every hashing round failed to reach a small cell")
    return CountEstimate(statistics.median_low(estimates), epsilon, delta, seed, exact=False)


def count_under_hypothesis(formula: Formula, layout: VarLayout, x, b, epsilon=DEFAULT_EPSILON,
                           delta=DEFAULT_DELTA, seed=0, exact_cap=None, engine="auto",
                           cache=None) -> CountEstimate:
    """Count of the version space restricted to trees mapping ``x`` to ``b``.

    Works on a scratch copy. Uses the exact counter when the restricted count
    is below ``exact_cap``; otherwise the hashing estimate.
    """
    scratch = formula.copy()
    add_observation(scratch, layout.copy(), x, b)
    if exact_cap:
        try:
            return exact_count_projected(scratch, cap=exact_cap, cache=cache)
        except CapExceeded:
            pass
    return approx_count(scratch, epsilon, delta, seed, engine=engine)

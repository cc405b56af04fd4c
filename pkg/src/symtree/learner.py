"""Counting-guided active learning of a hidden decision tree.

Each round scores every unqueried input ``x`` by ``min(c0, c1)``, where ``cb``
is the (approximate) number of surviving trees that map ``x`` to ``b``, asks
the oracle about the best input, and adds the answer to the version space.
Learning stops when at most one tree survives, or when progress stalls and a
miter check proves every survivor computes the same function. Progress stalls
when the count does not move after a query, or when the best query scores
zero, i.e. no unqueried input can split the survivors any more.
"""

from __future__ import annotations

import enum
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .counting import (
    DEFAULT_DELTA,
    DEFAULT_EPSILON,
    CapExceeded,
    CountEstimate,
    approx_count,
    count_under_hypothesis,
    exact_count_projected,
)
from .encoding import VarLayout, add_observation, build_miter, decode_model, encode_base
from .sat import solve
from .tree import DecisionTree, TreeSpec, all_inputs, bitstring, check_input, evaluate

logger = logging.getLogger(__name__)


class Status(str, enum.Enum):
    UNIQUE_TREE = "UniqueTree"
    FUNCTIONAL_COLLAPSE = "FunctionalCollapse"
    NO_UNIQUE_TREE = "NoUniqueTree"

    def __str__(self):
        return self.value


class LearnerError(RuntimeError):
    """A counter, solver or oracle failure, annotated with the round."""


class OracleOutsideSpace(LearnerError):
    """The oracle's answers are not consistent with any tree of the spec."""


STAGNATION_RULES = ("paper", "no-progress")


@dataclass
class LearnerConfig:
    epsilon: float = DEFAULT_EPSILON
    delta: float = DEFAULT_DELTA
    max_rounds: int | None = None  # None means 2**n_features
    seed: int = 0
    stagnation: str = "paper"
    exact_cap: int | None = 10_000
    engine: str = "auto"
    candidate_guard: int = 16
    n_jobs: int = 1
    # check for collapse before asking when the best query scores 0
    anticipate: bool = True

    def __post_init__(self):
        if self.max_rounds is not None and self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if self.stagnation not in STAGNATION_RULES:
            raise ValueError(f"stagnation must be one of {STAGNATION_RULES}")
        if not self.epsilon > 0 or not 0 < self.delta < 1:
            raise ValueError("need epsilon > 0 and 0 < delta < 1")


@dataclass
class QueryRecord:
    round: int
    x_star: tuple
    y_star: int
    score: int
    est_before: CountEstimate
    est_after: CountEstimate
    select_time: float
    count_time: float
    stagnated: bool = False
    collapse: bool | None = None

    def to_dict(self, timings=False):
        d = {
            "round": self.round,
            "query": bitstring(self.x_star),
            "answer": self.y_star,
            "score": self.score,
            "estimate_before": self.est_before.value,
            "estimate_after": self.est_after.value,
            "exact_after": self.est_after.value if self.est_after.exact else None,
            "stagnated": self.stagnated,
            "collapse": self.collapse,
        }
        if timings:
            d["select_time"] = self.select_time
            d["count_time"] = self.count_time
        return d


@dataclass
class LearnOutcome:
    status: Status
    tree: DecisionTree | None
    trace: list = field(default_factory=list)
    initial_count: CountEstimate | None = None
    final_count: CountEstimate | None = None
    split_exhausted: bool = False  # stopped because the best query scored 0

    @property
    def n_queries(self):
        return len(self.trace)

    @property
    def stagnation_fired(self):
        return any(r.stagnated for r in self.trace)

    @property
    def collapse_confirmed(self):
        return self.status is Status.FUNCTIONAL_COLLAPSE


def _derive_seed(*parts) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def count_version_space(formula, config: LearnerConfig, seed, cache=None) -> CountEstimate:
    """Exact count when it is below ``config.exact_cap``, otherwise the estimate."""
    if config.exact_cap:
        try:
            return exact_count_projected(formula, cap=config.exact_cap, cache=cache)
        except CapExceeded:
            pass
    return approx_count(formula, config.epsilon, config.delta, seed, engine=config.engine)


def _score_task(args, cache=None):
    formula, layout, x, b, config, seed = args
    return count_under_hypothesis(
        formula, layout, x, b, config.epsilon, config.delta, seed,
        exact_cap=config.exact_cap, engine=config.engine, cache=cache,
    )


def select_query(formula, layout: VarLayout, queried, config: LearnerConfig, round_index=0, executor=None):
    """Pick the unqueried input maximising ``min(c0, c1)``.

    Ties go to the lexicographically smallest bitstring. Returns
    ``(x_star, score, scores)`` with ``scores`` mapping every candidate to
    ``(c0, c1)``. Per-candidate seeds depend only on (seed, round, candidate
    index, branch), so running the scoring on ``executor`` does not change the
    choice.
    """
    n = layout.spec.n_features
    if n > config.candidate_guard:
        raise ValueError(
            f"{n} features exceed the candidate enumeration guard ({config.candidate_guard})"
        )
    queried = {tuple(q) for q in queried}
    candidates = [x for x in all_inputs(n) if x not in queried]
    if not candidates:
        raise ValueError("every input has already been queried")
    tasks = [
        (formula, layout, x, b, config, _derive_seed(config.seed, round_index, idx, b))
        for idx, x in enumerate(candidates)
        for b in (0, 1)
    ]
    if executor is not None:
        results = list(executor.map(_score_task, tasks))
    else:
        cache = {}  # exact component counts shared between candidates
        results = [_score_task(t, cache) for t in tasks]
    scores = {}
    for k, x in enumerate(candidates):
        scores[x] = (results[2 * k], results[2 * k + 1])
    best, best_score = None, -1
    for x in candidates:
        s = min(scores[x][0].value, scores[x][1].value)
        if s > best_score:
            best, best_score = x, s
    return best, best_score, scores


def check_functional_collapse(formula, layout: VarLayout, engine="builtin") -> bool:
    """True iff no two surviving trees disagree on any input."""
    return not solve(build_miter(formula, layout), engine=engine).satisfiable


def retrieve_tree(formula, layout: VarLayout, engine="builtin") -> DecisionTree:
    result = solve(formula, engine=engine)
    if not result.satisfiable:
        raise OracleOutsideSpace("no tree is consistent with the observations")
    tree = decode_model(result.model, layout)
    for x, y in layout.observations:
        if evaluate(tree, x) != y:
            raise RuntimeError(f"decoded tree disagrees with observation {bitstring(x)} -> {y}")
    return tree


def _as_callable(oracle):
    return getattr(oracle, "answer", oracle)


def _stagnated(rule, before, after):
    if rule == "paper":
        return abs(after.value - before.value) < 1
    return after.value >= before.value


def run(spec: TreeSpec, oracle, config: LearnerConfig | None = None, on_round=None) -> LearnOutcome:
    """Learn the tree behind ``oracle`` with membership queries only.

    ``oracle`` is a callable (or has ``answer``) mapping an input tuple to a
    bit. ``on_round(k, formula, layout, record)`` is called after the initial
    encoding (``k = 0``, ``record = None``) and after each query.

    With ``config.anticipate`` a zero best score triggers the miter before
    asking. That saves the query, but an oracle outside the space is then only
    caught if one of the answers already contradicts every tree.
    """
    config = config or LearnerConfig()
    ask = _as_callable(oracle)
    formula, layout = encode_base(spec)
    max_rounds = config.max_rounds or spec.n_inputs
    solver_engine = config.engine
    queried = set()
    trace = []

    executor = ProcessPoolExecutor(config.n_jobs) if config.n_jobs and config.n_jobs > 1 else None
    try:
        prev = count_version_space(formula, config, _derive_seed(config.seed, 0, 2 ** 31))
        initial = prev
        if on_round:
            on_round(0, formula, layout, None)
        rnd = 0
        while True:
            t0 = time.perf_counter()
            try:
                x_star, score, _ = select_query(formula, layout, queried, config, rnd, executor)
            except Exception as exc:
                raise LearnerError(f"round {rnd + 1}: query selection failed: {exc}") from exc
            t1 = time.perf_counter()
            if config.anticipate and score == 0 and check_functional_collapse(formula, layout, solver_engine):
                # every survivor agrees on every remaining input: asking is pointless
                tree = retrieve_tree(formula, layout, solver_engine)
                return LearnOutcome(Status.FUNCTIONAL_COLLAPSE, tree, trace, initial, prev, True)
            y_star = int(ask(check_input(spec, x_star)))
            if y_star not in (0, 1):
                raise LearnerError(f"round {rnd + 1}: oracle returned {y_star!r} for {bitstring(x_star)}")
            queried.add(x_star)
            add_observation(formula, layout, x_star, y_star)
            t2 = time.perf_counter()
            try:
                new = count_version_space(formula, config, _derive_seed(config.seed, rnd + 1, 2 ** 31))
            except Exception as exc:
                raise LearnerError(f"round {rnd + 1}: counting failed: {exc}") from exc
            t3 = time.perf_counter()
            record = QueryRecord(rnd + 1, x_star, y_star, score, prev, new, t1 - t0, t3 - t2)
            trace.append(record)
            logger.info("round %d: x*=%s y*=%d score=%d count %d -> %d",
                        rnd + 1, bitstring(x_star), y_star, score, prev.value, new.value)

            if new.value == 0:
                if on_round:
                    on_round(rnd + 1, formula, layout, record)
                raise OracleOutsideSpace(
                    f"round {rnd + 1}: no tree of depth {spec.depth} over {spec.n_features} "
                    "features matches the oracle's answers"
                )
            status = None
            if new.value <= 1:
                status = Status.UNIQUE_TREE
            elif _stagnated(config.stagnation, prev, new):
                record.stagnated = True
                record.collapse = check_functional_collapse(formula, layout, solver_engine)
                if record.collapse:
                    status = Status.FUNCTIONAL_COLLAPSE
            if on_round:
                on_round(rnd + 1, formula, layout, record)
            if status is not None:
                tree = retrieve_tree(formula, layout, solver_engine)
                return LearnOutcome(status, tree, trace, initial, new)

            prev = new
            rnd += 1
            if rnd >= max_rounds or len(queried) == spec.n_inputs:
                # the round cap is reached; accept only a proven collapse
                if check_functional_collapse(formula, layout, solver_engine):
                    tree = retrieve_tree(formula, layout, solver_engine)
                    return LearnOutcome(Status.FUNCTIONAL_COLLAPSE, tree, trace, initial, new)
                return LearnOutcome(Status.NO_UNIQUE_TREE, None, trace, initial, new)
    finally:
        if executor is not None:
            executor.shutdown()

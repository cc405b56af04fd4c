import itertools
import os
import random

import pytest

from symtree.tree import TreeSpec, enumerate_trees, evaluate, truth_table

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

# observations of the worked (3,2) example, in query order
MOTIVATING_PAIRS = [
    ((0, 0, 0), 0),
    ((1, 1, 1), 1),
    ((0, 0, 1), 0),
    ((0, 1, 1), 0),
    ((1, 0, 0), 0),
    ((1, 0, 1), 1),
    ((0, 1, 0), 1),
]


def brute_models(formula):
    """All total assignments (as dicts) satisfying clauses and XORs."""
    n = formula.num_vars
    out = []
    for bits in itertools.product((False, True), repeat=n):
        a = dict(zip(range(1, n + 1), bits))
        if formula.evaluate(a):
            out.append(a)
    return out


def brute_projected_count(formula):
    proj = sorted(formula.projection)
    return len({tuple(m[v] for v in proj) for m in brute_models(formula)})


def random_cnf(rng, n_vars, n_clauses, width=3):
    clauses = []
    for _ in range(n_clauses):
        k = rng.randint(1, width)
        vs = rng.sample(range(1, n_vars + 1), min(k, n_vars))
        clauses.append([v if rng.random() < 0.5 else -v for v in vs])
    return clauses


_TREE_CACHE = {}


def all_trees(spec):
    if spec not in _TREE_CACHE:
        _TREE_CACHE[spec] = list(enumerate_trees(spec))
    return _TREE_CACHE[spec]


def consistent_trees(spec, pairs):
    return [t for t in all_trees(spec) if all(evaluate(t, x) == y for x, y in pairs)]


def distinct_functions(trees):
    return {truth_table(t) for t in trees}


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture
def spec32():
    return TreeSpec(3, 2)


@pytest.fixture
def motivating_path():
    return os.path.join(FIXTURES, "motivating.tt")


# one pass/fail line per acceptance criterion, printed after the run
_CRITERIA = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1].split("[")[0]
    if not name.startswith("test_criterion_"):
        return
    if report.when == "call" or report.failed:
        prev = _CRITERIA.get(name, "PASS")
        _CRITERIA[name] = "FAIL" if report.failed or prev == "FAIL" else "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda s: int(s.split("_")[2])):
        _, _, num, *words = name.split("_")
        terminalreporter.write_line(f"criterion {num} ({' '.join(words)}): {_CRITERIA[name]}")

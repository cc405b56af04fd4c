"""Acceptance suite: one test per criterion, summarised after the run."""

import io
import math

import pytest

from symtree.cli import main
from symtree.cnf import Formula
from symtree.counting import approx_count, exact_count_projected
from symtree.encoding import add_observation, build_miter, decode_model, encode_base, encode_tree
from symtree.learner import LearnerConfig, Status, _stagnated, check_functional_collapse, run, select_query
from symtree.runlog import read_log
from symtree.sat import enumerate_projected, solve
from symtree.tree import (
    DecisionTree,
    TreeSpec,
    all_inputs,
    evaluate,
    functionally_equal,
    hypothesis_space_size,
    parse_bitstring,
    random_tree,
)

from conftest import MOTIVATING_PAIRS, all_trees, consistent_trees, distinct_functions

EPS, DELTA = 0.8, 0.2
BIG_CAP = 10 ** 9
MOTIVATING = DecisionTree(TreeSpec(3, 2), (3, 1, 2), (1, 0, 1, 0))


def in_band(value, truth, eps=EPS):
    return truth / (1 + eps) <= value <= truth * (1 + eps)


def restricted(n, d, pairs):
    f, layout = encode_base(TreeSpec(n, d))
    for x, y in pairs:
        add_observation(f, layout, x, y)
    return f, layout


# -- 1 -----------------------------------------------------------------------

SPACE_SIZES = {
    (3, 2): 432, (3, 3): 559_872, (3, 4): 940_369_969_152,
    (4, 2): 1_024, (4, 3): 4_194_304, (4, 4): 70_368_744_177_664,
    (5, 2): 2_000, (5, 3): 20_000_000, (5, 4): 2 * 10 ** 15,
}


def test_criterion_1_space_size_formula():
    got = {cell: hypothesis_space_size(TreeSpec(*cell)) for cell in SPACE_SIZES}
    print(f"criterion 1: {got}")
    assert got == SPACE_SIZES


# -- 2 -----------------------------------------------------------------------

def test_criterion_2_encoding_bijection():
    for cell in ((3, 2), (4, 2)):
        f, _ = encode_base(TreeSpec(*cell))
        assert exact_count_projected(f).value == SPACE_SIZES[cell]
    spec = TreeSpec(3, 2)
    f, layout = encode_base(spec)
    models, exhausted = enumerate_projected(f, limit=1000)
    trees = [decode_model(m, layout) for m in models]
    assert exhausted and len(models) == 432
    assert len(set(trees)) == 432 and set(trees) == set(all_trees(spec))
    assert all(encode_tree(t, layout) == m for t, m in zip(trees, models))
    print("criterion 2: 432 and 1024 models; 432 distinct decoded trees round-trip")


# -- 3 -----------------------------------------------------------------------

def test_criterion_3_worked_example_counts():
    spec = TreeSpec(3, 2)
    reference = [432, 216, 108, 72, 35, 17, 9, 1]
    f, layout = encode_base(spec)
    exact = [exact_count_projected(f).value]
    brute = [len(all_trees(spec))]
    for k, (x, y) in enumerate(MOTIVATING_PAIRS, 1):
        add_observation(f, layout, x, y)
        exact.append(exact_count_projected(f).value)
        brute.append(len(consistent_trees(spec, MOTIVATING_PAIRS[:k])))
    print(f"criterion 3: exact {exact}, brute force {brute}, reference {reference}")
    assert exact[:4] == [432, 216, 108, 72]
    assert exact == brute
    for step in (4, 5, 6):
        assert in_band(reference[step], brute[step])
    assert exact[-1] == 1 or not solve(build_miter(f, layout)).satisfiable


# -- 4 -----------------------------------------------------------------------

def free_cube(k, aux=0):
    f = Formula(num_vars=k + aux)
    f.add_projection(range(1, k + 1))
    for a in range(k + 1, k + aux + 1):
        f.add_clause([-a, 1 + (a % k)])
    return f


def calibration_suite():
    suite = {f"cube{k}": (free_cube(k), 2 ** k) for k in (6, 7, 8, 9, 10, 11, 12)}
    suite["cube8+aux4"] = (free_cube(8, 4), 256)
    suite["cube10+aux6"] = (free_cube(10, 6), 1024)
    for n, d in ((2, 2), (3, 2), (4, 2), (5, 2)):
        suite[f"base{n}{d}"] = (encode_base(TreeSpec(n, d))[0], None)
    for k in (1, 2, 3, 4):
        suite[f"worked{k}"] = (restricted(3, 2, MOTIVATING_PAIRS[:k])[0], None)
    ones = [((0, 0, 0, 0), 1), ((1, 1, 1, 1), 0), ((0, 1, 0, 1), 1)]
    for k in (1, 2, 3):
        suite[f"r42_{k}"] = (restricted(4, 2, ones[:k])[0], None)
    fives = [((0, 0, 0, 0, 0), 1), ((1, 1, 1, 1, 1), 0)]
    for k in (1, 2):
        suite[f"r52_{k}"] = (restricted(5, 2, fives[:k])[0], None)
    return {name: (f, truth if truth is not None else exact_count_projected(f).value)
            for name, (f, truth) in suite.items()}


def test_criterion_4_counter_calibration():
    suite = calibration_suite()
    assert len(suite) >= 20
    rates = {}
    for name, (f, truth) in suite.items():
        hits = sum(in_band(approx_count(f, EPS, DELTA, seed=s).value, truth) for s in range(100))
        rates[name] = hits / 100
    print(f"criterion 4: in-band rate per formula {rates}")
    assert sum(t >= 72 for _, t in suite.values()) >= len(suite) // 2
    assert all(r >= 0.9 for r in rates.values())


# -- 5 -----------------------------------------------------------------------

@pytest.mark.parametrize("n,d", [(3, 2), (3, 3), (4, 2), (4, 3)])
def test_criterion_5_end_to_end(n, d):
    spec = TreeSpec(n, d)
    statuses = {}
    for seed in range(50):
        hidden = random_tree(spec, seed)
        outcome = run(spec, hidden, LearnerConfig(seed=seed, exact_cap=BIG_CAP))
        assert outcome.status is not Status.NO_UNIQUE_TREE, seed
        assert functionally_equal(outcome.tree, hidden), seed
        assert outcome.n_queries <= 2 ** n, seed
        statuses[str(outcome.status)] = statuses.get(str(outcome.status), 0) + 1
    print(f"criterion 5 ({n},{d}): 50/50 correct, {statuses}")


# -- 6 -----------------------------------------------------------------------

def redundant_space(free_leaf=False):
    """Trees agreeing with a fixed tree except node 2, which may test x2 or x3
    while both of its leaves are 1."""
    spec = TreeSpec(3, 2)
    f, layout = encode_base(spec)
    base = DecisionTree(spec, (1, 2, 3), (1, 1, 0, 1))
    free = {layout.sel[2, 2], layout.sel[2, 3]}
    if free_leaf:
        free.add(layout.leaf[7])
    for v, b in encode_tree(base, layout).items():
        if v not in free:
            f.add_clause([v if b else -v])
    f.add_clause([layout.sel[2, 2], layout.sel[2, 3]])
    return base, f, layout


def test_criterion_6_stagnation_and_collapse():
    spec = TreeSpec(3, 2)
    base, f, layout = redundant_space()
    survivors, _ = enumerate_projected(f, limit=100)
    trees = [decode_model(m, layout) for m in survivors]
    assert len(trees) == 2 and len(distinct_functions(trees)) == 1

    # no query can split the survivors, and any answer leaves the count unchanged
    _, score, _ = select_query(f, layout, set(), LearnerConfig())
    assert score == 0
    before = exact_count_projected(f)
    add_observation(f, layout, (1, 0, 1), evaluate(base, (1, 0, 1)))
    after = exact_count_projected(f)
    assert _stagnated("paper", before, after) and _stagnated("no-progress", before, after)
    assert check_functional_collapse(f, layout)

    _, g, glayout = redundant_space(free_leaf=True)
    others = [decode_model(m, glayout) for m in enumerate_projected(g, limit=100)[0]]
    assert len(distinct_functions(others)) > 1
    assert solve(build_miter(g, glayout)).satisfiable

    # the learner itself, on the redundant tree: both stopping paths, strict savings
    literal = run(spec, base, LearnerConfig(anticipate=False))
    assert literal.stagnation_fired and literal.collapse_confirmed
    assert literal.status is Status.FUNCTIONAL_COLLAPSE and functionally_equal(literal.tree, base)
    assert literal.n_queries < 8
    early = run(spec, base, LearnerConfig())
    assert early.split_exhausted and early.status is Status.FUNCTIONAL_COLLAPSE
    assert functionally_equal(early.tree, base) and early.n_queries < literal.n_queries

    stalled = []
    for n, d in ((3, 2), (4, 2)):
        for seed in range(20):
            s = TreeSpec(n, d)
            out = run(s, random_tree(s, 500 + seed), LearnerConfig(seed=seed))
            if out.stagnation_fired or out.split_exhausted:
                stalled.append((n, out.n_queries))
    assert stalled and all(q < 2 ** n for n, q in stalled)
    print(f"criterion 6: redundant pair collapses; stop after {literal.n_queries} queries "
          f"(stagnation) or {early.n_queries} (zero score); {len(stalled)} stalled grid runs "
          "all below 2^n queries")


# -- 7 -----------------------------------------------------------------------

def brute_min_split(spec, pairs, x):
    return min(len(consistent_trees(spec, pairs + [(x, b)])) for b in (0, 1))


def test_criterion_7_selection_optimality():
    spec = TreeSpec(3, 2)
    hidden = [MOTIVATING] + [random_tree(spec, s) for s in range(5)]
    for tree in hidden:
        outcome = run(spec, tree, LearnerConfig())
        pairs = []
        for record in outcome.trace[:3]:
            assert record.est_before.exact
            asked = {x for x, _ in pairs}
            best = max(brute_min_split(spec, pairs, c) for c in all_inputs(3) if c not in asked)
            assert record.score == brute_min_split(spec, pairs, record.x_star) == best
            pairs.append((record.x_star, record.y_star))
    print(f"criterion 7: first three queries optimal for {len(hidden)} hidden trees")


# -- 8 -----------------------------------------------------------------------

def test_criterion_8_scaling_smoke(tmp_path):
    log = tmp_path / "n5d3.jsonl"
    out = io.StringIO()
    code = main(["learn", "--features", "5", "--depth", "3", "--oracle", "random:0",
                 "--exact-cap", str(BIG_CAP), "--log", str(log)], out=out)
    assert code == 0
    lines = out.getvalue().splitlines()
    assert lines[0].split(": ")[1] in ("UniqueTree", "FunctionalCollapse")
    table = {parse_bitstring(a): int(b) for a, b in (l.split() for l in lines[3:])}
    hidden = random_tree(TreeSpec(5, 3), 0)
    assert table == {x: evaluate(hidden, x) for x in all_inputs(5)}

    records = read_log(log)
    rounds = [r for r in records if r["event"] == "round"]
    timings = read_log(str(log) + ".timings.jsonl")
    assert records[-1]["event"] == "end" and len(timings) == len(rounds) >= 1
    assert all(math.isfinite(t["count_time"]) and t["count_time"] >= 0 for t in timings)
    print(f"criterion 8: (5,3) {lines[0]} after {len(rounds)} queries, "
          f"counting {sum(t['count_time'] for t in timings):.1f}s")

import random

import pytest

from symtree.counting import exact_count_projected
from symtree.encoding import (
    add_observation,
    build_miter,
    decode_model,
    encode_base,
    encode_tree,
)
from symtree.sat import enumerate_projected, solve
from symtree.tree import DecisionTree, TreeSpec, all_inputs, evaluate, random_tree

from conftest import MOTIVATING_PAIRS, all_trees, consistent_trees, distinct_functions


@pytest.mark.parametrize("n,d", [(1, 1), (3, 2), (4, 2), (4, 3), (5, 4), (6, 0)])
def test_base_layout_sizes(n, d):
    spec = TreeSpec(n, d)
    f, layout = encode_base(spec)
    internal = 2 ** d - 1
    assert len(layout.sel) == internal * n
    assert len(layout.leaf) == 2 ** d
    assert f.num_vars == internal * n + 2 ** d
    assert len(f.clauses) == internal * (1 + n * (n - 1) // 2)
    assert f.projection == layout.structural_vars
    assert len(set(layout.sel.values()) | set(layout.leaf.values())) == f.num_vars


def test_base_clause_counts_examples():
    assert len(encode_base(TreeSpec(3, 2))[0].clauses) == 12
    assert len(encode_base(TreeSpec(4, 2))[0].clauses) == 21


def test_observation_adds_expected_pieces(spec32):
    f, layout = encode_base(spec32)
    v0, c0 = f.num_vars, len(f.clauses)
    add_observation(f, layout, (0, 0, 0), 0)
    assert f.num_vars - v0 == 7
    assert len(f.clauses) - c0 == 1 + 9 + 4
    assert f.projection == layout.structural_vars
    assert not f.projection & set(layout.reach.values())
    assert exact_count_projected(f).value == 216
    add_observation(f, layout, (1, 1, 1), 1)
    assert exact_count_projected(f).value == 108
    assert layout.observations == [((0, 0, 0), 0), ((1, 1, 1), 1)]


def test_contradictory_and_duplicate_observations(spec32):
    f, layout = encode_base(spec32)
    add_observation(f, layout, (0, 0, 0), 0)
    add_observation(f, layout, (0, 0, 0), 0)
    assert exact_count_projected(f).value == 216
    add_observation(f, layout, (0, 0, 0), 1)
    assert not solve(f).satisfiable
    with pytest.raises(ValueError):
        add_observation(f, layout, (0, 0), 1)
    with pytest.raises(ValueError):
        add_observation(f, layout, (0, 0, 0), 2)


@pytest.mark.parametrize("n,d", [(3, 2), (2, 2)])
def test_bijection_with_trees(n, d):
    spec = TreeSpec(n, d)
    f, layout = encode_base(spec)
    models, exhausted = enumerate_projected(f, limit=10_000)
    assert exhausted
    trees = [decode_model(m, layout) for m in models]
    assert len(set(trees)) == len(models) == len(all_trees(spec))
    assert set(trees) == set(all_trees(spec))
    for m, t in zip(models, trees):
        assert encode_tree(t, layout) == m


def test_encode_decode_round_trip_large():
    spec = TreeSpec(5, 3)
    _, layout = encode_base(spec)
    for s in range(30):
        t = random_tree(spec, s)
        assert decode_model(encode_tree(t, layout), layout) == t


def test_faithfulness_exhaustive(spec32):
    rng = random.Random(4)
    for trial in range(6):
        k = rng.randint(1, 5)
        pairs = [(x, rng.randrange(2)) for x in rng.sample(all_inputs(3), k)]
        f, layout = encode_base(spec32)
        for x, y in pairs:
            add_observation(f, layout, x, y)
        for t in all_trees(spec32):
            assign = encode_tree(t, layout)
            assumptions = [v if b else -v for v, b in assign.items()]
            fits = all(evaluate(t, x) == y for x, y in pairs)
            assert solve(f, assumptions=assumptions).satisfiable == fits


def test_decode_examples(spec32):
    _, layout = encode_base(spec32)
    t = DecisionTree(spec32, (3, 1, 2), (1, 0, 1, 0))
    assert decode_model(encode_tree(t, layout), layout).node_feature == (3, 1, 2)
    zero = DecisionTree(spec32, (2, 2, 2), (0, 0, 0, 0))
    m = encode_tree(zero, layout)
    assert not any(m[v] for v in layout.leaf.values())


def test_decode_rejects_malformed(spec32):
    _, layout = encode_base(spec32)
    m = encode_tree(random_tree(spec32, 0), layout)
    for i in (1, 2, 3):
        m[layout.sel[1, i]] = False
    with pytest.raises(ValueError):
        decode_model(m, layout)
    for i in (1, 2):
        m[layout.sel[1, i]] = True
    with pytest.raises(ValueError):
        decode_model(m, layout)


def test_miter_examples(spec32):
    f, layout = encode_base(spec32)
    g = build_miter(f, layout)
    assert solve(g).satisfiable
    assert g.projection.isdisjoint(range(1, 2 * f.num_vars + 1))
    assert len(g.projection) == 3

    t = random_tree(spec32, 8)
    full, full_layout = encode_base(spec32)
    for x in all_inputs(3):
        add_observation(full, full_layout, x, evaluate(t, x))
    assert not solve(build_miter(full, full_layout)).satisfiable

    mot, mot_layout = encode_base(spec32)
    for x, y in MOTIVATING_PAIRS:
        add_observation(mot, mot_layout, x, y)
    assert len(distinct_functions(consistent_trees(spec32, MOTIVATING_PAIRS))) == 1
    assert not solve(build_miter(mot, mot_layout)).satisfiable


def test_miter_against_brute_force(spec32):
    rng = random.Random(21)
    for trial in range(40):
        hidden = random_tree(spec32, rng.randrange(10 ** 6))
        k = rng.randint(0, 7)
        pairs = [(x, evaluate(hidden, x)) for x in rng.sample(all_inputs(3), k)]
        f, layout = encode_base(spec32)
        for x, y in pairs:
            add_observation(f, layout, x, y)
        disagree = len(distinct_functions(consistent_trees(spec32, pairs))) > 1
        g = build_miter(f, layout)
        result = solve(g)
        assert result.satisfiable == disagree
        if disagree:
            # the witness decodes to two trees that differ on the witness input
            offset = f.num_vars
            t1 = decode_model(result.model, layout)
            t2 = decode_model({v: result.model[v + offset] for v in range(1, offset + 1)}, layout)
            x = tuple(int(result.model[v]) for v in sorted(g.projection))
            assert evaluate(t1, x) != evaluate(t2, x)


def test_miter_leaves_input_alone(spec32):
    f, layout = encode_base(spec32)
    add_observation(f, layout, (1, 0, 0), 1)
    snapshot = (f.num_vars, list(f.clauses))
    build_miter(f, layout)
    assert (f.num_vars, f.clauses) == snapshot

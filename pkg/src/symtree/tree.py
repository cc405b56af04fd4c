"""Full binary decision trees over Boolean features.

Nodes are numbered in level order starting at the root ``u = 1``; node ``u``
has children ``2u`` (left) and ``2u + 1`` (right). A node testing feature
``i`` (1-based) sends ``x`` left when ``x_i = 1``. Leaves are stored left to
right. Truth tables are indexed by the input read as a binary number with
``x_1`` as the most significant bit.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass


@dataclass(frozen=True)
class TreeSpec:
    n_features: int
    depth: int

    def __post_init__(self):
        if int(self.n_features) < 1:
            raise ValueError(f"n_features must be positive, got {self.n_features}")
        if int(self.depth) < 0:
            raise ValueError(f"depth must be non-negative, got {self.depth}")

    @property
    def n_internal(self) -> int:
        return 2 ** self.depth - 1

    @property
    def n_leaves(self) -> int:
        return 2 ** self.depth

    @property
    def n_inputs(self) -> int:
        return 2 ** self.n_features

    def leaf_nodes(self):
        return range(self.n_leaves, 2 * self.n_leaves)


@dataclass(frozen=True)
class DecisionTree:
    spec: TreeSpec
    node_feature: tuple
    leaf_label: tuple

    def __post_init__(self):
        object.__setattr__(self, "node_feature", tuple(int(i) for i in self.node_feature))
        object.__setattr__(self, "leaf_label", tuple(int(b) for b in self.leaf_label))
        if len(self.node_feature) != self.spec.n_internal:
            raise ValueError(f"expected {self.spec.n_internal} node features, got {len(self.node_feature)}")
        if len(self.leaf_label) != self.spec.n_leaves:
            raise ValueError(f"expected {self.spec.n_leaves} leaf labels, got {len(self.leaf_label)}")
        if any(not 1 <= i <= self.spec.n_features for i in self.node_feature):
            raise ValueError(f"node features must lie in 1..{self.spec.n_features}")
        if any(b not in (0, 1) for b in self.leaf_label):
            raise ValueError("leaf labels must be bits")

    def leaf_of(self, x) -> int:
        """Level-order index of the leaf reached by ``x``."""
        u = 1
        first_leaf = self.spec.n_leaves
        while u < first_leaf:
            u = 2 * u if x[self.node_feature[u - 1] - 1] else 2 * u + 1
        return u

    def __call__(self, x) -> int:
        return evaluate(self, x)

    def __str__(self):
        nodes = " ".join(f"n{u}:x{i}" for u, i in enumerate(self.node_feature, 1))
        leaves = "".join(map(str, self.leaf_label))
        return f"DecisionTree({nodes} leaves={leaves})" if nodes else f"DecisionTree(leaves={leaves})"


def hypothesis_space_size(spec: TreeSpec) -> int:
    return spec.n_features ** spec.n_internal * 2 ** spec.n_leaves


def check_input(spec: TreeSpec, x) -> tuple:
    x = tuple(int(b) for b in x)
    if len(x) != spec.n_features:
        raise ValueError(f"input has {len(x)} bits, expected {spec.n_features}")
    if any(b not in (0, 1) for b in x):
        raise ValueError(f"input {x} is not a bit vector")
    return x


def evaluate(tree: DecisionTree, x) -> int:
    x = check_input(tree.spec, x)
    return tree.leaf_label[tree.leaf_of(x) - tree.spec.n_leaves]


def random_tree(spec: TreeSpec, seed=None) -> DecisionTree:
    """Each node feature uniform in 1..n, each leaf label a fair bit."""
    rng = random.Random(seed)
    features = [rng.randint(1, spec.n_features) for _ in range(spec.n_internal)]
    labels = [rng.randrange(2) for _ in range(spec.n_leaves)]
    return DecisionTree(spec, features, labels)


def all_inputs(n_features):
    """All inputs in truth-table order (x_1 most significant)."""
    return list(itertools.product((0, 1), repeat=n_features))


def input_index(x) -> int:
    idx = 0
    for b in x:
        idx = 2 * idx + int(b)
    return idx


def bitstring(x) -> str:
    return "".join(str(int(b)) for b in x)


def parse_bitstring(s, n_features=None) -> tuple:
    s = s.strip()
    if not s or any(ch not in "01" for ch in s):
        raise ValueError(f"not a bitstring: {s!r}")
    if n_features is not None and len(s) != n_features:
        raise ValueError(f"bitstring {s!r} has length {len(s)}, expected {n_features}")
    return tuple(int(ch) for ch in s)


def truth_table(tree: DecisionTree) -> tuple:
    return tuple(tree.leaf_label[tree.leaf_of(x) - tree.spec.n_leaves] for x in all_inputs(tree.spec.n_features))


def functionally_equal(t1: DecisionTree, t2: DecisionTree) -> bool:
    if t1.spec.n_features != t2.spec.n_features:
        raise ValueError("trees are over different feature counts")
    return truth_table(t1) == truth_table(t2)


def enumerate_trees(spec: TreeSpec):
    """Every tree of the hypothesis space; brute force, for small specs only."""
    for features in itertools.product(range(1, spec.n_features + 1), repeat=spec.n_internal):
        for labels in itertools.product((0, 1), repeat=spec.n_leaves):
            yield DecisionTree(spec, features, labels)


# -- truth-table text format: 2^n lines "<bitstring> <label>" -----------------

def format_truth_table(table, n_features) -> str:
    if len(table) != 2 ** n_features:
        raise ValueError(f"truth table must have {2 ** n_features} entries")
    return "".join(f"{bitstring(x)} {int(y)}\n" for x, y in zip(all_inputs(n_features), table))


def parse_truth_table(text, n_features=None) -> tuple:
    """Parse the text format; returns outputs in truth-table order."""
    entries = {}
    width = n_features
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or parts[1] not in ("0", "1"):
            raise ValueError(f"line {lineno}: expected '<bitstring> <label>', got {raw!r}")
        x = parse_bitstring(parts[0], width)
        width = len(x)
        if x in entries and entries[x] != int(parts[1]):
            raise ValueError(f"line {lineno}: conflicting label for {parts[0]}")
        entries[x] = int(parts[1])
    if width is None:
        raise ValueError("empty truth table")
    missing = [bitstring(x) for x in all_inputs(width) if x not in entries]
    if missing:
        raise ValueError(f"truth table is missing {len(missing)} inputs, e.g. {missing[0]}")
    return tuple(entries[x] for x in all_inputs(width))


def read_truth_table(path, n_features=None) -> tuple:
    with open(path) as fh:
        return parse_truth_table(fh.read(), n_features)


def write_truth_table(path, table, n_features):
    with open(path, "w") as fh:
        fh.write(format_truth_table(table, n_features))

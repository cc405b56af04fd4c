"""CNF encoding of the depth-d decision-tree hypothesis space.

Variables:

* ``sel[u, i]``   node ``u`` tests feature ``i`` (exactly one per node)
* ``leaf[v]``     label of leaf ``v`` (one variable per leaf, binary labels)
* ``reach[k, u]`` observation ``k``'s input reaches node ``u``

Selection and leaf variables form the projection; reachability variables are
auxiliary and existentially absorbed by projected counting.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .cnf import Formula
from .tree import DecisionTree, TreeSpec, check_input


@dataclass
class VarLayout:
    spec: TreeSpec
    sel: dict = field(default_factory=dict)
    leaf: dict = field(default_factory=dict)
    reach: dict = field(default_factory=dict)
    observations: list = field(default_factory=list)

    def copy(self) -> "VarLayout":
        return VarLayout(self.spec, dict(self.sel), dict(self.leaf), dict(self.reach), list(self.observations))

    @property
    def structural_vars(self) -> set:
        return set(self.sel.values()) | set(self.leaf.values())


def encode_base(spec: TreeSpec):
    """Formula whose projected models are exactly the trees of ``spec``."""
    formula = Formula()
    layout = VarLayout(spec)
    n = spec.n_features
    for u in range(1, spec.n_internal + 1):
        for i in range(1, n + 1):
            layout.sel[u, i] = formula.new_var()
    for v in spec.leaf_nodes():
        layout.leaf[v] = formula.new_var()
    for u in range(1, spec.n_internal + 1):
        row = [layout.sel[u, i] for i in range(1, n + 1)]
        formula.add_clause(row)
        for a, b in itertools.combinations(row, 2):
            formula.add_clause([-a, -b])
    formula.add_projection(layout.structural_vars)
    return formula, layout


def add_observation(formula: Formula, layout: VarLayout, x, y):
    """Constrain every tree to map ``x`` to ``y``.

    Input bits are substituted as constants, so each (node, feature) pair
    contributes only the propagation clause toward the branch ``x`` takes.
    """
    spec = layout.spec
    x = check_input(spec, x)
    y = int(y)
    if y not in (0, 1):
        raise ValueError(f"label must be a bit, got {y}")
    k = len(layout.observations)
    reach = {}
    for u in range(1, 2 * spec.n_leaves):
        reach[u] = layout.reach[k, u] = formula.new_var()
    formula.add_clause([reach[1]])
    for u in range(1, spec.n_internal + 1):
        for i in range(1, spec.n_features + 1):
            child = 2 * u if x[i - 1] else 2 * u + 1
            formula.add_clause([-layout.sel[u, i], -reach[u], reach[child]])
    for v in spec.leaf_nodes():
        lv = layout.leaf[v]
        formula.add_clause([-reach[v], lv if y else -lv])
    layout.observations.append((x, y))


def encode_tree(tree: DecisionTree, layout: VarLayout) -> dict:
    """Projected assignment (var -> bool) representing ``tree``."""
    spec = layout.spec
    out = {}
    for (u, i), var in layout.sel.items():
        out[var] = tree.node_feature[u - 1] == i
    for v, var in layout.leaf.items():
        out[var] = bool(tree.leaf_label[v - spec.n_leaves])
    return out


def decode_model(model, layout: VarLayout) -> DecisionTree:
    """Read a tree off a model (mapping var -> bool)."""
    spec = layout.spec
    features = []
    for u in range(1, spec.n_internal + 1):
        chosen = [i for i in range(1, spec.n_features + 1) if model[layout.sel[u, i]]]
        if len(chosen) != 1:
            raise ValueError(f"malformed model: node {u} selects features {chosen}")
        features.append(chosen[0])
    labels = [int(bool(model[layout.leaf[v]])) for v in spec.leaf_nodes()]
    return DecisionTree(spec, features, labels)


def _tree_output(formula, layout, var_of, inputs):
    """Append symbolic-input reachability and output definitions for one copy."""
    spec = layout.spec
    q = {u: formula.new_var() for u in range(1, 2 * spec.n_leaves)}
    formula.add_clause([q[1]])
    for u in range(1, spec.n_internal + 1):
        left, right = q[2 * u], q[2 * u + 1]
        formula.add_clause([-left, q[u]])
        formula.add_clause([-right, q[u]])
        formula.add_clause([-left, -right])
        for i in range(1, spec.n_features + 1):
            s, xi = var_of(layout.sel[u, i]), inputs[i - 1]
            formula.add_clause([-s, -q[u], -xi, left])
            formula.add_clause([-s, -left, xi])
            formula.add_clause([-s, -q[u], xi, right])
            formula.add_clause([-s, -right, -xi])
    out = formula.new_var()
    terms = []
    for v in spec.leaf_nodes():
        a, lv = formula.new_var(), var_of(layout.leaf[v])
        formula.add_clause([-a, q[v]])
        formula.add_clause([-a, lv])
        formula.add_clause([a, -q[v], -lv])
        formula.add_clause([-a, out])
        terms.append(a)
    formula.add_clause([-out] + terms)
    return out


def build_miter(formula: Formula, layout: VarLayout) -> Formula:
    """Two disjoint copies of the version space plus a shared input on which
    their outputs differ. UNSAT iff all surviving trees compute one function.

    The returned formula's projection is the shared input variables.
    """
    offset = formula.num_vars
    g = Formula(num_vars=offset)
    g.clauses = list(formula.clauses)
    g.xors = list(formula.xors)
    g.num_vars = 2 * offset
    for c in formula.clauses:
        g.clauses.append(tuple(l + offset if l > 0 else l - offset for l in c))
    for x in formula.xors:
        g.xors.append(type(x)({v + offset for v in x.vars}, x.parity))
    inputs = g.new_vars(layout.spec.n_features)
    out1 = _tree_output(g, layout, lambda v: v, inputs)
    out2 = _tree_output(g, layout, lambda v: v + offset, inputs)
    g.add_clause([out1, out2])
    g.add_clause([-out1, -out2])
    g.add_projection(inputs)
    return g

"""Active learning of Boolean decision trees with membership queries.

Candidate trees live symbolically in a CNF formula; queries are chosen by
projected model counting, and a two-copy miter detects when every surviving
tree computes the same function.
"""

__version__ = "0.1.0"

from .cnf import Formula, XorConstraint, parse_dimacs, to_dimacs
from .counting import CountEstimate, approx_count, exact_count_projected
from .encoding import VarLayout, add_observation, build_miter, decode_model, encode_base
from .learner import LearnerConfig, LearnOutcome, OracleOutsideSpace, Status, run
from .tree import (DecisionTree, TreeSpec, evaluate, functionally_equal, hypothesis_space_size, random_tree,
                   truth_table)

__all__ = [
    "CountEstimate", "DecisionTree", "Formula", "LearnOutcome", "LearnerConfig",
    "OracleOutsideSpace", "Status", "TreeSpec", "VarLayout", "XorConstraint",
    "add_observation", "approx_count", "build_miter", "decode_model", "encode_base",
    "evaluate", "exact_count_projected", "functionally_equal", "hypothesis_space_size", "parse_dimacs",
    "random_tree", "run", "to_dimacs", "truth_table",
]

"""scikit-learn style wrapper around the query learner."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_binary_labels, check_binary_matrix, table_from_samples
from .learner import LearnerConfig, Status, run
from .oracles import TableOracle
from .tree import TreeSpec, evaluate


class ActiveTreeLearner(ClassifierMixin, BaseEstimator):
    """Learn a depth-``depth`` decision tree over binary features by querying.

    ``fit(X, y)`` treats the labelled samples as a lookup oracle (so ``X`` must
    cover the whole input cube) and asks it only about the inputs the counting
    heuristic selects. ``fit(X, oracle=f)`` instead queries the callable ``f``;
    then ``X`` is only used for its width. ``queries_`` lists what was asked.
    """

    def __init__(self, depth=2, *, epsilon=0.8, delta=0.2, exact_cap=10_000, max_rounds=None,
                 stagnation="paper", engine="auto", n_jobs=1, random_state=0):
        self.depth = depth
        self.epsilon = epsilon
        self.delta = delta
        self.exact_cap = exact_cap
        self.max_rounds = max_rounds
        self.stagnation = stagnation
        self.engine = engine
        self.n_jobs = n_jobs
        self.random_state = random_state

    def _config(self):
        seed = self.random_state if self.random_state is not None else 0
        if not isinstance(seed, (int, np.integer)):
            raise ValueError("random_state must be an int")
        return LearnerConfig(
            epsilon=self.epsilon, delta=self.delta, max_rounds=self.max_rounds, seed=int(seed),
            stagnation=self.stagnation, exact_cap=self.exact_cap, engine=self.engine,
            n_jobs=self.n_jobs,
        )

    def fit(self, X, y=None, oracle=None):
        X = check_binary_matrix(X)
        n = X.shape[1]
        if oracle is None:
            if y is None:
                raise ValueError("pass labels y or an oracle callable")
            y = check_binary_labels(y, X.shape[0])
            oracle = TableOracle(table_from_samples(X, y))
        spec = TreeSpec(n, self.depth)
        outcome = run(spec, oracle, self._config())
        self.n_features_in_ = n
        self.classes_ = np.array([0, 1])
        self.outcome_ = outcome
        self.status_ = str(outcome.status)
        self.tree_ = outcome.tree
        self.n_queries_ = outcome.n_queries
        self.queries_ = np.array([r.x_star for r in outcome.trace], dtype=np.int8).reshape(-1, n)
        return self

    def predict(self, X):
        check_is_fitted(self, "outcome_")
        if self.outcome_.status is Status.NO_UNIQUE_TREE:
            raise ValueError("the learner did not identify a tree; nothing to predict with")
        X = check_binary_matrix(X, self.n_features_in_)
        return np.array([evaluate(self.tree_, row) for row in X.tolist()], dtype=np.int8)

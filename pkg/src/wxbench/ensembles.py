"""Boosted and bagged tree ensembles: AdaBoost (SAMME), gradient boosting
with softmax loss, and random forests.

All three build on the weighted CART trees in :mod:`wxbench.cart` and are
deterministic given (data, params, seed).
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .cart import DecisionTree, TreeParams, fit_cart, predict_cart

ALPHA_CAP = math.log(1e12)  # stage weight for a perfect (error-free) round


def samme_alpha(error, n_classes):
    """Stage weight ln((1-e)/e) + ln(K-1); positive while e < 1 - 1/K."""
    if error <= 0.0:
        return ALPHA_CAP
    return math.log((1.0 - error) / error) + math.log(n_classes - 1.0)


def _argmax_rows(scores):
    """Row-wise argmax; numpy already breaks ties toward the lowest index."""
    return np.argmax(scores, axis=1).astype(np.int64)


def _softmax(scores):
    shifted = scores - scores.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


@dataclasses.dataclass
class AdaBoostModel:
    stages: list  # (DecisionTree, alpha) pairs
    n_classes: int
    n_features: int

    def to_dict(self):
        return {
            "kind": "adaboost",
            "n_classes": self.n_classes,
            "n_features": self.n_features,
            "stages": [
                {"alpha": alpha, "tree": tree.to_dict()} for tree, alpha in self.stages
            ],
        }

    @classmethod
    def from_dict(cls, payload):
        stages = [
            (DecisionTree.from_dict(s["tree"]), s["alpha"]) for s in payload["stages"]
        ]
        return cls(stages=stages, n_classes=payload["n_classes"],
                   n_features=payload["n_features"])


@dataclasses.dataclass
class GbmModel:
    init_scores: np.ndarray  # K log-priors
    stages: list  # per round, K regression trees
    learning_rate: float
    n_features: int

    def to_dict(self):
        return {
            "kind": "gbm",
            "learning_rate": self.learning_rate,
            "n_features": self.n_features,
            "init_scores": [float(v) for v in self.init_scores],
            "stages": [[tree.to_dict() for tree in round_trees] for round_trees in self.stages],
        }

    @classmethod
    def from_dict(cls, payload):
        stages = [
            [DecisionTree.from_dict(t) for t in round_trees]
            for round_trees in payload["stages"]
        ]
        return cls(
            init_scores=np.array(payload["init_scores"], dtype=np.float64),
            stages=stages,
            learning_rate=payload["learning_rate"],
            n_features=payload["n_features"],
        )


@dataclasses.dataclass
class ForestModel:
    trees: list
    bootstrap_seeds: list
    n_classes: int
    n_features: int

    def to_dict(self):
        return {
            "kind": "forest",
            "n_classes": self.n_classes,
            "n_features": self.n_features,
            "bootstrap_seeds": list(self.bootstrap_seeds),
            "trees": [tree.to_dict() for tree in self.trees],
        }

    @classmethod
    def from_dict(cls, payload):
        return cls(
            trees=[DecisionTree.from_dict(t) for t in payload["trees"]],
            bootstrap_seeds=payload["bootstrap_seeds"],
            n_classes=payload["n_classes"],
            n_features=payload["n_features"],
        )


def _tree_labels(tree, X):
    return _argmax_rows(predict_cart(tree, X))


def fit_adaboost(X, y, rounds=200, tree_params=None, seed=0, n_classes=None):
    """SAMME boosting with weighted CART learners.

    Per round: fit a tree on the current weight distribution, compute the
    weighted error e; discard the round and stop if e >= 1 - 1/K (weak
    learnability exhausted); otherwise alpha = ln((1-e)/e) + ln(K-1), scale
    misclassified weights by exp(alpha) and renormalize. A perfect round
    (e == 0) is kept with alpha capped and stops boosting.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if rounds < 1:
        raise ValueError("need at least one round")
    k = int(y.max()) + 1 if n_classes is None else n_classes
    if len(np.unique(y)) < 2:
        raise ValueError("y is single-class; boosting is undefined")
    if tree_params is None:
        tree_params = TreeParams(max_depth=2, criterion="gini")
    n = len(y)
    weights = np.full(n, 1.0 / n)
    stages = []
    for r in range(rounds):
        # trees take count-scale weights so min_samples_leaf keeps meaning
        tree = fit_cart(X, y, w=weights * n, params=tree_params,
                        seed=seed + r, n_classes=k)
        miss = _tree_labels(tree, X) != y
        error = float(weights[miss].sum())
        if error == 0.0:
            stages.append((tree, ALPHA_CAP))
            break
        if error >= 1.0 - 1.0 / k:
            break
        alpha = samme_alpha(error, k)
        stages.append((tree, alpha))
        weights = weights * np.exp(alpha * miss)
        weights /= weights.sum()
    if not stages:
        raise ValueError("no usable boosting stage (first learner too weak)")
    return AdaBoostModel(stages=stages, n_classes=k, n_features=X.shape[1])


def predict_adaboost(model, X):
    """(labels, normalized class-score matrix).

    score(k) = sum over stages of alpha * [stage predicts k]; scores are
    then normalized to a simplex so they can serve as meta-features.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} columns, got {X.shape[1]}")
    scores = np.zeros((len(X), model.n_classes))
    for tree, alpha in model.stages:
        labels = _tree_labels(tree, X)
        scores[np.arange(len(X)), labels] += alpha
    labels = _argmax_rows(scores)
    return labels, scores / scores.sum(axis=1, keepdims=True)


def fit_gbm(X, y, rounds=200, learning_rate=0.1, tree_params=None, seed=0,
            n_classes=None, loss_trace=None):
    """Stagewise softmax-loss boosting, one mse regression tree per class
    per round, fitted to the residuals (one-hot - softmax).

    Leaf values are plain weighted-mean residuals. Scores start at the class
    log-priors. If ``loss_trace`` is a list, the mean training cross-entropy
    is appended after the init and after every round.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if rounds < 1:
        raise ValueError("need at least one round")
    if not 0.0 < learning_rate <= 1.0:
        raise ValueError("learning_rate must be in (0, 1]")
    k = int(y.max()) + 1 if n_classes is None else n_classes
    if len(np.unique(y)) < 2:
        raise ValueError("y is single-class; boosting is undefined")
    if tree_params is None:
        tree_params = TreeParams(max_depth=3, criterion="mse")
    n = len(y)
    onehot = np.zeros((n, k))
    onehot[np.arange(n), y] = 1.0
    priors = np.bincount(y, minlength=k) / n
    init_scores = np.log(priors + 1e-12)
    scores = np.tile(init_scores, (n, 1))

    def record_loss():
        if loss_trace is not None:
            proba = _softmax(scores)
            loss_trace.append(float(-np.mean(np.log(proba[np.arange(n), y] + 1e-300))))

    record_loss()
    stages = []
    for r in range(rounds):
        proba = _softmax(scores)
        round_trees = []
        for cls in range(k):
            residual = onehot[:, cls] - proba[:, cls]
            tree = fit_cart(X, residual, params=tree_params,
                            seed=seed + r * k + cls)
            round_trees.append(tree)
            scores[:, cls] += learning_rate * predict_cart(tree, X)
        stages.append(round_trees)
        record_loss()
    return GbmModel(init_scores=init_scores, stages=stages,
                    learning_rate=learning_rate, n_features=X.shape[1])


def predict_gbm(model, X):
    """(labels, softmax probability matrix)."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} columns, got {X.shape[1]}")
    scores = np.tile(model.init_scores, (len(X), 1))
    for round_trees in model.stages:
        for cls, tree in enumerate(round_trees):
            scores[:, cls] += model.learning_rate * predict_cart(tree, X)
    proba = _softmax(scores)
    return _argmax_rows(proba), proba


def bootstrap_counts(n, seed):
    """Multiplicity of each row in the bootstrap draw for one tree."""
    draw = np.random.default_rng(seed).integers(0, n, size=n)
    return np.bincount(draw, minlength=n).astype(np.float64)


def fit_forest(X, y, n_trees=200, tree_params=None, seed=0, n_classes=None,
               bootstrap=True):
    """Bagged gini trees on bootstrap resamples.

    Bootstrap multiplicities are passed to the trees as sample weights (a
    zero-weight row is invisible to the tree, so out-of-bag rows leave no
    trace). Unless overridden, each tree considers ceil(sqrt(D)) features
    per node. ``bootstrap=False`` is a test hook that trains every tree on
    the full sample.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if n_trees < 1:
        raise ValueError("need at least one tree")
    k = int(y.max()) + 1 if n_classes is None else n_classes
    if tree_params is None:
        tree_params = TreeParams(max_depth=6, criterion="gini")
    if tree_params.feature_subsample is None:
        subsample = math.ceil(math.sqrt(X.shape[1]))
        tree_params = dataclasses.replace(tree_params, feature_subsample=subsample)
    n = len(y)
    master = np.random.default_rng(seed)
    tree_seeds = master.integers(0, 2**63 - 1, size=n_trees)
    trees = []
    for tree_seed in tree_seeds:
        w = bootstrap_counts(n, int(tree_seed)) if bootstrap else None
        trees.append(fit_cart(X, y, w=w, params=tree_params,
                              seed=int(tree_seed), n_classes=k))
    return ForestModel(trees=trees, bootstrap_seeds=[int(s) for s in tree_seeds],
                       n_classes=k, n_features=X.shape[1])


def predict_forest(model, X):
    """(labels, mean of per-tree leaf probability vectors)."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} columns, got {X.shape[1]}")
    proba = np.zeros((len(X), model.n_classes))
    for tree in model.trees:
        proba += predict_cart(tree, X)
    proba /= len(model.trees)
    return _argmax_rows(proba), proba

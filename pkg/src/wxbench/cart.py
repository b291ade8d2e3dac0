"""Weighted CART decision trees (gini classification / mse regression).

Base learner for AdaBoost, gradient boosting and random forests. Trees are
grown by greedy recursive splitting on weighted criterion reduction, with
candidate thresholds at midpoints between consecutive distinct sorted
feature values. Determinism rules: equal-gain ties resolve to the lowest
feature index then lowest threshold, and routing ties (x == threshold) go
left. min_samples_leaf counts *weight*, not rows, so a duplicated sample is
exactly equivalent to doubling its weight.
"""

from __future__ import annotations

import dataclasses

import numpy as np

_GAIN_EPS = 1e-12


@dataclasses.dataclass(frozen=True)
class TreeParams:
    max_depth: int = 6
    min_samples_leaf: float = 1.0
    criterion: str = "gini"
    feature_subsample: int | None = None

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.criterion not in ("gini", "mse"):
            raise ValueError(f"unknown criterion {self.criterion!r}")


class DecisionTree:
    """Fitted tree stored as preorder node arrays.

    Internal nodes carry (feature, threshold, left, right); leaves carry a
    class-probability vector (gini) or a scalar (mse).
    """

    def __init__(self, criterion, n_features, n_classes, nodes):
        self.criterion = criterion
        self.n_features = n_features
        self.n_classes = n_classes  # None for regression trees
        self.nodes = nodes
        self._feature = np.array([n.get("feature", -1) for n in nodes], dtype=np.int64)
        self._threshold = np.array(
            [n.get("threshold", 0.0) for n in nodes], dtype=np.float64
        )
        self._left = np.array([n.get("left", -1) for n in nodes], dtype=np.int64)
        self._right = np.array([n.get("right", -1) for n in nodes], dtype=np.int64)
        self._is_leaf = self._left < 0
        if criterion == "gini":
            values = np.zeros((len(nodes), n_classes), dtype=np.float64)
            for i, node in enumerate(nodes):
                if "value" in node:
                    values[i] = node["value"]
        else:
            values = np.array(
                [n.get("value", 0.0) for n in nodes], dtype=np.float64
            )
        self._values = values

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_leaves(self):
        return int(self._is_leaf.sum())

    def to_dict(self):
        return {
            "kind": "cart",
            "criterion": self.criterion,
            "n_features": self.n_features,
            "n_classes": self.n_classes,
            "nodes": self.nodes,
        }

    @classmethod
    def from_dict(cls, payload):
        return cls(
            criterion=payload["criterion"],
            n_features=payload["n_features"],
            n_classes=payload["n_classes"],
            nodes=payload["nodes"],
        )


def gini_impurity(weighted_class_mass):
    """1 - sum(p_k^2) for p_k = mass_k / total mass."""
    mass = np.asarray(weighted_class_mass, dtype=np.float64)
    if np.any(mass < 0):
        raise ValueError("class masses must be non-negative")
    total = mass.sum()
    if total <= 0:
        raise ValueError("all-zero class mass")
    p = mass / total
    return float(1.0 - np.dot(p, p))


def _best_split(X_node, y_node, w_node, criterion, n_classes, min_leaf_weight):
    """Best split over all given columns at once.

    Returns (column, threshold, child_impurity) or None. child_impurity is
    the weight-averaged criterion of the two children per unit weight;
    lower is better. Ties resolve to the lowest column, then the lowest
    threshold. Cut quality at every adjacent position of every column is
    evaluated in one vectorized pass; positions that are not value
    boundaries or violate the leaf-weight floor are masked out.
    """
    m = X_node.shape[0]
    if m < 2:
        return None
    # tie order inside equal values never matters: cuts exist only between
    # distinct values, and cumulative masses at a cut are tie-invariant
    order = np.argsort(X_node, axis=0)
    values = np.take_along_axis(X_node, order, axis=0)
    weights = w_node[order]
    cut_ok = values[:-1] < values[1:]
    if not cut_ok.any():
        return None

    lw = np.cumsum(weights, axis=0)[:-1]
    total_w = w_node.sum()
    rw = total_w - lw
    valid = cut_ok & (lw >= min_leaf_weight) & (rw >= min_leaf_weight)
    if not valid.any():
        return None

    # score = the subtrahend of the child criterion; maximizing it minimizes
    # the weighted child impurity (gini) or child SSE (mse)
    if criterion == "gini":
        score = np.zeros_like(lw)
        for cls in range(n_classes):
            mass = np.cumsum(weights * (y_node[order] == cls), axis=0)
            left = mass[:-1]
            right = mass[-1] - left
            score += left * left / lw + right * right / rw
        child_at = lambda pos, col: 1.0 - score[pos, col] / total_w
    else:
        targets = y_node[order]
        cwt = np.cumsum(weights * targets, axis=0)
        total_wt2 = float(np.dot(w_node, y_node * y_node))
        left = cwt[:-1]
        right = cwt[-1] - left
        score = left * left / lw + right * right / rw
        child_at = lambda pos, col: (total_wt2 - score[pos, col]) / total_w

    score = np.where(valid, score, -np.inf)
    best_pos = np.argmax(score, axis=0)
    per_col = score[best_pos, np.arange(score.shape[1])]
    col = int(np.argmax(per_col))
    if not np.isfinite(per_col[col]):
        return None
    pos = int(best_pos[col])
    threshold = 0.5 * (values[pos, col] + values[pos + 1, col])
    if threshold >= values[pos + 1, col]:
        # adjacent floats: the midpoint rounded up and would route both
        # sides left; fall back to the left value (x <= threshold goes left)
        threshold = values[pos, col]
    return col, float(threshold), float(child_at(pos, col))


def fit_cart(X, y, w=None, params=TreeParams(), seed=0, n_classes=None):
    """Grow a tree on (X, y) with sample weights w.

    y holds integer class labels for the gini criterion, float targets for
    mse. Rows with zero weight are ignored entirely (they contribute neither
    mass nor candidate thresholds). feature_subsample, when set below the
    column count, draws that many features per node from a generator seeded
    once at fit time, consumed in preorder.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("X must be a non-empty 2-D matrix")
    if np.isnan(X).any():
        raise ValueError("X contains NaN")
    n, d = X.shape
    if params.criterion == "gini":
        y = np.asarray(y, dtype=np.int64)
        if n_classes is None:
            n_classes = int(y.max()) + 1
    else:
        y = np.asarray(y, dtype=np.float64)
        n_classes = None
    if len(y) != n:
        raise ValueError("X/y length mismatch")
    w = np.ones(n, dtype=np.float64) if w is None else np.asarray(w, dtype=np.float64)
    if len(w) != n:
        raise ValueError("X/w length mismatch")
    if np.any(w < 0) or w.sum() <= 0:
        raise ValueError("weights must be non-negative with positive sum")

    live = np.flatnonzero(w > 0)
    X_fit, y_fit, w_fit = X[live], y[live], w[live]

    subsample = params.feature_subsample
    use_subsample = subsample is not None and subsample < d
    rng = np.random.default_rng(seed)
    nodes = []

    def node_impurity(rows):
        if params.criterion == "gini":
            mass = np.bincount(y_fit[rows], weights=w_fit[rows], minlength=n_classes)
            return gini_impurity(mass), mass
        ws = w_fit[rows]
        ts = y_fit[rows]
        total = ws.sum()
        mean = np.dot(ws, ts) / total
        sse = np.dot(ws, (ts - mean) ** 2)
        return sse / total, mean

    def leaf_payload(stat):
        if params.criterion == "gini":
            return {"value": (stat / stat.sum()).tolist()}
        return {"value": float(stat)}

    def build(rows, depth):
        index = len(nodes)
        nodes.append(None)  # reserve the preorder slot
        impurity, stat = node_impurity(rows)

        # Split whenever the node is impure and a valid split exists, even at
        # zero gain (an XOR-style node needs a gain-free first cut). Children
        # can never be worse than the parent: the weighted child criterion is
        # a Jensen average of the parent's.
        split = None
        if depth < params.max_depth and impurity > _GAIN_EPS:
            if use_subsample:
                candidates = np.sort(rng.choice(d, size=subsample, replace=False))
                X_cols = X_fit[np.ix_(rows, candidates)]
            else:
                candidates = None
                X_cols = X_fit[rows]
            found = _best_split(
                X_cols, y_fit[rows], w_fit[rows],
                params.criterion, n_classes, params.min_samples_leaf,
            )
            if found is not None:
                col, threshold, _ = found
                feature = int(candidates[col]) if candidates is not None else col
                split = (feature, threshold)

        if split is None:
            nodes[index] = leaf_payload(stat)
            return index

        feature, threshold = split
        go_left = X_fit[rows, feature] <= threshold
        left = build(rows[go_left], depth + 1)
        right = build(rows[~go_left], depth + 1)
        nodes[index] = {
            "feature": feature,
            "threshold": threshold,
            "left": left,
            "right": right,
        }
        return index

    build(np.arange(len(live)), 0)
    return DecisionTree(params.criterion, d, n_classes, nodes)


def predict_cart(tree, X):
    """Route rows to leaves; returns (N, K) probabilities or (N,) values."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != tree.n_features:
        raise ValueError(
            f"expected {tree.n_features} columns, got {X.shape[1] if X.ndim == 2 else 'non-matrix'}"
        )
    at = np.zeros(len(X), dtype=np.int64)
    pending = np.flatnonzero(~tree._is_leaf[at])
    while pending.size:
        node = at[pending]
        go_left = X[pending, tree._feature[node]] <= tree._threshold[node]
        at[pending] = np.where(go_left, tree._left[node], tree._right[node])
        pending = pending[~tree._is_leaf[at[pending]]]
    return tree._values[at]

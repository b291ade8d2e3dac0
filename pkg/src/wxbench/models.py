"""Uniform classifier interface over every model family in the package.

A LearnerConfig names a family and its hyperparameters; train() produces a
TrainedModel whose predict/predict_proba hide the family differences. This
is the surface the stacking layer and the benchmark runner build on.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import ensembles, learners
from .cart import DecisionTree, TreeParams, fit_cart, predict_cart

KINDS = ("cart", "adaboost", "gbm", "forest", "mlp", "knn")


@dataclasses.dataclass(frozen=True)
class LearnerConfig:
    """A model family plus hyperparameters (family defaults where omitted)."""

    kind: str
    params: tuple = ()  # sorted (name, value) pairs; see make_config

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown learner kind {self.kind!r}")

    def get(self, name, default=None):
        return dict(self.params).get(name, default)

    def to_dict(self):
        return {"kind": self.kind, "params": {k: v for k, v in self.params}}


def make_config(kind, **params):
    """LearnerConfig with a canonical (hashable, ordered) parameter tuple."""
    return LearnerConfig(kind=kind, params=tuple(sorted(params.items())))


def config_from_dict(payload):
    return make_config(payload["kind"], **payload.get("params", {}))


class TrainedModel:
    """One fitted model with a uniform (labels, probabilities) interface."""

    def __init__(self, config, inner, n_classes):
        self.config = config
        self.inner = inner
        self.n_classes = n_classes

    def predict(self, X):
        return self.predict_all(X)[0]

    def predict_proba(self, X):
        return self.predict_all(X)[1]

    def predict_all(self, X):
        """(labels, class-probability matrix) in one pass."""
        kind = self.config.kind
        if kind == "cart":
            proba = predict_cart(self.inner, X)
            return np.argmax(proba, axis=1).astype(np.int64), proba
        if kind == "adaboost":
            return ensembles.predict_adaboost(self.inner, X)
        if kind == "gbm":
            return ensembles.predict_gbm(self.inner, X)
        if kind == "forest":
            return ensembles.predict_forest(self.inner, X)
        if kind == "mlp":
            return learners.predict_mlp(self.inner, X)
        if kind == "knn":
            return learners.predict_knn(self.inner, X)
        raise AssertionError(kind)

    def to_dict(self):
        return {
            "config": self.config.to_dict(),
            "n_classes": self.n_classes,
            "model": self.inner.to_dict(),
        }

    @classmethod
    def from_dict(cls, payload):
        config = config_from_dict(payload["config"])
        inner_payload = payload["model"]
        loader = {
            "cart": DecisionTree.from_dict,
            "adaboost": ensembles.AdaBoostModel.from_dict,
            "gbm": ensembles.GbmModel.from_dict,
            "forest": ensembles.ForestModel.from_dict,
            "mlp": learners.MlpModel.from_dict,
            "knn": learners.KnnModel.from_dict,
        }[config.kind]
        return cls(config=config, inner=loader(inner_payload),
                   n_classes=payload["n_classes"])


def _tree_params(config, criterion, default_depth):
    return TreeParams(
        max_depth=config.get("max_depth", default_depth),
        min_samples_leaf=config.get("min_samples_leaf", 1),
        criterion=criterion,
        feature_subsample=config.get("feature_subsample"),
    )


def train(config, X, y, n_classes, seed=0):
    """Fit one model family on (X, y). Deterministic given seed."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    kind = config.kind
    if kind == "cart":
        inner = fit_cart(X, y, params=_tree_params(config, "gini", 6),
                         seed=seed, n_classes=n_classes)
    elif kind == "adaboost":
        inner = ensembles.fit_adaboost(
            X, y,
            rounds=config.get("rounds", 200),
            tree_params=_tree_params(config, "gini", 2),
            seed=seed, n_classes=n_classes,
        )
    elif kind == "gbm":
        inner = ensembles.fit_gbm(
            X, y,
            rounds=config.get("rounds", 200),
            learning_rate=config.get("learning_rate", 0.1),
            tree_params=_tree_params(config, "mse", 3),
            seed=seed, n_classes=n_classes,
        )
    elif kind == "forest":
        inner = ensembles.fit_forest(
            X, y,
            n_trees=config.get("n_trees", 200),
            tree_params=_tree_params(config, "gini", 6),
            seed=seed, n_classes=n_classes,
        )
    elif kind == "mlp":
        hidden = config.get("hidden", 64)
        hidden = (hidden,) if isinstance(hidden, int) else tuple(hidden)
        model = learners.init_mlp((X.shape[1], *hidden, n_classes), seed=seed)
        inner, _ = learners.train_mlp(
            model, X, y,
            epochs=config.get("epochs", 200),
            batch_size=config.get("batch_size", 32),
            learning_rate=config.get("learning_rate", 0.01),
            momentum=config.get("momentum", 0.9),
            seed=seed,
        )
    elif kind == "knn":
        inner = learners.fit_knn(X, y, k=config.get("k", 15), n_classes=n_classes)
    else:
        raise AssertionError(kind)
    return TrainedModel(config=config, inner=inner, n_classes=n_classes)

"""Stacked generalization: out-of-fold meta-features plus a meta-learner.

Every training row's meta-features (concatenated base-learner class
probabilities) come from models that never saw that row; the fold plan
records exactly which rows trained the models that scored each fold, so
leak-freedom is checkable after the fact.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import models
from .seeding import derive_seed

DEFAULT_BASE_CONFIGS = (
    models.make_config("gbm"),
    models.make_config("adaboost"),
    models.make_config("cart"),
)


@dataclasses.dataclass(frozen=True)
class StackingSpec:
    base_learners: tuple = DEFAULT_BASE_CONFIGS
    meta_learner: models.LearnerConfig = models.make_config("forest")
    n_folds: int = 5
    seed: int = 0

    def __post_init__(self):
        if len(self.base_learners) < 2:
            raise ValueError("need at least 2 base learners")
        if self.n_folds < 2:
            raise ValueError("need at least 2 folds")

    def to_dict(self):
        return {
            "base_learners": [cfg.to_dict() for cfg in self.base_learners],
            "meta_learner": self.meta_learner.to_dict(),
            "n_folds": self.n_folds,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, payload):
        return cls(
            base_learners=tuple(
                models.config_from_dict(c) for c in payload["base_learners"]
            ),
            meta_learner=models.config_from_dict(payload["meta_learner"]),
            n_folds=payload["n_folds"],
            seed=payload["seed"],
        )


@dataclasses.dataclass(frozen=True)
class FoldPlan:
    """Which rows trained the models that scored each fold."""

    fold_of_row: np.ndarray
    train_rows: tuple  # per fold, sorted index array
    score_rows: tuple  # per fold, sorted index array


def assign_folds(n, n_folds, seed):
    """Seeded shuffle cut into n_folds near-equal contiguous folds."""
    if n_folds > n:
        raise ValueError(f"n_folds {n_folds} exceeds rows {n}")
    perm = np.random.default_rng(seed).permutation(n)
    fold_of_row = np.empty(n, dtype=np.int64)
    sizes = np.full(n_folds, n // n_folds)
    sizes[: n % n_folds] += 1
    start = 0
    for f, size in enumerate(sizes):
        fold_of_row[perm[start : start + size]] = f
        start += size
    return fold_of_row


def oof_meta_features(spec, X, y, n_classes=None):
    """(meta matrix N x B*K, FoldPlan).

    For each fold f and base learner b, a fresh b is trained on all rows
    outside f and emits class probabilities for the rows inside f. Raises
    if some fold's training rows are missing a class.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = len(y)
    k = int(y.max()) + 1 if n_classes is None else n_classes
    fold_of_row = assign_folds(n, spec.n_folds, spec.seed)

    train_rows, score_rows = [], []
    for f in range(spec.n_folds):
        inside = np.flatnonzero(fold_of_row == f)
        outside = np.flatnonzero(fold_of_row != f)
        counts = np.bincount(y[outside], minlength=k)
        for cls in np.flatnonzero(counts == 0):
            raise ValueError(f"fold {f}: training rows are missing class {cls}")
        train_rows.append(outside)
        score_rows.append(inside)

    b = len(spec.base_learners)
    meta = np.empty((n, b * k))
    for f in range(spec.n_folds):
        outside, inside = train_rows[f], score_rows[f]
        for bi, config in enumerate(spec.base_learners):
            seed = derive_seed(spec.seed, f"stacking.fold{f}.base{bi}")
            model = models.train(config, X[outside], y[outside], k, seed=seed)
            meta[inside, bi * k : (bi + 1) * k] = model.predict_proba(X[inside])
    plan = FoldPlan(
        fold_of_row=fold_of_row,
        train_rows=tuple(train_rows),
        score_rows=tuple(score_rows),
    )
    return meta, plan


@dataclasses.dataclass
class StackingModel:
    spec: StackingSpec
    base_models: list  # refit on the full training set, spec order
    meta_model: models.TrainedModel
    n_classes: int

    def to_dict(self):
        return {
            "kind": "stacking",
            "spec": self.spec.to_dict(),
            "n_classes": self.n_classes,
            "base_models": [m.to_dict() for m in self.base_models],
            "meta_model": self.meta_model.to_dict(),
        }

    @classmethod
    def from_dict(cls, payload):
        return cls(
            spec=StackingSpec.from_dict(payload["spec"]),
            base_models=[models.TrainedModel.from_dict(m) for m in payload["base_models"]],
            meta_model=models.TrainedModel.from_dict(payload["meta_model"]),
            n_classes=payload["n_classes"],
        )


def refit_bases(spec, X, y, n_classes):
    """Base learners retrained on all rows (inference-time feature makers)."""
    return [
        models.train(config, X, y, n_classes,
                     seed=derive_seed(spec.seed, f"stacking.full.base{bi}"))
        for bi, config in enumerate(spec.base_learners)
    ]


def assemble(spec, base_models, meta_features, y, n_classes):
    """Train the meta-learner on precomputed OOF features and wrap it up.

    Split out from fit_stacking so a benchmark run that shares one base set
    across several meta-learners only pays for the folds once.
    """
    meta_model = models.train(
        spec.meta_learner, meta_features, y, n_classes,
        seed=derive_seed(spec.seed, "stacking.meta"),
    )
    return StackingModel(spec=spec, base_models=base_models,
                         meta_model=meta_model, n_classes=n_classes)


def fit_stacking(spec, X, y, n_classes=None):
    """OOF meta-features -> meta-learner; bases refit on all rows."""
    y = np.asarray(y, dtype=np.int64)
    k = int(y.max()) + 1 if n_classes is None else n_classes
    meta, _ = oof_meta_features(spec, X, y, n_classes=k)
    bases = refit_bases(spec, X, y, k)
    return assemble(spec, bases, meta, y, k)


def stacked_features(model, X):
    """Base probabilities concatenated in spec order."""
    return np.hstack([base.predict_proba(X) for base in model.base_models])


def predict_stacking(model, X):
    """(labels, probability matrix) from the meta-learner."""
    return model.meta_model.predict_all(stacked_features(model, X))

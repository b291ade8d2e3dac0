"""Scaling, target discretization, feature selection and the train/test split."""

from __future__ import annotations

import dataclasses

import numpy as np

from .ingest import FEATURE_NAMES

PRECIP_THRESHOLDS = (0.1, 10.0, 35.0)  # mm/day rain-intensity bands
PRECIP_CLASS_NAMES = ("dry", "light", "moderate", "heavy")

# Same-day thermal aliases of the temperature label; keeping them would make
# the prediction task degenerate.
TEMPERATURE_LEAKY_FEATURES = ("T2M", "T2M_MAX", "T2M_MIN", "T2M_RANGE", "TS", "T2MWET")

TARGET_SOURCE_FEATURE = {"precipitation": "PRECTOT", "temperature": "T2M"}


@dataclasses.dataclass(frozen=True)
class ScalerParams:
    """Per-column min/max fitted on training rows only."""

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mins", np.asarray(self.mins, dtype=np.float64))
        object.__setattr__(self, "maxs", np.asarray(self.maxs, dtype=np.float64))
        if self.mins.shape != self.maxs.shape:
            raise ValueError("min/max shape mismatch")
        if np.any(self.mins > self.maxs):
            raise ValueError("column min exceeds max")


@dataclasses.dataclass(frozen=True)
class SplitIndices:
    """Disjoint train/test row indices covering [0, n) exactly once."""

    train_idx: np.ndarray
    test_idx: np.ndarray
    seed: int


@dataclasses.dataclass(frozen=True)
class LabeledDataset:
    """Scaled features plus integer class labels for one prediction target."""

    features: np.ndarray
    labels: np.ndarray
    class_names: tuple
    feature_names: tuple
    target_name: str

    @property
    def n_classes(self):
        return len(self.class_names)


def fit_minmax(rows):
    """Column-wise extrema of the given rows."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] < 1:
        raise ValueError("need a non-empty 2-D matrix")
    return ScalerParams(mins=rows.min(axis=0), maxs=rows.max(axis=0))


def apply_minmax(params, rows):
    """x -> (x - min) / (max - min); constant columns map to 0.

    Values outside the fitted range (test rows) land outside [0, 1] and are
    deliberately not clipped.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.shape[-1] != params.mins.shape[0]:
        raise ValueError(
            f"column count {rows.shape[-1]} does not match scaler ({params.mins.shape[0]})"
        )
    span = params.maxs - params.mins
    safe_span = np.where(span == 0.0, 1.0, span)
    out = (rows - params.mins) / safe_span
    return np.where(span == 0.0, 0.0, out)


def invert_minmax(params, rows):
    """Algebraic inverse of apply_minmax (constant columns recover min)."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.shape[-1] != params.mins.shape[0]:
        raise ValueError(
            f"column count {rows.shape[-1]} does not match scaler ({params.mins.shape[0]})"
        )
    return rows * (params.maxs - params.mins) + params.mins


@dataclasses.dataclass(frozen=True)
class PrecipClasses:
    """Fixed rain-intensity bands on mm/day; boundary values go up a band."""

    thresholds: tuple = PRECIP_THRESHOLDS
    class_names: tuple = PRECIP_CLASS_NAMES


@dataclasses.dataclass(frozen=True)
class TempQuantiles:
    """K equal-probability bins; edges computed on the training portion only."""

    k: int = 4

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("need at least 2 quantile classes")

    @property
    def class_names(self):
        return tuple(f"q{i + 1}_of_{self.k}" for i in range(self.k))


def discretize_target(values, scheme, train_idx=None):
    """Map continuous target values to class labels.

    PrecipClasses: label = number of thresholds <= value, so a value exactly
    on a threshold joins the higher band. TempQuantiles: linear-interpolation
    quantile edges from the training rows, boundary values join the lower bin.
    Raises if any class is empty over the full dataset (per-class metrics
    would be undefined).
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("no target values")
    if isinstance(scheme, PrecipClasses):
        edges = np.asarray(scheme.thresholds, dtype=np.float64)
        labels = np.searchsorted(edges, values, side="right")
        class_names = scheme.class_names
    elif isinstance(scheme, TempQuantiles):
        fit_values = values if train_idx is None else values[np.asarray(train_idx)]
        qs = np.arange(1, scheme.k) / scheme.k
        edges = np.quantile(fit_values, qs)
        labels = np.searchsorted(edges, values, side="left")
        class_names = scheme.class_names
    else:
        raise TypeError(f"unknown discretization scheme {scheme!r}")

    counts = np.bincount(labels, minlength=len(class_names))
    for name, count in zip(class_names, counts):
        if count == 0:
            raise ValueError(f"class {name!r} has no members in the dataset")
    return labels.astype(np.int64), tuple(class_names)


def select_features(table, target):
    """Feature matrix and names for one target, label aliases dropped.

    precipitation: all features except PRECTOT (15 columns).
    temperature: all features except the same-day thermal aliases (10
    columns). Column order follows the canonical feature order.
    """
    if target not in TARGET_SOURCE_FEATURE:
        raise ValueError(f"unknown target {target!r}")
    if target == "precipitation":
        dropped = {"PRECTOT"}
    else:
        dropped = set(TEMPERATURE_LEAKY_FEATURES)
    names = tuple(n for n in FEATURE_NAMES if n not in dropped)
    matrix = table.to_matrix()
    cols = [FEATURE_NAMES.index(n) for n in names]
    return matrix[:, cols], names


def split_train_test(n, test_fraction=0.15, seed=0):
    """Seeded uniform shuffle of [0, n), test rows taken from the front."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    if n < 2:
        raise ValueError("need at least 2 rows to split")
    n_test = int(round(test_fraction * n))
    if n_test == 0 or n_test == n:
        raise ValueError(f"test_fraction {test_fraction} rounds to an empty partition for n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    return SplitIndices(
        train_idx=np.sort(perm[n_test:]), test_idx=np.sort(perm[:n_test]), seed=seed
    )


def build_labeled_dataset(table, target, scheme, test_fraction=0.15, seed=0, lag=0):
    """Assemble the benchmark-ready dataset for one target.

    Selects features, optionally shifts the label ``lag`` days forward
    (features on day t predict the target on day t+lag), splits, computes
    quantile edges on training rows only, and min-max scales with parameters
    fitted on training rows only. Returns (LabeledDataset, SplitIndices).
    """
    if lag < 0:
        raise ValueError("lag must be >= 0")
    matrix, feature_names = select_features(table, target)
    target_values = table.column(TARGET_SOURCE_FEATURE[target])
    if lag:
        if lag >= len(table):
            raise ValueError(f"lag {lag} leaves no rows")
        matrix = matrix[:-lag]
        target_values = target_values[lag:]

    split = split_train_test(matrix.shape[0], test_fraction=test_fraction, seed=seed)
    labels, class_names = discretize_target(target_values, scheme, train_idx=split.train_idx)
    params = fit_minmax(matrix[split.train_idx])
    dataset = LabeledDataset(
        features=apply_minmax(params, matrix),
        labels=labels,
        class_names=class_names,
        feature_names=feature_names,
        target_name=target,
    )
    return dataset, split

"""Run configuration: every protocol knob in one validated record.

Config files are flat ``key = value`` text ('#' starts a comment). Keys
match the RunConfig field names; every key is optional and falls back to
the defaults below. The resolved config is serialized next to run outputs
so results stay reproducible.
"""

from __future__ import annotations

import dataclasses
import datetime

from . import models
from .seeding import derive_seed
from .stacking import StackingSpec

BENCHMARK_ALGORITHMS = (
    "Gradient Boost",
    "Ada Boost",
    "Artificial Neural Network",
    "Stacking Random Forest",
    "Stacking Neural Network",
    "Stacking KNN",
)


@dataclasses.dataclass
class RunConfig:
    # station and date range
    latitude: float = 23.8103
    longitude: float = 90.4125
    start: datetime.date = datetime.date(2003, 1, 1)
    end: datetime.date = datetime.date(2023, 1, 1)
    # pipeline
    cleaning_policy: str = "linear_interpolate"
    target: str = "precipitation"
    precip_thresholds: tuple = (0.1, 10.0, 35.0)
    temp_classes: int = 4
    lag: int = 0
    test_fraction: float = 0.15
    seed: int = 0
    # model hyperparameters
    gbm_rounds: int = 200
    gbm_learning_rate: float = 0.1
    gbm_max_depth: int = 3
    adaboost_rounds: int = 200
    adaboost_max_depth: int = 2
    cart_max_depth: int = 6
    forest_trees: int = 200
    forest_max_depth: int = 6
    mlp_hidden: int = 64
    mlp_epochs: int = 200
    mlp_batch_size: int = 32
    mlp_learning_rate: float = 0.01
    knn_k: int = 15
    # stacking: "meta" reads the named model as the meta-learner over
    # {GBM, AdaBoost, CART} bases; "bases" adds the named model to that
    # base set and keeps a forest meta-learner.
    stacking_mode: str = "meta"
    stacking_folds: int = 5
    # output
    out_dir: str = "runs"

    def validate(self):
        if self.start >= self.end:
            raise ValueError("start date must precede end date")
        if self.cleaning_policy not in ("linear_interpolate", "drop_row"):
            raise ValueError(f"unknown cleaning_policy {self.cleaning_policy!r}")
        if self.target not in ("precipitation", "temperature"):
            raise ValueError(f"unknown target {self.target!r}")
        if list(self.precip_thresholds) != sorted(self.precip_thresholds):
            raise ValueError("precip_thresholds must be ascending")
        if self.temp_classes < 2:
            raise ValueError("temp_classes must be >= 2")
        if self.lag < 0:
            raise ValueError("lag must be >= 0")
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must be in (0, 1)")
        if not 0.0 < self.gbm_learning_rate <= 1.0:
            raise ValueError("gbm_learning_rate must be in (0, 1]")
        for name in ("gbm_rounds", "adaboost_rounds", "forest_trees", "mlp_epochs",
                     "mlp_batch_size", "mlp_hidden", "knn_k"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("gbm_max_depth", "adaboost_max_depth", "cart_max_depth",
                     "forest_max_depth"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.stacking_mode not in ("meta", "bases"):
            raise ValueError(f"unknown stacking_mode {self.stacking_mode!r}")
        if self.stacking_folds < 2:
            raise ValueError("stacking_folds must be >= 2")
        return self

    # learner configs -----------------------------------------------------

    def gbm_config(self):
        return models.make_config(
            "gbm", rounds=self.gbm_rounds,
            learning_rate=self.gbm_learning_rate, max_depth=self.gbm_max_depth,
        )

    def adaboost_config(self):
        return models.make_config(
            "adaboost", rounds=self.adaboost_rounds, max_depth=self.adaboost_max_depth
        )

    def cart_config(self):
        return models.make_config("cart", max_depth=self.cart_max_depth)

    def forest_config(self):
        return models.make_config(
            "forest", n_trees=self.forest_trees, max_depth=self.forest_max_depth
        )

    def mlp_config(self):
        return models.make_config(
            "mlp", hidden=self.mlp_hidden, epochs=self.mlp_epochs,
            batch_size=self.mlp_batch_size, learning_rate=self.mlp_learning_rate,
        )

    def knn_config(self):
        return models.make_config("knn", k=self.knn_k)

    def base_configs(self):
        return (self.gbm_config(), self.adaboost_config(), self.cart_config())

    def stacking_spec(self, meta_kind):
        named = {"forest": self.forest_config(), "mlp": self.mlp_config(),
                 "knn": self.knn_config()}[meta_kind]
        seed = derive_seed(self.seed, "stacking")
        if self.stacking_mode == "meta":
            return StackingSpec(
                base_learners=self.base_configs(), meta_learner=named,
                n_folds=self.stacking_folds, seed=seed,
            )
        return StackingSpec(
            base_learners=(named, *self.base_configs()),
            meta_learner=self.forest_config(),
            n_folds=self.stacking_folds, seed=seed,
        )


_DATE_FIELDS = ("start", "end")
_TUPLE_FIELDS = ("precip_thresholds",)


def _parse_value(field, text):
    if field.name in _DATE_FIELDS:
        return datetime.date.fromisoformat(text)
    if field.name in _TUPLE_FIELDS:
        return tuple(float(part) for part in text.split(",") if part.strip())
    if field.type == "int":
        return int(text)
    if field.type == "float":
        return float(text)
    return text


def parse_config_text(text, base=None):
    """Apply ``key = value`` lines on top of defaults (or ``base``)."""
    config = dataclasses.replace(base) if base is not None else RunConfig()
    fields = {f.name: f for f in dataclasses.fields(RunConfig)}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in fields:
            raise ValueError(f"line {lineno}: unknown config key {key!r}")
        try:
            setattr(config, key, _parse_value(fields[key], value))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad value for {key}: {exc}") from None
    return config


def load_config(path, base=None):
    with open(path) as fh:
        return parse_config_text(fh.read(), base=base)


def config_to_text(config):
    """Flat key = value serialization, field order, round-trips exactly."""
    lines = []
    for field in dataclasses.fields(RunConfig):
        value = getattr(config, field.name)
        if field.name in _DATE_FIELDS:
            text = value.isoformat()
        elif field.name in _TUPLE_FIELDS:
            text = ",".join(repr(v) for v in value)
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f"{field.name} = {text}")
    return "\n".join(lines) + "\n"

"""Structural JSON persistence for every model family.

The payload is a plain dict of primitives (node arrays in preorder, flat
parameter lists, stage metadata); serialization is deterministic, so equal
models produce byte-identical files.
"""

from __future__ import annotations

import json

from . import stacking
from .cart import DecisionTree
from .ensembles import AdaBoostModel, ForestModel, GbmModel
from .learners import KnnModel, MlpModel

_LOADERS = {
    "cart": DecisionTree.from_dict,
    "adaboost": AdaBoostModel.from_dict,
    "gbm": GbmModel.from_dict,
    "forest": ForestModel.from_dict,
    "mlp": MlpModel.from_dict,
    "knn": KnnModel.from_dict,
    "stacking": stacking.StackingModel.from_dict,
}


def model_to_json(model):
    """Deterministic JSON text for any model with a to_dict()."""
    return json.dumps(model.to_dict(), sort_keys=True, separators=(",", ":"))


def model_from_json(text):
    payload = json.loads(text)
    kind = payload.get("kind")
    if kind not in _LOADERS:
        raise ValueError(f"unknown model kind {kind!r}")
    return _LOADERS[kind](payload)


def save_model(model, path):
    with open(path, "w") as fh:
        fh.write(model_to_json(model))
        fh.write("\n")


def load_model(path):
    with open(path) as fh:
        return model_from_json(fh.read())

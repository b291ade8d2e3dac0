"""Non-tree base models: a ReLU multilayer perceptron trained with
mini-batch SGD + momentum on softmax cross-entropy, and brute-force
k-nearest neighbors.
"""

from __future__ import annotations

import dataclasses

import numpy as np


class TrainingDiverged(Exception):
    """Loss became NaN; carries the epoch for diagnosing the learning rate."""

    def __init__(self, epoch):
        super().__init__(f"training loss became NaN at epoch {epoch}")
        self.epoch = epoch


@dataclasses.dataclass
class MlpModel:
    """Feed-forward net: sizes [D, H1, ..., K], ReLU hidden, softmax output."""

    layer_sizes: tuple
    weights: list  # per layer, (fan_in, fan_out)
    biases: list  # per layer, (fan_out,)

    def copy(self):
        return MlpModel(
            layer_sizes=tuple(self.layer_sizes),
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )

    def to_dict(self):
        return {
            "kind": "mlp",
            "layer_sizes": list(self.layer_sizes),
            "weights": [w.ravel().tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, payload):
        sizes = tuple(payload["layer_sizes"])
        weights = [
            np.array(flat, dtype=np.float64).reshape(sizes[i], sizes[i + 1])
            for i, flat in enumerate(payload["weights"])
        ]
        biases = [np.array(b, dtype=np.float64) for b in payload["biases"]]
        return cls(layer_sizes=sizes, weights=weights, biases=biases)


def init_mlp(layer_sizes, seed=0):
    """Seeded init: weights ~ uniform(+-sqrt(6/fan_in)), biases zero."""
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 3:
        raise ValueError("need at least one hidden layer: [D, H..., K]")
    if any(s <= 0 for s in sizes):
        raise ValueError(f"layer sizes must be positive, got {sizes}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        limit = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(layer_sizes=sizes, weights=weights, biases=biases)


def _forward(model, X):
    """Returns (activations per layer incl. input, pre-activations)."""
    acts = [X]
    pre = []
    h = X
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ w + b
        pre.append(z)
        h = z if i == last else np.maximum(z, 0.0)
        acts.append(h)
    return acts, pre


def _softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def _loss_and_grads(model, X, y):
    """Mean cross-entropy and its gradients w.r.t. every weight/bias."""
    n = len(X)
    acts, pre = _forward(model, X)
    proba = _softmax(acts[-1])
    loss = float(-np.mean(np.log(proba[np.arange(n), y] + 1e-300)))

    delta = proba.copy()
    delta[np.arange(n), y] -= 1.0
    delta /= n
    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.biases)
    for i in range(len(model.weights) - 1, -1, -1):
        grads_w[i] = acts[i].T @ delta
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ model.weights[i].T) * (pre[i - 1] > 0.0)
    return loss, grads_w, grads_b


def train_mlp(model, X, y, epochs=200, batch_size=32, learning_rate=0.01,
              momentum=0.9, seed=0):
    """SGD with momentum over seeded-shuffle mini-batches.

    Returns (trained model, per-epoch mean batch loss). The input model is
    not modified. Raises TrainingDiverged on a NaN loss.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    if y.min() < 0 or y.max() >= model.layer_sizes[-1]:
        raise ValueError("labels outside [0, K)")
    out = model.copy()
    vel_w = [np.zeros_like(w) for w in out.weights]
    vel_b = [np.zeros_like(b) for b in out.biases]
    rng = np.random.default_rng(seed)
    n = len(X)
    trace = []
    for epoch in range(epochs):
        order = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, batch_size):
            rows = order[start : start + batch_size]
            loss, grads_w, grads_b = _loss_and_grads(out, X[rows], y[rows])
            if np.isnan(loss):
                raise TrainingDiverged(epoch)
            batch_losses.append(loss)
            for i in range(len(out.weights)):
                vel_w[i] = momentum * vel_w[i] - learning_rate * grads_w[i]
                vel_b[i] = momentum * vel_b[i] - learning_rate * grads_b[i]
                out.weights[i] += vel_w[i]
                out.biases[i] += vel_b[i]
        trace.append(float(np.mean(batch_losses)))
    return out, trace


def gradient_check(model, X, y, step=1e-5):
    """Max relative error between backprop and central finite differences.

    Perturbs every single parameter; intended for small batches only.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    _, grads_w, grads_b = _loss_and_grads(model, X, y)

    probe = model.copy()

    def loss_at():
        loss, _, _ = _loss_and_grads(probe, X, y)
        return loss

    worst = 0.0
    for params, grads in ((probe.weights, grads_w), (probe.biases, grads_b)):
        for tensor, grad in zip(params, grads):
            flat = tensor.ravel()
            gflat = grad.ravel()
            for idx in range(flat.size):
                saved = flat[idx]
                flat[idx] = saved + step
                up = loss_at()
                flat[idx] = saved - step
                down = loss_at()
                flat[idx] = saved
                fd = (up - down) / (2.0 * step)
                denom = max(abs(gflat[idx]) + abs(fd), 1e-8)
                worst = max(worst, abs(gflat[idx] - fd) / denom)
    return worst


def predict_mlp(model, X):
    """(labels, softmax probability matrix)."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] != model.layer_sizes[0]:
        raise ValueError(f"expected {model.layer_sizes[0]} columns, got {X.shape[1]}")
    acts, _ = _forward(model, X)
    proba = _softmax(acts[-1])
    return np.argmax(proba, axis=1).astype(np.int64), proba


@dataclasses.dataclass
class KnnModel:
    X_train: np.ndarray
    y_train: np.ndarray
    k: int
    n_classes: int

    def to_dict(self):
        return {
            "kind": "knn",
            "k": self.k,
            "n_classes": self.n_classes,
            "X_train": [row.tolist() for row in self.X_train],
            "y_train": self.y_train.tolist(),
        }

    @classmethod
    def from_dict(cls, payload):
        return cls(
            X_train=np.array(payload["X_train"], dtype=np.float64),
            y_train=np.array(payload["y_train"], dtype=np.int64),
            k=payload["k"],
            n_classes=payload["n_classes"],
        )


def fit_knn(X, y, k=15, n_classes=None):
    """Store the training set; all work happens at query time."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if k < 1 or k > len(X):
        raise ValueError(f"k={k} outside [1, {len(X)}]")
    return KnnModel(X_train=X, y_train=y, k=k,
                    n_classes=int(y.max()) + 1 if n_classes is None else n_classes)


def predict_knn(model, X, chunk=256):
    """Majority vote over the k nearest training rows (exact, Euclidean).

    Ties at the k-th distance keep the lower training-row index; vote ties
    resolve to the lowest class index. Probabilities are neighbor class
    frequencies.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] != model.X_train.shape[1]:
        raise ValueError(
            f"expected {model.X_train.shape[1]} columns, got {X.shape[1]}"
        )
    proba = np.empty((len(X), model.n_classes))
    for start in range(0, len(X), chunk):
        block = X[start : start + chunk]
        # squared distances preserve the ordering; stable sort keeps the
        # lower training index on exact ties
        d2 = ((block[:, None, :] - model.X_train[None, :, :]) ** 2).sum(axis=2)
        neighbor_idx = np.argsort(d2, axis=1, kind="stable")[:, : model.k]
        votes = model.y_train[neighbor_idx]
        for i, row_votes in enumerate(votes):
            proba[start + i] = np.bincount(row_votes, minlength=model.n_classes)
    proba /= model.k
    labels = np.argmax(proba, axis=1).astype(np.int64)
    return labels, proba

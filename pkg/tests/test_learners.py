import json

import numpy as np
import pytest

from wxbench.learners import (
    KnnModel,
    MlpModel,
    TrainingDiverged,
    _loss_and_grads,
    fit_knn,
    gradient_check,
    init_mlp,
    predict_knn,
    predict_mlp,
    train_mlp,
)
from wxbench.preprocess import PrecipClasses, build_labeled_dataset

XOR_X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
XOR_Y = np.array([0, 1, 1, 0])


# initialization -----------------------------------------------------------


def test_init_deterministic_and_zero_biases():
    a = init_mlp((5, 8, 3), seed=4)
    b = init_mlp((5, 8, 3), seed=4)
    c = init_mlp((5, 8, 3), seed=5)
    assert all(np.array_equal(x, y) for x, y in zip(a.weights, b.weights))
    assert any(not np.array_equal(x, y) for x, y in zip(a.weights, c.weights))
    assert all((bias == 0).all() for bias in a.biases)


def test_init_weight_range_within_fan_in_bound():
    model = init_mlp((10, 32, 4), seed=0)
    for fan_in, weight in zip(model.layer_sizes, model.weights):
        limit = np.sqrt(6.0 / fan_in)
        assert np.abs(weight).max() <= limit


def test_init_rejects_bad_sizes():
    with pytest.raises(ValueError):
        init_mlp((5, 3), seed=0)  # no hidden layer
    with pytest.raises(ValueError):
        init_mlp((5, 0, 2), seed=0)


# gradients ------------------------------------------------------------------


def test_gradient_check_small_batch():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(8, 5))
    y = rng.integers(0, 3, 8)
    model = init_mlp((5, 16, 3), seed=1)
    assert gradient_check(model, X, y) < 1e-4


def test_gradient_check_deterministic():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(4, 3))
    y = rng.integers(0, 2, 4)
    model = init_mlp((3, 6, 2), seed=3)
    assert gradient_check(model, X, y) == gradient_check(model, X, y)


def test_zero_net_zero_input_has_zero_hidden_gradients():
    model = init_mlp((3, 4, 2), seed=0)
    for w in model.weights:
        w[:] = 0.0
    X = np.zeros((2, 3))
    y = np.array([0, 1])
    _, grads_w, _ = _loss_and_grads(model, X, y)
    assert (grads_w[0] == 0).all()
    assert gradient_check(model, X, y) < 1e-8


# training --------------------------------------------------------------------


def test_mlp_learns_xor():
    model = init_mlp((2, 8, 2), seed=0)
    trained, trace = train_mlp(
        model, XOR_X, XOR_Y, epochs=2000, batch_size=4, learning_rate=0.1, seed=0
    )
    labels, _ = predict_mlp(trained, XOR_X)
    assert (labels == XOR_Y).all()
    assert trace[-1] < trace[0]


def test_zero_learning_rate_is_a_no_op():
    model = init_mlp((2, 4, 2), seed=1)
    trained, _ = train_mlp(
        model, XOR_X, XOR_Y, epochs=3, batch_size=2, learning_rate=0.0, seed=0
    )
    assert all(np.array_equal(a, b) for a, b in zip(trained.weights, model.weights))
    assert all(np.array_equal(a, b) for a, b in zip(trained.biases, model.biases))


def test_training_does_not_mutate_input_model():
    model = init_mlp((2, 4, 2), seed=1)
    before = [w.copy() for w in model.weights]
    train_mlp(model, XOR_X, XOR_Y, epochs=5, batch_size=4, learning_rate=0.1, seed=0)
    assert all(np.array_equal(a, b) for a, b in zip(model.weights, before))


def test_loss_trace_decreases_on_fixture(year_table):
    dataset, split = build_labeled_dataset(
        year_table, "precipitation", PrecipClasses(), seed=1
    )
    X = dataset.features[split.train_idx]
    y = dataset.labels[split.train_idx]
    model = init_mlp((X.shape[1], 32, dataset.n_classes), seed=0)
    _, trace = train_mlp(model, X, y, epochs=50, batch_size=32, learning_rate=0.01, seed=0)
    assert trace[49] < trace[0]


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_reports_epoch():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(16, 3)) * 100
    y = rng.integers(0, 2, 16)
    model = init_mlp((3, 8, 2), seed=0)
    with pytest.raises(TrainingDiverged) as err:
        train_mlp(model, X, y, epochs=50, batch_size=4, learning_rate=1e9, seed=0)
    assert err.value.epoch >= 0


def test_full_batch_training_is_row_order_invariant():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(32, 4))
    y = rng.integers(0, 3, 32)
    perm = rng.permutation(32)
    model = init_mlp((4, 8, 3), seed=2)
    a, _ = train_mlp(model, X, y, epochs=20, batch_size=32, learning_rate=0.05, seed=0)
    b, _ = train_mlp(model, X[perm], y[perm], epochs=20, batch_size=32,
                     learning_rate=0.05, seed=0)
    for wa, wb in zip(a.weights, b.weights):
        assert np.allclose(wa, wb, atol=1e-10)


def test_train_rejects_labels_outside_range():
    model = init_mlp((2, 4, 2), seed=0)
    with pytest.raises(ValueError):
        train_mlp(model, XOR_X, np.array([0, 1, 2, 0]), epochs=1, batch_size=2,
                  learning_rate=0.1)


# prediction --------------------------------------------------------------------


def test_predict_rows_are_simplex():
    model = init_mlp((3, 8, 4), seed=0)
    X = np.random.default_rng(1).normal(size=(20, 3))
    _, proba = predict_mlp(model, X)
    assert np.allclose(proba.sum(axis=1), 1.0, atol=1e-12)
    assert (proba >= 0).all()


def test_predict_single_row_matches_batch():
    model = init_mlp((3, 8, 4), seed=0)
    X = np.random.default_rng(2).normal(size=(6, 3))
    _, batch = predict_mlp(model, X)
    for i in range(6):
        _, single = predict_mlp(model, X[i : i + 1])
        assert np.allclose(single[0], batch[i], atol=1e-15)


def test_hand_computed_single_hidden_unit_forward_pass():
    # one input, one ReLU unit, two outputs, every parameter set by hand
    model = MlpModel(
        layer_sizes=(1, 1, 2),
        weights=[np.array([[2.0]]), np.array([[1.0, -1.0]])],
        biases=[np.array([-1.0]), np.array([0.5, 0.0])],
    )
    # x=1: hidden = relu(2*1-1) = 1; logits = (1.5, -1)
    _, proba = predict_mlp(model, np.array([[1.0]]))
    expected = np.exp([1.5, -1.0]) / np.exp([1.5, -1.0]).sum()
    assert np.allclose(proba[0], expected, atol=1e-15)
    # x=0: hidden = relu(-1) = 0; logits = (0.5, 0)
    _, proba0 = predict_mlp(model, np.array([[0.0]]))
    expected0 = np.exp([0.5, 0.0]) / np.exp([0.5, 0.0]).sum()
    assert np.allclose(proba0[0], expected0, atol=1e-15)


def test_predict_dimension_mismatch():
    model = init_mlp((3, 4, 2), seed=0)
    with pytest.raises(ValueError):
        predict_mlp(model, np.ones((2, 5)))


def test_mlp_serialization_round_trip():
    model = init_mlp((3, 5, 2), seed=7)
    loaded = MlpModel.from_dict(json.loads(json.dumps(model.to_dict())))
    X = np.random.default_rng(0).normal(size=(4, 3))
    _, a = predict_mlp(model, X)
    _, b = predict_mlp(loaded, X)
    assert np.array_equal(a, b)


# knn ------------------------------------------------------------------------


def test_knn_exact_match_with_k1():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(40, 3))
    y = rng.integers(0, 3, 40)
    model = fit_knn(X, y, k=1)
    labels, _ = predict_knn(model, X)
    assert (labels == y).all()


def test_knn_k_equals_n_returns_global_majority():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(30, 2))
    y = np.array([0] * 10 + [1] * 15 + [2] * 5)
    model = fit_knn(X, y, k=30)
    labels, proba = predict_knn(model, rng.normal(size=(8, 2)))
    assert (labels == 1).all()
    assert np.allclose(proba, [10 / 30, 15 / 30, 5 / 30])


def _brute_force_knn(X_train, y_train, k, n_classes, queries):
    """Scalar-loop oracle: lexicographic (distance, index) neighbor order."""
    labels = np.empty(len(queries), dtype=np.int64)
    probas = np.empty((len(queries), n_classes))
    for qi, q in enumerate(queries):
        dist = [(float(np.sum((x - q) ** 2)), i) for i, x in enumerate(X_train)]
        dist.sort()
        votes = np.zeros(n_classes)
        for _, i in dist[:k]:
            votes[y_train[i]] += 1
        labels[qi] = int(np.argmax(votes))
        probas[qi] = votes / k
    return labels, probas


def test_knn_matches_brute_force_oracle():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(150, 4)).round(1)  # rounding forces distance ties
    y = rng.integers(0, 4, 150)
    queries = rng.normal(size=(60, 4)).round(1)
    model = fit_knn(X, y, k=7)
    labels, proba = predict_knn(model, queries)
    oracle_labels, oracle_proba = _brute_force_knn(X, y, 7, 4, queries)
    assert np.array_equal(labels, oracle_labels)
    assert np.array_equal(proba, oracle_proba)


def test_knn_tie_at_kth_distance_prefers_lower_index():
    # four equidistant neighbors, k=2: rows 0 and 1 must win
    X = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    y = np.array([0, 0, 1, 1])
    model = fit_knn(X, y, k=2)
    labels, proba = predict_knn(model, np.array([[0.0, 0.0]]))
    assert labels[0] == 0
    assert proba[0].tolist() == [1.0, 0.0]


def test_knn_vote_tie_prefers_lower_class():
    X = np.array([[0.0], [2.0]])
    y = np.array([1, 0])
    model = fit_knn(X, y, k=2)
    labels, proba = predict_knn(model, np.array([[1.0]]))
    assert labels[0] == 0
    assert proba[0].tolist() == [0.5, 0.5]


def test_knn_probability_support_bounded_by_k():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(50, 2))
    y = rng.integers(0, 5, 50)
    model = fit_knn(X, y, k=3)
    _, proba = predict_knn(model, rng.normal(size=(20, 2)))
    assert np.allclose(proba.sum(axis=1), 1.0, atol=1e-12)
    assert ((proba > 0).sum(axis=1) <= 3).all()


def test_knn_validates_k_and_dimensions():
    X = np.ones((5, 2))
    y = np.zeros(5, dtype=int)
    with pytest.raises(ValueError):
        fit_knn(X, y, k=6)
    with pytest.raises(ValueError):
        fit_knn(X, y, k=0)
    model = fit_knn(X, y, k=2)
    with pytest.raises(ValueError):
        predict_knn(model, np.ones((2, 3)))


def test_knn_serialization_round_trip():
    X = np.arange(10, dtype=float).reshape(5, 2)
    y = np.array([0, 1, 0, 1, 1])
    model = fit_knn(X, y, k=3)
    loaded = KnnModel.from_dict(json.loads(json.dumps(model.to_dict())))
    queries = np.array([[2.5, 3.5], [7.0, 8.0]])
    assert np.array_equal(predict_knn(model, queries)[1], predict_knn(loaded, queries)[1])

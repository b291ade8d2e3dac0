import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wxbench.ingest import FEATURE_NAMES
from wxbench.preprocess import (
    PrecipClasses,
    TempQuantiles,
    apply_minmax,
    build_labeled_dataset,
    discretize_target,
    fit_minmax,
    invert_minmax,
    select_features,
    split_train_test,
)

# min-max scaling -------------------------------------------------------


def test_fit_minmax_column_extrema():
    params = fit_minmax(np.array([[2.0], [4.0], [6.0]]))
    assert params.mins.tolist() == [2.0]
    assert params.maxs.tolist() == [6.0]


def test_constant_column_maps_to_zero():
    params = fit_minmax(np.array([[5.0], [5.0], [5.0]]))
    assert params.mins[0] == params.maxs[0] == 5.0
    scaled = apply_minmax(params, np.array([[5.0], [7.0]]))
    assert scaled.tolist() == [[0.0], [0.0]]


def test_fixture_extrema_match_brute_force_scan(year_table):
    t2m = [rec.t2m for rec in year_table.records]
    params = fit_minmax(year_table.to_matrix())
    col = list(FEATURE_NAMES).index("T2M")
    assert params.mins[col] == min(t2m)
    assert params.maxs[col] == max(t2m)


def test_apply_midpoint_and_endpoints():
    params = fit_minmax(np.array([[2.0], [6.0]]))
    scaled = apply_minmax(params, np.array([[4.0], [2.0], [6.0]]))
    assert scaled.ravel().tolist() == [0.5, 0.0, 1.0]


def test_invert_endpoints():
    params = fit_minmax(np.array([[2.0], [6.0]]))
    assert invert_minmax(params, np.array([[0.0]]))[0, 0] == 2.0
    assert invert_minmax(params, np.array([[1.0]]))[0, 0] == 6.0


@settings(deadline=None)
@given(
    arrays(
        np.float64,
        st.tuples(st.integers(2, 12), st.integers(1, 5)),
        elements=st.floats(-1e6, 1e6),
    )
)
def test_scaling_round_trip(matrix):
    params = fit_minmax(matrix)
    recovered = invert_minmax(params, apply_minmax(params, matrix))
    span = np.where(params.maxs > params.mins, params.maxs - params.mins, 1.0)
    constant = params.maxs == params.mins
    # constant columns collapse to the fitted min by design
    expected = np.where(constant, params.mins, matrix)
    assert np.allclose(recovered, expected, atol=1e-9 * np.maximum(span, 1.0))


def test_scaler_rejects_empty_and_mismatch():
    with pytest.raises(ValueError):
        fit_minmax(np.empty((0, 3)))
    params = fit_minmax(np.ones((2, 3)))
    with pytest.raises(ValueError):
        apply_minmax(params, np.ones((2, 2)))
    with pytest.raises(ValueError):
        invert_minmax(params, np.ones((2, 4)))


def test_train_columns_span_unit_interval(year_table):
    matrix, _ = select_features(year_table, "precipitation")
    split = split_train_test(matrix.shape[0], seed=11)
    params = fit_minmax(matrix[split.train_idx])
    scaled_train = apply_minmax(params, matrix)[split.train_idx]
    spans = params.maxs > params.mins
    assert np.allclose(scaled_train.min(axis=0)[spans], 0.0)
    assert np.allclose(scaled_train.max(axis=0)[spans], 1.0)


# discretization --------------------------------------------------------


def test_precip_bands_one_value_per_band():
    labels, names = discretize_target([0.0, 5.0, 20.0, 50.0], PrecipClasses())
    assert labels.tolist() == [0, 1, 2, 3]
    assert names == ("dry", "light", "moderate", "heavy")


def test_precip_boundary_goes_up_a_band():
    labels, _ = discretize_target([0.1, 0.0999, 10.0, 35.0], PrecipClasses())
    assert labels.tolist() == [1, 0, 2, 3]


def test_temp_quantiles_on_integer_ramp():
    values = np.arange(1.0, 101.0)
    labels, names = discretize_target(values, TempQuantiles(k=4))
    # linear-interpolation quantile oracle: q = 1 + p * 99
    assert np.quantile(values, 0.25) == 25.75
    assert np.quantile(values, 0.5) == 50.5
    assert np.quantile(values, 0.75) == 75.25
    assert np.bincount(labels).tolist() == [25, 25, 25, 25]
    assert len(names) == 4


def test_temp_quantile_boundary_goes_to_lower_bin():
    # training rows [1, 4] put the 2-quantile edge at 2.5; a value exactly
    # on the edge joins the lower bin
    values = np.array([2.5, 1.0, 4.0])
    labels, _ = discretize_target(values, TempQuantiles(k=2), train_idx=np.array([1, 2]))
    assert labels.tolist() == [0, 0, 1]


def test_quantile_edges_use_training_rows_only():
    values = np.array([0.0, 1.0, 2.0, 3.0, 100.0, 200.0])
    train_idx = np.array([0, 1, 2, 3])  # edges ignore the outliers
    labels, _ = discretize_target(values, TempQuantiles(k=2), train_idx=train_idx)
    assert labels.tolist() == [0, 0, 1, 1, 1, 1]


def test_empty_class_raises():
    with pytest.raises(ValueError, match="heavy"):
        discretize_target([0.0, 5.0, 20.0], PrecipClasses())


@settings(deadline=None)
@given(
    st.lists(st.floats(0.0, 200.0), min_size=2, max_size=50),
    st.floats(0.0, 200.0),
    st.floats(0.0, 200.0),
)
def test_discretization_is_monotone(values, a, b):
    lo, hi = min(a, b), max(a, b)
    scheme = PrecipClasses()
    labels = np.searchsorted(scheme.thresholds, np.array(values + [lo, hi]), side="right")
    assert labels[-2] <= labels[-1]


def test_monotone_for_quantiles(year_table):
    values = year_table.column("T2M")
    labels, _ = discretize_target(values, TempQuantiles(k=4))
    order = np.argsort(values)
    assert (np.diff(labels[order]) >= 0).all()


# feature selection ------------------------------------------------------


def test_precipitation_features(year_table):
    matrix, names = select_features(year_table, "precipitation")
    assert matrix.shape[1] == 15
    assert "PRECTOT" not in names


def test_temperature_features(year_table):
    matrix, names = select_features(year_table, "temperature")
    assert matrix.shape[1] == 10
    assert not any(name.startswith(("T2M", "TS")) or name == "T2MWET" for name in names
                   if name != "T2MDEW")
    assert "T2MDEW" in names


def test_feature_order_is_canonical_minus_drops(year_table):
    _, names = select_features(year_table, "precipitation")
    assert list(names) == [n for n in FEATURE_NAMES if n != "PRECTOT"]
    _, names_t = select_features(year_table, "temperature")
    dropped = {"T2M", "T2M_MAX", "T2M_MIN", "T2M_RANGE", "TS", "T2MWET"}
    assert list(names_t) == [n for n in FEATURE_NAMES if n not in dropped]


def test_select_features_unknown_target(year_table):
    with pytest.raises(ValueError):
        select_features(year_table, "wind")


# splitting ---------------------------------------------------------------


def test_split_sizes_paper_scale():
    split = split_train_test(7306, test_fraction=0.15, seed=0)
    assert len(split.test_idx) == 1096
    assert len(split.train_idx) == 6210


def test_split_deterministic():
    a = split_train_test(100, seed=5)
    b = split_train_test(100, seed=5)
    c = split_train_test(100, seed=6)
    assert a.train_idx.tolist() == b.train_idx.tolist()
    assert a.test_idx.tolist() == b.test_idx.tolist()
    assert a.test_idx.tolist() != c.test_idx.tolist()


def test_split_small_partition():
    split = split_train_test(20, test_fraction=0.15, seed=1)
    assert len(split.test_idx) == 3
    assert set(split.test_idx) & set(split.train_idx) == set()
    assert sorted(set(split.test_idx) | set(split.train_idx)) == list(range(20))


@settings(deadline=None)
@given(st.integers(5, 500), st.integers(0, 2**32 - 1), st.floats(0.05, 0.5))
def test_split_partition_property(n, seed, fraction):
    n_test = int(round(fraction * n))
    if n_test in (0, n):
        with pytest.raises(ValueError):
            split_train_test(n, test_fraction=fraction, seed=seed)
        return
    split = split_train_test(n, test_fraction=fraction, seed=seed)
    assert len(split.test_idx) == n_test
    combined = np.concatenate([split.train_idx, split.test_idx])
    assert np.sort(combined).tolist() == list(range(n))


def test_split_rejects_degenerate():
    with pytest.raises(ValueError):
        split_train_test(1, seed=0)
    with pytest.raises(ValueError):
        split_train_test(10, test_fraction=0.01, seed=0)
    with pytest.raises(ValueError):
        split_train_test(10, test_fraction=0.99, seed=0)


# assembled dataset -------------------------------------------------------


def test_build_labeled_dataset_shapes(year_table):
    dataset, split = build_labeled_dataset(year_table, "precipitation", PrecipClasses(), seed=2)
    assert dataset.features.shape == (365, 15)
    assert dataset.labels.shape == (365,)
    assert dataset.n_classes == 4
    assert dataset.target_name == "precipitation"
    assert len(split.test_idx) == int(round(0.15 * 365))


def test_build_labeled_dataset_lag_shifts_label(year_table):
    lag = 3
    plain, _ = build_labeled_dataset(year_table, "precipitation", PrecipClasses(), seed=2)
    lagged, _ = build_labeled_dataset(
        year_table, "precipitation", PrecipClasses(), seed=2, lag=lag
    )
    assert lagged.features.shape[0] == 365 - lag
    # fixed thresholds: day i's lagged label equals day i+lag's same-day label
    assert lagged.labels.tolist() == plain.labels[lag:].tolist()
    assert lagged.labels.max() < lagged.n_classes


def test_build_labeled_dataset_rejects_bad_lag(year_table):
    with pytest.raises(ValueError):
        build_labeled_dataset(year_table, "precipitation", PrecipClasses(), lag=-1)
    with pytest.raises(ValueError):
        build_labeled_dataset(year_table, "precipitation", PrecipClasses(), lag=365)

import datetime

import numpy as np
import pytest

from wxbench.ingest import clean_missing, load_fixture, parse_power_csv
from wxbench.synth import dhaka_two_decades, synthesize_weather


@pytest.fixture(scope="session")
def year_table():
    """The bundled one-year fixture, cleaned."""
    return clean_missing(parse_power_csv(load_fixture("dhaka_2021.csv")))


@pytest.fixture(scope="session")
def gaps_table():
    """The bundled fixture with seeded -999 gaps, NOT cleaned."""
    return parse_power_csv(load_fixture("synthetic_gaps.csv"))


@pytest.fixture(scope="session")
def full_table():
    """The deterministic 20-year station record stand-in (7306 rows)."""
    return dhaka_two_decades()


@pytest.fixture(scope="session")
def tiny_table():
    """Ten days of simulated weather for cheap structural tests."""
    return synthesize_weather(
        datetime.date(2021, 6, 1), datetime.date(2021, 6, 10), seed=99
    )


@pytest.fixture
def blobs():
    """Two well-separated Gaussian blobs: linearly separable 2-class data."""
    rng = np.random.default_rng(7)
    a = rng.normal(loc=(-2.0, -2.0), scale=0.4, size=(60, 2))
    b = rng.normal(loc=(2.0, 2.0), scale=0.4, size=(60, 2))
    X = np.vstack([a, b])
    y = np.array([0] * 60 + [1] * 60)
    return X, y


@pytest.fixture
def noisy_multiclass():
    """Four-class data with informative features plus noise columns."""
    rng = np.random.default_rng(21)
    n = 240
    y = rng.integers(0, 4, n)
    centers = np.array([[0, 0], [0, 3], [3, 0], [3, 3]], dtype=float)
    X = np.hstack([centers[y] + rng.normal(0, 0.9, (n, 2)), rng.normal(0, 1, (n, 3))])
    return X, y

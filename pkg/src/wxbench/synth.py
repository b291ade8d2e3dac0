"""Seeded daily-weather simulator for offline fixtures and tests.

Generates physically coherent tropical-monsoon weather in POWER units:
a seasonal temperature cycle, a mid-year monsoon bump that drives
humidity, pressure, wind regime and rainfall, and thermodynamically
consistent humidity fields (dew point, wet bulb and specific humidity
derived from temperature, relative humidity and pressure via the Magnus
formula). Output is deterministic for a given seed and date range.
"""

from __future__ import annotations

import datetime

import numpy as np

from .ingest import FEATURE_NAMES, MISSING_SENTINEL, WeatherRecord, WeatherTable

DEFAULT_SEED = 20030101


def _ar1(rng, n, rho, sigma):
    """Stationary AR(1) noise; keeps day-to-day weather persistent."""
    eps = rng.normal(0.0, sigma, n)
    out = np.empty(n)
    out[0] = eps[0] / np.sqrt(1.0 - rho * rho)
    for i in range(1, n):
        out[i] = rho * out[i - 1] + eps[i]
    return out


def _saturation_vapor_pressure(t_c):
    """Magnus formula, hPa over water."""
    return 6.112 * np.exp(17.62 * t_c / (243.12 + t_c))


def _dew_point(e_hpa):
    ln_ratio = np.log(e_hpa / 6.112)
    return 243.12 * ln_ratio / (17.62 - ln_ratio)


def synthesize_weather(start, end, seed=DEFAULT_SEED):
    """Simulate one weather record per day in [start, end], both inclusive.

    The inclusive range matches the POWER API date convention, so
    simulated tables line up row-for-row with fetched ones.
    """
    if start > end:
        raise ValueError(f"start {start} after end {end}")
    n = (end - start).days + 1
    dates = [start + datetime.timedelta(days=i) for i in range(n)]
    doy = np.array([d.timetuple().tm_yday for d in dates], dtype=np.float64)

    rng = np.random.default_rng(seed)
    phase = 2.0 * np.pi * (doy - 15.0) / 365.25
    monsoon = np.exp(-0.5 * ((doy - 196.0) / 52.0) ** 2)

    t2m = 26.0 - 4.8 * np.cos(phase) + _ar1(rng, n, 0.65, 0.85)
    rh2m = np.clip(
        61.0 + 24.0 * monsoon + _ar1(rng, n, 0.55, 5.5) - 0.6 * (t2m - 26.0),
        35.0,
        99.0,
    )
    ps = 101.45 - 0.85 * monsoon - 0.04 * (t2m - 26.0) + rng.normal(0.0, 0.1, n)

    es = _saturation_vapor_pressure(t2m)
    e = (rh2m / 100.0) * es
    qv2m = 622.0 * e / (ps * 10.0 - 0.378 * e)
    t2mdew = _dew_point(e)
    t2mwet = 0.55 * t2m + 0.45 * t2mdew + rng.normal(0.0, 0.2, n)
    ts = t2m + 0.7 + 0.3 * monsoon + rng.normal(0.0, 0.3, n)

    t2m_range = np.clip(9.0 - 4.6 * monsoon + rng.normal(0.0, 0.9, n), 2.0, None)
    t2m_max = t2m + 0.55 * t2m_range
    t2m_min = t2m - 0.45 * t2m_range

    # Rain: occurrence follows relative humidity (sharpened by the monsoon),
    # intensity scales with moisture supply. Dry days keep a drizzle-scale
    # trace so the dry/light class boundary at 0.1 mm is populated.
    rain_logit = -1.9 + 0.45 * (rh2m - 72.0) + 1.2 * monsoon
    is_rain = rng.random(n) < 1.0 / (1.0 + np.exp(-rain_logit))
    wet_amount = (
        np.exp(
            rng.normal(0.0, 0.45, n)
            + 0.25 * (qv2m - 13.0)
            + 0.05 * (rh2m - 72.0)
            + 0.6 * monsoon
        )
        + 0.1
    )
    trace = np.exp(rng.normal(-4.8, 1.2, n))
    prectot = np.where(is_rain, wet_amount, trace)

    ws10m = np.clip(
        1.7 + 1.1 * monsoon + _ar1(rng, n, 0.4, 0.45) + 0.3 * is_rain, 0.3, None
    )
    ws10m_range = np.clip(1.4 + 0.9 * monsoon + np.abs(rng.normal(0.0, 0.5, n)), 0.4, None)
    ws10m_max = ws10m + 0.6 * ws10m_range
    ws10m_min = np.maximum(ws10m - 0.4 * ws10m_range, 0.05)
    wd10m = np.mod(295.0 - 150.0 * monsoon + rng.normal(0.0, 30.0, n), 360.0)

    columns = {
        "T2M": t2m,
        "T2MDEW": t2mdew,
        "T2MWET": t2mwet,
        "TS": ts,
        "T2M_RANGE": t2m_range,
        "T2M_MAX": t2m_max,
        "T2M_MIN": t2m_min,
        "QV2M": qv2m,
        "RH2M": rh2m,
        "PRECTOT": prectot,
        "PS": ps,
        "WS10M_RANGE": ws10m_range,
        "WS10M": ws10m,
        "WD10M": wd10m,
        "WS10M_MAX": ws10m_max,
        "WS10M_MIN": ws10m_min,
    }
    matrix = np.column_stack([columns[name] for name in FEATURE_NAMES])
    matrix = np.round(matrix, 6)  # keep fixture CSVs compact
    records = tuple(
        WeatherRecord(date, *(float(v) for v in row))
        for date, row in zip(dates, matrix)
    )
    return WeatherTable(records=records, source=f"synth(seed={seed})")


def seed_gaps(table, n_rows=3, features_per_row=2, seed=7):
    """Punch -999 sentinels into n_rows interior rows (for cleaning tests)."""
    if len(table) < n_rows + 2:
        raise ValueError("table too short to hold interior gaps")
    rng = np.random.default_rng(seed)
    rows = rng.choice(np.arange(1, len(table) - 1), size=n_rows, replace=False)
    matrix = table.to_matrix()
    for i in rows:
        cols = rng.choice(len(FEATURE_NAMES), size=features_per_row, replace=False)
        matrix[i, cols] = MISSING_SENTINEL
    return table.replace_matrix(matrix, source=table.source + "+gaps")


def dhaka_two_decades(seed=DEFAULT_SEED):
    """The offline stand-in for the 2003-01-01..2023-01-01 station record."""
    return synthesize_weather(
        datetime.date(2003, 1, 1), datetime.date(2023, 1, 1), seed=seed
    )

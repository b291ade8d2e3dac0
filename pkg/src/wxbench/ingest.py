"""NASA POWER daily point-data ingestion: fetch, parse, clean, fixtures.

The POWER daily endpoint returns a CSV with a free-text header block
terminated by ``-END HEADER-``, then a ``YEAR,MO,DY,<param...>`` table.
Missing values are encoded as -999. Parsing preserves the sentinel;
``clean_missing`` removes it.
"""

from __future__ import annotations

import dataclasses
import datetime
import importlib.resources
import time

import numpy as np
import requests

POWER_BASE_URL = "https://power.larc.nasa.gov/api/temporal/daily/point"

# Canonical feature order (the 16 daily parameters this project uses).
FEATURE_NAMES = (
    "T2M",
    "T2MDEW",
    "T2MWET",
    "TS",
    "T2M_RANGE",
    "T2M_MAX",
    "T2M_MIN",
    "QV2M",
    "RH2M",
    "PRECTOT",
    "PS",
    "WS10M_RANGE",
    "WS10M",
    "WD10M",
    "WS10M_MAX",
    "WS10M_MIN",
)

# The API renamed the bias-corrected precipitation parameter; we keep the
# classic name internally and translate on request/parse.
API_PARAM_ALIASES = {"PRECTOT": "PRECTOTCORR"}
_ALIAS_TO_CANONICAL = {v: k for k, v in API_PARAM_ALIASES.items()}

MISSING_SENTINEL = -999.0

_COLUMN_INDEX = {name: i for i, name in enumerate(FEATURE_NAMES)}


class IngestError(Exception):
    """Base class for ingestion failures."""


class FetchError(IngestError):
    """Network or HTTP failure talking to the POWER API."""

    def __init__(self, message, status=None, retriable=False):
        super().__init__(message)
        self.status = status
        self.retriable = retriable


class MalformedCsvError(IngestError):
    """Input text is not a POWER CSV (e.g. missing -END HEADER-)."""


class CsvParseError(IngestError):
    """A cell failed to parse; carries row/column location."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class CleaningError(IngestError):
    """Missing-value cleaning cannot produce a valid table."""


@dataclasses.dataclass(frozen=True)
class WeatherRecord:
    """One day of the 16 POWER features (units as served by the API)."""

    date: datetime.date
    t2m: float
    t2mdew: float
    t2mwet: float
    ts: float
    t2m_range: float
    t2m_max: float
    t2m_min: float
    qv2m: float
    rh2m: float
    prectot: float
    ps: float
    ws10m_range: float
    ws10m: float
    wd10m: float
    ws10m_max: float
    ws10m_min: float

    def values(self):
        """Feature values in canonical order."""
        return tuple(getattr(self, name.lower()) for name in FEATURE_NAMES)


@dataclasses.dataclass(frozen=True)
class WeatherTable:
    """Immutable, date-ordered collection of WeatherRecords."""

    records: tuple
    feature_names: tuple = FEATURE_NAMES
    source: str = dataclasses.field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        dates = [r.date for r in self.records]
        for a, b in zip(dates, dates[1:]):
            if a >= b:
                raise ValueError(f"records not strictly increasing by date at {b}")

    def __len__(self):
        return len(self.records)

    @property
    def dates(self):
        return [r.date for r in self.records]

    def to_matrix(self):
        """N x 16 float64 matrix in canonical feature order."""
        return np.array([r.values() for r in self.records], dtype=np.float64).reshape(
            len(self.records), len(FEATURE_NAMES)
        )

    def column(self, feature):
        if feature not in _COLUMN_INDEX:
            raise KeyError(f"unknown feature {feature!r}")
        return np.array(
            [getattr(r, feature.lower()) for r in self.records], dtype=np.float64
        )

    def replace_matrix(self, matrix, keep_rows=None, source=None):
        """Rebuild a table from edited values (same dates, optionally a row subset)."""
        idx = range(len(self.records)) if keep_rows is None else keep_rows
        records = [
            WeatherRecord(self.records[i].date, *(float(v) for v in matrix[j]))
            for j, i in enumerate(idx)
        ]
        return WeatherTable(
            records=tuple(records),
            feature_names=self.feature_names,
            source=self.source if source is None else source,
        )


def fetch_power_daily(
    latitude,
    longitude,
    start,
    end,
    parameters=FEATURE_NAMES,
    community="AG",
    base_url=POWER_BASE_URL,
    session=None,
    max_attempts=3,
    backoff_seconds=1.0,
    timeout=60,
):
    """Fetch the raw POWER daily CSV for one point and date range.

    Dates are inclusive on both ends (API convention). Network errors are
    retried ``max_attempts`` times with exponential backoff; a non-200
    response raises immediately with the status and a body excerpt.
    Returns the response body verbatim.
    """
    if start >= end:
        raise ValueError(f"start {start} must precede end {end}")
    params = {
        "parameters": ",".join(API_PARAM_ALIASES.get(p, p) for p in parameters),
        "community": community,
        "latitude": latitude,
        "longitude": longitude,
        "start": start.strftime("%Y%m%d"),
        "end": end.strftime("%Y%m%d"),
        "format": "CSV",
    }
    http = session if session is not None else requests
    delay = backoff_seconds
    last_exc = None
    for attempt in range(1, max_attempts + 1):
        try:
            resp = http.get(base_url, params=params, timeout=timeout)
        except requests.RequestException as exc:
            last_exc = exc
            if attempt < max_attempts:
                time.sleep(delay)
                delay *= 2
                continue
            raise FetchError(
                f"network failure after {max_attempts} attempts: {exc}",
                retriable=True,
            ) from exc
        if resp.status_code != 200:
            raise FetchError(
                f"POWER API returned {resp.status_code}: {resp.text[:200]}",
                status=resp.status_code,
            )
        return resp.text
    raise FetchError(f"unreachable: {last_exc}", retriable=True)


def parse_power_csv(text):
    """Parse a POWER daily CSV into a WeatherTable (sentinels preserved).

    Parameters absent from the file are filled with the -999 sentinel so
    every record carries all 16 features; clean_missing decides what to do
    about them.
    """
    lines = text.splitlines()
    try:
        header_end = next(
            i for i, line in enumerate(lines) if line.strip() == "-END HEADER-"
        )
    except StopIteration:
        raise MalformedCsvError("no -END HEADER- marker found") from None

    body = [ln for ln in lines[header_end + 1 :] if ln.strip()]
    if not body:
        raise MalformedCsvError("no column header row after -END HEADER-")
    columns = [c.strip() for c in body[0].split(",")]
    if columns[:3] != ["YEAR", "MO", "DY"]:
        raise MalformedCsvError(f"expected YEAR,MO,DY leading columns, got {columns[:3]}")

    param_columns = []
    for name in columns[3:]:
        canonical = _ALIAS_TO_CANONICAL.get(name, name)
        if canonical not in _COLUMN_INDEX:
            raise MalformedCsvError(f"unknown parameter column {name!r}")
        param_columns.append(canonical)

    records = []
    for lineno, line in enumerate(body[1:], start=2):
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(columns):
            raise CsvParseError(
                f"row {lineno}: expected {len(columns)} cells, got {len(cells)}",
                row=lineno,
            )
        try:
            year, month, day = int(cells[0]), int(cells[1]), int(cells[2])
            date = datetime.date(year, month, day)
        except ValueError as exc:
            raise CsvParseError(f"row {lineno}: bad date {cells[:3]}: {exc}", row=lineno)
        values = [MISSING_SENTINEL] * len(FEATURE_NAMES)
        for name, cell in zip(param_columns, cells[3:]):
            try:
                values[_COLUMN_INDEX[name]] = float(cell)
            except ValueError:
                raise CsvParseError(
                    f"row {lineno}, column {name}: non-numeric cell {cell!r}",
                    row=lineno,
                    column=name,
                ) from None
        records.append(WeatherRecord(date, *values))
    try:
        return WeatherTable(records=tuple(records), source="parsed")
    except ValueError as exc:
        raise MalformedCsvError(str(exc)) from None


def serialize_power_csv(table, title="NASA/POWER Source Native Resolution Daily Data"):
    """Serialize a table back to POWER CSV format.

    parse_power_csv(serialize_power_csv(t)) == t, and serialization of an
    unchanged table is byte-stable (floats written with repr so they
    round-trip exactly).
    """
    lines = [
        title,
        f"Rows: {len(table)}",
        "Missing data value: -999",
        "Parameter(s):",
        *(f"{API_PARAM_ALIASES.get(n, n)}" for n in table.feature_names),
        "-END HEADER-",
        "YEAR,MO,DY," + ",".join(API_PARAM_ALIASES.get(n, n) for n in table.feature_names),
    ]
    for rec in table.records:
        cells = [str(rec.date.year), str(rec.date.month), str(rec.date.day)]
        cells.extend(repr(v) for v in rec.values())
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _repair_invariants(matrix):
    """Enforce WeatherRecord invariants in place on a sentinel-free matrix."""
    col = _COLUMN_INDEX
    matrix[:, col["PRECTOT"]] = np.maximum(matrix[:, col["PRECTOT"]], 0.0)
    matrix[:, col["RH2M"]] = np.clip(matrix[:, col["RH2M"]], 0.0, 100.0)
    matrix[:, col["WD10M"]] = np.mod(matrix[:, col["WD10M"]], 360.0)
    for lo, mid, hi in (("T2M_MIN", "T2M", "T2M_MAX"), ("WS10M_MIN", "WS10M", "WS10M_MAX")):
        triple = np.sort(matrix[:, [col[lo], col[mid], col[hi]]], axis=1)
        matrix[:, col[lo]] = triple[:, 0]
        matrix[:, col[mid]] = triple[:, 1]
        matrix[:, col[hi]] = triple[:, 2]
    return matrix


def clean_missing(table, policy="linear_interpolate"):
    """Remove -999 sentinels and repair record-level invariants.

    ``drop_row`` discards any row containing a sentinel.
    ``linear_interpolate`` fills interior gaps per feature, linearly in
    time, then drops leading/trailing rows whose gaps have no bracketing
    values. Raises CleaningError if a feature has no valid values at all.
    """
    if policy not in ("drop_row", "linear_interpolate"):
        raise ValueError(f"unknown cleaning policy {policy!r}")
    matrix = table.to_matrix()
    if matrix.size == 0:
        return table
    missing = matrix == MISSING_SENTINEL
    for j, name in enumerate(table.feature_names):
        if missing[:, j].all():
            raise CleaningError(f"feature {name} is entirely missing")

    if policy == "drop_row":
        keep = ~missing.any(axis=1)
    else:
        # interpolate against the date axis so uneven spacing is honoured
        t = np.array([r.date.toordinal() for r in table.records], dtype=np.float64)
        for j in range(matrix.shape[1]):
            gap = missing[:, j]
            if not gap.any():
                continue
            valid = ~gap
            first, last = np.flatnonzero(valid)[[0, -1]]
            interior = gap & (np.arange(len(t)) > first) & (np.arange(len(t)) < last)
            matrix[interior, j] = np.interp(t[interior], t[valid], matrix[valid, j])
        keep = ~(matrix == MISSING_SENTINEL).any(axis=1)

    keep_rows = np.flatnonzero(keep)
    cleaned = _repair_invariants(matrix[keep_rows])
    return table.replace_matrix(cleaned, keep_rows=keep_rows.tolist())


def fixture_path(name):
    """Filesystem path of a bundled fixture CSV."""
    return importlib.resources.files("wxbench") / "fixtures" / name


def load_fixture(name):
    """Raw text of a bundled fixture CSV."""
    return fixture_path(name).read_text()

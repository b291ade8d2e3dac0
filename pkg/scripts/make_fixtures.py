#!/usr/bin/env python3
"""Regenerate the bundled fixture CSVs (deterministic; safe to re-run)."""

import datetime
import pathlib

from wxbench.ingest import serialize_power_csv
from wxbench.synth import seed_gaps, synthesize_weather

FIXTURE_DIR = pathlib.Path(__file__).resolve().parent.parent / "src" / "wxbench" / "fixtures"


def main():
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    year = synthesize_weather(
        datetime.date(2021, 1, 1), datetime.date(2021, 12, 31), seed=20210101
    )
    (FIXTURE_DIR / "dhaka_2021.csv").write_text(serialize_power_csv(year))
    gapped = seed_gaps(year, n_rows=3, features_per_row=2, seed=7)
    (FIXTURE_DIR / "synthetic_gaps.csv").write_text(serialize_power_csv(gapped))
    print(f"wrote fixtures to {FIXTURE_DIR} ({len(year)} rows each)")


if __name__ == "__main__":
    main()

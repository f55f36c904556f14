"""Vendored market data: JGB zero yields (2002) and a US Treasury curve (2015).

Both files are pinned by SHA-256 so that reproduction runs refuse to use
edited copies.
"""
from __future__ import annotations

import csv
import datetime as dt
import hashlib
import io
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ValidationError

JGB_FILE = "jgb_2002.csv"
UST_FILE = "ust_2015.csv"

PINNED_SHA256 = {
    JGB_FILE: "789d6dae927e9fa9e93fe16df6c47767850dbc4a9a71c44f0c81bbc145fb76ff",
    UST_FILE: "949719da661d36c08671e15c3adc864fc4bff3966b40eee7d5b09f4b3a85af56",
}

JGB_VALUATION = dt.date(2002, 2, 3)
UST_VALUATION = dt.date(2015, 1, 29)
DAYS_PER_YEAR = 365.25

# published fitted parameters (z, beta, r0)
JGB_PARAMS = (-0.00184, 0.0924, -0.05834)
UST_ALL_PARAMS = (-0.0027, 0.2516, -0.23163)
UST_LONG_PARAMS = (0.0012, 0.2085, -0.1879)

# published RMSEs, decimal yields
JGB_RMSE_MODEL = 5.91e-4
JGB_RMSE_SHADOW = 6.37e-4
JGB_RMSE_CUBIC = 6.60e-4
UST_RMSE_ALL = 1.99e-3
UST_RMSE_LONG = 4.91e-4
UST_RMSE_CUBIC_ALL = 5.07e-4
UST_RMSE_CUBIC_LONG = 5.39e-4

# published levels chi_n in percent: JGB, UST all maturities, UST T >= 1y
LEVEL_TABLE = np.array([
    [3.578, 2.470, 2.451],
    [24.187, 58.562, 48.934],
    [38.718, 98.111, 81.708],
    [51.134, 131.906, 109.714],
    [62.309, 162.321, 134.919],
    [72.628, 190.407, 158.194],
    [82.306, 216.749, 180.023],
    [91.478, 241.713, 200.711],
    [100.236, 265.549, 220.464],
    [108.646, 288.438, 239.432],
])


def year_fraction(start, end):
    """ACT/365.25 year fraction between two dates."""
    return (end - start).days / DAYS_PER_YEAR


def parse_date(text):
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError as exc:
        raise ValidationError(f"bad date {text!r}; expected YYYY-MM-DD") from exc


def read_fixture_bytes(name):
    return resources.files(__package__).joinpath("data").joinpath(name).read_bytes()


def verify_fixture(name, data=None):
    data = read_fixture_bytes(name) if data is None else data
    digest = hashlib.sha256(data).hexdigest()
    if digest != PINNED_SHA256[name]:
        raise ValidationError(f"fixture {name} has been modified (sha256 {digest})")
    return digest


def _rows(name):
    data = read_fixture_bytes(name)
    verify_fixture(name, data)
    lines = [ln for ln in data.decode().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def _column(rows, key):
    return np.array([float(r[key]) / 100.0 if r[key] else np.nan for r in rows])


@dataclass(frozen=True)
class FixtureTable:
    """Maturities in years from the valuation date and named yield columns (decimal)."""

    label: str
    valuation_date: dt.date
    maturities: np.ndarray
    columns: dict

    def __getitem__(self, key):
        return self.columns[key]


def load_jgb():
    rows = _rows(JGB_FILE)
    mats = np.array([year_fraction(JGB_VALUATION, parse_date(r["maturity_date"])) for r in rows])
    cols = {k.removesuffix("_pct"): _column(rows, k) for k in ("model1_pct", "model2_pct", "cubic_pct")}
    cols["empirical"] = _column(rows, "yield_pct")
    cols["coupon"] = np.array([float(r["coupon"]) for r in rows])
    cols["price"] = np.array([float(r["price"]) for r in rows])
    return FixtureTable("JGB 2002-02-03", JGB_VALUATION, mats, cols)


def load_ust():
    rows = _rows(UST_FILE)
    mats = np.array([float(r["maturity_years"]) for r in rows])
    keys = ("model2_all_pct", "model2_ge1_pct", "cubic_all_pct", "cubic_ge1_pct")
    cols = {k.removesuffix("_pct"): _column(rows, k) for k in keys}
    cols["empirical"] = _column(rows, "yield_pct")
    return FixtureTable("UST 2015-01-29", UST_VALUATION, mats, cols)

"""Input loading and schema checks for the qnetcap CSV/JSON outputs."""
from __future__ import annotations

import json

import pandas as pd

RECORD_COLUMNS = [
    "point_index", "model", "N", "R_km", "rho", "graph_index",
    "s", "t", "d_G_km", "capacity", "end_ratio", "connected",
]
SUMMARY_COLUMNS = [
    "point_index", "model", "N", "R_km", "rho",
    "mean_C", "median_C", "mean_ratio", "bound_exact", "bound_asymptotic",
]


class SchemaError(ValueError):
    """Input file does not match the expected qnetcap schema."""


def _load(path, required) -> pd.DataFrame:
    try:
        df = pd.read_csv(path)
    except pd.errors.EmptyDataError as exc:
        raise SchemaError(f"{path}: empty input file") from exc
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise SchemaError(f"{path}: missing required columns {missing}")
    if df.empty:
        raise SchemaError(f"{path}: no data rows")
    return df


def load_records(path) -> pd.DataFrame:
    return _load(path, RECORD_COLUMNS)


def load_summary(path) -> pd.DataFrame:
    df = _load(path, SUMMARY_COLUMNS)
    return df.sort_values("rho")


def load_histogram(path) -> pd.DataFrame:
    return _load(path, ["k", "count"])


def load_survival(path) -> pd.DataFrame:
    return _load(path, ["k", "survival"])


def load_giant(path) -> pd.DataFrame:
    return _load(path, ["rho", "giant_fraction"]).sort_values("rho")


def load_bounds_jsonl(path) -> list:
    """JSON records as printed by the asymptotics CLI, one per line."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path}: empty input file")
    for row in rows:
        if "name" not in row or "value" not in row:
            raise SchemaError(f"{path}: bound records need 'name' and 'value' fields")
    return rows

"""CSV readers and writers for observed datasets and future populations.

Observed header: ``id,t,y[,z],xc_<name>...,xn_<name>...`` where ``xc_`` columns
are categorical and ``xn_`` columns are numeric.  Future header: ``id`` plus
covariate columns, with optional oracle columns ``y_t<k>`` per treatment and
``s_z<k>`` per instrument value.  UTF-8, ``.`` decimal separator.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .core import (
    ComplianceOracle,
    Covariate,
    FuturePopulation,
    ObservedDataset,
    OutcomeOracle,
    Row,
    SchemaError,
    Unit,
)


def _covariate_columns(header: list[str]) -> list[str]:
    return [c for c in header if c.startswith("xc_") or c.startswith("xn_")]


def _parse_covariate(record: dict[str, str], cov_cols: list[str], line: int) -> Covariate:
    fields: dict[str, str | float] = {}
    for col in cov_cols:
        raw = record[col]
        name = col[3:]
        if col.startswith("xc_"):
            fields[name] = raw
        else:
            try:
                fields[name] = float(raw)
            except ValueError:
                raise SchemaError(f"line {line}: column {col}: not a number: {raw!r}") from None
    return Covariate.of(**fields)


def _parse_int(record: dict[str, str], col: str, line: int) -> int:
    try:
        return int(record[col])
    except (ValueError, TypeError):
        raise SchemaError(f"line {line}: column {col}: not an integer: {record.get(col)!r}") from None


def _parse_float(record: dict[str, str], col: str, line: int) -> float:
    try:
        return float(record[col])
    except (ValueError, TypeError):
        raise SchemaError(f"line {line}: column {col}: not a number: {record.get(col)!r}") from None


def load_observed_csv(path: str | Path, treatments: frozenset[int] | None = None) -> ObservedDataset:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for required in ("id", "t", "y"):
            if required not in header:
                raise SchemaError(f"line 1: observed CSV header must contain {required!r}, got {header}")
        cov_cols = _covariate_columns(header)
        has_z = "z" in header
        rows = []
        for line, record in enumerate(reader, start=2):
            rows.append(
                Row(
                    unit=_parse_int(record, "id", line),
                    x=_parse_covariate(record, cov_cols, line),
                    t=_parse_int(record, "t", line),
                    y=_parse_float(record, "y", line),
                    z=_parse_int(record, "z", line) if has_z else None,
                )
            )
    if not rows:
        raise SchemaError("observed CSV has no data rows")
    if treatments is None:
        treatments = frozenset({0, 1} | {r.t for r in rows})
    try:
        return ObservedDataset(tuple(rows), treatments)
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


def save_observed_csv(data: ObservedDataset, path: str | Path) -> None:
    path = Path(path)
    cov_names = data.rows[0].x.names() if data.rows else ()
    cov_cols = [
        ("xc_" if isinstance(data.rows[0].x.get(n), str) else "xn_") + n for n in cov_names
    ]
    header = ["id", "t", "y"] + (["z"] if data.has_instrument else []) + cov_cols
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r in data.rows:
            record = [r.unit, r.t, repr(r.y)] + ([r.z] if data.has_instrument else [])
            record += [v if isinstance(v, str) else repr(v) for _, v in r.x.items]
            writer.writerow(record)


def load_future_csv(path: str | Path) -> FuturePopulation:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        if "id" not in header:
            raise SchemaError(f"line 1: future CSV header must contain 'id', got {header}")
        cov_cols = _covariate_columns(header)
        y_cols = {c: int(c[3:]) for c in header if c.startswith("y_t")}
        s_cols = {c: int(c[3:]) for c in header if c.startswith("s_z")}
        units = []
        outcomes: dict[tuple[int, int], float] = {}
        compliance: dict[tuple[int, int], int] = {}
        for line, record in enumerate(reader, start=2):
            unit = _parse_int(record, "id", line)
            units.append(Unit(unit, _parse_covariate(record, cov_cols, line)))
            for col, t in y_cols.items():
                outcomes[(unit, t)] = _parse_float(record, col, line)
            for col, z in s_cols.items():
                compliance[(unit, z)] = _parse_int(record, col, line)
    if not units:
        raise SchemaError("future CSV has no data rows")
    return FuturePopulation(
        tuple(units),
        oracle=OutcomeOracle(outcomes) if outcomes else None,
        instrument_oracle=ComplianceOracle(compliance) if compliance else None,
    )


def save_future_csv(
    future: FuturePopulation,
    path: str | Path,
    treatments: tuple[int, ...] = (0, 1),
    instrument_values: tuple[int, ...] = (0, 1),
) -> None:
    path = Path(path)
    x0 = future.units[0].x
    cov_cols = [("xc_" if isinstance(v, str) else "xn_") + n for n, v in x0.items]
    header = ["id"] + cov_cols
    if future.oracle is not None:
        header += [f"y_t{t}" for t in treatments]
    if future.instrument_oracle is not None:
        header += [f"s_z{z}" for z in instrument_values]
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for u in future.units:
            record: list = [u.unit]
            record += [v if isinstance(v, str) else repr(v) for _, v in u.x.items]
            if future.oracle is not None:
                record += [repr(future.oracle.y(u.unit, t)) for t in treatments]
            if future.instrument_oracle is not None:
                record += [future.instrument_oracle.s(u.unit, z) for z in instrument_values]
            writer.writerow(record)

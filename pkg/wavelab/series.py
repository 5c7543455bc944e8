"""Diagnostics time series: the record type and its CSV / JSON encodings."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Iterable

from wavelab.errors import IoError

logger = logging.getLogger(__name__)

SERIES_FORMATS: tuple[str, ...] = ("csv", "json")


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One diagnostics row: conserved quantities, norms and the holomorphy defect."""

    t: float
    E: float
    P: float
    Hs: float
    Wr: float
    A: float
    B: float
    holo_defect: float


COLUMNS: tuple[str, ...] = tuple(f.name for f in fields(DiagnosticsRecord))


def _encode(value: float) -> str:
    return repr(float(value))


def series_csv(records: Iterable[DiagnosticsRecord]) -> str:
    """CSV text with a mandatory header and columns in fixed order."""
    output = io.StringIO()
    writer = csv.DictWriter(output, fieldnames=list(COLUMNS), lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow({k: _encode(v) for k, v in asdict(rec).items()})
    return output.getvalue()


def series_json(records: Iterable[DiagnosticsRecord]) -> str:
    rows = [{k: float(getattr(rec, k)) for k in COLUMNS} for rec in records]
    return json.dumps({"columns": list(COLUMNS), "rows": rows}, indent=2) + "\n"


def write_series(records: Iterable[DiagnosticsRecord], path: Path, fmt: str = "csv") -> Path:
    """Write *records* to *path* as ``csv`` or ``json``.

    Raises
    ------
    IoError
        If the file cannot be written.
    """
    if fmt not in SERIES_FORMATS:
        raise ValueError(f"series format must be one of {SERIES_FORMATS}, got {fmt!r}.")
    path = Path(path)
    text = series_csv(records) if fmt == "csv" else series_json(records)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoError(f"Cannot write series to {path}: {exc}") from exc
    logger.info("Wrote %s series to %s", fmt, path)
    return path


def _record_from(row: dict[str, Any]) -> DiagnosticsRecord:
    return DiagnosticsRecord(**{k: float(row[k]) for k in COLUMNS})


def read_series(path: Path) -> list[DiagnosticsRecord]:
    """Parse a series written by :func:`write_series` (format from the suffix)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"Cannot read series from {path}: {exc}") from exc
    if path.suffix == ".json":
        return [_record_from(row) for row in json.loads(text)["rows"]]
    return [_record_from(row) for row in csv.DictReader(io.StringIO(text))]


def read_jsonl(path: Path) -> list[DiagnosticsRecord]:
    """Records from a JSONL session written by the simulation engine."""
    records: list[DiagnosticsRecord] = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                records.append(_record_from(json.loads(line)))
    except OSError as exc:
        raise IoError(f"Cannot read session {path}: {exc}") from exc
    return records

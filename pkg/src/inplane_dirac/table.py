"""Rectangular numeric result tables and their byte-stable CSV/JSON encodings."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

from .errors import DomainError

FORMATS = ("csv", "json")


@dataclass
class ResultTable:
    columns: list[str]
    units: list[str]
    rows: list[tuple] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.units) != len(self.columns):
            raise DomainError("every column needs a unit annotation")
        if len(set(self.columns)) != len(self.columns):
            raise DomainError("duplicate column names")
        for i, r in enumerate(self.rows):
            if len(r) != len(self.columns):
                raise DomainError(f"row {i} has {len(r)} cells, expected {len(self.columns)}")

    def append(self, row: Sequence) -> None:
        if len(row) != len(self.columns):
            raise DomainError(f"row has {len(row)} cells, expected {len(self.columns)}")
        self.rows.append(tuple(row))

    def column(self, name: str) -> list:
        j = self.columns.index(name)
        return [r[j] for r in self.rows]

    def header(self) -> list[str]:
        return [f"{c} [{u}]" for c, u in zip(self.columns, self.units)]


def _cell(v) -> Any:
    """JSON-safe scalar: numpy scalars unwrapped, non-finite floats become null."""
    if hasattr(v, "item"):
        v = v.item()
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _csv_cell(v) -> str:
    v = _cell(v)
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return _cell(obj)


def emit_table(t: ResultTable, fmt: str = "csv") -> bytes:
    """Encode a table.

    CSV: ``name [unit]`` header, RFC 4180 quoting and CRLF line ends, floats as
    shortest round-trip decimals, empty cells for non-finite values.
    JSON: ``{columns, units, rows, metadata}`` with sorted keys and ``null`` in
    place of non-finite values.
    """
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
        w.writerow(t.header())
        for r in t.rows:
            w.writerow([_csv_cell(v) for v in r])
        return buf.getvalue().encode("utf-8")
    if fmt == "json":
        doc = {
            "columns": list(t.columns),
            "units": list(t.units),
            "rows": [[_cell(v) for v in r] for r in t.rows],
            "metadata": _clean(t.metadata),
        }
        return (json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n").encode("utf-8")
    raise DomainError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def parse_json_table(data: bytes | str) -> ResultTable:
    doc = json.loads(data)
    return ResultTable(doc["columns"], doc["units"], [tuple(r) for r in doc["rows"]], doc["metadata"])


def write_table(t: ResultTable, fmt: str, path: str | None) -> bytes:
    payload = emit_table(t, fmt)
    if path:
        with open(path, "wb") as fh:
            fh.write(payload)
    return payload

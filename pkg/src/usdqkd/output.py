"""Tabular documents written by the command-line tool.

A document is a schema tag, a dict of run metadata, a fixed column list and
rows of scalars. Numbers are printed with 12 significant digits so that the
CSV and JSON renderings reparse to identical floats.

CSV: ``#``-prefixed metadata lines, then a header row, then data rows.
Missing values (NaN, None) are empty cells. JSON: one object with keys
``schema``, ``meta``, ``columns`` and ``rows``; missing values are ``null``.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field

SIG_DIGITS = 12


def fmt_number(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    v = float(value)
    if math.isnan(v):
        return ""
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    # adding 0.0 folds negative zero into zero
    return format(v + 0.0, f".{SIG_DIGITS}g")


def round_sig(value):
    """Snap a value to what the documents store: 12-digit floats, plain scalars."""
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, enum.Enum):
        return value.value
    v = float(value)
    if math.isnan(v):
        return None
    if math.isinf(v):
        return v
    return float(format(v, f".{SIG_DIGITS}g"))


@dataclass
class Table:
    schema: str
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values, expected {len(self.columns)}")
        self.rows.append([round_sig(v) for v in values])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema: {self.schema}\n")
        for key in sorted(self.meta):
            buf.write(f"# {key}: {_meta_text(self.meta[key])}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow(["" if v is None else v if isinstance(v, str) else fmt_number(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "schema": self.schema,
            "meta": {k: round_sig(self.meta[k]) for k in sorted(self.meta)},
            "columns": self.columns,
            "rows": [[_json_value(v) for v in row] for row in self.rows],
        }
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_json() if fmt == "json" else self.to_csv()


def _meta_text(value) -> str:
    value = round_sig(value)
    if value is None:
        return ""
    if isinstance(value, (bool, int, float)):
        return fmt_number(value)
    return str(value)


def _json_value(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _parse_cell(text: str):
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_csv(text: str) -> Table:
    """Inverse of :meth:`Table.to_csv`."""
    lines = text.splitlines()
    meta = {}
    schema = ""
    body_start = 0
    for i, line in enumerate(lines):
        if not line.startswith("#"):
            body_start = i
            break
        key, _, value = line[1:].strip().partition(": ")
        if key == "schema":
            schema = value
        else:
            meta[key] = _parse_cell(value)
    reader = csv.reader(lines[body_start:])
    columns = next(reader)
    rows = [[_parse_cell(c) for c in row] for row in reader]
    return Table(schema=schema, columns=columns, rows=rows, meta=meta)


def parse_json(text: str) -> Table:
    doc = json.loads(text)

    def back(v):
        if v == "inf":
            return math.inf
        if v == "-inf":
            return -math.inf
        return v

    rows = [[back(v) for v in row] for row in doc["rows"]]
    return Table(schema=doc["schema"], columns=doc["columns"], rows=rows, meta=doc["meta"])

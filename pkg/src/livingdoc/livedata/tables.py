"""Payload parsers and the fixed reduction language."""
import csv
import io
import json
import math
import operator
import re
from dataclasses import dataclass
from typing import Dict, List, Optional

from ..errors import EmptySeries, ParseFailed


@dataclass
class Table:
    columns: List[str]
    rows: List[Dict[str, object]]

    def column(self, name) -> List[object]:
        if name not in self.columns:
            raise ParseFailed(f"no column {name!r}; have {', '.join(self.columns)}")
        return [row.get(name) for row in self.rows]


_INT_RE = re.compile(r"^[+-]?\d+$")
_FLOAT_RE = re.compile(r"^[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?$")


def convert_cell(text: str):
    """CSV cell to int, float, bool, None (empty) or the stripped string."""
    s = text.strip()
    if s == "":
        return None
    if _INT_RE.match(s):
        return int(s)
    if _FLOAT_RE.match(s):
        return float(s)
    if s.lower() in ("true", "false"):
        return s.lower() == "true"
    return s


def parse_csv(text: str) -> Table:
    try:
        reader = csv.reader(io.StringIO(text), strict=True)
        rows = [r for r in reader if r]
    except csv.Error as exc:
        raise ParseFailed(f"malformed CSV: {exc}") from exc
    if not rows:
        return Table([], [])
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header) or not all(header):
        raise ParseFailed("CSV header has empty or duplicate column names")
    out = []
    for n, r in enumerate(rows[1:], start=2):
        if len(r) != len(header):
            raise ParseFailed(f"CSV row {n} has {len(r)} fields, header has {len(header)}")
        out.append({h: convert_cell(v) for h, v in zip(header, r)})
    return Table(header, out)


def parse_json_table(text: str) -> Table:
    """A JSON array of flat objects, or an object holding one under ``rows`` or ``data``."""
    try:
        data = json.loads(text)
    except ValueError as exc:
        raise ParseFailed(f"malformed JSON: {exc}") from exc
    if isinstance(data, dict):
        data = data.get("rows", data.get("data"))
    if not isinstance(data, list) or not all(isinstance(r, dict) for r in data):
        raise ParseFailed("json-table payload must be a list of objects")
    columns = []
    for row in data:
        for k in row:
            if k not in columns:
                columns.append(k)
    return Table(columns, [dict(r) for r in data])


PARSE = {"csv-timeseries": parse_csv, "json-table": parse_json_table}


def parse_payload(parser: str, payload: bytes) -> Table:
    try:
        text = payload.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseFailed(f"payload is not UTF-8: {exc}") from exc
    return PARSE[parser](text)


PREDICATE_RE = re.compile(r"^\s*([^\s=!<>]+)\s*(==|!=|<=|>=|<|>)\s*(.+?)\s*$")
NONEMPTY_RE = re.compile(r"^\s*([^\s=!<>]+)\s+nonempty\s*$")
_OPS = {"==": operator.eq, "!=": operator.ne, "<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge}


@dataclass(frozen=True)
class Predicate:
    column: str
    op: str
    literal: object = None

    def __call__(self, row) -> bool:
        value = row.get(self.column)
        if self.op == "nonempty":
            return value not in (None, "", [], {})
        if value is None:
            return self.op == "!="
        lit = self.literal
        numeric = all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (value, lit))
        if self.op in ("==", "!="):
            if not numeric:
                value, lit = _comparable(value), _comparable(lit)
            return _OPS[self.op](value, lit)
        if not numeric:
            raise ParseFailed(f"ordering comparison on non-numeric value {value!r} in column {self.column!r}")
        return _OPS[self.op](value, lit)


def _comparable(value):
    if isinstance(value, bool):
        return ("bool", value)
    if isinstance(value, (int, float)):
        return ("num", float(value))
    return ("str", str(value))


def parse_literal(text: str):
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    converted = convert_cell(text)
    return converted


def parse_predicate(text: str) -> Predicate:
    """``column op literal`` with op in ==, !=, <, <=, >, >=, or ``column nonempty``."""
    m = NONEMPTY_RE.match(text)
    if m:
        return Predicate(m.group(1), "nonempty")
    m = PREDICATE_RE.match(text)
    if not m:
        raise ParseFailed(f"bad predicate {text!r}; expected 'column op literal' or 'column nonempty'")
    return Predicate(m.group(1), m.group(2), parse_literal(m.group(3)))


def _number(value, column):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseFailed(f"non-numeric value {value!r} in column {column!r}")
    return value


def _tidy(value):
    if isinstance(value, float) and math.isfinite(value) and value.is_integer():
        return int(value)
    return value


def reduce_table(table: Table, spec) -> object:
    if not table.rows:
        raise EmptySeries(f"{spec.variable}: source {spec.source!r} has no rows")
    if spec.reduction == "count-where":
        pred = parse_predicate(spec.where)
        if pred.column not in table.columns:
            raise ParseFailed(f"{spec.variable}: no column {pred.column!r}")
        return sum(1 for row in table.rows if pred(row))
    values = [v for v in table.column(spec.column) if v is not None]
    if not values:
        raise EmptySeries(f"{spec.variable}: column {spec.column!r} has no values")
    if spec.reduction == "latest-value":
        return _tidy(values[-1])
    if spec.reduction == "sum":
        total = sum(_number(v, spec.column) for v in values)
        return _tidy(round(total, 12) if isinstance(total, float) else total)
    if spec.reduction == "delta-over":
        if len(values) <= spec.window:
            raise EmptySeries(f"{spec.variable}: delta-over {spec.window} needs more than {spec.window} values")
        delta = _number(values[-1], spec.column) - _number(values[-1 - spec.window], spec.column)
        return _tidy(round(delta, 12) if isinstance(delta, float) else delta)
    raise ParseFailed(f"unknown reduction {spec.reduction!r}")


def series_values(table: Table, column: str, accumulate: bool = False) -> List[Optional[float]]:
    values = []
    running = 0
    for v in table.column(column):
        if v is None:
            values.append(running if accumulate else None)
            continue
        v = _number(v, column)
        if accumulate:
            running += v
            values.append(running)
        else:
            values.append(v)
    return values

"""Template variables: ``{{name}}`` placeholders filled from flat JSON files.

A variable file is a flat JSON object of name -> string or number. An
optional sidecar ``<stem>.provenance.json`` maps each name to the data
snapshots it was computed from::

    {"ebm_trials_results": [{"source": "trials", "revision": "abc123"}]}

Canonical value form: strings are inserted verbatim, numbers as JSON
renders them (``98``, ``0.25``). Write ``\\{\\{`` for a literal ``{{``.
"""
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Union

from ..errors import UnknownVariable, UnterminatedPlaceholder, VariableConflict
from ..mdscan import LineIndex

NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
TOKEN_RE = re.compile(r"\\\{\\\{|\{\{([^\n]*?)\}\}|\{\{")

Scalar = Union[str, int, float]


@dataclass
class TemplateVariableSet:
    values: Dict[str, Scalar] = field(default_factory=dict)
    provenance: Dict[str, dict] = field(default_factory=dict)

    def __post_init__(self):
        for name, value in self.values.items():
            check_variable(name, value)

    def merge(self, other: "TemplateVariableSet") -> "TemplateVariableSet":
        values = dict(self.values)
        provenance = dict(self.provenance)
        for name, value in other.values.items():
            if name in values and (values[name] != value or type(values[name]) is not type(value)):
                a = self.provenance.get(name, {}).get("file", "?")
                b = other.provenance.get(name, {}).get("file", "?")
                raise VariableConflict(f"variable {name!r} defined differently in {a} and {b}")
            values[name] = value
            provenance.setdefault(name, other.provenance.get(name, {}))
        return TemplateVariableSet(values, provenance)

    def subset(self, names) -> "TemplateVariableSet":
        names = set(names)
        return TemplateVariableSet(
            {k: v for k, v in self.values.items() if k in names},
            {k: v for k, v in self.provenance.items() if k in names},
        )

    def to_json(self) -> dict:
        return {"values": dict(self.values), "provenance": dict(self.provenance)}


def check_variable(name, value):
    if not NAME_RE.match(name):
        raise VariableConflict(f"invalid variable name {name!r}")
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise VariableConflict(f"variable {name!r} must be a string or number, got {type(value).__name__}")
    if isinstance(value, float) and not math.isfinite(value):
        raise VariableConflict(f"variable {name!r} is not finite")


def canonical_value(value: Scalar) -> str:
    if isinstance(value, str):
        return value
    return json.dumps(value)


def load_variable_file(path) -> TemplateVariableSet:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise VariableConflict(f"cannot read variable file: {exc}", file=str(path)) from exc
    if not isinstance(data, dict):
        raise VariableConflict("variable file must be a flat JSON object", file=str(path))
    sidecar = path.with_name(path.stem + ".provenance.json")
    sources = json.loads(sidecar.read_text(encoding="utf-8")) if sidecar.exists() else {}
    provenance = {name: {"file": path.name, "sources": sources.get(name, [])} for name in data}
    try:
        return TemplateVariableSet(data, provenance)
    except VariableConflict as err:
        err.file = str(path)
        raise


def merge_variable_files(paths) -> TemplateVariableSet:
    merged = TemplateVariableSet()
    for path in paths:
        merged = merged.merge(load_variable_file(path))
    return merged


def substitute_variables(text: str, variables: TemplateVariableSet, file=None, used: set = None) -> str:
    """Replace ``{{name}}`` with its value; values are never re-scanned.

    Unknown names are collected and reported together.
    """
    if "{{" not in text and "\\{\\{" not in text:
        return text
    missing: List[str] = []
    out = []
    pos = 0
    for m in TOKEN_RE.finditer(text):
        out.append(text[pos:m.start()])
        pos = m.end()
        token = m.group(0)
        if token == "\\{\\{":
            out.append("{{")
        elif m.group(1) is None:
            line, column = LineIndex(text).locate(m.start())
            raise UnterminatedPlaceholder("unterminated '{{' placeholder", file=file, line=line, column=column)
        else:
            name = m.group(1).strip()
            if name in variables.values:
                out.append(canonical_value(variables.values[name]))
                if used is not None:
                    used.add(name)
            else:
                missing.append(name)
                out.append(token)
    out.append(text[pos:])
    if missing:
        raise UnknownVariable(missing, file=file)
    return "".join(out)

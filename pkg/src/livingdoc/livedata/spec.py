"""Data source configuration (YAML).

Example::

    sources:
      - id: cases
        kind: hosted-repo-file          # or http-file
        repo: example-org/outbreak-data
        path: data/cases.csv
        branch: main                    # optional
        parser: csv-timeseries          # or json-table
      - id: trials
        kind: http-file
        url: https://data.example.org/trials.json
        parser: json-table
    stats:
      - {variable: cases_total, source: cases, reduction: latest-value, column: cumulative}
      - {variable: trials_with_results, source: trials, reduction: count-where, where: "has_results == true"}
      - {variable: cases_last_week, source: cases, reduction: delta-over, column: cumulative, window: 7}
      - {variable: deaths_sum, source: cases, reduction: sum, column: deaths}
    figures:
      - id: cases
        kind: line-cumulative           # or stacked-area
        series: [{source: cases, column: cumulative, label: Cases}]
        x_column: date                  # optional, defaults to the first column
        x_label: Date
        y_label: Cumulative cases
        output: cases.svg
        accumulate: false               # running sum of the column before plotting
    outputs:                            # paths relative to this file
      snapshots_dir: snapshots
      variables_file: ../content/variables/data.json
      figures_dir: ../content/images/generated
      manifest: manifest.json

Hosted-repo sources use ``endpoints.hosted_repo_api`` / ``hosted_repo_raw``
from the build config unless the source sets ``api`` / ``raw`` itself.
"""
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple
from urllib.parse import urlsplit

import yaml

from ..assembler.variables import NAME_RE
from ..errors import ConfigError

SOURCE_KINDS = ("hosted-repo-file", "http-file")
PARSERS = ("csv-timeseries", "json-table")
REDUCTIONS = ("latest-value", "sum", "count-where", "delta-over")
CHART_KINDS = ("line-cumulative", "stacked-area")
SAFE_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")

DEFAULT_API = "https://api.github.com"
DEFAULT_RAW = "https://raw.githubusercontent.com"


@dataclass(frozen=True)
class SourceSpec:
    id: str
    kind: str
    parser: str
    url: Optional[str] = None
    repo: Optional[str] = None
    path: Optional[str] = None
    branch: Optional[str] = None
    api: Optional[str] = None
    raw: Optional[str] = None

    @property
    def location(self) -> str:
        if self.kind == "http-file":
            return self.url
        return f"{self.repo}/{self.path}"


@dataclass(frozen=True)
class StatSpec:
    variable: str
    source: str
    reduction: str
    column: Optional[str] = None
    where: Optional[str] = None
    window: Optional[int] = None


@dataclass(frozen=True)
class SeriesSpec:
    source: str
    column: str
    label: str


@dataclass(frozen=True)
class FigureSpec:
    id: str
    kind: str
    series: Tuple[SeriesSpec, ...]
    output: str
    x_column: Optional[str] = None
    x_label: str = ""
    y_label: str = ""
    title: str = ""
    accumulate: bool = False

    @property
    def sources(self) -> Tuple[str, ...]:
        return tuple(dict.fromkeys(s.source for s in self.series))


@dataclass
class DataConfig:
    root: Path
    sources: List[SourceSpec] = field(default_factory=list)
    stats: List[StatSpec] = field(default_factory=list)
    figures: List[FigureSpec] = field(default_factory=list)
    snapshots_dir: Path = None
    variables_file: Path = None
    figures_dir: Path = None
    manifest: Path = None

    def source(self, source_id) -> SourceSpec:
        for s in self.sources:
            if s.id == source_id:
                return s
        raise KeyError(source_id)


def _strict(data, allowed, where, origin):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected a mapping", file=origin)
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}", file=origin)


def _absolute_url(url, where, origin):
    parts = urlsplit(url or "")
    if parts.scheme not in ("http", "https") or not parts.netloc:
        raise ConfigError(f"{where}: location must be an absolute http(s) URL, got {url!r}", file=origin)


def _source(data, i, origin, endpoints):
    where = f"sources[{i}]"
    _strict(data, {f for f in SourceSpec.__dataclass_fields__}, where, origin)
    for key in ("id", "kind", "parser"):
        if not data.get(key):
            raise ConfigError(f"{where}: missing {key}", file=origin)
    if data["kind"] not in SOURCE_KINDS:
        raise ConfigError(f"{where}: kind must be one of {', '.join(SOURCE_KINDS)}", file=origin)
    if data["parser"] not in PARSERS:
        raise ConfigError(f"{where}: parser must be one of {', '.join(PARSERS)}", file=origin)
    if not SAFE_NAME_RE.match(data["id"]):
        raise ConfigError(f"{where}: id must be filesystem-safe", file=origin)
    values = dict(data)
    if data["kind"] == "http-file":
        _absolute_url(data.get("url"), where, origin)
    else:
        if not data.get("repo") or not data.get("path"):
            raise ConfigError(f"{where}: hosted-repo-file needs repo and path", file=origin)
        values.setdefault("api", endpoints.get("hosted_repo_api", DEFAULT_API))
        values.setdefault("raw", endpoints.get("hosted_repo_raw", DEFAULT_RAW))
        _absolute_url(values["api"], where + ".api", origin)
        _absolute_url(values["raw"], where + ".raw", origin)
    return SourceSpec(**values)


def _stat(data, i, origin, source_ids):
    where = f"stats[{i}]"
    _strict(data, {f for f in StatSpec.__dataclass_fields__}, where, origin)
    name = data.get("variable", "")
    if not NAME_RE.match(str(name)):
        raise ConfigError(f"{where}: invalid variable name {name!r}", file=origin)
    if data.get("source") not in source_ids:
        raise ConfigError(f"{where}: unknown source {data.get('source')!r}", file=origin)
    reduction = data.get("reduction")
    if reduction not in REDUCTIONS:
        raise ConfigError(f"{where}: reduction must be one of {', '.join(REDUCTIONS)}", file=origin)
    if reduction == "count-where":
        if not data.get("where"):
            raise ConfigError(f"{where}: count-where needs a where predicate", file=origin)
        from .tables import parse_predicate
        parse_predicate(data["where"])
    elif not data.get("column"):
        raise ConfigError(f"{where}: {reduction} needs a column", file=origin)
    if reduction == "delta-over":
        window = data.get("window")
        if not isinstance(window, int) or isinstance(window, bool) or window < 1:
            raise ConfigError(f"{where}: delta-over needs a positive integer window", file=origin)
    return StatSpec(**data)


def _figure(data, i, origin, source_ids):
    where = f"figures[{i}]"
    _strict(data, {f for f in FigureSpec.__dataclass_fields__}, where, origin)
    if not data.get("id") or not SAFE_NAME_RE.match(str(data["id"])):
        raise ConfigError(f"{where}: missing or unsafe id", file=origin)
    if data.get("kind") not in CHART_KINDS:
        raise ConfigError(f"{where}: kind must be one of {', '.join(CHART_KINDS)}", file=origin)
    output = str(data.get("output") or f"{data['id']}.svg")
    if not SAFE_NAME_RE.match(output) or not output.endswith(".svg"):
        raise ConfigError(f"{where}: output must be a filesystem-safe .svg name", file=origin)
    raw_series = data.get("series") or []
    if not raw_series:
        raise ConfigError(f"{where}: at least one series required", file=origin)
    series = []
    for j, s in enumerate(raw_series):
        _strict(s, {"source", "column", "label"}, f"{where}.series[{j}]", origin)
        if s.get("source") not in source_ids or not s.get("column"):
            raise ConfigError(f"{where}.series[{j}]: needs a known source and a column", file=origin)
        series.append(SeriesSpec(s["source"], s["column"], str(s.get("label") or s["column"])))
    values = {k: v for k, v in data.items() if k not in ("series", "output")}
    return FigureSpec(series=tuple(series), output=output, **values)


def config_from_dict(data, root, origin="<data config>", endpoints=None) -> DataConfig:
    endpoints = endpoints or {}
    data = data or {}
    _strict(data, {"sources", "stats", "figures", "outputs"}, "data config", origin)
    root = Path(root).resolve()
    sources = [_source(s, i, origin, endpoints) for i, s in enumerate(data.get("sources") or [])]
    ids = [s.id for s in sources]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        raise ConfigError(f"duplicate source id(s): {', '.join(dupes)}", file=origin)
    stats = [_stat(s, i, origin, ids) for i, s in enumerate(data.get("stats") or [])]
    names = [s.variable for s in stats]
    if len(set(names)) != len(names):
        raise ConfigError("duplicate stat variable names", file=origin)
    figures = [_figure(f, i, origin, ids) for i, f in enumerate(data.get("figures") or [])]
    if len({f.output for f in figures}) != len(figures):
        raise ConfigError("duplicate figure output names", file=origin)
    outputs = data.get("outputs") or {}
    _strict(outputs, {"snapshots_dir", "variables_file", "figures_dir", "manifest"}, "outputs", origin)
    return DataConfig(
        root=root,
        sources=sources,
        stats=stats,
        figures=figures,
        snapshots_dir=(root / outputs.get("snapshots_dir", "snapshots")).resolve(),
        variables_file=(root / outputs.get("variables_file", "variables/data.json")).resolve(),
        figures_dir=(root / outputs.get("figures_dir", "figures")).resolve(),
        manifest=(root / outputs.get("manifest", "manifest.json")).resolve(),
    )


def load_data_config(path, endpoints=None) -> DataConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read data config: {exc}", file=str(path)) from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"data config is not valid YAML: {exc}", file=str(path)) from exc
    return config_from_dict(data, path.parent, str(path), endpoints)

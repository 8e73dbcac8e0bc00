"""Statistics, figures and the full refresh run.

Manifest layout (canonical JSON, sorted keys, two-space indent)::

    {
      "format_version": 1,
      "sources":   {<id>: {"kind", "location", "status": "ok"|"failed"|"reused",
                           "revision", "digest", "payload", "retrieved_at", "error"}},
      "variables": {<name>: {"value", "sources": [{"source", "revision"}]}},
      "figures":   {<id>: {"path", "digest", "sources": [{"source", "revision"}]}},
      "files":     {<path relative to the manifest>: "sha256:..."},
      "errors":    ["..."]
    }

``retrieved_at`` is when this run checked the source, so an unchanged rerun
differs only in those fields.
"""
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from ..canonical import atomic_write, canonical_json, sha256_hex
from ..errors import EmptySeries, LivingDocError, NetworkError
from ..resolvers.cache import utc_now
from . import svg
from .sources import Snapshot, SnapshotStore, fetch_source
from .spec import DataConfig, FigureSpec
from .tables import Table, parse_payload, reduce_table, series_values

log = logging.getLogger(__name__)

MANIFEST_VERSION = 1


def load_tables(config: DataConfig, store: SnapshotStore, snapshots: Dict[str, Snapshot]) -> Dict[str, Table]:
    return {sid: parse_payload(config.source(sid).parser, store.payload(snap)) for sid, snap in snapshots.items()}


def compute_stats(tables: Dict[str, Table], snapshots: Dict[str, Snapshot], specs) -> tuple:
    """Evaluate every stat; returns ``(values, provenance)`` in sidecar form."""
    values, provenance = {}, {}
    for spec in specs:
        values[spec.variable] = reduce_table(tables[spec.source], spec)
        snap = snapshots[spec.source]
        provenance[spec.variable] = [{"source": snap.source, "revision": snap.revision}]
    return values, provenance


def write_variable_file(path: Path, values, provenance) -> List[Path]:
    path = Path(path)
    sidecar = path.with_name(path.stem + ".provenance.json")
    atomic_write(path, canonical_json(values))
    atomic_write(sidecar, canonical_json(provenance))
    return [path, sidecar]


def figure_svg(tables: Dict[str, Table], spec: FigureSpec) -> str:
    first = tables[spec.series[0].source]
    if not first.rows:
        raise EmptySeries(f"figure {spec.id}: source {spec.series[0].source!r} has no rows")
    x_column = spec.x_column or first.columns[0]
    x_labels = ["" if v is None else str(v) for v in first.column(x_column)]
    series = []
    for s in spec.series:
        vals = series_values(tables[s.source], s.column, spec.accumulate)
        if not any(v is not None for v in vals):
            raise EmptySeries(f"figure {spec.id}: series {s.label!r} has no values")
        series.append((s.label, vals))
    chart = svg.CHARTS[spec.kind]
    return chart(spec.id, x_labels, series, x_label=spec.x_label, y_label=spec.y_label, title=spec.title)


def render_figure(tables: Dict[str, Table], spec: FigureSpec, out_dir) -> Path:
    path = Path(out_dir) / spec.output
    atomic_write(path, figure_svg(tables, spec))
    return path


@dataclass
class UpdateResult:
    manifest_path: Path
    manifest: dict
    errors: List[str] = field(default_factory=list)
    exceptions: List[LivingDocError] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    @property
    def exit_code(self) -> int:
        """0 on success, 2 when every failure was a network error, else 1."""
        if self.ok:
            return 0
        if self.exceptions and all(isinstance(e, NetworkError) for e in self.exceptions):
            return 2
        return 1


def _previous_manifest(path: Path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError):
        return {}


def _previous_variables(path: Path) -> tuple:
    path = Path(path)
    sidecar = path.with_name(path.stem + ".provenance.json")
    try:
        values = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError):
        return {}, {}
    try:
        prov = json.loads(sidecar.read_text(encoding="utf-8"))
    except (OSError, ValueError):
        prov = {}
    if not isinstance(values, dict):
        return {}, {}
    return values, prov if isinstance(prov, dict) else {}


def _rel(path: Path, base: Path) -> str:
    return Path(os.path.relpath(Path(path).resolve(), Path(base).resolve())).as_posix()


def update_all(config: DataConfig, http, *, only: Optional[List[str]] = None, clock=None,
               max_workers: int = 4) -> UpdateResult:
    """Fetch sources, compute stats, render figures and write the manifest.

    ``only`` restricts fetching to those source ids; other sources reuse the
    snapshot named in the previous manifest when there is one. Failures are
    collected, dependent outputs are skipped, everything else is written.
    """
    clock = clock or utc_now
    store = SnapshotStore(config.snapshots_dir)
    previous = _previous_manifest(config.manifest).get("sources", {})
    base = config.manifest.parent
    errors: List[str] = []
    exceptions: List[LivingDocError] = []
    source_entries = {}
    snapshots: Dict[str, Snapshot] = {}

    to_fetch = [s for s in config.sources if only is None or s.id in only]
    checked_at = clock()

    def fetch(spec):
        try:
            return spec, fetch_source(spec, store, http, clock), None
        except LivingDocError as exc:
            return spec, None, exc

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(fetch, to_fetch))
    for spec, snap, err in results:
        entry = {"kind": spec.kind, "location": spec.location, "retrieved_at": checked_at}
        if err is not None:
            errors.append(f"source {spec.id}: {err}")
            exceptions.append(err)
            entry.update(status="failed", error=str(err))
            log.error("source %s failed: %s", spec.id, err)
        else:
            snapshots[spec.id] = snap
            entry.update(status="ok", revision=snap.revision, digest=snap.digest,
                         payload=_rel(store.root / snap.payload_path, base))
        source_entries[spec.id] = entry
    for spec in config.sources:
        if spec.id in source_entries:
            continue
        prior = previous.get(spec.id) or {}
        snap = store.get(spec.id, prior["revision"]) if prior.get("revision") else None
        if snap is None:
            log.warning("source %s not fetched and no previous snapshot; dependents skipped", spec.id)
            continue
        snapshots[spec.id] = snap
        source_entries[spec.id] = {"kind": spec.kind, "location": spec.location, "status": "reused",
                                   "revision": snap.revision, "digest": snap.digest,
                                   "payload": _rel(store.root / snap.payload_path, base),
                                   "retrieved_at": prior.get("retrieved_at", snap.retrieved_at)}

    tables: Dict[str, Table] = {}
    for sid, snap in sorted(snapshots.items()):
        try:
            tables[sid] = parse_payload(config.source(sid).parser, store.payload(snap))
        except LivingDocError as exc:
            errors.append(f"source {sid}: {exc}")
            exceptions.append(exc)
            source_entries[sid].update(status="failed", error=str(exc))

    files: Dict[str, str] = {}
    variables = {}
    values, provenance = {}, {}
    for spec in config.stats:
        if spec.source not in tables:
            errors.append(f"stat {spec.variable}: source {spec.source} unavailable")
            continue
        try:
            v, p = compute_stats(tables, snapshots, [spec])
        except LivingDocError as exc:
            errors.append(f"stat {spec.variable}: {exc}")
            exceptions.append(exc)
            continue
        values.update(v)
        provenance.update(p)
        variables[spec.variable] = {"value": v[spec.variable], "sources": p[spec.variable]}
    if config.stats:
        # A failed stat keeps its last good value so the manuscript still builds.
        old_values, old_prov = _previous_variables(config.variables_file)
        for spec in config.stats:
            if spec.variable not in values and spec.variable in old_values:
                values[spec.variable] = old_values[spec.variable]
                provenance[spec.variable] = old_prov.get(spec.variable, [])
        for path in write_variable_file(config.variables_file, values, provenance):
            files[_rel(path, base)] = "sha256:" + sha256_hex(path.read_bytes())

    figures = {}
    for spec in config.figures:
        missing = [s for s in spec.sources if s not in tables]
        if missing:
            errors.append(f"figure {spec.id}: source(s) {', '.join(missing)} unavailable")
            continue
        try:
            path = render_figure(tables, spec, config.figures_dir)
        except LivingDocError as exc:
            errors.append(f"figure {spec.id}: {exc}")
            exceptions.append(exc)
            continue
        digest = "sha256:" + sha256_hex(path.read_bytes())
        rel = _rel(path, base)
        files[rel] = digest
        figures[spec.id] = {"path": rel, "digest": digest,
                            "sources": [{"source": s, "revision": snapshots[s].revision} for s in spec.sources]}

    for sid, snap in snapshots.items():
        payload = store.root / snap.payload_path
        files[_rel(payload, base)] = snap.digest
        record = store.record_path(sid, snap.revision)
        files[_rel(record, base)] = "sha256:" + sha256_hex(record.read_bytes())

    manifest = {
        "format_version": MANIFEST_VERSION,
        "sources": source_entries,
        "variables": variables,
        "figures": figures,
        "files": files,
        "errors": errors,
    }
    atomic_write(config.manifest, canonical_json(manifest))
    return UpdateResult(config.manifest, manifest, errors, exceptions)

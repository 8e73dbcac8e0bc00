"""Fetching data sources into immutable, provenance-carrying snapshots.

Store layout under ``snapshots_dir``::

    <source id>/<revision slug><ext>     payload exactly as downloaded
    <source id>/<revision slug>.snapshot.json     snapshot record

A revision is the upstream commit id (hosted-repo-file) or, for plain
HTTP files, the ETag, else Last-Modified, else the payload digest.
"""
import json
import logging
import re
from dataclasses import asdict, dataclass
from pathlib import Path, PurePosixPath
from typing import Optional
from urllib.parse import quote, urlencode, urlsplit

from ..canonical import atomic_write, canonical_json, sha256_hex
from ..errors import FetchFailed, ParseFailed, RevisionDiscoveryFailed
from ..resolvers.cache import utc_now
from .spec import SourceSpec

log = logging.getLogger(__name__)

_SLUG_RE = re.compile(r"[^A-Za-z0-9._-]")


@dataclass(frozen=True)
class Snapshot:
    source: str
    revision: str
    retrieved_at: str
    digest: str
    payload_path: str

    def to_json(self):
        return asdict(self)


def revision_slug(revision: str) -> str:
    slug = _SLUG_RE.sub("_", revision).strip("._") or "rev"
    if slug != revision or len(slug) > 80:
        slug = slug[:60] + "-" + sha256_hex(revision)[:12]
    return slug


class SnapshotStore:
    def __init__(self, root):
        self.root = Path(root)

    def record_path(self, source_id, revision) -> Path:
        return self.root / source_id / f"{revision_slug(revision)}.snapshot.json"

    def get(self, source_id, revision) -> Optional[Snapshot]:
        path = self.record_path(source_id, revision)
        if not path.exists():
            return None
        snap = Snapshot(**json.loads(path.read_text(encoding="utf-8")))
        if snap.revision != revision:
            return None
        return snap

    def payload(self, snap: Snapshot) -> bytes:
        data = (self.root / snap.payload_path).read_bytes()
        if "sha256:" + sha256_hex(data) != snap.digest:
            raise ParseFailed(f"snapshot payload digest mismatch: {snap.payload_path}")
        return data

    def put(self, source_id, revision, payload: bytes, ext: str, retrieved_at: str) -> Snapshot:
        existing = self.get(source_id, revision)
        if existing is not None:
            return existing
        slug = revision_slug(revision)
        rel = PurePosixPath(source_id) / f"{slug}{ext}"
        atomic_write(self.root / rel, payload)
        snap = Snapshot(source_id, revision, retrieved_at, "sha256:" + sha256_hex(payload), rel.as_posix())
        atomic_write(self.record_path(source_id, revision), canonical_json(snap.to_json()))
        return snap


def _extension(spec: SourceSpec) -> str:
    name = spec.path if spec.kind == "hosted-repo-file" else urlsplit(spec.url).path
    suffix = PurePosixPath(name or "").suffix
    if suffix and re.match(r"^\.[A-Za-z0-9]{1,8}$", suffix):
        return suffix
    return ".csv" if spec.parser == "csv-timeseries" else ".json"


def discover_revision(spec: SourceSpec, http) -> str:
    """Latest commit touching ``spec.path`` via the hosting service's commits API."""
    params = {"path": spec.path, "per_page": 1}
    if spec.branch:
        params = {"sha": spec.branch, **params}
    url = f"{spec.api.rstrip('/')}/repos/{spec.repo}/commits?{urlencode(params)}"
    resp = http.get(url, headers={"Accept": "application/vnd.github+json"})
    try:
        commits = json.loads(resp.text)
        revision = commits[0]["sha"]
    except (ValueError, LookupError, TypeError) as exc:
        raise RevisionDiscoveryFailed(f"{spec.id}: no revision in commits response from {url}") from exc
    if not isinstance(revision, str) or not revision.strip():
        raise RevisionDiscoveryFailed(f"{spec.id}: empty revision id from {url}")
    return revision.strip()


def fetch_source(spec: SourceSpec, store: SnapshotStore, http, clock=None) -> Snapshot:
    """Download the current revision of ``spec``; an already-stored revision is not re-downloaded."""
    clock = clock or utc_now
    ext = _extension(spec)
    if spec.kind == "hosted-repo-file":
        revision = discover_revision(spec, http)
        existing = store.get(spec.id, revision)
        if existing is not None:
            log.info("%s: revision %s already stored", spec.id, revision)
            return existing
        raw_url = f"{spec.raw.rstrip('/')}/{spec.repo}/{quote(revision)}/{quote(spec.path)}"
        resp = http.get(raw_url)
        return store.put(spec.id, revision, resp.body, ext, clock())
    resp = http.get(spec.url)
    revision = resp.header("etag") or resp.header("last-modified") or "sha256:" + sha256_hex(resp.body)
    existing = store.get(spec.id, revision)
    if existing is not None:
        if existing.digest != "sha256:" + sha256_hex(resp.body):
            raise FetchFailed(f"{spec.id}: upstream content changed without a new revision ({revision})", url=spec.url)
        return existing
    return store.put(spec.id, revision, resp.body, ext, clock())

"""On-disk, append-only JSON stores keyed by normalized citation key (or DOI).

Layout::

    <root>/<namespace>/<h[0:2]>/<h[2:4]>/<h>.json     h = sha256(key) hex

Each file is canonical JSON::

    {"format_version": 1, "key": "<key>", "entries": [<entry>, ...]}

Entries are never modified; a refresh appends a new entry and the last one
wins. Metadata entries hold ``retrieved_at``, ``upstream_version``,
``media_type``, the verbatim upstream ``raw`` payload and the parsed ``csl``
item (without its reference id, which depends on the manuscript's key set).
"""
import json
import threading
from datetime import datetime, timezone
from pathlib import Path

from ..canonical import atomic_write, canonical_json, sha256_hex
from ..errors import ConfigError

FORMAT_VERSION = 1


def utc_now() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat().replace("+00:00", "Z")


class JsonStore:
    def __init__(self, root, namespace):
        self.root = Path(root) / namespace
        self._locks = {}
        self._guard = threading.Lock()

    def path_for(self, key) -> Path:
        h = sha256_hex(str(key))
        return self.root / h[:2] / h[2:4] / f"{h}.json"

    def _lock(self, key):
        with self._guard:
            return self._locks.setdefault(str(key), threading.Lock())

    def _read(self, path):
        data = json.loads(path.read_text(encoding="utf-8"))
        if data.get("format_version") != FORMAT_VERSION:
            raise ConfigError(f"unsupported cache format_version {data.get('format_version')!r}", file=str(path))
        return data

    def entries(self, key):
        path = self.path_for(key)
        if not path.exists():
            return []
        return self._read(path)["entries"]

    def latest(self, key):
        entries = self.entries(key)
        return entries[-1] if entries else None

    def append(self, key, entry):
        with self._lock(key):
            path = self.path_for(key)
            data = self._read(path) if path.exists() else {"format_version": FORMAT_VERSION, "key": str(key), "entries": []}
            if data["entries"] and data["entries"][-1] == entry:
                return
            data["entries"].append(entry)
            atomic_write(path, canonical_json(data))

    def keys(self):
        if not self.root.exists():
            return []
        return sorted(json.loads(p.read_text(encoding="utf-8"))["key"] for p in self.root.glob("*/*/*.json"))


class MetadataCache(JsonStore):
    def __init__(self, root):
        super().__init__(root, "metadata")

    def get(self, key):
        return self.latest(key)

    def put(self, key, *, raw, csl, media_type, upstream_version=None, retrieved_at=None):
        entry = {
            "retrieved_at": retrieved_at or utc_now(),
            "upstream_version": upstream_version,
            "media_type": media_type,
            "raw": raw,
            "csl": csl,
        }
        self.append(key, entry)
        return entry


def entry_digest(entry) -> str:
    """Digest of the parsed item only, so timestamps never leak into build stamps."""
    return "sha256:" + sha256_hex(canonical_json(entry["csl"]))

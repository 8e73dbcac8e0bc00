"""Canonical serialization and digests shared by every machine-readable output.

Canonical JSON: UTF-8, keys sorted, two-space indent, ``", "``/``": "``
separators, non-ASCII kept literal, one trailing newline.
"""
import hashlib
import json
import os
import tempfile
from pathlib import Path


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, separators=(",", ": ")) + "\n"


def sha256_hex(data) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()


def file_digest(path) -> str:
    return "sha256:" + sha256_hex(Path(path).read_bytes())


def atomic_write(path, data) -> None:
    """Write via a temp file in the same directory and rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_canonical_json(path, obj) -> str:
    text = canonical_json(obj)
    atomic_write(path, text)
    return text

"""Build configuration (``livingdoc.config``, YAML).

Parsing is strict: unknown keys anywhere are errors. Relative paths are
resolved against the directory holding the config file.

Environment overrides:

``LIVINGDOC_CACHE_DIR``
    replaces ``cache_dir``.
``LIVINGDOC_OFFLINE``
    when set to ``1``/``true``/``yes``, forbids all network access.
"""
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional

import yaml

from .errors import ConfigError

ENV_CACHE_DIR = "LIVINGDOC_CACHE_DIR"
ENV_OFFLINE = "LIVINGDOC_OFFLINE"
DEFAULT_CONFIG_NAME = "livingdoc.config"


@dataclass
class HealthConfig:
    enabled: bool = False
    fail_on: str = "notice"
    freshness_days: float = 7
    batch_size: int = 50


@dataclass
class SpellConfig:
    dictionary: Optional[Path] = None
    allowlist: Optional[Path] = None
    variant_pairs: Optional[Path] = None
    strict_variants: bool = False
    skip_acronyms: bool = True


@dataclass
class NetworkConfig:
    max_workers: int = 4
    politeness: float = 0.2
    retries: int = 3
    backoff: float = 0.5
    timeout: float = 30


@dataclass
class BuildConfig:
    root: Path
    content_dir: Path
    metadata_file: Optional[Path] = None
    variable_files: List[str] = field(default_factory=list)
    cache_dir: Path = None
    output_dir: Path = None
    assets_dir: Optional[Path] = None
    content_order: List[str] = field(default_factory=list)
    bibliography_order: str = "first-occurrence"
    resolve_policy: str = "cached-or-fetch"
    unresolved: str = "fail"
    formats: List[str] = field(default_factory=lambda: ["html", "tex"])
    prefix_manifest: Optional[Path] = None
    manual_references: Optional[Path] = None
    endpoints: Dict[str, str] = field(default_factory=dict)
    url_rewrites: Dict[str, str] = field(default_factory=dict)
    converter_cmd: Optional[str] = None
    data_config: Optional[Path] = None
    health: HealthConfig = field(default_factory=HealthConfig)
    spellcheck: SpellConfig = field(default_factory=SpellConfig)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    offline: bool = False

    def variable_paths(self) -> List[Path]:
        """Expand ``variable_files`` globs; results sorted within each pattern.

        Provenance sidecars (``*.provenance.json``) are never variable files.
        """
        out = []
        for pattern in self.variable_files:
            matches = sorted(m for m in self.root.glob(pattern) if not m.name.endswith(".provenance.json"))
            if not matches and not any(ch in pattern for ch in "*?["):
                raise ConfigError(f"variable file not found: {pattern}")
            out.extend(m for m in matches if m not in out)
        return out


_CHOICES = {
    "bibliography_order": ("first-occurrence", "alphabetical"),
    "resolve_policy": ("offline", "cached-or-fetch", "force-refresh"),
    "unresolved": ("fail", "placeholder"),
}
_ENDPOINT_KEYS = {"doi", "pubmed", "arxiv", "clinicaltrials", "smart_citations", "hosted_repo_api", "hosted_repo_raw"}
_PATH_KEYS = {"content_dir", "metadata_file", "cache_dir", "output_dir", "assets_dir", "prefix_manifest",
              "manual_references", "data_config"}
_MUST_EXIST = {"content_dir", "metadata_file", "assets_dir", "prefix_manifest", "manual_references", "data_config"}


def _truthy(value) -> bool:
    return str(value).strip().lower() in ("1", "true", "yes", "on")


def _section(cls, data, name, root, origin):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"{name}: expected a mapping", file=origin)
    allowed = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {name}: {', '.join(unknown)}", file=origin)
    values = dict(data)
    if cls is SpellConfig:
        for key in ("dictionary", "allowlist", "variant_pairs"):
            if values.get(key):
                values[key] = (root / values[key]).resolve()
                if not values[key].exists():
                    raise ConfigError(f"{name}.{key}: path does not exist: {values[key]}", file=origin)
    if cls is HealthConfig and values.get("fail_on", "notice") not in ("notice", "disputed", "never"):
        raise ConfigError(f"{name}.fail_on must be notice, disputed or never", file=origin)
    return cls(**values)


def config_from_dict(data: dict, root: Path, origin: str = "<config>") -> BuildConfig:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping", file=origin)
    root = Path(root).resolve()
    allowed = {f.name for f in fields(BuildConfig)} - {"root", "offline"}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}", file=origin)
    values = {k: v for k, v in data.items() if k not in ("health", "spellcheck", "network")}
    values.setdefault("content_dir", "content")
    values.setdefault("cache_dir", "ci/cache")
    values.setdefault("output_dir", "output")
    for key in _PATH_KEYS:
        if values.get(key) is not None:
            values[key] = (root / str(values[key])).resolve()
    if os.environ.get(ENV_CACHE_DIR):
        values["cache_dir"] = Path(os.environ[ENV_CACHE_DIR]).resolve()
    for key in sorted(_MUST_EXIST):
        if values.get(key) is not None and not values[key].exists():
            raise ConfigError(f"{key}: path does not exist: {values[key]}", file=origin)
    for key, choices in _CHOICES.items():
        if key in values and values[key] not in choices:
            raise ConfigError(f"{key} must be one of {', '.join(choices)}", file=origin)
    formats = values.get("formats", ["html", "tex"])
    if not formats or not set(formats) <= {"html", "tex"}:
        raise ConfigError("formats must be a non-empty subset of [html, tex]", file=origin)
    bad_endpoints = sorted(set(values.get("endpoints") or {}) - _ENDPOINT_KEYS)
    if bad_endpoints:
        raise ConfigError(f"unknown endpoint key(s): {', '.join(bad_endpoints)}", file=origin)
    for key in ("variable_files", "content_order"):
        if isinstance(values.get(key), str):
            values[key] = [values[key]]
    cfg = BuildConfig(
        root=root,
        health=_section(HealthConfig, data.get("health"), "health", root, origin),
        spellcheck=_section(SpellConfig, data.get("spellcheck"), "spellcheck", root, origin),
        network=_section(NetworkConfig, data.get("network"), "network", root, origin),
        **values,
    )
    cfg.offline = _truthy(os.environ.get(ENV_OFFLINE, ""))
    if cfg.offline:
        cfg.resolve_policy = "offline"
    return cfg


def load_config(path) -> BuildConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", file=str(path)) from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}", file=str(path)) from exc
    return config_from_dict(data, path.parent, str(path))

"""Citation prefix registry: built-in sources plus compact-URI prefixes from a manifest.

Manifest format (JSON)::

    {
      "format_version": 1,
      "prefixes": {
        "uniprot": {
          "name": "UniProt Knowledgebase",
          "pattern": "^...$",
          "url": "https://identifiers.org/uniprot:{ac}"
        }
      }
    }

``url`` is a template where ``{ac}`` is replaced by the accession.
"""
import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from ..errors import ConfigError, UnknownPrefix

MANIFEST_FORMAT_VERSION = 1

ALIASES = {"pmid": "pubmed"}

URL_RE = re.compile(r"^https?://[^\s/?#]+[^\s]*$", re.IGNORECASE)


@dataclass(frozen=True)
class PrefixEntry:
    prefix: str
    kind: str
    pattern: Optional[re.Pattern]
    url_template: Optional[str]
    name: str = ""

    def accepts(self, accession: str) -> bool:
        return self.pattern is None or bool(self.pattern.match(accession))

    def expand(self, accession: str) -> str:
        if not self.url_template:
            raise UnknownPrefix(f"prefix {self.prefix!r} has no resolution URL template")
        return self.url_template.replace("{ac}", accession)


BUILTINS = (
    PrefixEntry("doi", "doi", re.compile(r"^10\.[^/\s]+/\S+$"), "https://doi.org/{ac}", "Digital Object Identifier"),
    PrefixEntry("pubmed", "pubmed", re.compile(r"^[1-9]\d{0,9}$"), "https://pubmed.ncbi.nlm.nih.gov/{ac}/", "PubMed"),
    PrefixEntry(
        "arxiv", "arxiv",
        re.compile(r"^(\d{4}\.\d{4,5}|[a-z-]+(\.[A-Z]{2})?/\d{7})(v\d+)?$"),
        "https://arxiv.org/abs/{ac}", "arXiv",
    ),
    PrefixEntry("clinicaltrials", "clinicaltrials", re.compile(r"^NCT\d{8}$"), "https://clinicaltrials.gov/study/{ac}", "ClinicalTrials.gov"),
    PrefixEntry("url", "url", URL_RE, "{ac}", "Web page"),
    PrefixEntry("raw", "raw", None, None, "Manual reference"),
)


class PrefixRegistry:
    def __init__(self, entries=BUILTINS):
        self._entries = {}
        for entry in entries:
            self.add(entry)

    def add(self, entry: PrefixEntry):
        if entry.prefix != entry.prefix.lower() or not entry.prefix:
            raise ConfigError(f"prefix must be non-empty lowercase: {entry.prefix!r}")
        if entry.prefix in self._entries or entry.prefix in ALIASES:
            raise ConfigError(f"duplicate prefix: {entry.prefix!r}")
        self._entries[entry.prefix] = entry

    @classmethod
    def default(cls, manifest=None):
        """Built-ins plus the packaged identifiers manifest, plus ``manifest`` if given."""
        reg = cls()
        packaged = resources.files("livingdoc").joinpath("data/prefixes.json").read_text(encoding="utf-8")
        reg.load_manifest_data(json.loads(packaged), "packaged prefixes.json")
        if manifest:
            reg.load_manifest(manifest)
        return reg

    def load_manifest(self, path):
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read prefix manifest: {exc}", file=str(path)) from exc
        self.load_manifest_data(data, str(path))

    def load_manifest_data(self, data, origin="<manifest>"):
        if not isinstance(data, dict) or data.get("format_version") != MANIFEST_FORMAT_VERSION:
            raise ConfigError(f"unsupported prefix manifest format_version in {origin}")
        for prefix, spec in sorted(data.get("prefixes", {}).items()):
            try:
                pattern = re.compile(spec["pattern"]) if spec.get("pattern") else None
                template = spec["url"]
            except (KeyError, TypeError, re.error) as exc:
                raise ConfigError(f"bad manifest entry {prefix!r} in {origin}: {exc}") from exc
            if prefix in self._entries and self._entries[prefix].kind != "compact":
                raise ConfigError(f"manifest {origin} redefines built-in prefix {prefix!r}")
            self._entries.pop(prefix, None)
            self.add(PrefixEntry(prefix, "compact", pattern, template, spec.get("name", "")))

    def canonical(self, prefix: str) -> str:
        prefix = prefix.lower()
        return ALIASES.get(prefix, prefix)

    def get(self, prefix: str) -> PrefixEntry:
        entry = self._entries.get(self.canonical(prefix))
        if entry is None:
            raise UnknownPrefix(f"unknown citation prefix: {prefix!r}")
        return entry

    def __contains__(self, prefix):
        return self.canonical(prefix) in self._entries or prefix.lower() in ALIASES

    def prefixes(self):
        return sorted(self._entries)

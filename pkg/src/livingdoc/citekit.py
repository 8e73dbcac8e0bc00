"""Citation keys: parsing, extraction from markdown, normalization, reference ids.

Citation markers look like ``[@doi:10.1371/journal.pcbi.1007128]``, may hold
several keys (``[@doi:…; @pubmed:…]``), or appear bare (``@clinicaltrials:NCT04280705``).
"""
import hashlib
import re
from dataclasses import dataclass
from typing import Dict, Iterable, List
from urllib.parse import urlsplit, urlunsplit

from . import mdscan
from .errors import MalformedKey, UnknownPrefix
from .resolvers.registry import PrefixRegistry

_DEFAULT_REGISTRY = None

BRACKET_RE = re.compile(r"\[(@[^\[\]\n]*)\](?!\()")
BARE_RE = re.compile(r"(?<![\w@\[/.])@([A-Za-z][A-Za-z0-9_.+-]*:[^\s\[\];,]+)")
KEY_TRAILING = ".,:;!?"

REFERENCE_ID_LENGTH = 8
REFERENCE_ID_MAX = 12
BASE62 = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz"


def default_registry() -> PrefixRegistry:
    global _DEFAULT_REGISTRY
    if _DEFAULT_REGISTRY is None:
        _DEFAULT_REGISTRY = PrefixRegistry.default()
    return _DEFAULT_REGISTRY


@dataclass(frozen=True, order=True)
class CitationKey:
    source: str
    accession: str

    def __post_init__(self):
        if not self.source or self.source != self.source.lower():
            raise MalformedKey(f"citation source must be non-empty lowercase: {self.source!r}")
        if not self.accession:
            raise MalformedKey(f"empty accession for source {self.source!r}")
        if self.source == "doi" and not (self.accession.startswith("10.") and "/" in self.accession):
            raise MalformedKey(f"DOI must start with '10.' and contain '/': {self.accession!r}")
        if self.source == "clinicaltrials" and not re.fullmatch(r"NCT\d{8}", self.accession):
            raise MalformedKey(f"clinical trial id must be NCT + 8 digits: {self.accession!r}")
        if self.source == "url":
            parts = urlsplit(self.accession)
            if parts.scheme.lower() not in ("http", "https") or not parts.netloc:
                raise MalformedKey(f"url citation must be absolute http(s): {self.accession!r}")

    def __str__(self):
        return f"{self.source}:{self.accession}"


@dataclass(frozen=True)
class CitationOccurrence:
    key: CitationKey
    file: str
    line: int
    column: int


def parse_citation_key(text: str, registry: PrefixRegistry = None) -> CitationKey:
    """Split ``prefix:accession`` and validate it against the prefix registry."""
    registry = registry or default_registry()
    source, sep, accession = text.strip().partition(":")
    if not sep or not source or not accession:
        raise MalformedKey(f"malformed citation key (expected prefix:accession): {text!r}")
    source = source.lower()
    entry = registry.get(source)
    if not entry.accepts(accession):
        raise MalformedKey(f"accession {accession!r} does not match the {entry.prefix} pattern")
    return CitationKey(source, accession)


def _strip_key_tail(key):
    while key and key[-1] in KEY_TRAILING:
        key = key[:-1]
    while key.endswith(")") and key.count(")") > key.count("("):
        key = key[:-1]
    return key


ITEM_KEY_RE = re.compile(r"(?:^|\s)@(\S+)")
KEY_URL_LEAD_RE = re.compile(r"@[A-Za-z][\w.+-]*:$")


def _excluded_mask(markdown):
    code = mdscan.code_spans(markdown)
    # URLs that are themselves citation accessions (@url:https://...) stay visible
    urls = [s for s in mdscan.url_spans(markdown) if not KEY_URL_LEAD_RE.search(markdown[max(0, s[0] - 40):s[0]])]
    return mdscan.SpanMask(markdown, code + urls + mdscan.html_spans(markdown))


def citation_spans(markdown: str, file=None):
    """``(offset, raw_key, marker_start, marker_end)`` for every marker outside excluded regions.

    Bracketed markers produce one tuple per ``@key`` they contain.
    """
    excluded = _excluded_mask(markdown)
    found = []
    bracket_regions = []
    for m in BRACKET_RE.finditer(markdown):
        if excluded.hits(m.start(), m.end()):
            continue
        bracket_regions.append(m.span())
        for part in re.finditer(r"[^;]+", m.group(1)):
            km = ITEM_KEY_RE.search(part.group())
            if km is None:
                err = MalformedKey(f"citation list item without '@key': {part.group().strip()!r}")
                raise _located(err, markdown, m.start(1) + part.start(), file)
            offset = m.start(1) + part.start() + km.start(1) - 1
            found.append((offset, _strip_key_tail(km.group(1)), m.start(), m.end()))
    in_bracket = mdscan.SpanMask(markdown, bracket_regions)
    for m in BARE_RE.finditer(markdown):
        if excluded.hits(m.start(), m.end()) or in_bracket.contains(m.start()):
            continue
        raw = _strip_key_tail(m.group(1))
        found.append((m.start(), raw, m.start(), m.start() + 1 + len(raw)))
    found.sort(key=lambda t: t[0])
    return found


def _located(err, markdown, offset, file=None):
    err.line, err.column = mdscan.LineIndex(markdown).locate(offset)
    err.file = None if file is None else str(file)
    return err


def extract_citations(markdown: str, file: str, registry: PrefixRegistry = None) -> List[CitationOccurrence]:
    """All citation occurrences in document order (line, then column)."""
    index = mdscan.LineIndex(markdown)
    out = []
    for offset, raw, _, _ in citation_spans(markdown, file):
        line, column = index.locate(offset)
        try:
            key = parse_citation_key(raw, registry)
        except (MalformedKey, UnknownPrefix) as err:
            err.file, err.line, err.column = str(file), line, column
            raise
        out.append(CitationOccurrence(key, str(file), line, column))
    return out


_UNRESERVED = set("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-._~")


def _normalize_percent(component: str) -> str:
    """Uppercase percent-escapes and decode the ones that encode unreserved characters."""
    def fix(m):
        char = chr(int(m.group(1), 16))
        return char if char in _UNRESERVED else "%" + m.group(1).upper()
    return re.sub(r"%([0-9A-Fa-f]{2})", fix, component)


def normalize_url(url: str) -> str:
    parts = urlsplit(url)
    scheme = parts.scheme.lower()
    host = parts.hostname or ""
    netloc = host.lower()
    if parts.port and not ((scheme == "http" and parts.port == 80) or (scheme == "https" and parts.port == 443)):
        netloc += f":{parts.port}"
    if parts.username:
        userinfo = parts.username + (f":{parts.password}" if parts.password else "")
        netloc = f"{userinfo}@{netloc}"
    path = _normalize_percent(parts.path) or "/"
    return urlunsplit((scheme, netloc, path, _normalize_percent(parts.query), _normalize_percent(parts.fragment)))


def normalize_key(key: CitationKey, registry: PrefixRegistry = None) -> CitationKey:
    """Canonical form; idempotent."""
    registry = registry or default_registry()
    source = registry.canonical(key.source)
    accession = key.accession
    if source == "doi":
        accession = accession.lower()
    elif source == "url":
        accession = normalize_url(accession)
    elif source == "arxiv":
        accession = accession.strip()
    return CitationKey(source, accession)


def _base62(digest: bytes) -> str:
    n = int.from_bytes(digest, "big")
    chars = []
    while n:
        n, r = divmod(n, 62)
        chars.append(BASE62[r])
    return "".join(reversed(chars)) or "0"


def key_digest(key: CitationKey) -> str:
    """Full-length base62 SHA-256 digest of the key string."""
    return _base62(hashlib.sha256(str(key).encode("utf-8")).digest())


def assign_reference_ids(keys: Iterable[CitationKey]) -> Dict[CitationKey, str]:
    """Deterministic short ids; keys whose 8-char prefixes collide get longer ids."""
    digests = {key: key_digest(key) for key in set(keys)}
    groups = {}
    for key, digest in digests.items():
        groups.setdefault(digest[:REFERENCE_ID_LENGTH], []).append(key)
    ids = {}
    for prefix, members in groups.items():
        if len(members) == 1:
            ids[members[0]] = prefix
            continue
        for length in range(REFERENCE_ID_LENGTH + 1, REFERENCE_ID_MAX + 1):
            cut = {digests[k][:length] for k in members}
            if len(cut) == len(members):
                break
        else:
            raise RuntimeError(f"reference id collision beyond {REFERENCE_ID_MAX} chars: {members}")
        for k in members:
            ids[k] = digests[k][:length]
    return ids


def inventory(occurrences: Iterable[CitationOccurrence], registry: PrefixRegistry = None) -> List[CitationKey]:
    """Unique normalized keys in order of first occurrence."""
    seen = {}
    for occ in occurrences:
        seen.setdefault(normalize_key(occ.key, registry), None)
    return list(seen)


__all__ = [
    "CitationKey",
    "CitationOccurrence",
    "assign_reference_ids",
    "citation_spans",
    "extract_citations",
    "inventory",
    "normalize_key",
    "parse_citation_key",
]

"""Citation-context tallies and editorial notices from a smart-citation service.

Service contract (base URL from ``endpoints.smart_citations``)::

    POST {base}/tallies            body {"dois": ["10.x/y", ...]}
      200 {"tallies": [<tally>, ...], "errors": [{"doi": "...", "status": 503}, ...]}
    GET  {base}/tallies/{doi}
      200 <tally>        404 unknown DOI

    <tally> = {"doi": "10.x/y", "supporting": 3, "mentioning": 10, "disputing": 1,
               "notices": [{"type": "retraction"}, ...]}

Notice types are ``retraction``, ``correction`` and ``expression-of-concern``.
DOIs missing from a batch response, or listed under ``errors``, are retried
one at a time with GET; a DOI that still fails is marked unavailable.
A failing batch endpoint (any error status) falls back to GET for the
whole batch.
"""
import html
import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Dict, List, Optional, Sequence, Tuple
from urllib.parse import quote

from .canonical import canonical_json
from .errors import FetchFailed, NetworkError, OfflineMiss, ParseFailed
from .resolvers.cache import JsonStore

log = logging.getLogger(__name__)

NOTICE_TYPES = ("retraction", "correction", "expression-of-concern")
SEVERITIES = ("ok", "disputed", "notice")
DEFAULT_FRESHNESS_DAYS = 7
DEFAULT_BATCH_SIZE = 50


@dataclass(frozen=True)
class CitationTally:
    doi: str
    supporting: int = 0
    mentioning: int = 0
    disputing: int = 0
    notices: Tuple[str, ...] = ()
    fetched_at: str = ""

    def __post_init__(self):
        if self.doi != self.doi.lower():
            raise ValueError(f"tally DOI must be lowercase: {self.doi!r}")
        for name in ("supporting", "mentioning", "disputing"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value!r}")
        for notice in self.notices:
            if notice not in NOTICE_TYPES:
                raise ValueError(f"unknown notice type {notice!r}")

    def to_json(self) -> dict:
        return {
            "doi": self.doi,
            "supporting": self.supporting,
            "mentioning": self.mentioning,
            "disputing": self.disputing,
            "notices": list(self.notices),
            "fetched_at": self.fetched_at,
        }

    @classmethod
    def from_json(cls, data: dict, fetched_at: str = None) -> "CitationTally":
        return cls(
            doi=data["doi"].lower(),
            supporting=int(data.get("supporting", 0)),
            mentioning=int(data.get("mentioning", 0)),
            disputing=int(data.get("disputing", 0)),
            notices=tuple(n["type"] if isinstance(n, dict) else n for n in data.get("notices") or ()),
            fetched_at=fetched_at if fetched_at is not None else data.get("fetched_at", ""),
        )


@dataclass(frozen=True)
class TallyUnavailable:
    doi: str
    reason: str


def normalize_doi(doi: str) -> str:
    doi = doi.strip()
    doi = re.sub(r"^(?:https?://(?:dx\.)?doi\.org/|doi:)", "", doi, flags=re.IGNORECASE)
    return doi.lower()


def iso_utc(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).replace(microsecond=0).isoformat().replace("+00:00", "Z")


def _parse_iso(text: str) -> Optional[datetime]:
    try:
        return datetime.fromisoformat(text.replace("Z", "+00:00"))
    except (AttributeError, ValueError):
        return None


class TallyCache(JsonStore):
    def __init__(self, root):
        super().__init__(root, "tallies")

    def get(self, doi) -> Optional[CitationTally]:
        entry = self.latest(doi)
        return CitationTally.from_json(entry["tally"], entry["fetched_at"]) if entry else None

    def put(self, tally: CitationTally):
        body = tally.to_json()
        body.pop("fetched_at")
        self.append(tally.doi, {"fetched_at": tally.fetched_at, "tally": body})


def _parse_tally(data, fetched_at) -> CitationTally:
    try:
        return CitationTally.from_json(data, fetched_at)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseFailed(f"malformed tally: {exc}") from exc


class TallyFetcher:
    def __init__(self, http, base_url: str, clock=None):
        self.http = http
        self.base = base_url.rstrip("/")
        self.clock = clock or (lambda: datetime.now(timezone.utc))

    def batch(self, dois: Sequence[str]) -> Tuple[Dict[str, CitationTally], List[str]]:
        """Returns tallies found plus the DOIs that need a single-item retry."""
        stamp = iso_utc(self.clock())
        try:
            resp = self.http.post(f"{self.base}/tallies", data=json.dumps({"dois": list(dois)}).encode("utf-8"),
                                  headers={"Content-Type": "application/json", "Accept": "application/json"})
            data = json.loads(resp.text)
        except (FetchFailed, ValueError) as exc:
            log.warning("batch tally request failed, retrying per DOI: %s", exc)
            return {}, list(dois)
        found = {}
        for raw in data.get("tallies") or []:
            try:
                tally = _parse_tally(raw, stamp)
            except ParseFailed as exc:
                log.warning("%s", exc)
                continue
            if tally.doi in dois:
                found[tally.doi] = tally
        return found, [d for d in dois if d not in found]

    def single(self, doi: str):
        stamp = iso_utc(self.clock())
        try:
            resp = self.http.get(f"{self.base}/tallies/{quote(doi, safe='/')}", headers={"Accept": "application/json"})
            return _parse_tally(json.loads(resp.text), stamp)
        except (FetchFailed, ParseFailed, ValueError) as exc:
            return TallyUnavailable(doi, str(exc))


def fetch_tallies(dois, cache: TallyCache, policy: str = "cached-or-fetch", *, http=None, base_url: str = None,
                  batch_size: int = DEFAULT_BATCH_SIZE, freshness_days: float = DEFAULT_FRESHNESS_DAYS,
                  clock=None, max_workers: int = 4):
    """Map each DOI to a CitationTally, or TallyUnavailable when the service failed for it.

    ``offline`` uses cached tallies of any age; ``cached-or-fetch`` refetches
    entries older than the freshness window; ``force-refresh`` refetches all.
    A stale cached tally is used when a refetch fails.
    """
    clock = clock or (lambda: datetime.now(timezone.utc))
    wanted = list(dict.fromkeys(normalize_doi(d) for d in dois if d))
    result = {}
    cached = {doi: cache.get(doi) for doi in wanted}
    if policy == "offline":
        missing = [d for d in wanted if cached[d] is None]
        if missing:
            raise OfflineMiss(missing, "smart-citation tallies not cached (offline): " + ", ".join(sorted(missing)))
        return {d: cached[d] for d in wanted}
    horizon = clock() - timedelta(days=freshness_days)
    todo = []
    for doi in wanted:
        tally = cached[doi]
        fetched = _parse_iso(tally.fetched_at) if tally else None
        if policy != "force-refresh" and fetched is not None and fetched >= horizon:
            result[doi] = tally
        else:
            todo.append(doi)
    if todo:
        if not base_url or http is None:
            raise NetworkError("no smart-citation endpoint configured")
        fetcher = TallyFetcher(http, base_url, clock)
        batches = [todo[i:i + batch_size] for i in range(0, len(todo), batch_size)]
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            outcomes = list(pool.map(fetcher.batch, batches))
            retry = [d for _, rest in outcomes for d in rest]
            singles = dict(zip(retry, pool.map(fetcher.single, retry)))
        fetched = {}
        for found, _ in outcomes:
            fetched.update(found)
        fetched.update(singles)
        for doi in todo:
            got = fetched[doi]
            if isinstance(got, CitationTally):
                cache.put(got)
                result[doi] = got
            elif cached[doi] is not None:
                log.warning("tally refresh failed for %s, using cached copy: %s", doi, got.reason)
                result[doi] = cached[doi]
            else:
                log.warning("tally unavailable for %s: %s", doi, got.reason)
                result[doi] = got
    return {d: result[d] for d in wanted}


def severity(tally) -> str:
    """Notices dominate disputes; an unavailable tally counts as ok."""
    if not isinstance(tally, CitationTally):
        return "ok"
    if tally.notices:
        return "notice"
    if tally.disputing > 0:
        return "disputed"
    return "ok"


@dataclass(frozen=True)
class HealthEntry:
    ref_id: str
    doi: str
    tally: Optional[CitationTally]
    severity: str
    unavailable_reason: str = ""

    @property
    def available(self) -> bool:
        return self.tally is not None

    def to_json(self) -> dict:
        tally = None
        if self.tally is not None:
            tally = self.tally.to_json()
            tally.pop("fetched_at")
        return {"ref_id": self.ref_id, "doi": self.doi, "severity": self.severity,
                "available": self.available, "tally": tally}


@dataclass(frozen=True)
class CitationHealthReport:
    entries: Tuple[HealthEntry, ...] = ()
    summary: Dict[str, int] = field(default_factory=dict)

    def failing(self, threshold: str = "notice") -> bool:
        if threshold == "never":
            return False
        levels = ("notice",) if threshold == "notice" else ("notice", "disputed")
        return any(e.severity in levels for e in self.entries)

    def to_json(self) -> dict:
        return {"entries": [e.to_json() for e in self.entries], "summary": dict(self.summary)}

    def to_canonical_json(self) -> str:
        return canonical_json(self.to_json())


def build_health_report(doc, tallies) -> CitationHealthReport:
    """One entry per DOI-bearing bibliography item, in bibliography order."""
    entries = []
    seen = set()
    for item in doc.bibliography:
        if not item.DOI or item.id in seen:
            continue
        seen.add(item.id)
        doi = normalize_doi(item.DOI)
        got = tallies.get(doi)
        if isinstance(got, CitationTally):
            entries.append(HealthEntry(item.id, doi, got, severity(got)))
        else:
            reason = got.reason if isinstance(got, TallyUnavailable) else "not fetched"
            entries.append(HealthEntry(item.id, doi, None, "ok", reason))
    summary = {s: sum(1 for e in entries if e.severity == s) for s in SEVERITIES}
    summary["unavailable"] = sum(1 for e in entries if not e.available)
    summary["references"] = len(entries)
    return CitationHealthReport(tuple(entries), summary)


def render_badges(report: CitationHealthReport) -> Dict[str, str]:
    """ReferenceId → badge markup for render_html."""
    badges = {}
    for e in report.entries:
        doi_attr = html.escape(e.doi)
        if e.tally is None:
            badges[e.ref_id] = (f' <span class="smart-citation-badge no-data" data-doi="{doi_attr}">'
                                f'citation context: no data</span>')
            continue
        t = e.tally
        parts = [
            f'<span class="supporting" title="supporting">{t.supporting} supporting</span>',
            f'<span class="mentioning" title="mentioning">{t.mentioning} mentioning</span>',
            f'<span class="disputing" title="disputing">{t.disputing} disputing</span>',
        ]
        if t.notices:
            label = ", ".join(t.notices)
            parts.append(f'<span class="notice" data-notices="{html.escape(" ".join(t.notices))}">'
                         f'editorial notice: {html.escape(label)}</span>')
        badges[e.ref_id] = (f' <span class="smart-citation-badge severity-{e.severity}" data-doi="{doi_attr}">'
                            + " ".join(parts) + "</span>")
    return badges


def format_health_report(report: CitationHealthReport) -> str:
    s = report.summary
    lines = [
        f"Citation health: {s.get('references', 0)} reference(s) with a DOI",
        f"notice={s.get('notice', 0)} disputed={s.get('disputed', 0)} ok={s.get('ok', 0)} "
        f"unavailable={s.get('unavailable', 0)}",
    ]
    for e in report.entries:
        if e.tally is None:
            detail = f"unavailable ({e.unavailable_reason})"
        else:
            t = e.tally
            detail = f"supporting={t.supporting} mentioning={t.mentioning} disputing={t.disputing}"
            if t.notices:
                detail += " notices=" + ",".join(t.notices)
        lines.append(f"[{e.ref_id}] {e.severity:<8} doi:{e.doi} {detail}")
    return "\n".join(lines) + "\n"


def _normalized_title(title: str) -> str:
    return " ".join(re.sub(r"[^\w\s]", " ", title.casefold()).split())


def detect_duplicate_works(bibliography) -> List[Tuple[str, ...]]:
    """Groups of reference ids sharing a DOI, or a normalized title plus first-author family name."""
    items = list(bibliography)
    parent = list(range(len(items)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        a, b = find(i), find(j)
        if a != b:
            parent[max(a, b)] = min(a, b)

    first_seen = {}
    for i, item in enumerate(items):
        signatures = []
        if item.DOI:
            signatures.append(("doi", normalize_doi(item.DOI)))
        title = _normalized_title(item.title or "")
        family = item.first_author_family().casefold()
        if title and family:
            signatures.append(("work", title, family))
        for sig in signatures:
            if sig in first_seen:
                union(first_seen[sig], i)
            else:
                first_seen[sig] = i
    groups = {}
    for i in range(len(items)):
        groups.setdefault(find(i), []).append(items[i].id)
    return [tuple(g) for root, g in sorted(groups.items()) if len(g) > 1]

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, Mapping, Optional

from .. import citekit
from ..errors import LivingDocError, OfflineMiss, ParseFailed
from . import clients
from .cache import MetadataCache, entry_digest
from .csl import (
    CslItem,
    item_from_arxiv_atom,
    item_from_clinicaltrials,
    item_from_csl_payload,
    item_from_landing_page,
)
from .http import HttpClient

log = logging.getLogger(__name__)

POLICIES = ("offline", "cached-or-fetch", "force-refresh")


class Resolver:
    """Resolve normalized citation keys to CSL items through the metadata cache."""

    def __init__(
        self,
        cache: MetadataCache,
        http: Optional[HttpClient] = None,
        registry=None,
        endpoints: Optional[Mapping[str, str]] = None,
        manual_references: Optional[Mapping[str, dict]] = None,
    ):
        self.cache = cache
        self.http = http or HttpClient()
        self.registry = registry or citekit.default_registry()
        self.endpoints = {**clients.DEFAULT_ENDPOINTS, **(endpoints or {})}
        self.manual = dict(manual_references or {})

    def fetch(self, key: citekit.CitationKey) -> clients.RawPayload:
        entry = self.registry.get(key.source)
        if entry.kind == "doi":
            return clients.resolve_doi(key.accession, self.http, self.endpoints["doi"])
        if entry.kind == "pubmed":
            return clients.resolve_pubmed(key.accession, self.http, self.endpoints["pubmed"])
        if entry.kind == "arxiv":
            return clients.resolve_arxiv(key.accession, self.http, self.endpoints["arxiv"])
        if entry.kind == "clinicaltrials":
            return clients.resolve_clinicaltrials(key.accession, self.http, self.endpoints["clinicaltrials"])
        if entry.kind == "url":
            return clients.resolve_url(key.accession, self.http)
        if entry.kind == "compact":
            return clients.resolve_compact_uri(key.source, key.accession, self.http, self.registry)
        raise ParseFailed(f"{key}: raw citations need an entry in manual references")

    def parse(self, key: citekit.CitationKey, payload: clients.RawPayload) -> CslItem:
        kind = self.registry.get(key.source).kind
        skey = str(key)
        if kind in ("doi", "pubmed"):
            item = item_from_csl_payload(payload.text, skey)
            if kind == "doi" and not item.DOI:
                item.DOI = key.accession
            return item
        if kind == "arxiv":
            return item_from_arxiv_atom(payload.text, skey, key.accession)
        if kind == "clinicaltrials":
            return item_from_clinicaltrials(payload.text, skey, key.accession)
        if kind == "url":
            return item_from_landing_page(payload.text, skey, key.accession, key.accession)
        url = clients.compact_uri_url(key.source, key.accession, self.registry)
        return item_from_landing_page(payload.text, skey, url, skey)

    def _manual_item(self, key):
        data = self.manual.get(str(key))
        if data is None:
            return None
        item = CslItem.from_csl({k: v for k, v in data.items() if k != "id"}, id="", source_key=str(key))
        if not item.title:
            raise ParseFailed(f"{key}: manual reference has no title")
        return item

    def lookup(self, key: citekit.CitationKey, policy: str = "cached-or-fetch"):
        """``(item_without_id, provenance_digest)`` honouring the cache policy."""
        if policy not in POLICIES:
            raise ValueError(f"unknown resolve policy {policy!r}")
        manual = self._manual_item(key)
        if manual is not None:
            return manual, "manual"
        if policy != "force-refresh":
            cached = self.cache.get(key)
            if cached is not None:
                return CslItem.from_csl(cached["csl"], id="", source_key=str(key)), entry_digest(cached)
            if policy == "offline":
                raise OfflineMiss([key])
        payload = self.fetch(key)
        item = self.parse(key, payload)
        csl = item.to_csl()
        csl.pop("id")
        entry = self.cache.put(key, raw=payload.text, csl=csl, media_type=payload.media_type, upstream_version=payload.version)
        log.info("resolved %s", key)
        return item, entry_digest(entry)

    def resolve(self, key: citekit.CitationKey, policy: str = "cached-or-fetch", ref_id: str = None) -> CslItem:
        item, _ = self.lookup(key, policy)
        return item.with_id(ref_id or citekit.assign_reference_ids([key])[key])

    def resolve_all(self, keys: Iterable[citekit.CitationKey], policy: str, ids: Dict[citekit.CitationKey, str],
                    max_workers: int = 4, submit_order=None):
        """Resolve concurrently; returns ``(items, digests, failures)``.

        Results are keyed by CitationKey so completion order never matters.
        ``submit_order`` (a permutation of ``keys``) exists to let tests
        scramble scheduling.
        """
        keys = list(keys)
        order = list(submit_order) if submit_order is not None else keys
        items, digests, failures = {}, {}, {}

        def work(key):
            return key, self.lookup(key, policy)

        with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
            futures = [pool.submit(work, k) for k in order]
            for key, fut in zip(order, futures):
                try:
                    _, (item, digest) = fut.result()
                except LivingDocError as err:
                    failures[key] = err
                    continue
                items[key] = item.with_id(ids[key])
                digests[key] = digest
        return items, digests, failures


def resolve(key: citekit.CitationKey, cache: MetadataCache, policy: str = "cached-or-fetch", **kwargs) -> CslItem:
    """One-shot resolution with a default Resolver."""
    return Resolver(cache, **kwargs).resolve(key, policy)

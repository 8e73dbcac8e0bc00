"""Per-source fetchers. Each returns the upstream payload verbatim.

Accessions are syntax-checked before any request is made.
"""
import re
from typing import NamedTuple, Optional
from urllib.parse import quote

from ..errors import InvalidAccession, UnknownPrefix
from .http import HttpClient
from .registry import BUILTINS, PrefixRegistry

DEFAULT_ENDPOINTS = {
    "doi": "https://doi.org/{ac}",
    "pubmed": "https://api.ncbi.nlm.nih.gov/lit/ctxp/v1/pubmed/?format=csl&id={ac}",
    "arxiv": "https://export.arxiv.org/api/query?id_list={ac}",
    "clinicaltrials": "https://clinicaltrials.gov/ct2/show/{ac}?displayxml=true",
}

CSL_MEDIA_TYPE = "application/vnd.citationstyles.csl+json"

_PATTERNS = {e.prefix: e.pattern for e in BUILTINS}


class RawPayload(NamedTuple):
    text: str
    media_type: str
    version: Optional[str] = None


def _check(source, accession):
    pattern = _PATTERNS[source]
    if not accession or not pattern.match(accession):
        raise InvalidAccession(f"invalid {source} accession: {accession!r}")


def _version(resp):
    return resp.header("etag") or resp.header("last-modified")


def _media(resp, default):
    return (resp.header("content-type") or default).split(";")[0].strip()


def resolve_doi(accession: str, http: HttpClient, template: str = DEFAULT_ENDPOINTS["doi"]) -> RawPayload:
    """DOI content negotiation for CSL JSON."""
    _check("doi", accession)
    url = template.replace("{ac}", quote(accession, safe="/()<>;:"))
    resp = http.get(url, headers={"Accept": CSL_MEDIA_TYPE})
    return RawPayload(resp.text, _media(resp, CSL_MEDIA_TYPE), _version(resp))


def resolve_pubmed(accession: str, http: HttpClient, template: str = DEFAULT_ENDPOINTS["pubmed"]) -> RawPayload:
    _check("pubmed", accession)
    resp = http.get(template.replace("{ac}", accession), headers={"Accept": "application/json"})
    return RawPayload(resp.text, _media(resp, "application/json"), _version(resp))


def resolve_arxiv(accession: str, http: HttpClient, template: str = DEFAULT_ENDPOINTS["arxiv"]) -> RawPayload:
    _check("arxiv", accession)
    resp = http.get(template.replace("{ac}", quote(accession, safe="/")), headers={"Accept": "application/atom+xml"})
    return RawPayload(resp.text, _media(resp, "application/atom+xml"), _version(resp))


def resolve_clinicaltrials(accession: str, http: HttpClient, template: str = DEFAULT_ENDPOINTS["clinicaltrials"]) -> RawPayload:
    """Study record for an NCT id; XML by default, JSON if the endpoint serves it."""
    if not re.fullmatch(r"NCT\d{8}", accession or ""):
        raise InvalidAccession(f"invalid clinicaltrials accession: {accession!r}")
    resp = http.get(template.replace("{ac}", accession), headers={"Accept": "application/xml, application/json;q=0.9"})
    return RawPayload(resp.text, _media(resp, "application/xml"), _version(resp))


def compact_uri_url(prefix: str, accession: str, registry: PrefixRegistry) -> str:
    entry = registry.get(prefix)
    if entry.kind != "compact":
        raise UnknownPrefix(f"{prefix!r} is not a compact-URI prefix")
    if not entry.accepts(accession):
        raise InvalidAccession(f"invalid {prefix} accession: {accession!r}")
    return entry.expand(accession)


def resolve_compact_uri(prefix: str, accession: str, http: HttpClient, registry: PrefixRegistry) -> RawPayload:
    resp = http.get(compact_uri_url(prefix, accession, registry), headers={"Accept": "text/html"})
    return RawPayload(resp.text, _media(resp, "text/html"), _version(resp))


def resolve_url(url: str, http: HttpClient) -> RawPayload:
    _check("url", url)
    resp = http.get(url, headers={"Accept": "text/html"})
    return RawPayload(resp.text, _media(resp, "text/html"), _version(resp))

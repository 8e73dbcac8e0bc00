"""Citation metadata resolution: registry, HTTP clients, cache, CSL and BibTeX."""
from .bibtex import bibliography_to_bibtex, csl_to_bibtex
from .cache import MetadataCache
from .clients import (
    resolve_arxiv,
    resolve_clinicaltrials,
    resolve_compact_uri,
    resolve_doi,
    resolve_pubmed,
    resolve_url,
)
from .core import POLICIES, Resolver, resolve
from .csl import CslItem
from .http import HttpClient, HttpResponse
from .registry import PrefixRegistry

__all__ = [
    "CslItem",
    "HttpClient",
    "HttpResponse",
    "MetadataCache",
    "POLICIES",
    "PrefixRegistry",
    "Resolver",
    "bibliography_to_bibtex",
    "csl_to_bibtex",
    "resolve",
    "resolve_arxiv",
    "resolve_clinicaltrials",
    "resolve_compact_uri",
    "resolve_doi",
    "resolve_pubmed",
    "resolve_url",
]

"""Manuscript metadata file (YAML).

::

    title: A living review
    date: 2021-09-06
    keywords: [covid-19, review]
    authors:
      - name: Jane Doe
        orcid: 0000-0002-1825-0097
        affiliations: [Some University]
        contributions: [pharmaceuticals]   # section ids; optional
        conflicts: None declared            # optional
        funders: [NIH]                      # optional
"""
import re
from dataclasses import dataclass, field
from typing import List, Optional

import yaml

from ..errors import MetadataInvalid

ORCID_RE = re.compile(r"^\d{4}-\d{4}-\d{4}-\d{3}[\dX]$")
AUTHOR_KEYS = {"name", "orcid", "affiliations", "contributions", "conflicts", "funders", "email"}
TOP_KEYS = {"title", "date", "keywords", "authors", "lang"}


def orcid_checksum(base_digits: str) -> str:
    """ISO 7064 MOD 11-2 check character for the first 15 digits."""
    total = 0
    for ch in base_digits:
        total = (total + int(ch)) * 2
    result = (12 - total % 11) % 11
    return "X" if result == 10 else str(result)


def valid_orcid(orcid: str) -> bool:
    if not ORCID_RE.match(orcid):
        return False
    digits = orcid.replace("-", "")
    return orcid_checksum(digits[:15]) == digits[15]


@dataclass(frozen=True)
class Author:
    name: str
    orcid: Optional[str] = None
    affiliations: tuple = ()
    contributions: Optional[tuple] = None
    conflicts: Optional[str] = None
    funders: tuple = ()
    email: Optional[str] = None


@dataclass
class ManuscriptMetadata:
    title: str
    authors: List[Author] = field(default_factory=list)
    date: Optional[str] = None
    keywords: List[str] = field(default_factory=list)
    lang: str = "en"

    def affiliations(self) -> List[str]:
        """Distinct affiliations in order of first appearance."""
        seen = {}
        for author in self.authors:
            for aff in author.affiliations:
                seen.setdefault(aff, None)
        return list(seen)

    def has_contributions(self) -> bool:
        return any(a.contributions is not None for a in self.authors)


def _str_list(value, path):
    if value is None:
        return ()
    if isinstance(value, str):
        return (value,)
    if not isinstance(value, list) or not all(isinstance(v, (str, int, float)) for v in value):
        raise MetadataInvalid("expected a list of strings", path)
    return tuple(str(v) for v in value)


def metadata_from_dict(data, origin=None) -> ManuscriptMetadata:
    if not isinstance(data, dict):
        raise MetadataInvalid("metadata must be a mapping", file=origin)
    unknown = sorted(set(data) - TOP_KEYS)
    if unknown:
        raise MetadataInvalid(f"unknown key(s): {', '.join(unknown)}", file=origin)
    title = data.get("title")
    if not isinstance(title, str) or not title.strip():
        raise MetadataInvalid("title must be a non-empty string", "title", file=origin)
    authors = []
    for i, raw in enumerate(data.get("authors") or []):
        path = f"authors[{i}]"
        if not isinstance(raw, dict):
            raise MetadataInvalid("author must be a mapping", path, file=origin)
        unknown = sorted(set(raw) - AUTHOR_KEYS)
        if unknown:
            raise MetadataInvalid(f"unknown key(s): {', '.join(unknown)}", path, file=origin)
        name = raw.get("name")
        if not isinstance(name, str) or not name.strip():
            raise MetadataInvalid("name must be non-empty", f"{path}.name", file=origin)
        orcid = raw.get("orcid")
        if orcid is not None:
            orcid = str(orcid).strip()
            if not valid_orcid(orcid):
                raise MetadataInvalid(f"invalid ORCID {orcid!r}", f"{path}.orcid", file=origin)
        contributions = raw.get("contributions")
        if raw.get("conflicts") is not None and not isinstance(raw["conflicts"], str):
            raise MetadataInvalid("conflicts must be a string", f"{path}.conflicts", file=origin)
        authors.append(Author(
            name=name.strip(),
            orcid=orcid,
            affiliations=_str_list(raw.get("affiliations"), f"{path}.affiliations"),
            contributions=None if contributions is None else _str_list(contributions, f"{path}.contributions"),
            conflicts=None if raw.get("conflicts") is None else str(raw["conflicts"]),
            funders=_str_list(raw.get("funders"), f"{path}.funders"),
            email=raw.get("email"),
        ))
    date = data.get("date")
    return ManuscriptMetadata(
        title=title.strip(),
        authors=authors,
        date=None if date is None else str(date),
        keywords=list(_str_list(data.get("keywords"), "keywords")),
        lang=str(data.get("lang") or "en"),
    )


def load_metadata(path) -> ManuscriptMetadata:
    try:
        data = yaml.safe_load(open(path, encoding="utf-8"))
    except OSError as exc:
        raise MetadataInvalid(f"cannot read metadata: {exc}", file=str(path)) from exc
    except yaml.YAMLError as exc:
        raise MetadataInvalid(f"metadata is not valid YAML: {exc}", file=str(path)) from exc
    return metadata_from_dict(data, str(path))

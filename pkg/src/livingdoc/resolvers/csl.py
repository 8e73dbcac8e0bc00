"""CSL-JSON item model and parsers for upstream payloads."""
import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import datetime
from html.parser import HTMLParser
from typing import Dict, List, Optional

from ..errors import FetchFailed, ParseFailed


@dataclass
class CslItem:
    id: str
    type: str
    title: str
    source_key: str
    authors: List[Dict[str, str]] = field(default_factory=list)
    issued: List[int] = field(default_factory=list)
    container_title: Optional[str] = None
    URL: Optional[str] = None
    DOI: Optional[str] = None
    extra: Dict[str, object] = field(default_factory=dict)

    def to_csl(self) -> dict:
        """CSL-JSON data item; source-specific fields travel under ``custom``."""
        data = {"id": self.id, "type": self.type, "title": self.title}
        if self.authors:
            data["author"] = [dict(a) for a in self.authors]
        if self.issued:
            data["issued"] = {"date-parts": [list(self.issued)]}
        if self.container_title:
            data["container-title"] = self.container_title
        if self.URL:
            data["URL"] = self.URL
        if self.DOI:
            data["DOI"] = self.DOI
        data["custom"] = {"source-key": self.source_key, **self.extra}
        return data

    @classmethod
    def from_csl(cls, data: dict, id: str = None, source_key: str = None) -> "CslItem":
        custom = dict(data.get("custom") or {})
        key = source_key or custom.pop("source-key", None)
        custom.pop("source-key", None)
        if not key:
            raise ParseFailed("CSL item without source key")
        return cls(
            id=id or data.get("id") or "",
            type=data.get("type") or "document",
            title=data.get("title") or "",
            source_key=key,
            authors=[dict(a) for a in data.get("author", [])],
            issued=list((data.get("issued") or {}).get("date-parts", [[]])[0]),
            container_title=data.get("container-title"),
            URL=data.get("URL"),
            DOI=data.get("DOI"),
            extra=custom,
        )

    def with_id(self, new_id: str) -> "CslItem":
        return CslItem(**{**self.__dict__, "id": new_id})

    def first_author_family(self) -> str:
        if not self.authors:
            return ""
        a = self.authors[0]
        return a.get("family") or a.get("literal") or ""

    def year(self) -> Optional[int]:
        return self.issued[0] if self.issued else None


def _text(value) -> str:
    if isinstance(value, list):
        value = value[0] if value else ""
    if value is None:
        return ""
    return re.sub(r"\s+", " ", str(value)).strip()


def _date_parts(data: dict) -> List[int]:
    for key in ("issued", "published-print", "published-online", "published", "created"):
        block = data.get(key)
        if isinstance(block, dict):
            parts = block.get("date-parts") or [[]]
            if parts and parts[0] and parts[0][0] is not None:
                return [int(p) for p in parts[0] if p is not None][:3]
    return []


def _csl_names(names) -> List[Dict[str, str]]:
    out = []
    for name in names or []:
        if not isinstance(name, dict):
            continue
        if name.get("family"):
            entry = {"family": _text(name["family"])}
            if name.get("given"):
                entry["given"] = _text(name["given"])
            out.append(entry)
        elif name.get("literal") or name.get("name"):
            out.append({"literal": _text(name.get("literal") or name.get("name"))})
    return out


def split_name(full: str) -> Dict[str, str]:
    """'Given Names Family' -> CSL name; single tokens become literals."""
    full = _text(full)
    if "," in full:
        family, given = (p.strip() for p in full.split(",", 1))
        return {"family": family, "given": given} if given else {"family": family}
    parts = full.split(" ")
    if len(parts) == 1:
        return {"literal": full}
    return {"family": parts[-1], "given": " ".join(parts[:-1])}


def item_from_csl_payload(raw: str, source_key: str) -> CslItem:
    """Items from DOI content negotiation or the PubMed citation exporter."""
    try:
        data = json.loads(raw)
    except ValueError as exc:
        raise ParseFailed(f"{source_key}: payload is not JSON: {exc}") from exc
    if isinstance(data, list):
        if not data:
            raise ParseFailed(f"{source_key}: empty CSL list")
        data = data[0]
    if not isinstance(data, dict):
        raise ParseFailed(f"{source_key}: CSL payload is not an object")
    title = _text(data.get("title"))
    if not title:
        raise ParseFailed(f"{source_key}: CSL payload has no title")
    extra = {}
    for field_name in ("volume", "issue", "page", "publisher", "PMID", "PMCID"):
        if data.get(field_name):
            extra[field_name] = _text(data[field_name])
    doi = _text(data.get("DOI")).lower() or None
    return CslItem(
        id="",
        type=_text(data.get("type")) or "article-journal",
        title=title,
        source_key=source_key,
        authors=_csl_names(data.get("author")),
        issued=_date_parts(data),
        container_title=_text(data.get("container-title")) or None,
        URL=_text(data.get("URL")) or None,
        DOI=doi,
        extra=extra,
    )


ATOM = "{http://www.w3.org/2005/Atom}"
ARXIV = "{http://arxiv.org/schemas/atom}"


def item_from_arxiv_atom(raw: str, source_key: str, accession: str) -> CslItem:
    try:
        root = ET.fromstring(raw)
    except ET.ParseError as exc:
        raise ParseFailed(f"{source_key}: arXiv payload is not XML: {exc}") from exc
    entry = root.find(f"{ATOM}entry")
    if entry is None:
        raise FetchFailed(f"{source_key}: arXiv returned no entry", status=404)
    entry_id = _text(entry.findtext(f"{ATOM}id"))
    if "api/errors" in entry_id:
        raise FetchFailed(f"{source_key}: arXiv error: {_text(entry.findtext(f'{ATOM}summary'))}", status=404)
    title = _text(entry.findtext(f"{ATOM}title"))
    if not title:
        raise ParseFailed(f"{source_key}: arXiv entry has no title")
    authors = [split_name(a.findtext(f"{ATOM}name") or "") for a in entry.findall(f"{ATOM}author")]
    published = _text(entry.findtext(f"{ATOM}published"))
    issued = [int(p) for p in published[:10].split("-")] if re.match(r"\d{4}-\d{2}-\d{2}", published) else []
    doi = _text(entry.findtext(f"{ARXIV}doi")).lower() or None
    extra = {"number": accession, "publisher": "arXiv"}
    summary = _text(entry.findtext(f"{ATOM}summary"))
    if summary:
        extra["abstract"] = summary
    return CslItem(
        id="",
        type="manuscript",
        title=title,
        source_key=source_key,
        authors=[a for a in authors if a.get("family") or a.get("literal")],
        issued=issued,
        container_title="arXiv",
        URL=f"https://arxiv.org/abs/{accession}",
        DOI=doi,
        extra=extra,
    )


def _parse_human_date(text: str) -> List[int]:
    text = _text(text)
    for fmt, n in (("%Y-%m-%d", 3), ("%B %d, %Y", 3), ("%Y-%m", 2), ("%B %Y", 2), ("%Y", 1)):
        try:
            d = datetime.strptime(text, fmt)
        except ValueError:
            continue
        return [d.year, d.month, d.day][:n]
    return []


def _trial_fields_from_xml(raw: str) -> dict:
    try:
        root = ET.fromstring(raw)
    except ET.ParseError as exc:
        raise ParseFailed(f"clinical trial payload is not XML: {exc}") from exc
    if root.tag != "clinical_study":
        raise ParseFailed(f"unexpected clinical trial root element <{root.tag}>")
    investigators = []
    for official in root.findall("overall_official"):
        name = _text(official.findtext("last_name"))
        if name:
            person = {"name": name}
            for tag in ("role", "affiliation"):
                if official.findtext(tag):
                    person[tag] = _text(official.findtext(tag))
            investigators.append(person)
    responsible = _text(root.findtext("responsible_party/investigator_full_name"))
    if responsible and responsible not in [p["name"] for p in investigators]:
        person = {"name": responsible, "role": "Responsible Party"}
        if root.findtext("responsible_party/investigator_affiliation"):
            person["affiliation"] = _text(root.findtext("responsible_party/investigator_affiliation"))
        investigators.append(person)
    return {
        "nct_id": _text(root.findtext("id_info/nct_id")),
        "brief_title": _text(root.findtext("brief_title")),
        "official_title": _text(root.findtext("official_title")),
        "sponsor": _text(root.findtext("sponsors/lead_sponsor/agency")),
        "collaborators": [_text(c.findtext("agency")) for c in root.findall("sponsors/collaborator") if c.findtext("agency")],
        "investigators": investigators,
        "summary": _text(root.findtext("brief_summary/textblock")),
        "date": _text(root.findtext("study_first_submitted") or root.findtext("study_first_posted")),
        "url": _text(root.findtext("required_header/url")),
    }


def _trial_fields_from_json(raw: str) -> dict:
    try:
        data = json.loads(raw)
        proto = data["protocolSection"]
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseFailed(f"clinical trial JSON lacks protocolSection: {exc}") from exc
    ident = proto.get("identificationModule", {})
    sponsors = proto.get("sponsorCollaboratorsModule", {})
    investigators = []
    for official in proto.get("contactsLocationsModule", {}).get("overallOfficials", []):
        if official.get("name"):
            person = {"name": _text(official["name"])}
            for src, dst in (("role", "role"), ("affiliation", "affiliation")):
                if official.get(src):
                    person[dst] = _text(official[src])
            investigators.append(person)
    return {
        "nct_id": _text(ident.get("nctId")),
        "brief_title": _text(ident.get("briefTitle")),
        "official_title": _text(ident.get("officialTitle")),
        "sponsor": _text(sponsors.get("leadSponsor", {}).get("name")),
        "collaborators": [_text(c.get("name")) for c in sponsors.get("collaborators", []) if c.get("name")],
        "investigators": investigators,
        "summary": _text(proto.get("descriptionModule", {}).get("briefSummary")),
        "date": _text(proto.get("statusModule", {}).get("studyFirstSubmitDate")),
        "url": "",
    }


def item_from_clinicaltrials(raw: str, source_key: str, accession: str) -> CslItem:
    """Study record (legacy XML, or the JSON successor API) to a ``report`` item."""
    fields = _trial_fields_from_json(raw) if raw.lstrip().startswith("{") else _trial_fields_from_xml(raw)
    title = fields["brief_title"] or fields["official_title"]
    if not title:
        raise ParseFailed(f"{source_key}: trial record has no title")
    extra = {"number": accession, "title": fields["official_title"] or title}
    if fields["sponsor"]:
        extra["sponsor"] = fields["sponsor"]
    if fields["collaborators"]:
        extra["collaborators"] = fields["collaborators"]
    if fields["investigators"]:
        extra["investigators"] = fields["investigators"]
    if fields["summary"]:
        extra["summary"] = fields["summary"]
    return CslItem(
        id="",
        type="report",
        title=title,
        source_key=source_key,
        authors=[{"literal": fields["sponsor"]}] if fields["sponsor"] else [],
        issued=_parse_human_date(fields["date"]),
        container_title="ClinicalTrials.gov",
        URL=fields["url"] or f"https://clinicaltrials.gov/study/{accession}",
        extra=extra,
    )


class _MetaParser(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.meta = {}
        self.title = ""
        self._in_title = False

    def handle_starttag(self, tag, attrs):
        attrs = dict(attrs)
        if tag == "title":
            self._in_title = True
        elif tag == "meta":
            name = (attrs.get("property") or attrs.get("name") or "").lower()
            if name and attrs.get("content") and name not in self.meta:
                self.meta[name] = attrs["content"]

    def handle_endtag(self, tag):
        if tag == "title":
            self._in_title = False

    def handle_data(self, data):
        if self._in_title:
            self.title += data


def item_from_landing_page(raw: str, source_key: str, url: str, fallback_title: str) -> CslItem:
    """Minimal ``webpage`` item from HTML metadata (citation_*, og:*, <title>)."""
    parser = _MetaParser()
    parser.feed(raw)
    meta = parser.meta
    title = _text(meta.get("citation_title") or meta.get("og:title") or meta.get("dc.title") or parser.title)
    authors = [split_name(meta["citation_author"])] if meta.get("citation_author") else []
    issued = _parse_human_date(meta.get("citation_publication_date", "").replace("/", "-") or meta.get("article:published_time", "")[:10])
    return CslItem(
        id="",
        type="webpage",
        title=title or fallback_title,
        source_key=source_key,
        authors=authors,
        issued=issued,
        container_title=_text(meta.get("og:site_name")) or None,
        URL=url,
        DOI=_text(meta.get("citation_doi")).lower() or None,
    )

"""CSL item to BibTeX entry."""
import re

from .csl import CslItem

ENTRY_TYPES = {
    "article-journal": "article",
    "article": "article",
    "report": "techreport",
    "webpage": "misc",
    "chapter": "inbook",
    "book": "book",
}

MONTHS = ("jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec")

_TEXT_ESCAPES = {
    "\\": r"\textbackslash{}",
    "{": r"\textbraceleft{}",
    "}": r"\textbraceright{}",
    "%": r"\%",
    "&": r"\&",
    "#": r"\#",
    "$": r"\$",
    "_": r"\_",
    "~": r"\textasciitilde{}",
    "^": r"\textasciicircum{}",
}


def escape_text(value: str) -> str:
    return "".join(_TEXT_ESCAPES.get(ch, ch) for ch in str(value))


def escape_url(value: str) -> str:
    return str(value).replace("\\", "%5C").replace("{", "%7B").replace("}", "%7D")


_AND_RE = re.compile(r"(?:^|\s)and(?:\s|$)", re.IGNORECASE)


def _protect(part: str) -> str:
    """Brace a name part that BibTeX would otherwise split (on 'and' or commas)."""
    text = escape_text(part)
    if _AND_RE.search(text) or "," in text:
        return "{" + text + "}"
    return text


def _name(author) -> str:
    if "literal" in author:
        return "{" + escape_text(author["literal"]) + "}"
    family = _protect(author.get("family", ""))
    given = author.get("given")
    return f"{family}, {_protect(given)}" if given else family


def csl_to_bibtex(item: CslItem) -> str:
    """Deterministic BibTeX entry keyed by the item's reference id."""
    entry_type = ENTRY_TYPES.get(item.type, "misc")
    fields = []
    if item.authors:
        fields.append(("author", " and ".join(_name(a) for a in item.authors)))
    fields.append(("title", "{" + escape_text(item.title) + "}"))
    if item.container_title:
        container_field = {"article": "journal", "inbook": "booktitle", "misc": "howpublished"}.get(entry_type)
        if container_field:
            fields.append((container_field, escape_text(item.container_title)))
    if item.issued:
        fields.append(("year", str(item.issued[0])))
        if len(item.issued) > 1 and 1 <= item.issued[1] <= 12:
            fields.append(("month", MONTHS[item.issued[1] - 1]))
    for csl_key, bib_key in (("volume", "volume"), ("issue", "number"), ("page", "pages")):
        if item.extra.get(csl_key):
            fields.append((bib_key, escape_text(item.extra[csl_key])))
    if entry_type == "techreport":
        fields.append(("institution", escape_text(item.extra.get("sponsor") or item.container_title or "Unknown")))
        if item.extra.get("number"):
            fields.append(("number", escape_text(item.extra["number"])))
    elif item.extra.get("publisher"):
        fields.append(("publisher", escape_text(item.extra["publisher"])))
    if entry_type == "misc" and item.extra.get("number"):
        fields.append(("number", escape_text(item.extra["number"])))
    if item.DOI:
        fields.append(("doi", escape_url(item.DOI)))
    if item.URL:
        fields.append(("url", escape_url(item.URL)))
    lines = [f"@{entry_type}{{{item.id},"]
    for name, value in fields:
        if name == "month":
            lines.append(f"  {name} = {value},")
        else:
            lines.append(f"  {name} = {{{value}}},")
    lines.append("}")
    return "\n".join(lines) + "\n"


def bibliography_to_bibtex(items) -> str:
    return "\n".join(csl_to_bibtex(item) for item in items)

"""Options, asset copying and the fixed house reference format."""
import html
import shutil
from dataclasses import dataclass
from pathlib import Path, PurePosixPath
from typing import Optional, Tuple
from urllib.parse import urlsplit

from ..errors import AssetMissing, ConfigError, UnknownSection

FORMATS = ("html", "tex")
MAX_LISTED_AUTHORS = 5


@dataclass
class RenderOptions:
    output_dir: Path
    formats: Tuple[str, ...] = FORMATS
    section: Optional[str] = None
    health: object = None
    asset_dir: Optional[Path] = None
    converter_cmd: Optional[str] = None

    def validate(self, doc):
        if not self.formats or not set(self.formats) <= set(FORMATS):
            raise ConfigError(f"formats must be a non-empty subset of {FORMATS}")
        if self.section is not None and self.section not in [s.id for s in doc.sections]:
            raise UnknownSection(f"no section {self.section!r}")


def is_local(src: str) -> bool:
    return bool(src) and not urlsplit(src).scheme and not src.startswith(("/", "#", "//"))


class AssetCopier:
    """Copies referenced local images under ``<output>/assets`` and rewrites their paths."""

    def __init__(self, output_dir, search_dirs, prefix="assets/"):
        self.output_dir = Path(output_dir)
        self.search_dirs = [Path(d) for d in search_dirs if d]
        self.prefix = prefix
        self.copied = {}

    def target(self, src: str) -> str:
        if not is_local(src):
            return src
        for base in self.search_dirs:
            candidate = base / src
            if candidate.is_file():
                break
        else:
            raise AssetMissing(f"figure not found: {src}")
        rel = PurePosixPath(src)
        parts = [p for p in rel.parts if p not in ("..", ".")]
        rel = PurePosixPath(*parts) if parts else PurePosixPath(rel.name)
        dest = self.output_dir / "assets" / rel
        if str(rel) not in self.copied:
            dest.parent.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(candidate, dest)
            self.copied[str(rel)] = dest
        return self.prefix + rel.as_posix()


def author_short(author: dict) -> str:
    if "literal" in author:
        return author["literal"]
    initials = "".join(part[0] for part in author.get("given", "").replace("-", " ").split() if part)
    return f"{author.get('family', '')} {initials}".strip()


def authors_short(item) -> str:
    names = [author_short(a) for a in item.authors]
    if len(names) > MAX_LISTED_AUTHORS:
        names = names[:MAX_LISTED_AUTHORS] + ["et al."]
    return ", ".join(names)


def reference_link(item) -> Tuple[Optional[str], Optional[str]]:
    """(label, href) for the identifier link of a reference."""
    if item.DOI:
        return f"doi:{item.DOI}", f"https://doi.org/{item.DOI}"
    if item.URL:
        return item.URL, item.URL
    return None, None


def _stop(text: str) -> str:
    return "" if text.endswith(".") else "."


def reference_html(item) -> str:
    parts = []
    authors = authors_short(item)
    if authors:
        parts.append(f'<span class="csl-authors">{html.escape(authors)}</span>' + _stop(authors))
    parts.append(f'<span class="csl-title">{html.escape(item.title)}</span>.')
    tail = []
    if item.container_title:
        tail.append(f'<em class="csl-container">{html.escape(item.container_title)}</em>')
    if item.year():
        tail.append(f'(<span class="csl-year">{item.year()}</span>)')
    if tail:
        parts.append(" ".join(tail) + ".")
    label, href = reference_link(item)
    if href:
        parts.append(f'<a class="csl-link" href="{html.escape(href)}">{html.escape(label)}</a>')
    return " ".join(parts)


def reference_markdown(item) -> str:
    parts = []
    authors = authors_short(item)
    if authors:
        parts.append(authors + _stop(authors))
    parts.append(item.title + ".")
    tail = []
    if item.container_title:
        tail.append(f"*{item.container_title}*")
    if item.year():
        tail.append(f"({item.year()})")
    if tail:
        parts.append(" ".join(tail) + ".")
    label, href = reference_link(item)
    if href:
        parts.append(f"[{label}]({href})" if label != href else f"<{href}>")
    return " ".join(parts)

import logging
import re
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .. import __version__, citekit, mdscan
from ..canonical import canonical_json, sha256_hex
from ..config import BuildConfig
from ..errors import (
    MetadataInvalid,
    MissingContent,
    OfflineMiss,
    UnknownSection,
    UnresolvedCitations,
)
from ..resolvers import CslItem, MetadataCache, Resolver
from .metadata import ManuscriptMetadata, load_metadata
from .variables import TemplateVariableSet, merge_variable_files, substitute_variables

log = logging.getLogger(__name__)

HEADING_RE = re.compile(r"^ {0,3}#{1,6}[ \t]+(.+?)[ \t#]*$", re.MULTILINE)
SECTION_PREFIX_RE = re.compile(r"^\d+[._-]")
# Marker form written into section bodies after rewriting: [@id] or [@id1; @id2]
REWRITTEN_MARKER_RE = re.compile(r"\[@([A-Za-z0-9]{1,12})((?:; @[A-Za-z0-9]{1,12})*)\]")


@dataclass
class ManuscriptSource:
    root: Path
    content_dir: Path
    files: List[Tuple[str, str]]
    metadata: ManuscriptMetadata
    metadata_text: str = ""
    variable_files: List[Path] = field(default_factory=list)
    config: Optional[BuildConfig] = None


@dataclass(frozen=True)
class Section:
    id: str
    title: str
    body: str
    source_file: str
    reference_ids: Tuple[str, ...] = ()


@dataclass(frozen=True)
class DocumentModel:
    metadata: ManuscriptMetadata
    sections: Tuple[Section, ...]
    bibliography: Tuple[CslItem, ...]
    variables: TemplateVariableSet
    build_stamp: Dict[str, object]
    content_dir: Optional[Path] = None

    def section(self, section_id: str) -> Section:
        for s in self.sections:
            if s.id == section_id:
                return s
        raise UnknownSection(f"no section {section_id!r}; known: {', '.join(s.id for s in self.sections)}")

    def reference(self, ref_id: str) -> CslItem:
        return self._refs()[ref_id]

    def _refs(self):
        return {item.id: item for item in self.bibliography}

    def to_json(self) -> dict:
        return {
            "metadata": asdict(self.metadata),
            "sections": [asdict(s) for s in self.sections],
            "bibliography": [item.to_csl() for item in self.bibliography],
            "variables": self.variables.to_json(),
            "build_stamp": self.build_stamp,
        }

    def serialize(self) -> str:
        return canonical_json(self.to_json())


def section_id_for(filename: str) -> str:
    stem = filename[:-3] if filename.endswith(".md") else filename
    return SECTION_PREFIX_RE.sub("", stem) or stem


def section_title(text: str, fallback: str) -> str:
    m = HEADING_RE.search(text)
    return m.group(1).strip() if m else fallback


def _order_files(names: List[str], order: Sequence[str]) -> List[str]:
    if not order:
        return sorted(names)
    chosen = []
    for entry in order:
        matches = [n for n in names if n == entry or n[:-3] == entry or n.split(".")[0] == entry
                   or section_id_for(n) == entry]
        if len(matches) != 1:
            raise MissingContent(f"content_order entry {entry!r} matches {len(matches)} files")
        if matches[0] not in chosen:
            chosen.append(matches[0])
    rest = sorted(n for n in names if n not in chosen)
    if rest:
        log.warning("content files not in content_order appended: %s", ", ".join(rest))
    return chosen + rest


def load_manuscript(content_dir, config: BuildConfig = None) -> ManuscriptSource:
    content_dir = Path(content_dir)
    if not content_dir.is_dir():
        raise MissingContent(f"content directory not found: {content_dir}")
    names = [p.name for p in content_dir.glob("*.md") if p.is_file()]
    if not names:
        raise MissingContent(f"no .md content files in {content_dir}")
    ordered = _order_files(names, config.content_order if config else ())
    files = []
    for name in ordered:
        try:
            files.append((name, (content_dir / name).read_text(encoding="utf-8")))
        except (OSError, UnicodeDecodeError) as exc:
            raise MissingContent(f"cannot read content file: {exc}", file=name) from exc
    meta_path = config.metadata_file if config and config.metadata_file else None
    if meta_path is None:
        for candidate in ("metadata.yaml", "metadata.yml"):
            if (content_dir / candidate).exists():
                meta_path = content_dir / candidate
                break
    if meta_path is None:
        raise MetadataInvalid("no metadata file (set metadata_file or add content/metadata.yaml)")
    metadata = load_metadata(meta_path)
    section_ids = [section_id_for(n) for n in ordered]
    if len(set(section_ids)) != len(section_ids):
        raise MissingContent(f"duplicate section ids: {section_ids}")
    for i, author in enumerate(metadata.authors):
        for sid in author.contributions or ():
            if sid not in section_ids:
                raise MetadataInvalid(f"unknown section {sid!r}", f"authors[{i}].contributions", file=str(meta_path))
    return ManuscriptSource(
        root=config.root if config else content_dir.parent,
        content_dir=content_dir,
        files=files,
        metadata=metadata,
        metadata_text=Path(meta_path).read_text(encoding="utf-8"),
        variable_files=config.variable_paths() if config else [],
        config=config,
    )


def _rewrite_markers(text: str, file: str, ids_for) -> Tuple[str, List[str]]:
    """Replace every citation marker with ``[@id; ...]``; returns new text and ids in order."""
    spans = citekit.citation_spans(text, file)
    markers: Dict[Tuple[int, int], List[str]] = {}
    for _, raw, start, end in spans:
        markers.setdefault((start, end), []).append(raw)
    out, pos, order = [], 0, []
    for (start, end), raws in sorted(markers.items()):
        ids = []
        for raw in raws:
            rid = ids_for(raw)
            if rid not in ids:
                ids.append(rid)
        order.extend(ids)
        out.append(text[pos:start])
        out.append("[" + "; ".join("@" + i for i in ids) + "]")
        pos = end
    out.append(text[pos:])
    return "".join(out), order


def placeholder_item(key, ref_id) -> CslItem:
    return CslItem(id=ref_id, type="document", title=f"Unresolved reference {key}", source_key=str(key),
                   extra={"unresolved": True})


def _bibliography_sort_key(item: CslItem):
    return (item.first_author_family().lower(), item.year() or 0, item.title.lower(), item.id)


def build_document(src: ManuscriptSource, resolver, policy: str = None, *,
                   bibliography_order: str = None, unresolved: str = None,
                   max_workers: int = None, submit_order=None) -> DocumentModel:
    """Merge variables, substitute, extract and resolve citations, rewrite markers.

    ``resolver`` may be a Resolver or a bare MetadataCache (wrapped with
    default settings).
    """
    cfg = src.config
    if isinstance(resolver, MetadataCache):
        resolver = Resolver(resolver)
    policy = policy or (cfg.resolve_policy if cfg else "cached-or-fetch")
    bibliography_order = bibliography_order or (cfg.bibliography_order if cfg else "first-occurrence")
    unresolved = unresolved or (cfg.unresolved if cfg else "fail")
    max_workers = max_workers or (cfg.network.max_workers if cfg else 4)
    registry = resolver.registry

    variables = merge_variable_files(src.variable_files)
    used = set()
    substituted = []
    occurrences = []
    for name, text in src.files:
        new_text = substitute_variables(text, variables, file=name, used=used)
        substituted.append((name, new_text))
        occurrences.extend(citekit.extract_citations(new_text, name, registry))

    keys = citekit.inventory(occurrences, registry)
    ids = citekit.assign_reference_ids(keys)
    items, digests, failures = resolver.resolve_all(keys, policy, ids, max_workers=max_workers, submit_order=submit_order)
    if failures:
        ordered_failures = [(k, failures[k]) for k in keys if k in failures]
        if unresolved == "fail":
            if all(isinstance(e, OfflineMiss) for _, e in ordered_failures):
                raise OfflineMiss([k for k, _ in ordered_failures])
            raise UnresolvedCitations(ordered_failures)
        for key, err in ordered_failures:
            log.warning("unresolved citation %s: %s", key, err)
            items[key] = placeholder_item(key, ids[key])
            digests[key] = "unresolved"

    def ids_for(raw):
        return ids[citekit.normalize_key(citekit.parse_citation_key(raw, registry), registry)]

    sections = []
    for name, text in substituted:
        body, ref_order = _rewrite_markers(text, name, ids_for)
        sid = section_id_for(name)
        sections.append(Section(sid, section_title(text, sid), body, name, tuple(dict.fromkeys(ref_order))))

    bibliography = [items[k] for k in keys]
    if bibliography_order == "alphabetical":
        bibliography.sort(key=_bibliography_sort_key)

    def rel(p):
        p = Path(p)
        try:
            return p.resolve().relative_to(Path(src.root).resolve()).as_posix()
        except ValueError:
            return p.name

    stamp = {
        "tool": f"livingdoc {__version__}",
        "content": {name: "sha256:" + sha256_hex(text) for name, text in src.files},
        "metadata": "sha256:" + sha256_hex(src.metadata_text),
        "variables": {rel(p): "sha256:" + sha256_hex(Path(p).read_bytes()) for p in src.variable_files},
        "references": {str(k): digests[k] for k in keys},
    }
    stamp["digest"] = "sha256:" + sha256_hex(canonical_json(stamp))
    return DocumentModel(
        metadata=src.metadata,
        sections=tuple(sections),
        bibliography=tuple(bibliography),
        variables=variables.subset(used),
        build_stamp=stamp,
        content_dir=src.content_dir,
    )


def restrict_to_section(doc: DocumentModel, section_id: str) -> DocumentModel:
    """Derived document holding one section, its references and its contributing authors."""
    section = doc.section(section_id)
    meta = doc.metadata
    authors = meta.authors
    if meta.has_contributions():
        authors = [a for a in meta.authors if section_id in (a.contributions or ())]
    metadata = replace(meta, title=section.title, authors=list(authors))
    refs = doc._refs()
    bibliography = tuple(item for item in doc.bibliography if item.id in set(section.reference_ids))
    missing = set(section.reference_ids) - set(refs)
    if missing:
        raise KeyError(f"section cites ids absent from bibliography: {sorted(missing)}")
    return DocumentModel(metadata, (section,), bibliography, doc.variables, doc.build_stamp, doc.content_dir)


WORD_RE = re.compile(r"\S+")
ALNUM_RE = re.compile(r"[^\W_]")


def prose_text(body: str) -> str:
    """Body text with code, citation markers, HTML, link targets and footnote labels blanked out."""
    spans = mdscan.code_spans(body)
    spans += [m.span() for m in REWRITTEN_MARKER_RE.finditer(body)]
    spans += mdscan.html_spans(body)
    spans += [(m.start() + 1, m.end()) for m in mdscan.LINK_TARGET_RE.finditer(body)]
    spans += [m.span() for m in mdscan.REF_DEFINITION_RE.finditer(body)]
    spans += [m.span() for m in mdscan.FOOTNOTE_LABEL_RE.finditer(body)]
    chars = list(body)
    for start, end in mdscan.merge_spans(spans):
        for i in range(start, end):
            if chars[i] != "\n":
                chars[i] = " "
    return "".join(chars)


def count_words(body: str) -> int:
    """Whitespace-separated tokens holding at least one letter or digit."""
    return sum(1 for m in WORD_RE.finditer(prose_text(body)) if ALNUM_RE.search(m.group()))


def compute_manuscript_stats(doc: DocumentModel) -> dict:
    return {
        "word_count": sum(count_words(s.body) for s in doc.sections),
        "reference_count": len(doc.bibliography),
        "section_count": sum(1 for s in doc.sections if s.body.strip()),
        "author_count": len(doc.metadata.authors),
    }

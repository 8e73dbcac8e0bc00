"""Spell-checking of manuscript prose.

Excluded from checking: URLs (bare, autolinks, link targets), e-mail
addresses, citation markers, footnote labels, ``{{placeholders}}``, inline
and fenced code, HTML tags and comments. Words are split at hyphens, a possessive ``'s`` is dropped,
tokens containing digits are skipped, and all-caps tokens (acronyms) are
skipped unless ``skip_acronyms`` is off. Matching is case-insensitive on
the NFC-normalized form.

Word lists are plain text, one word per line (``#`` starts a comment),
optionally gzip-compressed.
"""
import gzip
import re
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import citekit, mdscan
from .canonical import sha256_hex
from .errors import DictionaryMissing

DEFAULT_DICTIONARY = "en_US.txt.gz"
DEFAULT_VARIANT_PAIRS = "variant_pairs.txt"
CLEAN_MESSAGE = "No spelling issues found."

# Combining marks are part of a word so decomposed (NFD) text tokenizes like NFC.
COMBINING = "\u0300-\u036f\u1ab0-\u1aff\u1dc0-\u1dff\u20d0-\u20ff\ufe20-\ufe2f"
RAW_TOKEN_RE = re.compile(rf"[\w{COMBINING}'’-]+")
BARE_CITATION_RE = re.compile(r"(?<![\w@\[/.])@[A-Za-z][\w.+-]*:\S+")
APOSTROPHES = "'’"


@dataclass(frozen=True)
class SpellToken:
    text: str
    file: str
    line: int
    column: int


def excluded_spans(markdown: str) -> List[Tuple[int, int]]:
    spans = mdscan.code_spans(markdown)
    spans += mdscan.url_spans(markdown)
    spans += mdscan.html_spans(markdown)
    spans += mdscan.placeholder_spans(markdown)
    spans += [m.span() for m in mdscan.FOOTNOTE_LABEL_RE.finditer(markdown)]
    spans += [m.span() for m in citekit.BRACKET_RE.finditer(markdown)]
    spans += [m.span() for m in BARE_CITATION_RE.finditer(markdown)]
    return mdscan.merge_spans(spans)


def _split_word(raw: str, start: int):
    """Yield ``(word, offset)`` pieces of one raw token."""
    pos = 0
    for piece in raw.split("-"):
        offset = start + pos
        pos += len(piece) + 1
        word = piece
        lead = len(word) - len(word.lstrip(APOSTROPHES))
        word = word.strip(APOSTROPHES)
        offset += lead
        if len(word) > 2 and word[-2] in APOSTROPHES and word[-1] in "sS":
            word = word[:-2]
        if not word or any(ch.isdigit() or ch == "_" for ch in word):
            continue
        yield word, offset


def tokenize_for_spelling(markdown: str, file: str = "<text>") -> List[SpellToken]:
    mask = mdscan.SpanMask(markdown, excluded_spans(markdown))
    index = mdscan.LineIndex(markdown)
    tokens = []
    for m in RAW_TOKEN_RE.finditer(markdown):
        for word, offset in _split_word(m.group(), m.start()):
            if mask.hits(offset, offset + len(word)):
                continue
            line, column = index.locate(offset)
            tokens.append(SpellToken(unicodedata.normalize("NFC", word), file, line, column))
    return tokens


def fold(word: str) -> str:
    return unicodedata.normalize("NFC", word).casefold().replace("’", "'")


def is_acronym(word: str) -> bool:
    letters = [ch for ch in word if ch.isalpha()]
    return len(letters) >= 2 and all(ch.isupper() for ch in letters)


@dataclass
class WordList:
    words: frozenset
    id: str
    digest: str

    def __contains__(self, word) -> bool:
        return fold(word) in self.words


def _read_words(data: bytes) -> frozenset:
    text = data.decode("utf-8")
    words = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            words.add(fold(line))
    return frozenset(words)


def load_word_list(path, label: str = None) -> WordList:
    path = Path(path)
    try:
        data = path.read_bytes()
        if path.suffix == ".gz":
            data = gzip.decompress(data)
    except OSError as exc:
        raise DictionaryMissing(f"cannot read word list: {exc}", file=str(path)) from exc
    name = label or path.name.split(".")[0]
    digest = "sha256:" + sha256_hex(data)
    return WordList(_read_words(data), name, digest)


def default_dictionary() -> WordList:
    data = resources.files("livingdoc").joinpath("data", DEFAULT_DICTIONARY).read_bytes()
    data = gzip.decompress(data)
    return WordList(_read_words(data), "en_US", "sha256:" + sha256_hex(data))


def empty_allowlist() -> WordList:
    return WordList(frozenset(), "none", "none")


@dataclass
class SpellReport:
    findings: List[Tuple[str, List[Tuple[str, int, int]]]] = field(default_factory=list)
    dictionary_id: str = ""
    allowlist_digest: str = "none"

    @property
    def occurrence_count(self) -> int:
        return sum(len(locs) for _, locs in self.findings)

    def merge(self, other: "SpellReport") -> "SpellReport":
        combined: Dict[str, List] = {}
        for token, locs in self.findings + other.findings:
            combined.setdefault(token, []).extend(locs)
        findings = [(t, sorted(set(locs))) for t, locs in sorted(combined.items())]
        return SpellReport(findings, self.dictionary_id or other.dictionary_id, self.allowlist_digest)


def check(tokens: Iterable[SpellToken], dictionary: WordList, allowlist: Optional[WordList] = None,
          skip_acronyms: bool = True) -> SpellReport:
    allowlist = allowlist or empty_allowlist()
    found: Dict[str, List[Tuple[str, int, int]]] = {}
    for tok in tokens:
        if skip_acronyms and is_acronym(tok.text):
            continue
        key = fold(tok.text)
        if key in dictionary.words or key in allowlist.words:
            continue
        found.setdefault(key, []).append((tok.file, tok.line, tok.column))
    findings = [(t, sorted(set(locs))) for t, locs in sorted(found.items())]
    return SpellReport(findings, f"{dictionary.id} ({dictionary.digest[:19]})", allowlist.digest[:19])


def format_report(report: SpellReport) -> Tuple[str, int]:
    """Plain-text report and exit code (0 iff no findings)."""
    if not report.findings:
        return CLEAN_MESSAGE + "\n", 0
    lines = [
        f"Spelling: {len(report.findings)} unknown word(s), {report.occurrence_count} occurrence(s)",
        f"dictionary: {report.dictionary_id}",
        f"allowlist: {report.allowlist_digest}",
        "",
    ]
    for token, locs in report.findings:
        lines.append(f"{token} ({len(locs)})")
        lines.extend(f"  {f}:{line}:{col}" for f, line, col in locs)
    return "\n".join(lines) + "\n", 1


def load_variant_pairs(path=None) -> List[Tuple[str, str]]:
    """Pairs of equivalent spellings, one per line: ``colour color`` (comma or whitespace separated)."""
    if path is None:
        text = resources.files("livingdoc").joinpath("data", DEFAULT_VARIANT_PAIRS).read_text(encoding="utf-8")
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise DictionaryMissing(f"cannot read variant pairs: {exc}", file=str(path)) from exc
    pairs = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p for p in re.split(r"[\s,]+", line) if p]
        if len(parts) != 2:
            raise DictionaryMissing(f"variant pair line needs two words: {line!r}", file=str(path))
        pairs.append((fold(parts[0]), fold(parts[1])))
    return pairs


@dataclass
class VariantFinding:
    pair: Tuple[str, str]
    occurrences: Dict[str, List[Tuple[str, int, int]]]


def variant_consistency_scan(tokens: Iterable[SpellToken], pairs: Sequence[Tuple[str, str]]) -> List[VariantFinding]:
    """Pairs whose both spellings occur in the manuscript. Advisory."""
    seen: Dict[str, List[Tuple[str, int, int]]] = {}
    for tok in tokens:
        seen.setdefault(fold(tok.text), []).append((tok.file, tok.line, tok.column))
    out = []
    for a, b in pairs:
        if a in seen and b in seen:
            out.append(VariantFinding((a, b), {a: sorted(seen[a]), b: sorted(seen[b])}))
    return sorted(out, key=lambda f: f.pair)


def format_variants(findings: List[VariantFinding]) -> str:
    if not findings:
        return ""
    lines = [f"Mixed spelling variants: {len(findings)} pair(s)"]
    for f in findings:
        a, b = f.pair
        lines.append(f"{a} / {b}")
        for word in (a, b):
            lines.extend(f"  {word} {file}:{line}:{col}" for file, line, col in f.occurrences[word])
    return "\n".join(lines) + "\n"


def content_files(content_dir) -> List[Path]:
    return sorted(p for p in Path(content_dir).glob("*.md") if p.is_file())


def tokenize_directory(content_dir) -> List[SpellToken]:
    """Tokens of every ``*.md`` file, located as ``<dir name>/<file>``."""
    content_dir = Path(content_dir)
    tokens = []
    for path in content_files(content_dir):
        label = f"{content_dir.name}/{path.name}"
        tokens.extend(tokenize_for_spelling(path.read_text(encoding="utf-8"), label))
    return tokens

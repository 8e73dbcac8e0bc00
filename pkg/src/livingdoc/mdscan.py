"""Locate markdown spans that must be skipped by text scanners.

This is not a CommonMark parser. It recognizes just enough structure
(fenced code, code spans, URLs, link targets, HTML tags and comments,
template placeholders) for citation extraction and spell checking to
ignore the right regions. Spans are half-open ``(start, end)`` character
offsets into the original text.
"""
import bisect
import re

FENCE_RE = re.compile(r"^( {0,3})(`{3,}|~{3,})(.*)$")
BACKTICKS_RE = re.compile(r"`+")
BARE_URL_RE = re.compile(r"(?:\b(?:https?|ftp)://|\bwww\.)[^\s<>\"'`\[\]{}]+")
AUTOLINK_RE = re.compile(r"<(?:https?|ftp|mailto):[^\s<>]*>")
EMAIL_AUTOLINK_RE = re.compile(r"<[A-Za-z0-9.!#$%&'*+/=?^_`{|}~-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*>")
EMAIL_RE = re.compile(r"(?<![\w.+-])[\w.+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)+")
LINK_TARGET_RE = re.compile(r"\]\((?:<[^>\n]*>|[^()\s]*(?:\([^()\s]*\)[^()\s]*)*)(?:\s+(?:\"[^\"\n]*\"|'[^'\n]*'))?\s*\)")
REF_DEFINITION_RE = re.compile(r"^ {0,3}\[(?!\^)[^\]\n]+\]:[ \t]*\S+.*$", re.MULTILINE)
FOOTNOTE_LABEL_RE = re.compile(r"\[\^[^\]\s]+\]:?")
HTML_COMMENT_RE = re.compile(r"<!--.*?-->", re.DOTALL)
HTML_TAG_RE = re.compile(r"</?[A-Za-z][A-Za-z0-9-]*(?:\s[^<>\n]*)?/?>")
PLACEHOLDER_RE = re.compile(r"\{\{.*?\}\}")
URL_TRAILING = ".,;:!?"


def fenced_code_spans(text):
    """Fenced blocks opened by ``` or ~~~ (3+); an unclosed fence runs to EOF."""
    spans = []
    pos = 0
    open_start = None
    fence_char = fence_len = None
    for line in text.splitlines(keepends=True):
        body = line.rstrip("\r\n")
        m = FENCE_RE.match(body)
        if open_start is None:
            if m and not (m.group(2)[0] == "`" and "`" in m.group(3)):
                open_start = pos
                fence_char, fence_len = m.group(2)[0], len(m.group(2))
        elif m and m.group(2)[0] == fence_char and len(m.group(2)) >= fence_len and not m.group(3).strip():
            spans.append((open_start, pos + len(body)))
            open_start = None
        pos += len(line)
    if open_start is not None:
        spans.append((open_start, len(text)))
    return spans


def code_span_spans(text, skip=()):
    """Inline code spans: a backtick run closed by a run of equal length.

    Spans never cross a blank line; runs inside ``skip`` spans are ignored.
    """
    mask = SpanMask(text, skip)
    spans = []
    runs = [m for m in BACKTICKS_RE.finditer(text) if not mask.hits(m.start(), m.end())]
    i = 0
    while i < len(runs):
        opener = runs[i]
        n = len(opener.group())
        for j in range(i + 1, len(runs)):
            between = text[opener.end():runs[j].start()]
            if re.search(r"\n[ \t]*\n", between):
                break
            if len(runs[j].group()) == n:
                spans.append((opener.start(), runs[j].end()))
                i = j
                break
        i += 1
    return spans


def _strip_url_tail(text, start, end):
    while end > start and text[end - 1] in URL_TRAILING:
        end -= 1
    url = text[start:end]
    while url.endswith(")") and url.count(")") > url.count("("):
        end -= 1
        url = url[:-1]
    return end


def url_spans(text):
    """Bare URLs, autolinks, e-mail addresses, inline link/image targets and reference definitions."""
    spans = [m.span() for m in AUTOLINK_RE.finditer(text)]
    spans += [m.span() for m in EMAIL_AUTOLINK_RE.finditer(text)]
    spans += [m.span() for m in EMAIL_RE.finditer(text)]
    spans += [(m.start() + 1, m.end()) for m in LINK_TARGET_RE.finditer(text)]
    spans += [m.span() for m in REF_DEFINITION_RE.finditer(text)]
    for m in BARE_URL_RE.finditer(text):
        spans.append((m.start(), _strip_url_tail(text, m.start(), m.end())))
    return spans


def html_spans(text):
    return [m.span() for m in HTML_COMMENT_RE.finditer(text)] + [m.span() for m in HTML_TAG_RE.finditer(text)]


def placeholder_spans(text):
    return [m.span() for m in PLACEHOLDER_RE.finditer(text)]


def code_spans(text):
    """Fenced code plus inline code, the two code constructs every scanner skips."""
    fenced = fenced_code_spans(text)
    return fenced + code_span_spans(text, fenced)


def merge_spans(spans):
    out = []
    for start, end in sorted(s for s in spans if s[1] > s[0]):
        if out and start <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], end))
        else:
            out.append((start, end))
    return out


class SpanMask:
    """Fast overlap queries against a set of excluded spans."""

    def __init__(self, text, spans):
        self.spans = merge_spans(spans)
        self._starts = [s for s, _ in self.spans]

    def hits(self, start, end):
        i = bisect.bisect_right(self._starts, start) - 1
        if i >= 0 and self.spans[i][1] > start:
            return True
        j = i + 1
        return j < len(self.spans) and self.spans[j][0] < end

    def contains(self, pos):
        return self.hits(pos, pos + 1)


class LineIndex:
    """Map character offsets to 1-based (line, column)."""

    def __init__(self, text):
        self._starts = [0]
        for m in re.finditer("\n", text):
            self._starts.append(m.end())

    def locate(self, offset):
        line = bisect.bisect_right(self._starts, offset) - 1
        return line + 1, offset - self._starts[line] + 1

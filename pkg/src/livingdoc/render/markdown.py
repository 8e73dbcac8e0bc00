"""Shared markdown-it parser with citation and figure handling."""
import re

from markdown_it import MarkdownIt
from mdit_py_plugins.dollarmath import dollarmath_plugin
from mdit_py_plugins.footnote import footnote_plugin

CITATION_RE = re.compile(r"\[@([A-Za-z0-9]{1,12})((?:; @[A-Za-z0-9]{1,12})*)\]")


def _citation_rule(state, silent):
    """Parse rewritten markers ``[@id; @id]`` whose ids are all in ``env['ref_ids']``."""
    if state.src[state.pos] != "[":
        return False
    m = CITATION_RE.match(state.src, state.pos)
    if not m:
        return False
    ids = [m.group(1)] + re.findall(r"@([A-Za-z0-9]+)", m.group(2))
    known = state.env.get("ref_ids", ())
    if not all(i in known for i in ids):
        return False
    if not silent:
        token = state.push("citation", "", 0)
        token.meta = {"ids": ids}
        token.content = m.group(0)
    state.pos = m.end()
    return True


def make_parser() -> MarkdownIt:
    md = (
        MarkdownIt("commonmark", {"html": True})
        .enable("table")
        .enable("strikethrough")
        .use(footnote_plugin)
        .use(dollarmath_plugin, double_inline=True)
    )
    md.inline.ruler.before("link", "citation", _citation_rule)
    return md


def mark_figures(tokens):
    """Flag paragraphs that hold a lone image so renderers emit a captioned figure."""
    for i in range(1, len(tokens) - 1):
        inline = tokens[i]
        if inline.type != "inline" or tokens[i - 1].type != "paragraph_open":
            continue
        children = [c for c in inline.children or [] if not (c.type == "text" and not c.content.strip())]
        if len(children) == 1 and children[0].type == "image":
            children[0].meta = {**(children[0].meta or {}), "figure": True}
            tokens[i - 1].hidden = True
            tokens[i + 1].hidden = True
    return tokens


def parse(md: MarkdownIt, text: str, env: dict):
    return mark_figures(md.parse(text, env))


def image_sources(tokens):
    for token in tokens:
        for child in token.children or []:
            if child.type == "image":
                yield child

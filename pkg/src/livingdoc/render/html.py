"""Standalone HTML rendering of a DocumentModel."""
import html
from pathlib import Path

from .. import __version__
from ..canonical import atomic_write
from .common import AssetCopier, RenderOptions, reference_html
from .markdown import image_sources, make_parser, parse

STYLE = """\
body { font-family: Georgia, "Times New Roman", serif; max-width: 48em; margin: 2em auto; padding: 0 1em; line-height: 1.5; }
.authors { list-style: none; padding: 0; }
.authors li { display: inline; margin-right: 1em; }
a.citation { text-decoration: none; }
figure { margin: 1.5em 0; text-align: center; }
figcaption { font-size: 0.9em; }
table { border-collapse: collapse; }
th, td { border: 1px solid #999; padding: 0.2em 0.5em; }
.smart-citation-badge { font-size: 0.85em; color: #444; }
.smart-citation-badge .notice { color: #b00; font-weight: bold; }
"""


def _renderer_rules(md, copier):
    def citation(self, tokens, idx, options, env):
        links = "".join(
            f'<a class="citation" href="#ref-{rid}">[{rid}]</a>' for rid in tokens[idx].meta["ids"]
        )
        return f'<span class="citations">{links}</span>'

    def image(self, tokens, idx, options, env):
        token = tokens[idx]
        src = html.escape(token.attrGet("src") or "")
        alt = html.escape(self.renderInlineAsText(token.children or [], options, env))
        title = token.attrGet("title")
        title_attr = f' title="{html.escape(title)}"' if title else ""
        img = f'<img src="{src}" alt="{alt}"{title_attr} />'
        if (token.meta or {}).get("figure"):
            return f"<figure>\n{img}\n<figcaption>{alt}</figcaption>\n</figure>\n"
        return img

    md.add_render_rule("citation", citation)
    md.add_render_rule("image", image)


def render_body(md, text, section_id, ref_ids, copier) -> str:
    env = {"ref_ids": set(ref_ids), "docId": section_id}
    tokens = parse(md, text, env)
    for img in image_sources(tokens):
        img.attrSet("src", copier.target(img.attrGet("src") or ""))
    return md.renderer.render(tokens, md.options, env)


def _header(meta) -> str:
    lines = ['<header class="manuscript-header">', f'<h1 class="title">{html.escape(meta.title)}</h1>']
    if meta.date:
        lines.append(f'<p class="date">{html.escape(meta.date)}</p>')
    affiliations = meta.affiliations()
    if meta.authors:
        lines.append('<ul class="authors">')
        for author in meta.authors:
            marks = ",".join(str(affiliations.index(a) + 1) for a in author.affiliations)
            orcid = ""
            if author.orcid:
                orcid = f' <a class="orcid" href="https://orcid.org/{author.orcid}">{author.orcid}</a>'
            sup = f"<sup>{marks}</sup>" if marks else ""
            lines.append(f'<li class="author"><span class="author-name">{html.escape(author.name)}</span>{sup}{orcid}</li>')
        lines.append("</ul>")
    if affiliations:
        lines.append('<ol class="affiliations">')
        lines.extend(f'<li id="aff-{i}">{html.escape(a)}</li>' for i, a in enumerate(affiliations, 1))
        lines.append("</ol>")
    if meta.keywords:
        lines.append(f'<p class="keywords">Keywords: {html.escape(", ".join(meta.keywords))}</p>')
    lines.append("</header>")
    return "\n".join(lines)


def _health_summary(report) -> str:
    s = report.summary
    attrs = " ".join(f'data-{k}="{s.get(k, 0)}"' for k in ("references", "ok", "disputed", "notice", "unavailable"))
    return (f'<p class="citation-health-summary" {attrs}>Citation health: {s.get("notice", 0)} with editorial '
            f'notices, {s.get("disputed", 0)} disputed, {s.get("ok", 0)} ok, '
            f'{s.get("unavailable", 0)} without data.</p>')


def _references(doc, badges, health=None) -> str:
    lines = ['<section id="references" class="references">', "<h2>References</h2>"]
    if health is not None:
        lines.append(_health_summary(health))
    lines.append('<ol class="bibliography">')
    for item in doc.bibliography:
        badge = badges.get(item.id, "")
        entry = reference_html(item)
        lines.append(
            f'<li id="ref-{item.id}" class="reference" data-key="{html.escape(item.source_key)}">'
            f'<span class="ref-id">[{item.id}]</span> {entry}{badge}</li>'
        )
    lines.append("</ol>")
    lines.append("</section>")
    return "\n".join(lines)


def html_document(doc, opts: RenderOptions, copier: AssetCopier) -> str:
    badges = {}
    if opts.health is not None:
        from ..cithealth import render_badges
        badges = render_badges(opts.health)
    md = make_parser()
    _renderer_rules(md, copier)
    ref_ids = [item.id for item in doc.bibliography]
    meta = doc.metadata
    head = [
        "<!DOCTYPE html>",
        f'<html lang="{html.escape(meta.lang)}">',
        "<head>",
        '<meta charset="utf-8" />',
        f'<meta name="generator" content="livingdoc {__version__}" />',
        f'<meta name="citation_title" content="{html.escape(meta.title)}" />',
    ]
    head += [f'<meta name="citation_author" content="{html.escape(a.name)}" />' for a in meta.authors]
    head += [
        f'<meta name="livingdoc-build" content="{doc.build_stamp.get("digest", "")}" />',
        f"<title>{html.escape(meta.title)}</title>",
        f"<style>\n{STYLE}</style>",
        "</head>",
        "<body>",
        _header(meta),
        "<main>",
    ]
    body = []
    for section in doc.sections:
        body.append(f'<section class="manuscript-section" id="sec-{section.id}" data-source="{html.escape(section.source_file)}">')
        body.append(render_body(md, section.body, section.id, ref_ids, copier).rstrip("\n"))
        body.append("</section>")
    tail = ["</main>", _references(doc, badges, opts.health), "</body>", "</html>"]
    return "\n".join(head + body + tail) + "\n"


def render_html(doc, opts: RenderOptions, path: Path = None, asset_prefix: str = "assets/") -> Path:
    """Write ``<output>/manuscript.html`` (or ``path``) and copy local figures."""
    out = Path(opts.output_dir)
    path = Path(path) if path else out / "manuscript.html"
    copier = AssetCopier(out, [opts.asset_dir, doc.content_dir], prefix=asset_prefix)
    atomic_write(path, html_document(doc, opts, copier))
    return path

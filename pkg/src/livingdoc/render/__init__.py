"""HTML and TeX/BibTeX rendering plus standalone section exports."""
from .common import AssetCopier, RenderOptions, reference_html, reference_markdown
from .export import export_section, run_converter, standalone_markdown
from .html import html_document, render_html
from .tex import render_tex, tex_document


def render(doc, opts: RenderOptions) -> dict:
    """Render every requested format; a section filter delegates to export_section."""
    opts.validate(doc)
    if opts.section:
        return export_section(doc, opts.section, opts)
    # Sequential on purpose: both formats copy the same figures, and each
    # output file must have exactly one writer.
    written = {}
    if "html" in opts.formats:
        written["html"] = render_html(doc, opts)
    if "tex" in opts.formats:
        written["tex"], written["bib"] = render_tex(doc, opts)
    return written


__all__ = [
    "AssetCopier",
    "RenderOptions",
    "export_section",
    "html_document",
    "reference_html",
    "reference_markdown",
    "render",
    "render_html",
    "render_tex",
    "run_converter",
    "standalone_markdown",
    "tex_document",
]

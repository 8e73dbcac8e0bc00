"""TeX + BibTeX rendering.

Covered markdown: headings, emphasis, strikethrough, links, lists, tables,
block quotes, footnotes, captioned figures, inline and block code, and
math (passed through verbatim). Anything else becomes a ``% WARNING``
comment so nothing disappears silently.
"""
from pathlib import Path

from ..canonical import atomic_write
from ..resolvers.bibtex import bibliography_to_bibtex
from .common import AssetCopier, RenderOptions
from .markdown import image_sources, make_parser, parse

_ESCAPES = {
    "\\": r"\textbackslash{}",
    "{": r"\{",
    "}": r"\}",
    "$": r"\$",
    "&": r"\&",
    "#": r"\#",
    "_": r"\_",
    "%": r"\%",
    "~": r"\textasciitilde{}",
    "^": r"\textasciicircum{}",
}

HEADINGS = {1: "section", 2: "subsection", 3: "subsubsection", 4: "paragraph", 5: "subparagraph", 6: "subparagraph"}

PREAMBLE = r"""\documentclass[11pt]{article}
\usepackage[utf8]{inputenc}
\usepackage[T1]{fontenc}
\usepackage{amsmath}
\usepackage{graphicx}
\usepackage[normalem]{ulem}
\usepackage{authblk}
\usepackage{hyperref}
"""


def escape(text: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in text)


def _comment(text: str) -> str:
    return "\n".join("% " + line for line in text.rstrip("\n").splitlines())


class TexWriter:
    def __init__(self, tokens, top_level: int = 1):
        self.tokens = tokens
        self.top_level = top_level
        self.footnotes = self._collect_footnotes(tokens)
        self.pending_warnings = []

    def _collect_footnotes(self, tokens):
        notes = {}
        i = 0
        while i < len(tokens):
            if tokens[i].type == "footnote_open":
                fid = tokens[i].meta["id"]
                j = i + 1
                depth = 1
                while depth:
                    if tokens[j].type == "footnote_open":
                        depth += 1
                    elif tokens[j].type == "footnote_close":
                        depth -= 1
                    j += 1
                notes[fid] = tokens[i + 1:j - 1]
                i = j
            else:
                i += 1
        return notes

    def render(self) -> str:
        return self.blocks(self.tokens).strip("\n") + "\n"

    def blocks(self, tokens) -> str:
        out = []
        i = 0
        while i < len(tokens):
            tok = tokens[i]
            t = tok.type
            if t == "footnote_block_open":
                while tokens[i].type != "footnote_block_close":
                    i += 1
            elif t == "heading_open":
                level = min(6, max(1, int(tok.tag[1]) - self.top_level + 1))
                out.append(f"\\{HEADINGS[level]}{{{self.inline(tokens[i + 1])}}}\n")
                i += 2
            elif t == "paragraph_open":
                text = self.inline(tokens[i + 1])
                out.append(text + "\n")
                i += 2
            elif t in ("bullet_list_open", "ordered_list_open"):
                env = "itemize" if t == "bullet_list_open" else "enumerate"
                inner, i = self._until_close(tokens, i)
                items = self.blocks(inner).strip("\n").replace("\n\n\\item ", "\n\\item ")
                out.append(f"\\begin{{{env}}}\n{items}\n\\end{{{env}}}\n")
            elif t == "list_item_open":
                inner, i = self._until_close(tokens, i)
                out.append("\\item " + self.blocks(inner).strip("\n") + "\n")
            elif t == "blockquote_open":
                inner, i = self._until_close(tokens, i)
                out.append(f"\\begin{{quote}}\n{self.blocks(inner).strip(chr(10))}\n\\end{{quote}}\n")
            elif t in ("fence", "code_block"):
                code = tok.content if tok.content.endswith("\n") else tok.content + "\n"
                out.append(f"\\begin{{verbatim}}\n{code}\\end{{verbatim}}\n")
            elif t == "math_block":
                out.append(f"\\[\n{tok.content.strip()}\n\\]\n")
            elif t == "table_open":
                inner, i = self._until_close(tokens, i)
                out.append(self.table(inner))
            elif t == "hr":
                out.append("\\noindent\\rule{\\linewidth}{0.4pt}\n")
            elif t == "html_block":
                out.append("% WARNING: unsupported construct (raw HTML block) passed through as comment\n"
                           + _comment(tok.content) + "\n")
            elif t.endswith("_close") or t == "inline":
                pass
            else:
                out.append(f"% WARNING: unsupported construct ({t})\n")
            if self.pending_warnings and t in ("paragraph_open", "heading_open"):
                out.append("\n".join(self.pending_warnings) + "\n")
                self.pending_warnings = []
            i += 1
        return "\n".join(out)

    @staticmethod
    def _until_close(tokens, i):
        """Tokens strictly inside the container opened at ``i``; returns them and the closing index."""
        open_type = tokens[i].type
        close_type = open_type.replace("_open", "_close")
        depth = 1
        j = i + 1
        while True:
            if tokens[j].type == open_type:
                depth += 1
            elif tokens[j].type == close_type:
                depth -= 1
                if depth == 0:
                    return tokens[i + 1:j], j
            j += 1

    def table(self, tokens) -> str:
        rows = []
        aligns = []
        header_rows = 0
        in_head = False
        row = None
        for tok in tokens:
            if tok.type == "thead_open":
                in_head = True
            elif tok.type == "thead_close":
                in_head = False
            elif tok.type == "tr_open":
                row = []
            elif tok.type == "tr_close":
                rows.append(row)
                header_rows += in_head
            elif tok.type in ("th_open", "td_open"):
                if not rows and tok.type == "th_open":
                    style = tok.attrGet("style") or ""
                    aligns.append({"text-align:center": "c", "text-align:right": "r"}.get(style, "l"))
            elif tok.type == "inline":
                row.append(self.inline(tok))
        ncols = max((len(r) for r in rows), default=0)
        aligns = (aligns + ["l"] * ncols)[:ncols]
        lines = [f"\\begin{{tabular}}{{{''.join(aligns)}}}", "\\hline"]
        for n, r in enumerate(rows):
            cells = r + [""] * (ncols - len(r))
            lines.append(" & ".join(cells) + " \\\\")
            if n + 1 == header_rows:
                lines.append("\\hline")
        lines.append("\\hline")
        lines.append("\\end{tabular}")
        return "\\begin{center}\n" + "\n".join(lines) + "\n\\end{center}\n"

    def inline(self, token) -> str:
        out = []
        stack = []
        for child in token.children or []:
            t = child.type
            if t == "text":
                out.append(escape(child.content))
            elif t == "softbreak":
                out.append("\n")
            elif t == "hardbreak":
                out.append("\\\\\n")
            elif t == "em_open":
                out.append("\\emph{")
            elif t == "strong_open":
                out.append("\\textbf{")
            elif t == "s_open":
                out.append("\\sout{")
            elif t in ("em_close", "strong_close", "s_close"):
                out.append("}")
            elif t == "link_open":
                href = child.attrGet("href") or ""
                stack.append(href)
                out.append("\\href{" + href.replace("%", "\\%").replace("#", "\\#") + "}{")
            elif t == "link_close":
                stack.pop()
                out.append("}")
            elif t == "code_inline":
                out.append("\\texttt{" + escape(child.content) + "}")
            elif t == "math_inline":
                out.append("$" + child.content + "$")
            elif t == "math_inline_double":
                out.append("$$" + child.content + "$$")
            elif t == "citation":
                out.append("\\cite{" + ",".join(child.meta["ids"]) + "}")
            elif t == "footnote_ref":
                note = self.footnotes.get(child.meta["id"], [])
                out.append("\\footnote{" + self.blocks(note).strip("\n").replace("\n\n", "\\par ") + "}")
            elif t == "image":
                out.append(self.image(child))
            elif t == "html_inline":
                self.pending_warnings.append("% WARNING: unsupported inline HTML omitted: " + child.content.replace("\n", " "))
            elif t == "footnote_anchor":
                pass
            else:
                self.pending_warnings.append(f"% WARNING: unsupported inline construct ({t})")
        return "".join(out)

    def image(self, child) -> str:
        src = child.attrGet("src") or ""
        caption = escape("".join(c.content for c in child.children or [] if c.type == "text"))
        graphic = f"\\includegraphics[width=\\linewidth]{{{src}}}"
        if (child.meta or {}).get("figure"):
            return (f"\\begin{{figure}}[htbp]\n\\centering\n{graphic}\n"
                    f"\\caption{{{caption}}}\n\\end{{figure}}")
        return graphic


def _preamble(meta) -> str:
    lines = [PREAMBLE.rstrip("\n")]
    lines.append(f"\\title{{{escape(meta.title)}}}")
    affiliations = meta.affiliations()
    for author in meta.authors:
        marks = ",".join(str(affiliations.index(a) + 1) for a in author.affiliations)
        lines.append(f"\\author[{marks}]{{{escape(author.name)}}}" if marks else f"\\author{{{escape(author.name)}}}")
    for i, aff in enumerate(affiliations, 1):
        lines.append(f"\\affil[{i}]{{{escape(aff)}}}")
    lines.append(f"\\date{{{escape(meta.date or '')}}}")
    return "\n".join(lines)


def tex_document(doc, copier: AssetCopier, bib_name: str = "references") -> str:
    md = make_parser()
    ref_ids = {item.id for item in doc.bibliography}
    parts = [_preamble(doc.metadata), "", "\\begin{document}", "\\maketitle", ""]
    if doc.metadata.keywords:
        parts += ["\\noindent\\textbf{Keywords:} " + escape(", ".join(doc.metadata.keywords)), ""]
    parsed = [(section, parse(md, section.body, {"ref_ids": ref_ids, "docId": section.id}))
              for section in doc.sections]
    # The shallowest heading in the manuscript becomes \section; the title is \maketitle.
    levels = [int(tok.tag[1]) for _, tokens in parsed for tok in tokens if tok.type == "heading_open"]
    top_level = min(levels) if levels else 1
    for section, tokens in parsed:
        for img in image_sources(tokens):
            img.attrSet("src", copier.target(img.attrGet("src") or ""))
        parts.append(f"% section: {section.id} ({section.source_file})")
        parts.append(TexWriter(tokens, top_level).render())
    if doc.bibliography:
        parts += ["\\bibliographystyle{unsrt}", f"\\bibliography{{{bib_name}}}", ""]
    parts.append("\\end{document}")
    return "\n".join(parts) + "\n"


def render_tex(doc, opts: RenderOptions, tex_path: Path = None, bib_path: Path = None, asset_prefix: str = "assets/"):
    """Write the TeX file and its BibTeX companion; returns both paths."""
    out = Path(opts.output_dir)
    tex_path = Path(tex_path) if tex_path else out / "manuscript.tex"
    bib_path = Path(bib_path) if bib_path else out / "references.bib"
    copier = AssetCopier(out, [opts.asset_dir, doc.content_dir], prefix=asset_prefix)
    atomic_write(tex_path, tex_document(doc, copier, bib_name=bib_path.stem))
    atomic_write(bib_path, bibliography_to_bibtex(doc.bibliography))
    return tex_path, bib_path

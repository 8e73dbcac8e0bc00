"""Standalone per-section exports."""
import logging
import shlex
import subprocess
from pathlib import Path

from ..assembler import restrict_to_section
from ..canonical import atomic_write
from ..errors import ConverterFailed
from .common import RenderOptions, reference_markdown
from .html import render_html
from .tex import render_tex

log = logging.getLogger(__name__)


def standalone_markdown(doc) -> str:
    """Resolved markdown for a single-section document, with a plain references list."""
    meta = doc.metadata
    lines = ["---", f"title: {_yaml_str(meta.title)}"]
    if meta.authors:
        lines.append("author:")
        lines.extend(f"  - {_yaml_str(a.name)}" for a in meta.authors)
    if meta.date:
        lines.append(f"date: {_yaml_str(meta.date)}")
    lines += ["---", ""]
    for section in doc.sections:
        lines.append(section.body.rstrip("\n"))
        lines.append("")
    if doc.bibliography:
        lines += ["## References", ""]
        lines.extend(f"{n}. [{item.id}] {reference_markdown(item)}" for n, item in enumerate(doc.bibliography, 1))
        lines.append("")
    return "\n".join(lines)


def _yaml_str(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def run_converter(template: str, input_path: Path, output_path: Path):
    argv = [part.format(input=str(input_path), output=str(output_path)) for part in shlex.split(template)]
    log.info("running converter: %s", " ".join(shlex.quote(a) for a in argv))
    try:
        proc = subprocess.run(argv, capture_output=True, text=True)
    except OSError as exc:
        raise ConverterFailed(f"converter could not start: {exc}") from exc
    if proc.returncode != 0:
        detail = (proc.stderr or proc.stdout).strip()
        raise ConverterFailed(f"converter exited {proc.returncode}: {detail}")
    return output_path


def export_section(doc, section_id: str, opts: RenderOptions) -> dict:
    """Render ``section_id`` alone under ``<output>/sections``; returns written paths by kind."""
    derived = restrict_to_section(doc, section_id)
    out = Path(opts.output_dir)
    sections_dir = out / "sections"
    written = {}
    if "html" in opts.formats:
        written["html"] = render_html(derived, opts, sections_dir / f"{section_id}.html", asset_prefix="../assets/")
    if "tex" in opts.formats:
        written["tex"], written["bib"] = render_tex(
            derived, opts, sections_dir / f"{section_id}.tex", sections_dir / f"{section_id}.bib",
            asset_prefix="../assets/")
    md_path = sections_dir / f"{section_id}.md"
    atomic_write(md_path, standalone_markdown(derived))
    written["md"] = md_path
    if opts.converter_cmd:
        written["converted"] = run_converter(opts.converter_cmd, md_path, sections_dir / f"{section_id}.docx")
    return written

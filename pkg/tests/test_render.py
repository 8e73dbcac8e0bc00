import re
import sys

import pytest
from pybtex.database import parse_file

from livingdoc.assembler import build_document, load_manuscript
from livingdoc.cithealth import CitationTally, build_health_report
from livingdoc.config import load_config
from livingdoc.errors import AssetMissing, ConverterFailed, UnknownSection
from livingdoc.render import RenderOptions, render, run_converter
from livingdoc.render.tex import escape
from livingdoc.resolvers import HttpClient, MetadataCache, Resolver


def offline_doc(project):
    cfg = load_config(project / "livingdoc.config")
    resolver = Resolver(MetadataCache(cfg.cache_dir), HttpClient(offline=True))
    return build_document(load_manuscript(cfg.content_dir, cfg), resolver, "offline")


def html_cite_ids(html):
    return re.findall(r'<a class="citation" href="#ref-([A-Za-z0-9]+)"', html)


def tex_cite_keys(tex):
    return [k.strip() for group in re.findall(r"\\cite\{([^}]*)\}", tex) for k in group.split(",")]


@pytest.fixture
def rendered(project, tmp_path):
    doc = offline_doc(project)
    out = tmp_path / "out"
    return doc, render(doc, RenderOptions(output_dir=out)), out


def test_html_structure(rendered):
    doc, written, out = rendered
    html = written["html"].read_text()
    assert html.startswith("<!DOCTYPE html>")
    assert set(html_cite_ids(html)) == {i.id for i in doc.bibliography}
    assert len(re.findall(r'<li id="ref-', html)) == 6
    assert '<meta name="citation_author" content="Ada Okafor" />' in html
    assert 'src="assets/images/trials.png"' in html
    assert (out / "assets" / "images" / "trials.png").exists()
    assert "<figcaption>Trial registrations over time</figcaption>" in html
    assert 'style="text-align:right"' in html
    assert "footnote" in html
    assert "citation-health-summary" not in html


def test_tex_and_bibtex(rendered):
    doc, written, _ = rendered
    tex = written["tex"].read_text()
    db = parse_file(str(written["bib"]), "bibtex")
    assert set(tex_cite_keys(tex)) == set(db.entries) == {i.id for i in doc.bibliography}
    assert "\\section{Introduction}" in tex
    assert "\\includegraphics[width=\\linewidth]{assets/images/trials.png}" in tex
    assert "\\footnote{" in tex
    assert "\\begin{tabular}{lcr}" in tex
    assert "\\bibliography{manuscript}" in tex or "\\bibliography{references}" in tex
    assert "\\affil[1]" in tex
    assert "% section: methods (04.methods.md)" in tex


def test_tex_escape():
    assert escape("50% & $x_1$ #2 {a} ~ ^ \\") == (
        "50\\% \\& \\$x\\_1\\$ \\#2 \\{a\\} \\textasciitilde{} \\textasciicircum{} \\textbackslash{}")


def test_section_export(project, tmp_path):
    doc = offline_doc(project)
    out = tmp_path / "out"
    written = render(doc, RenderOptions(output_dir=out, section="pharmaceuticals"))
    assert sorted(written) == ["bib", "html", "md", "tex"]
    md = written["md"].read_text()
    assert '  - "Ada Okafor"\n  - "Bram van Dijk"\n' in md and "Chen Wei" not in md
    assert 'src="../assets/images/trials.png"' in written["html"].read_text()
    assert sorted(parse_file(str(written["bib"]), "bibtex").entries) == sorted(["9LRY47Pp", "LjPFoZz2"])


def test_section_without_citations_has_no_bibliography(project, tmp_path):
    written = render(offline_doc(project), RenderOptions(output_dir=tmp_path, section="methods"))
    assert "\\bibliography" not in written["tex"].read_text()
    assert written["bib"].read_text() == ""


def test_unknown_section(project, tmp_path):
    with pytest.raises(UnknownSection):
        render(offline_doc(project), RenderOptions(output_dir=tmp_path, section="nope"))


def test_missing_figure(project, tmp_path):
    (project / "content" / "images" / "trials.png").unlink()
    with pytest.raises(AssetMissing):
        render(offline_doc(project), RenderOptions(output_dir=tmp_path))


def test_converter_hook(project, tmp_path):
    cmd = f"{sys.executable} -c \"import shutil,sys; shutil.copy(sys.argv[1], sys.argv[2])\" {{input}} {{output}}"
    written = render(offline_doc(project), RenderOptions(output_dir=tmp_path, section="data", converter_cmd=cmd))
    assert written["converted"].read_text() == written["md"].read_text()


def test_converter_failure(tmp_path):
    with pytest.raises(ConverterFailed) as info:
        run_converter(f"{sys.executable} -c \"raise SystemExit(4)\"", tmp_path / "a", tmp_path / "b")
    assert info.value.exit_code == 3
    with pytest.raises(ConverterFailed):
        run_converter("/nonexistent/converter {input}", tmp_path / "a", tmp_path / "b")


def test_health_badges_in_html(project, tmp_path):
    doc = offline_doc(project)
    tallies = {"10.1371/journal.pcbi.1007128": CitationTally("10.1371/journal.pcbi.1007128", 5, 42, 0)}
    report = build_health_report(doc, tallies)
    html = render(doc, RenderOptions(output_dir=tmp_path, formats=("html",), health=report))["html"].read_text()
    assert html.count('class="smart-citation-badge severity-ok"') == 1
    assert html.count("smart-citation-badge no-data") == 2
    assert 'data-references="3"' in html

"""Acceptance criteria, one test per criterion.

Each test carries ``@pytest.mark.acceptance(n, description)``; the conftest
hook prints one PASS/FAIL line per criterion at the end of the run.
"""
import gzip
import hashlib
import json
import random
import re
import subprocess
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import pytest
import yaml
from pybtex.database import parse_file

import oracles
from conftest import configure
from fixture_routes import HEALTH_TALLIES, data_endpoints, data_rewrites
from livingdoc.assembler import TemplateVariableSet, build_document, load_manuscript, substitute_variables
from livingdoc.cli import run
from livingdoc.config import load_config
from livingdoc.livedata import load_data_config, update_all
from livingdoc.render import RenderOptions, render
from livingdoc.citekit import parse_citation_key
from livingdoc.resolvers import HttpClient, MetadataCache, Resolver
from livingdoc.resolvers import core as resolver_core

TESTS = Path(__file__).parent
ROOT = TESTS.parent
ORACLE = json.loads((TESTS / "fixtures" / "expected" / "oracle_values.json").read_text())
NOW = datetime(2021, 9, 6, 12, 0, tzinfo=timezone.utc)


def cli(project, *args, **kw):
    return run(["--config", str(project / "livingdoc.config"), *args], now=lambda: NOW, **kw)


def sha(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def html_cite_ids(html):
    return re.findall(r'<a class="citation" href="#ref-([A-Za-z0-9]+)"', html)


def html_bib_ids(html):
    return re.findall(r'<li id="ref-([A-Za-z0-9]+)" class="reference"', html)


def tex_cite_keys(tex):
    return [k.strip() for group in re.findall(r"\\cite\{([^}]*)\}", tex) for k in group.split(",")]


def offline_doc(project):
    cfg = load_config(project / "livingdoc.config")
    resolver = Resolver(MetadataCache(cfg.cache_dir), HttpClient(offline=True))
    return build_document(load_manuscript(cfg.content_dir, cfg), resolver, "offline")


def strip_retrieved_at(value):
    if isinstance(value, dict):
        return {k: strip_retrieved_at(v) for k, v in value.items() if k != "retrieved_at"}
    if isinstance(value, list):
        return [strip_retrieved_at(v) for v in value]
    return value


@pytest.mark.acceptance(1, "offline fixture build: 6 references, consistent HTML/TeX/BibTeX ids, under 5 s")
def test_criterion_1_offline_fixture_build(project):
    content = sorted(p.name for p in (project / "content").glob("*.md"))
    assert len(content) == 4
    per_file = [oracles.scan_citation_keys((project / "content" / n).read_text()) for n in content]
    occurrences = [k for keys in per_file for k in keys]
    assert len(set(occurrences)) == 6
    assert sorted(occurrences.count(k) for k in set(occurrences)) == [1, 1, 1, 1, 1, 2]
    assert any((project / "ci" / "cache").rglob("*.json"))

    start = time.perf_counter()
    code = cli(project, "build", "--offline")
    elapsed = time.perf_counter() - start
    assert code == 0
    assert elapsed < 5.0, f"offline build took {elapsed:.2f} s"

    out = project / "output"
    html = (out / "manuscript.html").read_text()
    tex = (out / "manuscript.tex").read_text()
    bib_ids = html_bib_ids(html)
    assert len(bib_ids) == 6
    assert set(html_cite_ids(html)) == set(bib_ids)
    assert set(bib_ids) == {ORACLE["project"]["reference_ids"][k] for k in ORACLE["project"]["keys"]}
    entries = parse_file(str(out / "references.bib"), "bibtex").entries
    assert set(entries) == set(tex_cite_keys(tex))
    assert len(entries) == 6


@pytest.mark.acceptance(2, "template variable ebm_trials_results = 98 renders as \"98\"")
def test_criterion_2_variable_substitution(project):
    values = TemplateVariableSet({"ebm_trials_results": 98})
    assert substitute_variables("{{ebm_trials_results}}", values) == "98"
    variables = json.loads((project / "content" / "variables" / "trials.json").read_text())
    assert variables["ebm_trials_results"] == 98
    doc = offline_doc(project)
    assert "98 clinical trials" in doc.section("pharmaceuticals").body
    assert cli(project, "build", "--offline") == 0
    html = (project / "output" / "manuscript.html").read_text()
    assert "98 clinical trials" in html and "{{ebm_trials_results}}" not in html


@pytest.mark.acceptance(3, "clinicaltrials:NCT04280705 resolves with title, sponsor, investigators, summary")
def test_criterion_3_clinical_trial_metadata(project):
    cfg = load_config(project / "livingdoc.config")
    resolver = Resolver(MetadataCache(cfg.cache_dir), HttpClient(offline=True))
    item = resolver.resolve(parse_citation_key("clinicaltrials:NCT04280705"), "offline")
    csl = item.to_csl()
    assert csl["title"].strip()
    assert csl["custom"]["sponsor"].strip()
    assert csl["custom"]["investigators"]
    assert all(str(name).strip() for name in csl["custom"]["investigators"])
    assert csl["custom"]["summary"].strip()


OUTPUTS = ("manuscript.html", "manuscript.tex", "references.bib", "stats.json",
           "assets/images/generated/cases.svg")


@pytest.mark.acceptance(4, "two offline builds are byte-identical under randomized resolver scheduling")
def test_criterion_4_deterministic_builds(project, monkeypatch):
    original_all = resolver_core.Resolver.resolve_all
    original_lookup = resolver_core.Resolver.lookup
    rng = random.Random(20210906)

    def jittered_lookup(self, key, policy="cached-or-fetch"):
        time.sleep(rng.random() * 0.01)
        return original_lookup(self, key, policy)

    def shuffled_all(self, keys, policy, ids, max_workers=4, submit_order=None):
        keys = list(keys)
        order = rng.sample(keys, len(keys))
        return original_all(self, keys, policy, ids, max_workers=rng.randint(1, 6), submit_order=order)

    monkeypatch.setattr(resolver_core.Resolver, "lookup", jittered_lookup)
    monkeypatch.setattr(resolver_core.Resolver, "resolve_all", shuffled_all)

    runs = []
    for _ in range(2):
        assert cli(project, "build", "--offline") == 0
        out = project / "output"
        runs.append({name: sha(out / name) for name in OUTPUTS})
        for name in OUTPUTS:
            (out / name).unlink()
    assert runs[0] == runs[1]

    # Figures regenerated from the recorded snapshots match the committed SVG bytes.
    cfg = load_data_config(project / "data" / "data.yaml")
    figures = sorted(cfg.figures_dir.glob("*.svg"))
    committed = {p.name: sha(p) for p in figures}
    for p in figures:
        p.unlink()
    result = update_all(cfg, HttpClient(offline=True), only=[], clock=lambda: "2021-09-06T00:00:00Z")
    assert result.ok, result.errors
    assert {p.name: sha(p) for p in sorted(cfg.figures_dir.glob("*.svg"))} == committed


@pytest.mark.acceptance(5, "spell fixture: exactly one finding at the oracle location; allowlisting it exits 0")
def test_criterion_5_spellcheck(spell_dir, capsys):
    notes = spell_dir / "content" / "01.notes.md"
    text = notes.read_text()
    known = gzip.decompress((ROOT / "src" / "livingdoc" / "data" / "en_US.txt.gz").read_bytes())
    known = {w.strip().lower() for w in known.decode("utf-8").splitlines() if w.strip()}
    unknown = oracles.spell_scan(text, known)
    assert unknown == {"recieve": 1}
    lines = text.splitlines()
    line = next(i for i, ln in enumerate(lines, 1) if "recieve" in ln)
    expected_loc = f"content/01.notes.md:{line}:{lines[line - 1].index('recieve') + 1}"

    config = str(spell_dir / "missing.config")
    assert run(["--config", config, "spellcheck", str(spell_dir / "content")]) == 1
    report = capsys.readouterr().out
    assert "Spelling: 1 unknown word(s), 1 occurrence(s)" in report
    locations = re.findall(r"^  (\S+:\d+:\d+)$", report, re.M)
    assert locations == [expected_loc]

    allow = spell_dir / "allowlist.txt"
    assert "recieve" in allow.read_text().split()
    assert run(["--config", config, "spellcheck", "--allowlist", str(allow), str(spell_dir / "content")]) == 0


@pytest.mark.acceptance(6, "citation health: one notice, one disputed; HTML shows one notice badge and counts")
def test_criterion_6_citation_health(project, stub, capsys):
    configure(project, stub.url)
    code = cli(project, "check-citations", "--json")
    assert code != 0
    report = json.loads(capsys.readouterr().out)
    assert report["summary"]["notice"] == 1
    assert report["summary"]["disputed"] == 1

    configure(project, stub.url, health={"enabled": True})
    assert cli(project, "build") == 0
    html = (project / "output" / "manuscript.html").read_text()
    assert html.count('class="notice"') == 1
    references = html.split('<li id="ref-')[1:]
    for doi, tally in HEALTH_TALLIES.items():
        matches = [r for r in references if f'data-doi="{doi}"' in r.lower()]
        assert len(matches) == 1, doi
        ref = matches[0]
        for kind in ("supporting", "mentioning", "disputing"):
            assert f">{tally[kind]} {kind}</span>" in ref, (doi, kind)


@pytest.mark.acceptance(7, "data refresh: latest value 120, 3-point SVG line, revision abc123, rerun changes only retrieved_at")
def test_criterion_7_data_refresh(data_dir, stub):
    cfg = load_data_config(data_dir / "data.yaml", endpoints=data_endpoints(stub.url))
    http = HttpClient(politeness=0, retries=1, rewrites=sorted(data_rewrites(stub.url).items()))
    first = update_all(cfg, http, clock=lambda: "2021-09-06T00:00:00Z")
    assert first.ok, first.errors
    assert first.manifest["variables"]["cases_total"]["value"] == 120
    assert json.loads(cfg.variables_file.read_text())["cases_total"] == 120
    assert first.manifest["sources"]["cases"]["revision"] == "abc123"

    svg_path = cfg.figures_dir / "cases.svg"
    svg_text = svg_path.read_text()
    points = re.search(r'<polyline id="cases-series-0"[^>]* points="([^"]*)"', svg_text).group(1)
    assert len(re.findall(r"-?\d+(?:\.\d+)?,-?\d+(?:\.\d+)?", points)) == 3

    root = cfg.manifest.parent
    before = {p: p.read_bytes() for p in root.rglob("*") if p.is_file()}
    manifest_before = json.loads(cfg.manifest.read_text())
    second = update_all(cfg, http, clock=lambda: "2021-09-07T00:00:00Z")
    assert second.ok, second.errors
    after = {p: p.read_bytes() for p in root.rglob("*") if p.is_file()}
    assert set(after) == set(before)
    changed = [p for p in after if after[p] != before[p]]
    assert changed == [cfg.manifest]
    manifest_after = json.loads(cfg.manifest.read_text())
    assert strip_retrieved_at(manifest_after) == strip_retrieved_at(manifest_before)
    assert all(s["retrieved_at"] == "2021-09-07T00:00:00Z" for s in manifest_after["sources"].values())


@pytest.mark.acceptance(8, "section export: 2 mapped authors, bibliography of that section's keys, union is full set")
def test_criterion_8_section_export(project, tmp_path):
    meta = yaml.safe_load((project / "content" / "metadata.yaml").read_text())
    mapped = [a["name"] for a in meta["authors"] if "pharmaceuticals" in a.get("contributions", [])]
    assert len(mapped) == 2 and len(meta["authors"]) == 3
    ids = ORACLE["project"]["reference_ids"]
    expected = {Path(name).stem.split(".", 1)[1]: {ids[k] for k in f["keys"]}
                for name, f in ORACLE["project"]["files"].items()}

    doc = offline_doc(project)
    union = set()
    for section in doc.sections:
        written = render(doc, RenderOptions(output_dir=tmp_path / section.id, section=section.id))
        keys = set(parse_file(str(written["bib"]), "bibtex").entries) if written["bib"].read_text() else set()
        assert keys == expected[section.id], section.id
        assert set(html_bib_ids(written["html"].read_text())) == keys
        union |= keys
        if section.id == "pharmaceuticals":
            front = yaml.safe_load(written["md"].read_text().split("---\n")[1])
            assert front["author"] == mapped
    assert union == set(ids.values())


PROPERTY_TESTS = (
    "test_normalize_is_idempotent",
    "test_extraction_order_and_exclusions",
    "test_substitution_identity_without_placeholders",
    "test_allowlist_monotonicity",
    "test_severity_is_total",
    "test_bibtex_parses_under_pybtex",
)


@pytest.mark.acceptance(9, "property suites: six properties, at least 200 cases each, under 60 s in total")
def test_criterion_9_property_suites(tmp_path):
    start = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", "--hypothesis-show-statistics",
         str(TESTS / "test_properties.py"), "-o", f"cache_dir={tmp_path}"],
        cwd=tmp_path, capture_output=True, text=True, timeout=120,
    )
    elapsed = time.perf_counter() - start
    assert proc.returncode == 0, proc.stdout[-3000:]
    assert elapsed < 60.0, f"property suites took {elapsed:.1f} s"
    blocks = re.split(r"^\S*test_properties\.py::", proc.stdout, flags=re.M)[1:]
    cases = {}
    for block in blocks:
        name = block.split(":", 1)[0].strip()
        cases[name] = sum(int(n) for n in re.findall(r"(\d+) passing examples", block))
    assert set(cases) == set(PROPERTY_TESTS), cases
    assert all(n >= 200 for n in cases.values()), cases

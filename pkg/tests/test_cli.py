import json
import shutil
from datetime import datetime, timezone
from pathlib import Path

import pytest

from conftest import CountingTransport, add_data_config, configure
from livingdoc import __version__
from livingdoc.cli import run

NOW = datetime(2021, 9, 6, 12, 0, tzinfo=timezone.utc)
ORACLE = json.loads((Path(__file__).parent / "fixtures" / "expected" / "oracle_values.json").read_text())
EXPECTED_STATS = ORACLE["project"]["stats"]


def cli(project, *args, **kw):
    return run(["--config", str(project / "livingdoc.config"), *args], now=lambda: NOW, **kw)


def test_version(capsys):
    assert run(["--version"]) == 0
    assert __version__ in capsys.readouterr().out


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["build", "--bogus"], ["check-citations", "--fail-on", "x"]])
def test_usage_errors(argv):
    assert run(argv) == 64


def test_missing_config(tmp_path):
    assert run(["--config", str(tmp_path / "none.config"), "stats"]) == 1


def test_build_offline(project, capsys):
    transport = CountingTransport()
    assert cli(project, "build", "--offline", transport=transport) == 0
    assert transport.calls == []
    out = project / "output"
    assert (out / "manuscript.html").exists() and (out / "manuscript.tex").exists()
    assert (out / "references.bib").exists()
    assert json.loads((out / "stats.json").read_text()) == EXPECTED_STATS


def test_stats_command(project, capsys):
    assert cli(project, "stats", "--offline") == 0
    assert json.loads(capsys.readouterr().out) == EXPECTED_STATS


def test_environment_offline(project, monkeypatch):
    monkeypatch.setenv("LIVINGDOC_OFFLINE", "1")
    transport = CountingTransport()
    assert cli(project, "stats", transport=transport) == 0
    assert transport.calls == []


def test_resolve_command(project, capsys):
    assert cli(project, "resolve", "clinicaltrials:NCT04280705", "--offline") == 0
    data = json.loads(capsys.readouterr().out)
    assert data["custom"]["sponsor"] and data["id"] == "LjPFoZz2"


def test_cold_cache_offline(project, capsys):
    shutil.rmtree(project / "ci" / "cache")
    transport = CountingTransport()
    assert cli(project, "build", "--offline", transport=transport) == 2
    err = capsys.readouterr().err
    assert "pubmed:32450107" in err and "uniprot:P0DTC2" in err
    assert transport.calls == []


def test_unknown_variable(project, capsys):
    page = project / "content" / "04.methods.md"
    page.write_text(page.read_text() + "\nThere are {{no_such_value}} steps.\n")
    assert cli(project, "build", "--offline") == 1
    assert "no_such_value" in capsys.readouterr().err


def test_malformed_citation(project, capsys):
    page = project / "content" / "04.methods.md"
    page.write_text(page.read_text() + "\nBroken [@doi:nope].\n")
    assert cli(project, "build", "--offline") == 1
    assert "04.methods.md" in capsys.readouterr().err


def test_online_build_fetches_through_stub(project, stub):
    shutil.rmtree(project / "ci" / "cache")
    configure(project, stub.url)
    assert cli(project, "build") == 0
    assert len(stub.requests) == 6
    assert cli(project, "build", "--offline") == 0


def test_build_section(project):
    assert cli(project, "build", "--offline", "--section", "pharmaceuticals") == 0
    assert (project / "output" / "sections" / "pharmaceuticals.bib").exists()
    assert cli(project, "build", "--offline", "--section", "nope") == 1


def test_converter_failure_exit_code(project):
    configure(project, converter_cmd="/nonexistent/converter {input} {output}")
    assert cli(project, "build", "--offline", "--section", "data") == 3


def test_spellcheck_clean_and_seeded(project, capsys):
    assert cli(project, "spellcheck") == 0
    page = project / "content" / "04.methods.md"
    page.write_text(page.read_text() + "\nThe results were recieved.\n")
    assert cli(project, "spellcheck") == 1
    assert "recieved (1)" in capsys.readouterr().out


def test_spellcheck_without_config(spell_dir, monkeypatch, capsys):
    monkeypatch.chdir(spell_dir)
    assert run(["spellcheck", "content"]) == 1
    assert run(["spellcheck", "--allowlist", "allowlist.txt", "content"]) == 0
    assert run(["spellcheck", "--strict-variants", "--allowlist", "allowlist.txt", "variants"]) == 1
    assert run(["spellcheck", "--dictionary", "missing.txt", "content"]) == 1


def test_check_citations(project, stub, capsys):
    configure(project, stub.url)
    assert cli(project, "check-citations", "--json") == 1
    report = json.loads(capsys.readouterr().out)
    assert report["summary"]["notice"] == 1 and report["summary"]["disputed"] == 1
    assert report["summary"]["references"] == 3
    assert (project / "output" / "citation-health.json").exists()
    assert cli(project, "check-citations", "--offline", "--fail-on", "never") == 0
    assert cli(project, "check-citations", "--offline", "--fail-on", "disputed") == 1


def test_check_citations_needs_endpoint(project):
    assert cli(project, "check-citations") == 1


def test_update_data(project, stub):
    configure(project, stub.url, data_config=add_data_config(project))
    assert cli(project, "update-data", "--source", "x") == 64
    assert cli(project, "update-data") == 0
    manifest = json.loads((project / "data" / "manifest.json").read_text())
    assert manifest["variables"]["cases_total"]["value"] == 120
    assert cli(project, "update-data", "--source", "cases") == 0


def test_update_data_network_failure(project, monkeypatch):
    configure(project, data_config=add_data_config(project), network={"retries": 1, "politeness": 0})
    transport = CountingTransport()
    assert cli(project, "update-data", transport=transport) == 2
    assert transport.calls
    monkeypatch.setenv("LIVINGDOC_OFFLINE", "1")
    transport = CountingTransport()
    assert cli(project, "update-data", transport=transport) == 2
    assert transport.calls == []


def test_update_data_bad_source_payload(project, stub):
    configure(project, stub.url, data_config=add_data_config(project))
    stub.routes["/files/trials.json"].body = b"not json"
    assert cli(project, "update-data") == 1
    manifest = json.loads((project / "data" / "manifest.json").read_text())
    assert manifest["sources"]["trials"]["status"] == "failed"
    assert manifest["variables"]["cases_total"]["value"] == 120


def test_update_data_without_data_config(project):
    cfg = project / "livingdoc.config"
    cfg.write_text(cfg.read_text().replace("data_config: data/data.yaml\n", ""))
    assert cli(project, "update-data") == 1

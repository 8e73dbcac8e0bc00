import shutil
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fixture_routes import DATA, FIXTURES, PROJECT, data_routes, health_routes, metadata_routes  # noqa: E402
from stubserver import StubServer  # noqa: E402

from livingdoc.resolvers.http import HttpResponse  # noqa: E402


class CountingTransport:
    """Transport that records every call and refuses to touch the network."""

    def __init__(self, responses=None):
        self.calls = []
        self.responses = responses or {}

    def __call__(self, method, url, headers, data):
        self.calls.append((method, url))
        if url in self.responses:
            status, body, hdrs = self.responses[url]
            return HttpResponse(status, body, {k.lower(): v for k, v in (hdrs or {}).items()}, url)
        return HttpResponse(599, b"network not available in tests", {}, url)


@pytest.fixture
def counting_transport():
    return CountingTransport()


@pytest.fixture
def project(tmp_path):
    """A private copy of the fixture project."""
    dest = tmp_path / "project"
    shutil.copytree(PROJECT, dest, ignore=shutil.ignore_patterns("output"))
    return dest


@pytest.fixture
def data_dir(tmp_path):
    dest = tmp_path / "data"
    shutil.copytree(DATA, dest, ignore=shutil.ignore_patterns("snapshots", "figures", "variables", "manifest.json"))
    return dest


@pytest.fixture
def spell_dir(tmp_path):
    dest = tmp_path / "spell"
    shutil.copytree(FIXTURES / "spell", dest)
    return dest


@pytest.fixture
def stub():
    """One stub server for metadata, data and smart-citation routes."""
    routes = {**metadata_routes(), **data_routes(), **health_routes()}
    with StubServer(routes) as server:
        yield server


def configure(project, base=None, **extra):
    """Append stub endpoints (and any extra top-level keys) to the project's config."""
    import yaml

    from fixture_routes import data_endpoints, data_rewrites, endpoints, health_endpoint, rewrites

    path = project / "livingdoc.config"
    cfg = yaml.safe_load(path.read_text())
    if base:
        cfg["endpoints"] = {**endpoints(base), **data_endpoints(base), "smart_citations": health_endpoint(base)}
        cfg["url_rewrites"] = {**rewrites(base), **data_rewrites(base)}
        cfg["network"] = {"politeness": 0, "retries": 1, "backoff": 0}
    cfg.update(extra)
    path.write_text(yaml.safe_dump(cfg, sort_keys=True))
    return path


def add_data_config(project):
    """Drop the project's recorded data snapshots so the next refresh starts cold."""
    shutil.rmtree(project / "data" / "snapshots")
    (project / "data" / "manifest.json").unlink()
    return "data/data.yaml"


ACCEPTANCE_MARKERS = {}
ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, description): acceptance criterion test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark:
            ACCEPTANCE_MARKERS[item.nodeid] = tuple(mark.args)


def pytest_runtest_logreport(report):
    criterion = ACCEPTANCE_MARKERS.get(report.nodeid)
    if criterion is None:
        return
    if report.failed:
        ACCEPTANCE[criterion] = "FAIL"
    elif report.when == "call" and report.passed:
        ACCEPTANCE.setdefault(criterion, "PASS")


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    if not ACCEPTANCE_MARKERS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(set(ACCEPTANCE_MARKERS.values())):
        number, description = criterion
        status = ACCEPTANCE.get(criterion, "NOT RUN")
        terminalreporter.write_line(f"ACCEPTANCE {number} {status}: {description}")

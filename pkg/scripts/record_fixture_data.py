"""Regenerate the fixture project's committed data snapshots, variables and figures.

Serves the upstream data files from a local stub server and runs the normal
refresh with a fixed clock, so the committed outputs are reproducible.

    python3 scripts/record_fixture_data.py
"""
import shutil
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from fixture_routes import PROJECT, data_endpoints, data_rewrites, data_routes  # noqa: E402
from stubserver import StubServer  # noqa: E402

from livingdoc.livedata import load_data_config, update_all  # noqa: E402
from livingdoc.resolvers import HttpClient  # noqa: E402

RECORDED_AT = "2021-09-06T00:00:00Z"


def main():
    data_dir = PROJECT / "data"
    shutil.rmtree(data_dir / "snapshots", ignore_errors=True)
    (data_dir / "manifest.json").unlink(missing_ok=True)
    with StubServer(data_routes()) as stub:
        cfg = load_data_config(data_dir / "data.yaml", endpoints=data_endpoints(stub.url))
        http = HttpClient(politeness=0, rewrites=sorted(data_rewrites(stub.url).items()))
        result = update_all(cfg, http, clock=lambda: RECORDED_AT)
    for err in result.errors:
        print("error:", err)
    print(f"wrote {result.manifest_path}")
    return 0 if result.ok else 1


if __name__ == "__main__":
    sys.exit(main())

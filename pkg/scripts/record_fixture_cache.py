"""Regenerate the fixture project's committed metadata cache.

Serves the hand-authored upstream payloads from a local stub server and
resolves every citation key in the fixture manuscript through the normal
resolver, so the cache holds exactly what a live run would store.

    python3 scripts/record_fixture_cache.py
"""
import shutil
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from fixture_routes import PROJECT, endpoints, metadata_routes, rewrites  # noqa: E402
from stubserver import StubServer  # noqa: E402

from livingdoc import citekit  # noqa: E402
from livingdoc.assembler import load_manuscript, merge_variable_files, substitute_variables  # noqa: E402
from livingdoc.config import load_config  # noqa: E402
from livingdoc.resolvers import HttpClient, MetadataCache, Resolver  # noqa: E402


def main():
    cfg = load_config(PROJECT / "livingdoc.config")
    cache_dir = PROJECT / "ci" / "cache" / "metadata"
    if cache_dir.exists():
        shutil.rmtree(cache_dir)
    src = load_manuscript(cfg.content_dir, cfg)
    variables = merge_variable_files(src.variable_files)
    registry = citekit.default_registry()
    occurrences = []
    for name, text in src.files:
        occurrences += citekit.extract_citations(substitute_variables(text, variables, name), name, registry)
    keys = citekit.inventory(occurrences, registry)
    with StubServer(metadata_routes()) as stub:
        http = HttpClient(politeness=0, rewrites=sorted(rewrites(stub.url).items()))
        resolver = Resolver(MetadataCache(PROJECT / "ci" / "cache"), http, registry, endpoints(stub.url))
        for key in keys:
            item = resolver.resolve(key, "force-refresh")
            print(f"{key}: {item.title}")


if __name__ == "__main__":
    main()

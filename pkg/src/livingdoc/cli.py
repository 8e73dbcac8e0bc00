"""Command-line entry point.

Exit codes:

    0   success
    1   validation, citation, content or spelling/health findings
    2   network errors, including offline cache misses
    3   external converter failure
    64  usage error

Logs go to stderr; machine-readable output (stats, reports, resolved items)
goes to stdout as canonical JSON.

Environment: ``LIVINGDOC_CACHE_DIR`` overrides the cache directory and
``LIVINGDOC_OFFLINE=1`` forbids all network access.
"""
import argparse
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

import yaml

from . import __version__, citekit, spellwright
from .assembler import build_document, compute_manuscript_stats, load_manuscript
from .canonical import atomic_write, canonical_json
from .cithealth import (
    TallyCache,
    build_health_report,
    detect_duplicate_works,
    fetch_tallies,
    format_health_report,
)
from .config import DEFAULT_CONFIG_NAME, SpellConfig, load_config
from .errors import ConfigError, LivingDocError
from .resolvers import HttpClient, MetadataCache, PrefixRegistry, Resolver
from .resolvers.http import RequestsTransport

log = logging.getLogger("livingdoc")

EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="livingdoc", description="Build and check a living scholarly manuscript.")
    parser.add_argument("--config", default=DEFAULT_CONFIG_NAME, help="config file (default: ./%(default)s)")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    parser.add_argument("-q", "--quiet", action="store_true", help="only log errors")
    parser.add_argument("--version", action="version", version=f"livingdoc {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("build", help="assemble the manuscript and render outputs")
    p.add_argument("--offline", action="store_true", help="use cached metadata only; no network")
    p.add_argument("--section", metavar="ID", help="export one section standalone")
    p.add_argument("--refresh", action="store_true", help="re-fetch every citation")

    p = sub.add_parser("update-data", help="refresh external data, statistics and figures")
    p.add_argument("--source", action="append", metavar="ID", help="only fetch this source (repeatable)")

    p = sub.add_parser("spellcheck", help="spell-check the manuscript text")
    p.add_argument("--strict-variants", action="store_true", help="fail on mixed spelling variants")
    p.add_argument("--dictionary", type=Path, metavar="PATH")
    p.add_argument("--allowlist", type=Path, metavar="PATH")
    p.add_argument("content_dir", nargs="?", type=Path, help="defaults to the configured content directory")

    p = sub.add_parser("check-citations", help="citation health report from the smart-citation service")
    p.add_argument("--offline", action="store_true")
    p.add_argument("--refresh", action="store_true", help="ignore the tally freshness window")
    p.add_argument("--json", action="store_true", help="print canonical JSON instead of text")
    p.add_argument("--fail-on", choices=("notice", "disputed", "never"))

    p = sub.add_parser("stats", help="print manuscript counts as JSON")
    p.add_argument("--offline", action="store_true")

    p = sub.add_parser("resolve", help="resolve one citation key and print its CSL item")
    p.add_argument("key")
    p.add_argument("--offline", action="store_true")
    p.add_argument("--refresh", action="store_true")
    return parser


def _setup_logging(args):
    level = logging.ERROR if args.quiet else max(logging.DEBUG, logging.WARNING - 10 * args.verbose)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("livingdoc")
    root.handlers[:] = [handler]
    root.setLevel(level)
    root.propagate = False


class Context:
    """Objects shared by the commands of one invocation."""

    def __init__(self, cfg, offline: bool, transport=None, now=None):
        self.cfg = cfg
        self.offline = offline or cfg.offline
        self.now = now or (lambda: datetime.now(timezone.utc))
        net = cfg.network
        self.http = HttpClient(
            transport or RequestsTransport(timeout=net.timeout),
            politeness=net.politeness,
            retries=net.retries,
            backoff=net.backoff,
            offline=self.offline,
            rewrites=sorted(cfg.url_rewrites.items()),
        )

    def resolver(self):
        cfg = self.cfg
        registry = PrefixRegistry.default(cfg.prefix_manifest)
        manual = {}
        if cfg.manual_references:
            manual = yaml.safe_load(Path(cfg.manual_references).read_text(encoding="utf-8")) or {}
            if not isinstance(manual, dict):
                raise ConfigError("manual references must map citation keys to CSL items",
                                  file=str(cfg.manual_references))
        return Resolver(MetadataCache(cfg.cache_dir), self.http, registry, cfg.endpoints, manual)

    def policy(self, refresh=False):
        if self.offline:
            return "offline"
        return "force-refresh" if refresh else self.cfg.resolve_policy

    def document(self, refresh=False):
        src = load_manuscript(self.cfg.content_dir, self.cfg)
        return build_document(src, self.resolver(), self.policy(refresh))

    def health(self, doc, refresh=False):
        cfg = self.cfg
        dois = [item.DOI for item in doc.bibliography if item.DOI]
        policy = "offline" if self.offline else ("force-refresh" if refresh else "cached-or-fetch")
        base = cfg.endpoints.get("smart_citations")
        if dois and policy != "offline" and not base:
            raise ConfigError("endpoints.smart_citations is not configured")
        tallies = fetch_tallies(dois, TallyCache(cfg.cache_dir), policy, http=self.http, base_url=base,
                                batch_size=cfg.health.batch_size, freshness_days=cfg.health.freshness_days,
                                clock=self.now, max_workers=cfg.network.max_workers)
        return build_health_report(doc, tallies)


def _load_cfg(args):
    path = Path(args.config)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return load_config(path)


def cmd_build(args, ctx: Context) -> int:
    from .render import RenderOptions, render
    cfg = ctx.cfg
    doc = ctx.document(args.refresh)
    report = ctx.health(doc) if cfg.health.enabled else None
    opts = RenderOptions(
        output_dir=cfg.output_dir,
        formats=tuple(cfg.formats),
        section=args.section,
        health=report,
        asset_dir=cfg.assets_dir,
        converter_cmd=cfg.converter_cmd,
    )
    written = render(doc, opts)
    if not args.section:
        stats_path = Path(cfg.output_dir) / "stats.json"
        atomic_write(stats_path, canonical_json(compute_manuscript_stats(doc)))
        written["stats"] = stats_path
    for kind, path in sorted(written.items()):
        log.info("wrote %s: %s", kind, path)
    return 0


def cmd_update_data(args, ctx: Context) -> int:
    from .livedata import load_data_config, update_all
    from .cithealth import iso_utc
    cfg = ctx.cfg
    if not cfg.data_config:
        raise ConfigError("data_config is not set in the build config")
    data_cfg = load_data_config(cfg.data_config, endpoints=cfg.endpoints)
    known = [s.id for s in data_cfg.sources]
    unknown = [s for s in args.source or [] if s not in known]
    if unknown:
        raise UsageError(f"unknown source(s): {', '.join(unknown)}; known: {', '.join(known)}")
    result = update_all(data_cfg, ctx.http, only=args.source, clock=lambda: iso_utc(ctx.now()),
                        max_workers=cfg.network.max_workers)
    for err in result.errors:
        log.error("%s", err)
    log.info("manifest written: %s", result.manifest_path)
    return result.exit_code


def cmd_spellcheck(args) -> int:
    """Runs without a config file when a content directory is given."""
    if args.content_dir is not None and not Path(args.config).exists():
        spell, content_dir = SpellConfig(), args.content_dir
    else:
        cfg = _load_cfg(args)
        spell, content_dir = cfg.spellcheck, args.content_dir or cfg.content_dir
    if not Path(content_dir).is_dir():
        raise ConfigError(f"content directory not found: {content_dir}")
    dict_path = args.dictionary or spell.dictionary
    dictionary = spellwright.load_word_list(dict_path) if dict_path else spellwright.default_dictionary()
    allow_path = args.allowlist or spell.allowlist
    allowlist = spellwright.load_word_list(allow_path) if allow_path else None
    tokens = spellwright.tokenize_directory(content_dir)
    report = spellwright.check(tokens, dictionary, allowlist, skip_acronyms=spell.skip_acronyms)
    text, code = spellwright.format_report(report)
    sys.stdout.write(text)
    variants = spellwright.variant_consistency_scan(tokens, spellwright.load_variant_pairs(spell.variant_pairs))
    if variants:
        sys.stdout.write("\n" + spellwright.format_variants(variants))
        if args.strict_variants or spell.strict_variants:
            code = code or 1
    return code


def cmd_check_citations(args, ctx: Context) -> int:
    cfg = ctx.cfg
    doc = ctx.document()
    report = ctx.health(doc, args.refresh)
    duplicates = detect_duplicate_works(doc.bibliography)
    payload = report.to_json()
    payload["duplicates"] = [list(g) for g in duplicates]
    json_text = canonical_json(payload)
    atomic_write(Path(cfg.output_dir) / "citation-health.json", json_text)
    if args.json:
        sys.stdout.write(json_text)
    else:
        sys.stdout.write(format_health_report(report))
        for group in duplicates:
            sys.stdout.write("possible duplicate works: " + ", ".join(group) + "\n")
    threshold = args.fail_on or cfg.health.fail_on
    return 1 if report.failing(threshold) else 0


def cmd_stats(args, ctx: Context) -> int:
    sys.stdout.write(canonical_json(compute_manuscript_stats(ctx.document())))
    return 0


def cmd_resolve(args, ctx: Context) -> int:
    resolver = ctx.resolver()
    key = citekit.normalize_key(citekit.parse_citation_key(args.key, resolver.registry), resolver.registry)
    item = resolver.resolve(key, ctx.policy(args.refresh))
    sys.stdout.write(canonical_json(item.to_csl()))
    return 0


COMMANDS = {
    "build": cmd_build,
    "update-data": cmd_update_data,
    "check-citations": cmd_check_citations,
    "stats": cmd_stats,
    "resolve": cmd_resolve,
}


def run(argv=None, *, transport=None, now=None) -> int:
    """Parse ``argv`` and run one command; returns the exit code.

    ``transport`` and ``now`` let tests substitute the network and the clock.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    _setup_logging(args)
    try:
        if args.command == "spellcheck":
            return cmd_spellcheck(args)
        cfg = _load_cfg(args)
        ctx = Context(cfg, getattr(args, "offline", False), transport=transport, now=now)
        return COMMANDS[args.command](args, ctx)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"livingdoc: error: {exc}\n")
        return EXIT_USAGE
    except LivingDocError as exc:
        log.error("%s", exc)
        return exc.exit_code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

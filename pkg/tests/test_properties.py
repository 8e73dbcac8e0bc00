"""Property-based suites (hypothesis), 200 examples each."""
import string

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from pybtex.database import parse_string

from livingdoc import citekit, spellwright
from livingdoc.assembler import TemplateVariableSet, substitute_variables
from livingdoc.cithealth import SEVERITIES, CitationTally, TallyUnavailable, severity
from livingdoc.resolvers.bibtex import bibliography_to_bibtex
from livingdoc.resolvers.csl import CslItem

EXAMPLES = 200
PROPS = settings(max_examples=EXAMPLES, deadline=None, suppress_health_check=[HealthCheck.too_slow])
REGISTRY = citekit.default_registry()

alnum = st.text(string.ascii_letters + string.digits, min_size=1, max_size=8)
doi_keys = st.builds(lambda a, b: citekit.CitationKey("doi", f"10.{a}/{b}"),
                     st.integers(1000, 99999), st.text(string.ascii_letters + string.digits + "._-()", min_size=1, max_size=20))
pubmed_keys = st.builds(lambda n: citekit.CitationKey("pubmed", str(n)), st.integers(1, 10**9))
url_keys = st.builds(
    lambda scheme, host, port, path, q: citekit.CitationKey("url", f"{scheme}://{host}{port}/{path}{q}"),
    st.sampled_from(["http", "https", "HTTP", "HttpS"]),
    st.text(string.ascii_letters, min_size=1, max_size=10).map(lambda h: h + ".Org"),
    st.sampled_from(["", ":80", ":443", ":8080"]),
    st.text(string.ascii_letters + string.digits + "-._~%/", max_size=15).map(
        lambda p: p.replace("%", "%7e")),
    st.sampled_from(["", "?a=1", "?q=%2f"]),
)
arxiv_keys = st.builds(lambda a, b: citekit.CitationKey("arxiv", f"{a:04d}.{b:05d}"), st.integers(1000, 9999),
                       st.integers(0, 99999))
any_key = st.one_of(doi_keys, pubmed_keys, url_keys, arxiv_keys)


@PROPS
@given(any_key)
def test_normalize_is_idempotent(key):
    once = citekit.normalize_key(key, REGISTRY)
    assert citekit.normalize_key(once, REGISTRY) == once


simple_keys = st.one_of(
    st.builds(lambda n: f"pubmed:{n}", st.integers(1, 10**8)),
    st.builds(lambda a, b: f"doi:10.{a}/{b}", st.integers(1000, 9999), alnum),
    st.builds(lambda n: f"clinicaltrials:NCT{n:08d}", st.integers(0, 10**8 - 1)),
)
words = st.text(string.ascii_lowercase, min_size=1, max_size=8)


@st.composite
def documents(draw):
    """Markdown built from segments; returns the text and the keys that must be found, in order."""
    parts, expected = [], []
    for _ in range(draw(st.integers(1, 12))):
        kind = draw(st.sampled_from(["prose", "bracket", "bare", "code", "fence", "url", "group"]))
        if kind == "prose":
            parts.append(" ".join(draw(st.lists(words, min_size=1, max_size=5))))
        elif kind == "bracket":
            k = draw(simple_keys)
            parts.append(f"[@{k}]")
            expected.append(k)
        elif kind == "group":
            ks = draw(st.lists(simple_keys, min_size=2, max_size=3))
            parts.append("[" + "; ".join("@" + k for k in ks) + "]")
            expected.extend(ks)
        elif kind == "bare":
            k = draw(simple_keys)
            parts.append(f"see @{k}")
            expected.append(k)
        elif kind == "code":
            parts.append(f"`[@{draw(simple_keys)}]`")
        elif kind == "fence":
            parts.append(f"\n\n```\n@{draw(simple_keys)}\n```\n\n")
        else:
            parts.append(f"https://example.org/@{draw(simple_keys)}")
    return " ".join(parts), expected


@PROPS
@given(documents())
def test_extraction_order_and_exclusions(doc):
    text, expected = doc
    occurrences = citekit.extract_citations(text, "p.md", REGISTRY)
    assert [str(o.key) for o in occurrences] == expected
    positions = [(o.line, o.column) for o in occurrences]
    assert positions == sorted(positions)


placeholder_free = st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=200).filter(
    lambda t: "{{" not in t and "\\{\\{" not in t)


@PROPS
@given(placeholder_free, st.dictionaries(st.from_regex(r"[a-z_][a-z0-9_]{0,6}", fullmatch=True),
                                         st.integers(-1000, 1000), max_size=4))
def test_substitution_identity_without_placeholders(text, values):
    assert substitute_variables(text, TemplateVariableSet(values)) == text


vocab = ["alpha", "beta", "gamma", "delta", "kappa", "sigma", "omega", "zeta", "theta", "lambda"]


@PROPS
@given(st.lists(st.sampled_from(vocab), min_size=1, max_size=30),
       st.lists(st.sampled_from(vocab), max_size=5), st.lists(st.sampled_from(vocab), max_size=5),
       st.lists(st.sampled_from(vocab), max_size=4))
def test_allowlist_monotonicity(text_words, dict_words, allow_a, allow_extra):
    tokens = spellwright.tokenize_for_spelling(" ".join(text_words))

    def wl(ws):
        return spellwright.WordList(frozenset(ws), "t", "sha256:0")

    dictionary = wl(dict_words)
    small = spellwright.check(tokens, dictionary, wl(allow_a))
    large = spellwright.check(tokens, dictionary, wl(allow_a + allow_extra))
    small_set = {(t, loc) for t, locs in small.findings for loc in locs}
    large_set = {(t, loc) for t, locs in large.findings for loc in locs}
    assert large_set <= small_set


counts = st.integers(0, 10**6)
tallies = st.one_of(
    st.builds(lambda s, m, d, n: CitationTally("10.1/x", s, m, d, tuple(n)), counts, counts, counts,
              st.lists(st.sampled_from(["retraction", "correction", "expression-of-concern"]), max_size=3)),
    st.builds(lambda r: TallyUnavailable("10.1/x", r), st.text(max_size=10)),
)


@PROPS
@given(tallies)
def test_severity_is_total(tally):
    s = severity(tally)
    assert s in SEVERITIES
    assert s == severity(tally)
    if isinstance(tally, CitationTally):
        if tally.notices:
            assert s == "notice"
        elif tally.disputing:
            assert s == "disputed"
        else:
            assert s == "ok"


bib_text = st.one_of(
    st.text(alphabet=st.characters(blacklist_categories=("Cs", "Cc")), min_size=1, max_size=40),
    st.lists(st.sampled_from(["Ann", "and", "AND", "{", "}", ",", "%", "\\", "van", "de"]), min_size=1,
             max_size=5).map(" ".join),
).filter(lambda t: t.strip())
authors = st.one_of(
    st.builds(lambda f, g: {"family": f, "given": g}, bib_text, bib_text),
    st.builds(lambda lit: {"literal": lit}, bib_text),
    st.builds(lambda f: {"family": f}, bib_text),
)


@st.composite
def csl_items(draw):
    n = draw(st.integers(1, 4))
    items = []
    for i in range(n):
        items.append(CslItem(
            id=f"{draw(st.text(string.ascii_letters + string.digits, min_size=6, max_size=8))}{i}",
            type=draw(st.sampled_from(["article-journal", "report", "webpage", "book", "chapter", "document"])),
            title=draw(bib_text),
            source_key="doi:10.1/x",
            authors=draw(st.lists(authors, max_size=3)),
            issued=draw(st.sampled_from([[], [2020], [2021, 5], [2019, 12, 31]])),
            container_title=draw(st.one_of(st.none(), bib_text)),
            URL=draw(st.one_of(st.none(), st.just("https://example.org/a_b%20c?x={1}"))),
            DOI=draw(st.one_of(st.none(), st.just("10.1/a_{b}"))),
            extra=draw(st.fixed_dictionaries({}, optional={"sponsor": bib_text, "number": bib_text,
                                                           "volume": bib_text, "page": bib_text})),
        ))
    return items


@PROPS
@given(csl_items())
def test_bibtex_parses_under_pybtex(items):
    db = parse_string(bibliography_to_bibtex(items), "bibtex")
    assert sorted(db.entries) == sorted(item.id for item in items)
    for item in items:
        entry = db.entries[item.id]
        assert len(entry.persons.get("author", [])) == len(item.authors)

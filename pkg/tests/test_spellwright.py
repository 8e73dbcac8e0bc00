import gzip
import json
import re
from pathlib import Path

import pytest

from livingdoc import spellwright
from livingdoc.errors import DictionaryMissing
from livingdoc.spellwright import (
    WordList,
    check,
    format_report,
    load_word_list,
    tokenize_directory,
    tokenize_for_spelling,
    variant_consistency_scan,
)

FIXTURES = Path(__file__).parent / "fixtures"
EXPECTED = json.loads((FIXTURES / "expected" / "oracle_values.json").read_text())


def words(text):
    return [t.text for t in tokenize_for_spelling(text)]


def wl(*ws):
    return WordList(frozenset(spellwright.fold(w) for w in ws), "test", "sha256:" + "0" * 64)


def test_exclusions():
    text = ("See https://example.org/seperate and <https://x.org/teh>, `teh code`, "
            "[@doi:10.1/abc], @pubmed:123, {{var_name}}, <span class=\"x\">a</span>, "
            "[label](https://x.org/path-wrod) and mail a.b@example.org.\n\n```\nrecieve\n```\n")
    toks = words(text)
    for hidden in ("seperate", "teh", "doi", "pubmed", "var_name", "span", "class", "wrod", "example", "recieve"):
        assert hidden not in toks
    assert "label" in toks and "See" in toks


def test_splitting_rules():
    assert words("state-of-the-art don't Smith's covid19 snake_case") == [
        "state", "of", "the", "art", "don't", "Smith"]


def test_locations():
    toks = tokenize_for_spelling("one\n  two", "f.md")
    assert [(t.text, t.line, t.column) for t in toks] == [("one", 1, 1), ("two", 2, 3)]


def test_footnote_text_is_checked_but_label_is_not():
    toks = words("Text.[^note]\n\n[^note]: A speling slip.\n")
    assert "speling" in toks and "note" not in toks


def test_case_insensitive_nfc_matching():
    toks = tokenize_for_spelling("Café CAFÉ café")
    report = check(toks, wl("café"), skip_acronyms=False)
    assert report.findings == []


def test_acronyms_skipped():
    assert check(tokenize_for_spelling("The WHOX list"), wl("the", "list")).findings == []
    assert check(tokenize_for_spelling("The WHOX list"), wl("the", "list"), skip_acronyms=False).findings


def test_default_dictionary_is_packaged():
    d = spellwright.default_dictionary()
    assert len(d.words) > 100000
    assert "citation" in d and "recieve" not in d
    assert d.digest.startswith("sha256:")


def test_missing_dictionary(tmp_path):
    with pytest.raises(DictionaryMissing):
        load_word_list(tmp_path / "none.txt")


def test_gzip_word_list(tmp_path):
    path = tmp_path / "words.txt.gz"
    path.write_bytes(gzip.compress(b"# comment\nAlpha\nbeta\n"))
    w = load_word_list(path)
    assert "alpha" in w and "BETA" in w and w.id == "words"


def test_spell_fixture_report(spell_dir):
    tokens = tokenize_directory(spell_dir / "content")
    report = check(tokens, spellwright.default_dictionary())
    text, code = format_report(report)
    assert code == 1
    assert [t for t, _ in report.findings] == ["recieve"]
    assert report.findings[0][1] == [("content/01.notes.md", 5, 16)]
    assert text == (FIXTURES / "spell" / "expected_report.txt").read_text()


def test_spell_fixture_matches_oracle(spell_dir):
    text = (spell_dir / "content" / "01.notes.md").read_text()
    report = check(tokenize_for_spelling(text), spellwright.default_dictionary())
    assert {t: len(locs) for t, locs in report.findings} == EXPECTED["spell"]["unknown"]


def test_spell_fixture_seeds_three_misspellings(spell_dir):
    text = (spell_dir / "content" / "01.notes.md").read_text()
    seeded = [w for w in ("seperate", "teh", "recieve") if re.search(rf"\b{w}\b", text)]
    assert len(seeded) == 3


def test_allowlist_clears_report(spell_dir):
    tokens = tokenize_directory(spell_dir / "content")
    report = check(tokens, spellwright.default_dictionary(), load_word_list(spell_dir / "allowlist.txt"))
    assert format_report(report) == ("No spelling issues found.\n", 0)


def test_variant_scan(spell_dir):
    tokens = tokenize_directory(spell_dir / "variants")
    found = variant_consistency_scan(tokens, spellwright.load_variant_pairs())
    assert [f.pair for f in found] == [("colour", "color")]
    assert len(found[0].occurrences["colour"]) == 2


def test_bad_variant_file(tmp_path):
    (tmp_path / "v.txt").write_text("one two three\n")
    with pytest.raises(DictionaryMissing):
        spellwright.load_variant_pairs(tmp_path / "v.txt")


def test_report_merge():
    a = spellwright.SpellReport([("x", [("a.md", 1, 1)])], "d")
    b = spellwright.SpellReport([("x", [("b.md", 2, 1)]), ("y", [("b.md", 3, 1)])], "d")
    merged = a.merge(b)
    assert merged.findings == [("x", [("a.md", 1, 1), ("b.md", 2, 1)]), ("y", [("b.md", 3, 1)])]

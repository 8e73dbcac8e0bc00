"""Recompute the frozen expected values from the independent oracles in tests/oracles.py.

Only the oracles and the raw fixture files are used, never livingdoc itself.

    python3 scripts/freeze_oracle_values.py
"""
import gzip
import json
import sys
from pathlib import Path

import yaml

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

import oracles  # noqa: E402

FIXTURES = ROOT / "tests" / "fixtures"
OUT = FIXTURES / "expected" / "oracle_values.json"


def main():
    content = FIXTURES / "project" / "content"
    variables = json.loads((content / "variables" / "trials.json").read_text())
    meta = yaml.safe_load((content / "metadata.yaml").read_text())
    files, keys, words = {}, [], 0
    for path in sorted(content.glob("*.md")):
        text = path.read_text(encoding="utf-8")
        for name, value in variables.items():
            text = text.replace("{{" + name + "}}", json.dumps(value))
        found = oracles.scan_citation_keys(text)
        files[path.name] = {"keys": found, "words": oracles.count_prose_words(text)}
        words += files[path.name]["words"]
        keys += [k for k in found if k not in keys]
    known = gzip.decompress((ROOT / "src" / "livingdoc" / "data" / "en_US.txt.gz").read_bytes())
    known = {w.strip().lower() for w in known.decode("utf-8").splitlines() if w.strip()}
    spell_text = (FIXTURES / "spell" / "content" / "01.notes.md").read_text(encoding="utf-8")
    values = {
        "project": {
            "files": files,
            "keys": keys,
            "reference_ids": {k: oracles.reference_id(k) for k in keys},
            "stats": {"word_count": words, "reference_count": len(keys),
                      "section_count": len(files), "author_count": len(meta["authors"])},
            "orcids": {a["name"]: oracles.orcid_ok(a["orcid"]) for a in meta["authors"] if a.get("orcid")},
        },
        "spell": {"unknown": oracles.spell_scan(spell_text, known)},
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(values, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()

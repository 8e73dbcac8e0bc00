"""Independent reference implementations used to check the package.

These deliberately share no code with ``livingdoc``: each is a small
full-scan written from the format description alone.
"""
import hashlib
import re

ALPHABET = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz"


def strip_code(text):
    """Blank fenced blocks and inline code spans, keeping offsets and newlines."""
    out = list(text)

    def blank(a, b):
        for i in range(a, b):
            if out[i] != "\n":
                out[i] = " "

    for m in re.finditer(r"^(```|~~~).*?^\1[^\n]*$", text, flags=re.M | re.S):
        blank(*m.span())
    masked = "".join(out)
    for m in re.finditer(r"(`+)(?!`)(.+?)(?<!`)\1(?!`)", masked, flags=re.S):
        blank(*m.span())
    return "".join(out)


def scan_citation_keys(text):
    """Every ``@prefix:accession`` outside code, in textual order, as ``prefix:accession``."""
    text = strip_code(text)
    text = re.sub(r"<[^<>\s@]+@[^<>\s]+>", lambda m: " " * len(m.group()), text)
    keys = []
    for m in re.finditer(r"@([a-z][a-z0-9_.+-]*):(\S+)", text):
        before = text[m.start() - 1] if m.start() else " "
        if before.isalnum() or before in "/.":
            continue
        acc = m.group(2)
        acc = re.split(r"[;\]\s]", acc)[0]
        while acc and acc[-1] in ".,:;!?":
            acc = acc[:-1]
        while acc.endswith(")") and acc.count(")") > acc.count("("):
            acc = acc[:-1]
        keys.append(f"{m.group(1)}:{acc}")
    return keys


def reference_id(key_string, length=8):
    n = int.from_bytes(hashlib.sha256(key_string.encode("utf-8")).digest(), "big")
    s = ""
    while n:
        n, r = divmod(n, 62)
        s = ALPHABET[r] + s
    return s[:length]


def orcid_ok(orcid):
    digits = orcid.replace("-", "")
    if not re.fullmatch(r"\d{15}[\dX]", digits):
        return False
    total = 0
    for d in digits[:15]:
        total = (total + int(d)) * 2
    check = (12 - total % 11) % 11
    return digits[15] == ("X" if check == 10 else str(check))


def count_prose_words(markdown):
    """Words of prose: code, citation markers, HTML tags and link targets removed."""
    text = strip_code(markdown)
    text = re.sub(r"\[@[^\]]*\]", " ", text)
    text = re.sub(r"(?<![\w/.])@[A-Za-z][\w.+-]*:\S+", " ", text)
    text = re.sub(r"\[\^[^\]\s]+\]:?", " ", text)
    text = re.sub(r"<[^>@\n]+>", " ", text)
    text = re.sub(r"\]\([^)\s]*\)", "] ", text)
    return sum(1 for w in text.split() if re.search(r"[^\W_]", w))


def spell_scan(markdown, known):
    """Full scan for unknown words: strips URLs, code, tags and citations, then splits on non-letters."""
    text = strip_code(markdown)
    text = re.sub(r"<[^>\n]*>", " ", text)
    text = re.sub(r"\]\([^)]*\)", "]", text)
    text = re.sub(r"\[@[^\]]*\]|@[A-Za-z][\w.+-]*:\S+", " ", text)
    text = re.sub(r"(?:https?|ftp)://\S+|www\.\S+", " ", text)
    text = re.sub(r"[\w.+-]+@[\w-]+(?:\.[\w-]+)+", " ", text)
    text = re.sub(r"\{\{[^}]*\}\}", " ", text)
    unknown = {}
    for m in re.finditer(r"[A-Za-z][A-Za-z']*", text):
        raw = re.sub(r"'s$", "", m.group()).strip("'")
        if len(raw) >= 2 and raw.isupper():
            continue
        word = raw.lower()
        if word and word not in known:
            unknown[word] = unknown.get(word, 0) + 1
    return unknown

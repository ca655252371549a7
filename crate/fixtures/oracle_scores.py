#!/usr/bin/env python3
"""Independent reference scorer for the fixture pages.

Reads the manifest and its TSV tables, extracts visible text with the standard
library HTML parser, and sums weight * (term hits + synonym hits) per domain
using greedy non-overlapping word matching. Writes pages/golden.json.
"""
import json
import re
import sys
from decimal import Decimal
from html.parser import HTMLParser
from pathlib import Path

HERE = Path(__file__).resolve().parent
WORD = re.compile(r"[^\W_]+")


def words(text):
    return [w.lower() for w in WORD.findall(text)]


def norm(term):
    return " ".join(term.split()).lower()


class Visible(HTMLParser):
    HIDDEN = {"script", "style", "noscript", "template"}

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.depth = 0
        self.chunks = []

    def handle_starttag(self, tag, attrs):
        if tag in self.HIDDEN:
            self.depth += 1

    def handle_endtag(self, tag):
        if tag in self.HIDDEN and self.depth:
            self.depth -= 1

    def handle_data(self, data):
        if not self.depth:
            self.chunks.append(data)


def page_tokens(path):
    p = Visible()
    p.feed(path.read_text(encoding="utf-8"))
    p.close()
    return [t for chunk in p.chunks for t in words(chunk)]


def count(term, tokens):
    seq = words(term)
    n, i, hits = len(seq), 0, 0
    if n == 0:
        return 0
    while i + n <= len(tokens):
        if tokens[i:i + n] == seq:
            hits += 1
            i += n
        else:
            i += 1
    return hits


def rows(path):
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        a, b = line.split("\t")
        yield a, b


def load(manifest):
    base = manifest.parent
    domains = []
    for d in json.loads(manifest.read_text())["domains"]:
        weights = {norm(t): int(Decimal(w) * 1000) for t, w in rows(base / d["weights"])}
        syns = {}
        if d.get("synonyms"):
            for head, syn in rows(base / d["synonyms"]):
                lst = syns.setdefault(norm(head), [])
                if syn.strip() != "NA" and norm(syn) not in lst:
                    lst.append(norm(syn))
        domains.append((d["name"], weights, syns))
    return domains


def score(tokens, domains):
    out = {}
    for name, weights, syns in domains:
        total = 0
        for term, w in weights.items():
            hits = count(term, tokens) + sum(count(s, tokens) for s in syns.get(term, []))
            total += w * hits
        out[name] = total
    return out


def main():
    domains = load(HERE / "ontology" / "manifest.json")
    pages = sorted((HERE / "pages").glob("*.html"))
    golden = {p.name: score(page_tokens(p), domains) for p in pages}
    json.dump(golden, sys.stdout if "--stdout" in sys.argv else open(HERE / "pages" / "golden.json", "w"), indent=2, sort_keys=True)


if __name__ == "__main__":
    main()

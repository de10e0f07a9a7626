#!/usr/bin/env python3
"""Regenerate core/data/wordlist.txt and core/data/lemma_exceptions.tsv.

Source: the WordNet 3.0 lemma index and exception lists as packaged in the
spacy-lookups-data wheel (pip download --no-deps spacy-lookups-data).
Words are kept if they are lowercase alphabetic, at least two letters long and
at or above a unigram log-probability cutoff.
"""

import argparse
import glob
import gzip
import json
import re
import zipfile

SUFFIX_RULES = [("ies", "y"), ("ing", ""), ("ing", "e"), ("ed", ""), ("ed", "e"),
                ("es", ""), ("s", "")]

# Irregulars not covered by the WordNet exception lists, or that the
# "already a base form" check would otherwise shadow.
MANUAL = {
    "flying": "fly",
}


def load(z, name):
    return json.loads(gzip.decompress(z.read("spacy_lookups_data/data/" + name)))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--wheel", default=None)
    ap.add_argument("--out", default="core/data")
    ap.add_argument("--min-logprob", type=float, default=-18.5)
    args = ap.parse_args()

    wheel = args.wheel or glob.glob("spacy_lookups_data-*.whl")[0]
    z = zipfile.ZipFile(wheel)
    index = load(z, "en_lemma_index.json.gz")
    exc = load(z, "en_lemma_exc.json.gz")
    prob = load(z, "en_lexeme_prob.json.gz")

    def common(w):
        return re.fullmatch("[a-z]{2,}", w) and prob.get(w, -99.0) >= args.min_logprob

    words = set()
    for pos in ("noun", "verb", "adj", "adv"):
        words |= {w for w in index[pos] if common(w)}

    exceptions = {}
    for pos in ("noun", "verb"):
        for form, lemmas in exc[pos].items():
            if form in exceptions or form in words or not common(form):
                continue
            lemma = lemmas[0]
            if lemma in words and lemma != form:
                exceptions[form] = lemma
    exceptions.update(MANUAL)
    for v in exceptions.values():
        assert v in words and v not in exceptions, v

    with open(f"{args.out}/wordlist.txt", "w") as f:
        f.write("# Base forms accepted by the suffix-rule dictionary check.\n")
        f.write("# Derived from WordNet 3.0 (see WORDNET_LICENSE.txt).\n")
        for w in sorted(words):
            f.write(w + "\n")
    with open(f"{args.out}/lemma_exceptions.tsv", "w") as f:
        f.write("# token<TAB>lemma; irregular forms checked before the suffix rules.\n")
        f.write("# Derived from WordNet 3.0 exception lists (see WORDNET_LICENSE.txt).\n")
        for k in sorted(exceptions):
            f.write(f"{k}\t{exceptions[k]}\n")
    print(len(words), "words,", len(exceptions), "exceptions")


if __name__ == "__main__":
    main()

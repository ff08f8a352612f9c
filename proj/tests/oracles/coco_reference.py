#!/usr/bin/env python3
"""Independent oracle for the caption metrics fixture.

Tokenizes with NLTK's Treebank tokenizer (lowercased, with the COCO caption
toolkit's punctuation tokens removed) and scores with the pycocoevalcap
Bleu, Rouge and Cider scorers. Writes the frozen reference values consumed
by the C++ tests.

usage: coco_reference.py PAIRS_JSONL OUT_JSON
"""

import json
import sys

from nltk.tokenize import TreebankWordTokenizer
from pycocoevalcap.bleu.bleu import Bleu
from pycocoevalcap.cider.cider import Cider
from pycocoevalcap.rouge.rouge import Rouge

# Punctuation tokens dropped by the toolkit's PTBTokenizer wrapper.
PUNCTUATIONS = ["''", "'", "``", "`", "-LRB-", "-RRB-", "-LCB-", "-RCB-",
                ".", "?", "!", ",", ":", "-", "--", "...", ";"]


def tokenize(caption):
    tokens = TreebankWordTokenizer().tokenize(caption.lower())
    return " ".join(t for t in tokens if t not in PUNCTUATIONS)


def main(pairs_path, out_path):
    with open(pairs_path) as f:
        pairs = [json.loads(line) for line in f if line.strip()]
    gts = {i: [tokenize(p["reference"])] for i, p in enumerate(pairs)}
    res = {i: [tokenize(p["candidate"])] for i, p in enumerate(pairs)}

    bleu, _ = Bleu(4).compute_score(gts, res, verbose=0)
    rouge, _ = Rouge().compute_score(gts, res)
    cider, cider_docs = Cider().compute_score(gts, res)

    out = {
        "source": "nltk TreebankWordTokenizer + pycocoevalcap Bleu/Rouge/Cider",
        "bleu4": bleu[3],
        "rouge_l": float(rouge),
        "cider": float(cider),
        "cider_per_pair": [float(x) for x in cider_docs],
        "tokenized": [
            {"id": p["id"], "candidate": res[i][0], "reference": gts[i][0]}
            for i, p in enumerate(pairs)
        ],
    }
    with open(out_path, "w") as f:
        json.dump(out, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])

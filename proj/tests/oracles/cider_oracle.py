#!/usr/bin/env python3
"""Regenerates tests/data/cider_oracle.json from the pycocoevalcap CIDEr-D scorer.

    pip install pycocoevalcap
    python3 tests/oracles/cider_oracle.py > tests/data/cider_oracle.json

The C++ suite only reads the frozen JSON; Python is not needed to run tests.
"""
import json
import random
import sys

from pycocoevalcap.cider.cider_scorer import CiderScorer

WORDS = ["a", "red", "blue", "circle", "square", "above", "below", "the", "is", "on"]


def sentence(rng, lo, hi):
    return " ".join(rng.choice(WORDS[: rng.randint(4, len(WORDS))]) for _ in range(rng.randint(lo, hi)))


def score(candidates, references):
    scorer = CiderScorer(n=4, sigma=6.0)
    for cand, refs in zip(candidates, references):
        scorer += (cand, refs)
    mean, per_image = scorer.compute_score()
    return float(mean), [float(s) for s in per_image]


def main():
    rng = random.Random(20240611)
    cases = []
    # Fixed cases: single-image corpus (all IDF weights vanish) and a small two-image corpus.
    fixed = [
        (["a red circle above a blue square"], [["a red circle above a blue square"]]),
        (["a red circle", "a blue square below"],
         [["a red circle", "the red circle"], ["a blue square", "the square is below"]]),
    ]
    for cands, refs in fixed:
        mean, per = score(cands, refs)
        cases.append({"candidates": cands, "references": refs, "mean": mean, "per_image": per})
    while len(cases) < 50:
        n_images = rng.randint(2, 6)
        refs = [[sentence(rng, 1, 10) for _ in range(rng.randint(1, 5))] for _ in range(n_images)]
        cands = []
        for r in refs:
            # Mix of copies, perturbed copies and unrelated sentences.
            kind = rng.random()
            if kind < 0.3:
                cands.append(rng.choice(r))
            elif kind < 0.7:
                words = rng.choice(r).split()
                words.insert(rng.randint(0, len(words)), rng.choice(WORDS))
                cands.append(" ".join(words))
            else:
                cands.append(sentence(rng, 1, 12))
        mean, per = score(cands, refs)
        cases.append({"candidates": cands, "references": refs, "mean": mean, "per_image": per})
    json.dump({"source": "pycocoevalcap CiderScorer (n=4, sigma=6)", "cases": cases}, sys.stdout, indent=1)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()

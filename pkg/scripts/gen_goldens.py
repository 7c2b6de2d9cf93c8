#!/usr/bin/env python3
"""Freeze overlap-metric golden values computed by the independent oracles.

Run from the repo root; writes tests/data/overlap_golden.json. The oracles
live in tests/oracles.py and never import the package under test.
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from oracles import (  # noqa: E402
    naive_bleu,
    naive_meteor,
    naive_pinc,
    naive_rouge2,
    naive_rouge_l,
    naive_ter,
)

CASES = [
    ("identical_10", "the big dog ran fast through the open green field".split(),
     "the big dog ran fast through the open green field".split()),
    ("disjoint", "alpha beta gamma delta".split(), "one two three four".split()),
    ("bleu_worked", "the cat sat".split(), "the cat sat down".split()),
    ("rouge2_worked", ["a", "b", "c"], ["a", "b", "d"]),
    ("rougel_worked", ["a", "c", "b"], ["a", "b", "c"]),
    ("meteor_identity_3", "the cat sat".split(), "the cat sat".split()),
    ("ter_worked", ["b", "a"], ["a", "b"]),
    ("single_token", ["x"], ["x"]),
    ("shifted_phrase", "the quick brown fox jumps".split(),
     "the brown quick fox leaps".split()),
    ("repeated_tokens", ["a", "a", "b", "a"], ["a", "b", "a", "a"]),
]


def main() -> None:
    out = []
    for name, cand, ref in CASES:
        out.append(
            {
                "name": name,
                "candidate": cand,
                "reference": ref,
                "expected": {
                    "bleu": naive_bleu(cand, ref),
                    "rouge2": naive_rouge2(cand, ref),
                    "rouge_l": naive_rouge_l(cand, ref),
                    "meteor": naive_meteor(cand, ref),
                    "ter": naive_ter(cand, ref),
                    "ter_noshift": naive_ter(cand, ref, enable_shifts=False),
                    "pinc": naive_pinc(ref, cand),
                },
            }
        )
    target = Path(__file__).resolve().parents[1] / "tests" / "data" / "overlap_golden.json"
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(out, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {target} with {len(out)} cases")


if __name__ == "__main__":
    main()

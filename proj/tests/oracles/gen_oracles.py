# Copyright (C) 2026 The moeroute Authors
# SPDX-License-Identifier: Apache-2.0
"""Regenerates tests/data/oracles.json from independent reference code.

Baselines come from exact rational arithmetic, alignments from difflib's
SequenceMatcher (autojunk off), and Mann-Whitney p-values from scipy.
Run from the repository root:  python3 tests/oracles/gen_oracles.py
"""

import difflib
import json
import random
from fractions import Fraction
from math import comb
from pathlib import Path

from scipy import stats


def baseline(n, k):
    total = Fraction(0)
    for i in range(max(0, 2 * k - n), k + 1):
        w = Fraction(comb(k, i) * comb(n - k, k - i), comb(n, k))
        total += w * Fraction(i, 2 * k - i)
    return float(total)


def align(a, b):
    sm = difflib.SequenceMatcher(None, a, b, autojunk=False)
    pairs = []
    pa = pb = 0
    for blk in sm.get_matching_blocks():
        ga, gb = blk.a - pa, blk.b - pb
        for t in range(min(ga, gb)):
            pairs.append([pa + t, pb + t, 0])
        for t in range(blk.size):
            pairs.append([blk.a + t, blk.b + t, 1])
        pa, pb = blk.a + blk.size, blk.b + blk.size
    return pairs


def main():
    rng = random.Random(20260417)
    out = {}

    out["baseline"] = [
        {"n": n, "k": k, "value": baseline(n, k)}
        for n, k in [(256, 8), (64, 8), (16, 4), (10, 3), (8, 8), (5, 1)]
    ]

    cases = []
    for _ in range(80):
        alpha = rng.choice([2, 3, 5, 12])
        a = [rng.randrange(alpha) for _ in range(rng.randrange(0, 31))]
        b = [rng.randrange(alpha) for _ in range(rng.randrange(0, 31))]
        cases.append({"a": a, "b": b, "pairs": align(a, b)})
    out["alignment"] = cases

    mw = []
    for trial in range(40):
        na, nb = rng.choice([(8, 8), (10, 12), (20, 15), (7, 9)])
        hi = rng.choice([6, 30, 10**6])
        a = [rng.randrange(hi) for _ in range(na)]
        b = [rng.randrange(hi) for _ in range(nb)]
        if trial % 4 == 0:
            b = [x + hi // 3 for x in b]
        r = stats.mannwhitneyu(a, b, alternative="two-sided", method="asymptotic", use_continuity=True)
        mw.append({"a": a, "b": b, "u": float(r.statistic), "p": float(r.pvalue)})
    for a, b in [([1, 2, 3], [4, 5, 6]), ([1, 4, 2], [3, 6, 5, 7]), ([3, 1], [2, 5, 4])]:
        r = stats.mannwhitneyu(a, b, alternative="two-sided", method="exact")
        mw.append({"a": a, "b": b, "u": float(r.statistic), "p": float(r.pvalue), "exact": True})
    out["mann_whitney"] = mw

    path = Path(__file__).resolve().parent.parent / "data" / "oracles.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(out, indent=1) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()

"""Which train sizes can a stratified 0.8 split of the published bins produce?

Enumerates every per-bin train count within one of the proportional share and
reports the reachable totals, next to what the split stage actually does.
"""

import argparse
import itertools
import math

from accmine.curate import split
from accmine.pragma import ComplexityBin

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from helpers import make_pair, pragma_with_score  # noqa: E402

PUBLISHED_BINS = {ComplexityBin.SIMPLE: 1727, ComplexityBin.MEDIUM: 2290, ComplexityBin.COMPLEX: 13,
                  ComplexityBin.VERY_COMPLEX: 3}
SCORES = {ComplexityBin.SIMPLE: 1, ComplexityBin.MEDIUM: 4, ComplexityBin.COMPLEX: 8, ComplexityBin.VERY_COMPLEX: 12}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ratio", type=float, default=0.8)
    ap.add_argument("--target", type=int, default=3223)
    args = ap.parse_args()
    r = args.ratio
    n = sum(PUBLISHED_BINS.values())
    print(f"N = {n}, ratio*N = {r * n:.1f}")
    for label, lo, hi in (
        ("floor/ceil per bin", lambda x: math.floor(x), lambda x: math.ceil(x)),
        ("|t - ratio*n| <= 1", lambda x: math.ceil(x - 1), lambda x: math.floor(x + 1)),
    ):
        ranges = [range(lo(r * c), hi(r * c) + 1) for c in PUBLISHED_BINS.values()]
        totals = sorted({sum(t) for t in itertools.product(*ranges)})
        print(f"{label:>20}: reachable train totals {totals[0]}..{totals[-1]}; target {args.target} "
              f"{'reachable' if args.target in totals else 'NOT reachable'}")
    pairs = []
    for b, count in PUBLISHED_BINS.items():
        pairs += [make_pair(SCORES[b] * 100000 + k, pragma=pragma_with_score(SCORES[b])) for k in range(count)]
    s = split(pairs, r, 42)
    print(f"split stage (seed 42): train {len(s.train)}, test {len(s.test)}")


if __name__ == "__main__":
    main()

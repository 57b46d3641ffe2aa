"""Census of random block grids: how rare is tree-compatibility?

Samples dense random rational block grids of a given shape, checks how
often the blocks commute (equivalently, how often the induced map is
tree-compatible), and classifies the commuting 2x2 ones by joint normal
form.  By default the sample also mixes in grids built from the
two-parameter commuting families, which always pass, so both verdict
paths get exercised.

    python3 scripts/compat_census.py --samples 500 --m 3 --seed 7
"""

import argparse
import random
from collections import Counter
from fractions import Fraction

from rtcalc.phimaps import (
    AlreadyJD,
    NeedsAlgebraicExtension,
    NotCompatible,
    block_matrix,
    blocks_commute,
    build_JD,
    check_compat,
    classify_m2,
    from_blocks,
)


def rand_mat(rng, n, top):
    return [[Fraction(rng.randint(-top, top), rng.randint(1, 3)) for _ in range(n)] for _ in range(n)]


def sample_grid(rng, m, n, top, structured_share):
    if rng.random() < structured_share:
        form = rng.choice(("J", "D"))
        return build_JD(rand_mat(rng, m, top), rand_mat(rng, m, top), form), form
    grid = [[rand_mat(rng, n, top) for _ in range(m)] for _ in range(m)]
    return block_matrix(grid), None


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--m", type=int, default=2, help="edge dimension")
    ap.add_argument("--n", type=int, default=2, help="vertex dimension")
    ap.add_argument("--top", type=int, default=3, help="numerator range for entries")
    ap.add_argument("--structured-share", type=float, default=0.3,
                    help="fraction of samples drawn from the commuting families")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = random.Random(args.seed)
    outcomes = Counter()
    forms = Counter()
    for _ in range(args.samples):
        M, form = sample_grid(rng, args.m, args.n, args.top, args.structured_share)
        commute = blocks_commute(M)
        verdict = check_compat(from_blocks(M))
        agree = commute == (type(verdict).__name__ == "Compatible")
        if not agree:
            raise RuntimeError("commutation test and verdict disagree; this is a bug")
        outcomes["commuting" if commute else "noncommuting"] += 1
        if form is not None and not commute:
            raise RuntimeError(f"structured {form} grid failed to commute")
        if commute and args.n == 2:
            res = classify_m2(M)
            if isinstance(res, AlreadyJD):
                forms[res.form] += 1
            elif isinstance(res, NeedsAlgebraicExtension):
                forms["needs extension"] += 1
            elif isinstance(res, NotCompatible):
                raise RuntimeError("classifier refuted a commuting grid")

    total = args.samples
    print(f"samples={total} shape=({args.m},{args.n}) seed={args.seed}")
    for key in ("commuting", "noncommuting"):
        k = outcomes[key]
        print(f"  {key:13s} {k:5d}  ({k / total:.1%})")
    if forms:
        print("normal forms among the commuting grids:")
        for key, k in sorted(forms.items()):
            print(f"  {key:15s} {k:5d}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

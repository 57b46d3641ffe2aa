"""Growth experiment for the deformed grafting product on multi-indices.

Iterates x_{k+1} = x_k graft x_0 under phi^lambda for a few random
coefficient vectors and reports how term counts and coefficient sizes
grow compared to undeformed grafting.  A quick way to see how much the
binomial deformation thickens expansions as d and lambda vary.

    python3 scripts/spde_demo.py --d 1 --steps 4 --trials 3 --seed 11
"""

import argparse
import random
import time
from fractions import Fraction

from rtcalc.decorations import mi_unit, mi_zero
from rtcalc.prelie import graft_free, graft_phi
from rtcalc.spde import SpdeConfig, phi_lambda
from rtcalc.trees import leaf, node
from rtcalc.lincomb import LinComb


def seed_tree(d):
    zero = mi_zero(d)
    e0 = mi_unit(0, d)
    return LinComb.of(node(e0.add(e0), [(e0, leaf(zero))]))


def iterate(product, x0, a, steps):
    counts = []
    x = x0
    for _ in range(steps):
        x = product(x, a, x0)
        denoms = [c.denominator for _, c in x.items()]
        counts.append((len(x), max(denoms, default=1)))
    return counts


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, default=1)
    ap.add_argument("--steps", type=int, default=4)
    ap.add_argument("--trials", type=int, default=3)
    ap.add_argument("--top", type=int, default=2, help="numerator range for lambda entries")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = random.Random(args.seed)
    d = args.d
    x0 = seed_tree(d)
    a = mi_unit(0, d)

    free = iterate(graft_free, x0, a, args.steps)
    print(f"d={d} steps={args.steps} seed tree has {len(x0)} term")
    print("free grafting      " + "  ".join(f"{n:5d} terms" for n, _ in free))

    for trial in range(args.trials):
        lam = tuple(Fraction(rng.randint(-args.top, args.top), rng.randint(1, 3)) for _ in range(d + 1))
        phi = phi_lambda(SpdeConfig(d, lam))

        def product(x, lab, y):
            return graft_phi(phi, x, lab, y)

        t0 = time.monotonic()
        rows = iterate(product, x0, a, args.steps)
        dt = time.monotonic() - t0
        lam_text = ",".join(str(c) for c in lam)
        print(f"lambda=({lam_text})".ljust(19)
              + "  ".join(f"{n:5d} terms" for n, _ in rows)
              + f"   max denom {rows[-1][1]}   {dt:.2f}s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

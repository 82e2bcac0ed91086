"""Fraction of permutations within C0 radius r that stay [eps, alpha]-expansive.

For each certified instance the gap sup delta is the radius below which the
expansiveness gap argument guarantees stability; the sweep reports the
survival rate below and above it.
"""

import argparse
import json

from expshadow.expansivity import expansiveness_gap, is_eps_alpha_expansive
from fractions import Fraction

from expshadow.fixtures import product, random_system
from expshadow.stability import permutations_within
from expshadow.systems import c0_distance, fmt_rational


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=40)
    ap.add_argument("--max-n", type=int, default=6)
    args = ap.parse_args()

    below = [0, 0]
    above = [0, 0]
    for seed in range(args.count):
        # a light second factor gives non-vacuous certificates with nontrivial classes
        s1 = random_system(2 + seed % 2, seed=seed, max_weight=1 + seed % 4)
        s2 = random_system(2, seed=seed + 1000, max_weight=2)
        s = product(s1, s2, 1, Fraction(1, 10))
        if s.n > args.max_n:
            continue
        ds = sorted({s.orbit_sup(x, y) for x, y in s.pairs()})
        grid = sorted(set(ds) | {(a + b) / 2 for a, b in zip(ds, ds[1:])})
        # largest alpha with [alpha/2, alpha] certified
        found = [a for a in grid if a >= ds[0] and is_eps_alpha_expansive(s, a / 2, a).holds]
        if not found:
            continue
        alpha = found[-1]
        eps = alpha / 2
        gap, _ = expansiveness_gap(s, eps, alpha)
        for g in permutations_within(s, s.diameter + 1):
            ok = is_eps_alpha_expansive(s.with_map(g), eps, alpha).holds
            bucket = below if c0_distance(s, g) < gap else above
            bucket[0] += ok
            bucket[1] += 1
        print(f"{s.name}: eps={fmt_rational(eps)} alpha={fmt_rational(alpha)} gap={fmt_rational(gap)}")
    print(json.dumps({"within_gap": {"kept": below[0], "total": below[1]},
                      "beyond_gap": {"kept": above[0], "total": above[1]}}))
    assert below[0] == below[1], "a perturbation inside the gap lost expansiveness"


if __name__ == "__main__":
    main()

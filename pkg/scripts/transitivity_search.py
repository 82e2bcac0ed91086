"""How often is D <= alpha not an equivalence relation?

Scans random systems at every critical alpha and counts intransitive cases,
split by whether the system is alpha-semi-expansive there. Prints one
minimal example of each kind.
"""

import argparse
import json
from fractions import Fraction

from expshadow.errors import NotTransitive
from expshadow.expansivity import is_semi_expansive
from expshadow.fixtures import random_system
from expshadow.quotients import lewowicz_relation
from expshadow.systems import dump_system, fmt_rational


def critical_alphas(s):
    ds = sorted({s.orbit_sup(x, y) for x, y in s.pairs()})
    return sorted(set(ds) | {(a + b) / 2 for a, b in zip(ds, ds[1:])})


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=300)
    ap.add_argument("--max-n", type=int, default=7)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    tally = {"instances": 0, "intransitive": 0, "intransitive_semi": 0}
    example = None
    for i in range(args.count):
        seed = args.seed + i
        s = random_system(3 + seed % (args.max_n - 2), seed=seed, max_weight=1 + seed % 5)
        for a in critical_alphas(s):
            tally["instances"] += 1
            try:
                lewowicz_relation(s, a)
            except NotTransitive as exc:
                tally["intransitive"] += 1
                if is_semi_expansive(s, a).holds:
                    tally["intransitive_semi"] += 1
                if example is None or s.n < example[0].n:
                    example = (s, a, exc.witness)
    print(json.dumps(tally))
    if example:
        s, a, w = example
        print(f"smallest intransitive example: n={s.n}, alpha={fmt_rational(a)}, witness={w}")
        print(json.dumps(dump_system(s)))
    # semi-expansive instances must always be transitive
    assert tally["intransitive_semi"] == 0


if __name__ == "__main__":
    main()

"""Does the chain exponent k in R(U^k) = R(U) matter on small systems?

For every cover of a few small systems by "balls", compare the verdict of
R(U^k) within R(U) for k = 2..6. The certified exponent is 4; a cover whose
verdict changes with k is printed.
"""

import argparse
import itertools
import json

from expshadow.covers import Cover, is_U_semi_expansive
from expshadow.fixtures import cycle, line, random_system


def ball_covers(s, limit):
    balls = sorted({frozenset(y for y in range(s.n) if s.d(x, y) <= r)
                    for x in range(s.n) for r in {s.d(x, y) for y in range(s.n)}},
                   key=lambda b: (len(b), sorted(b)))
    seen = 0
    for size in range(1, len(balls) + 1):
        for fam in itertools.combinations(balls, size):
            if frozenset().union(*fam) == frozenset(range(s.n)):
                yield Cover.of(fam, s.n)
                seen += 1
                if seen >= limit:
                    return


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--random", type=int, default=10)
    ap.add_argument("--limit", type=int, default=400, help="covers per system")
    args = ap.parse_args()

    fixtures = [cycle(3), cycle(4), line(4), line(5)]
    fixtures += [random_system(4 + i % 2, seed=i, max_weight=3) for i in range(args.random)]
    ks = range(2, 7)
    counts = {k: 0 for k in ks}
    total = differing = 0
    for s in fixtures:
        for cover in ball_covers(s, args.limit):
            total += 1
            verdicts = [is_U_semi_expansive(s, cover, k).holds for k in ks]
            for k, v in zip(ks, verdicts):
                counts[k] += v
            if len(set(verdicts)) > 1:
                differing += 1
                if differing <= 3:
                    print(f"{s.name}: {cover.to_json(s.points)['sets']} -> "
                          + ", ".join(f"k={k}:{v}" for k, v in zip(ks, verdicts)))
    print(json.dumps({"covers": total, "semi_by_k": {str(k): c for k, c in counts.items()},
                      "verdict_depends_on_k": differing}))


if __name__ == "__main__":
    main()

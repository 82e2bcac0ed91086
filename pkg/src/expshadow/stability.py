"""Semiconjugacies q_g for perturbations g of an extension of an Anosov system.

Each g-orbit is a pseudo-orbit of f; a point alpha/4-shadowing it picks a class,
and q_g sends x to that class. On a finite space the C0 neighbourhood of f is a
finite set of permutations, often just {f}; continuity of q_g is automatic.
"""

from __future__ import annotations

import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import (AmbiguousClass, BadParameters, InvariantViolation, NoShadowingPoint,
                     PropertyFailure, TooLarge)
from .expansivity import expansivity_constant
from .quotients import Partition, QuotientSystem, build_quotient, lewowicz_relation
from .shadowing import certify_semi_anosov
from .systems import (FiniteMetricSystem, c0_distance, check_permutation, cycle_decomposition,
                      fmt_rational, parse_rational)

DEFAULT_ENUMERATION_CAP = 8


@dataclass(frozen=True)
class SemiconjugacyResult:
    g: tuple[int, ...]
    q_g: tuple[int, ...]
    verified_semiconjugacy: bool
    unique_in_neighborhood: bool
    c0_distance_to_q: Fraction
    c0_distance_to_f: Fraction
    delta: Optional[Fraction]
    solutions_in_ball: int

    @property
    def in_guaranteed_regime(self) -> bool:
        return self.delta is not None and self.c0_distance_to_f < self.delta


def _periodic_agree(sys, z, g, x, radius) -> bool:
    L = math.lcm(sys.period_of[z], len(_g_cycle(g, x)))
    a, b = z, x
    for _ in range(L):
        if not sys.d(a, b) < radius:
            return False
        a, b = sys.map[a], g[b]
    return True


def _g_cycle(g, x):
    cyc = [x]
    y = g[x]
    while y != x:
        cyc.append(y)
        y = g[y]
    return cyc


def semiconjugacy_solutions(q: QuotientSystem, g: Sequence[int], radius) -> list[list[int]]:
    """Per g-cycle, the starting classes c giving f_R h = h g with d_R(h, q) < radius.

    A solution is fixed by its value c at one point of each g-cycle (then
    h(g^i x) = f_R^i c), and needs f_R^L c = c for a cycle of length L. The
    ball condition is pointwise, so solutions form a product of per-cycle sets.
    """
    Q = q.quotient
    options = []
    for cyc in cycle_decomposition(g):
        ok = []
        for c in range(Q.n):
            w, good = c, True
            for x in cyc:
                if not Q.d(w, q.projection[x]) < radius:
                    good = False
                    break
                w = Q.map[w]
            if good and w == c:
                ok.append(c)
        options.append(ok)
    return options


def build_semiconjugacy(sys: FiniteMetricSystem, partition: Partition, alpha, g,
                        delta=None, quotient: Optional[QuotientSystem] = None) -> SemiconjugacyResult:
    alpha = parse_rational(alpha)
    g = check_permutation(g, sys.n)
    if partition != lewowicz_relation(sys, alpha):
        raise BadParameters("partition is not R(d, alpha)")
    if delta is None:
        cert = certify_semi_anosov(sys, alpha)
        delta = cert.delta
    q = quotient or build_quotient(sys, partition)
    Q = q.quotient
    radius = alpha / 4
    q_g = []
    for x in range(sys.n):
        shadows = [z for z in range(sys.n) if _periodic_agree(sys, z, g, x, radius)]
        if not shadows:
            raise NoShadowingPoint(
                f"no point {fmt_rational(radius)}-shadows the g-orbit of {sys.points[x]}",
                witness={"kind": "no_shadowing_point", "alpha": fmt_rational(alpha),
                         "g": list(g), "x": sys.points[x]})
        classes = {partition.class_of[z] for z in shadows}
        if len(classes) > 1:
            raise AmbiguousClass(f"shadowing points of {sys.points[x]} lie in different classes")
        q_g.append(classes.pop())
    q_g = tuple(q_g)
    semi = all(Q.map[q_g[x]] == q_g[g[x]] for x in range(sys.n))
    if not semi:
        raise InvariantViolation("q_g fails f_R q_g = q_g g")
    dist = max(Q.d(q_g[x], q.projection[x]) for x in range(sys.n))
    alpha_R = expansivity_constant(Q)
    options = semiconjugacy_solutions(q, g, alpha_R / 2)
    count = math.prod(len(o) for o in options)
    in_ball = dist < alpha_R / 2
    mine = [q_g[cyc[0]] for cyc in cycle_decomposition(g)]
    if in_ball:
        unique = count == 1 and all(o == [c] for o, c in zip(options, mine))
    else:
        unique = count <= 1
    return SemiconjugacyResult(g, q_g, semi, unique, dist, c0_distance(sys, g),
                               delta, count)


def permutations_within(sys: FiniteMetricSystem, radius) -> list[tuple[int, ...]]:
    """All permutations g with max_x d(f x, g x) < radius, lexicographic."""
    radius = parse_rational(radius)
    n = sys.n
    allowed = [[y for y in range(n) if sys.d(sys.map[x], y) < radius] for x in range(n)]
    out, used, cur = [], [False] * n, []

    def extend(x):
        if x == n:
            out.append(tuple(cur))
            return
        for y in allowed[x]:
            if not used[y]:
                used[y] = True
                cur.append(y)
                extend(x + 1)
                cur.pop()
                used[y] = False

    extend(0)
    return out


def sample_permutations_within(sys: FiniteMetricSystem, radius, count: int, seed: int = 0,
                               attempts: int = 50) -> list[tuple[int, ...]]:
    radius = parse_rational(radius)
    rng = random.Random(seed)
    n = sys.n
    allowed = [[y for y in range(n) if sys.d(sys.map[x], y) < radius] for x in range(n)]
    found = {tuple(sys.map)}
    for _ in range(count * attempts):
        if len(found) >= count:
            break
        used, g = set(), []
        for x in range(n):
            choices = [y for y in allowed[x] if y not in used]
            if not choices:
                break
            y = rng.choice(choices)
            used.add(y)
            g.append(y)
        else:
            found.add(tuple(g))
    return sorted(found)


@dataclass(frozen=True)
class SweepEntry:
    g: tuple[int, ...]
    success: bool
    c0_to_f: Fraction
    distance: Optional[Fraction] = None
    unique: Optional[bool] = None
    error: Optional[str] = None
    witness: Optional[dict] = None

    def to_json(self) -> dict:
        out = {"g": list(self.g), "success": self.success,
               "c0_to_f": fmt_rational(self.c0_to_f),
               "distance": None if self.distance is None else fmt_rational(self.distance),
               "unique": self.unique, "error": self.error}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass(frozen=True)
class SweepReport:
    radius: Fraction
    delta: Optional[Fraction]
    entries: tuple[SweepEntry, ...]
    sampled: bool = False

    @property
    def count(self) -> int:
        return len(self.entries)

    @property
    def successes(self) -> int:
        return sum(e.success for e in self.entries)

    @property
    def success_rate(self) -> Fraction:
        return Fraction(self.successes, self.count) if self.count else Fraction(0)

    @property
    def max_distance(self):
        ds = [e.distance for e in self.entries if e.distance is not None]
        return max(ds) if ds else None

    @property
    def all_unique(self) -> bool:
        return all(e.unique for e in self.entries if e.success)

    def to_json(self, points=None) -> dict:
        return {"radius": fmt_rational(self.radius),
                "delta": None if self.delta is None else fmt_rational(self.delta),
                "sampled": self.sampled,
                "summary": {"count": self.count, "successes": self.successes,
                            "success_rate": fmt_rational(self.success_rate),
                            "max_distance": None if self.max_distance is None
                            else fmt_rational(self.max_distance),
                            "all_unique": self.all_unique},
                "entries": [e.to_json() for e in self.entries]}


def _sweep_one(args) -> SweepEntry:
    sys, partition, alpha, g, delta, q = args
    c0 = c0_distance(sys, g)
    try:
        res = build_semiconjugacy(sys, partition, alpha, g, delta=delta, quotient=q)
    except PropertyFailure as exc:
        return SweepEntry(g, False, c0, error=type(exc).__name__, witness=exc.witness)
    return SweepEntry(g, True, c0, res.c0_distance_to_q, res.unique_in_neighborhood)


def stability_sweep(sys: FiniteMetricSystem, partition: Partition, alpha, radius,
                    enumeration_cap: int = DEFAULT_ENUMERATION_CAP, sample: Optional[int] = None,
                    seed: int = 0, jobs: int = 1) -> SweepReport:
    alpha, radius = parse_rational(alpha), parse_rational(radius)
    if sys.n > enumeration_cap and sample is None:
        raise TooLarge(f"{sys.n} points exceed the enumeration cap {enumeration_cap}; "
                       f"pass a sample count")
    if sample is None:
        perms = permutations_within(sys, radius)
    else:
        perms = sample_permutations_within(sys, radius, sample, seed)
    cert = certify_semi_anosov(sys, alpha)
    q = build_quotient(sys, partition)
    work = [(sys, partition, alpha, g, cert.delta, q) for g in perms]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(_sweep_one, work))
    else:
        entries = [_sweep_one(w) for w in work]
    return SweepReport(radius, cert.delta, tuple(entries), sampled=sample is not None)

"""Cover algebra: R(C), chain powers C^k, U-semi expansiveness, generators.

On a finite discrete space every set is clopen, so closures are identities and
the closed cover of a finite open cover is the cover itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import AlphaTooLarge, InvariantViolation, NotUSemiExpansive, ParseError
from .expansivity import is_expansive
from .quotients import (Partition, QuotientSystem, build_quotient, quotient_pair_witness,
                        relation_partition, saturated_core)
from .systems import FiniteMetricSystem, fmt_rational, parse_rational

CERTIFIED_POWER = 4


@dataclass(frozen=True)
class Cover:
    sets: tuple[frozenset, ...]
    n: int

    def __post_init__(self):
        sets = tuple(frozenset(s) for s in self.sets)
        if any(not s for s in sets):
            raise ParseError("cover has an empty member")
        union = frozenset().union(*sets) if sets else frozenset()
        if union != frozenset(range(self.n)):
            missing = sorted(set(range(self.n)) - union)
            raise ParseError(f"cover misses points {missing}")
        object.__setattr__(self, "sets", sets)

    @classmethod
    def of(cls, sets, n: int) -> "Cover":
        return cls(tuple(frozenset(s) for s in sets), n)

    def canonical(self) -> tuple[tuple[int, ...], ...]:
        return tuple(sorted({tuple(sorted(s)) for s in self.sets}))

    def to_json(self, points) -> dict:
        return {"sets": [[points[x] for x in s] for s in self.canonical()]}


def load_cover(data, sys: FiniteMetricSystem) -> Cover:
    try:
        sets = data["sets"]
    except (KeyError, TypeError):
        raise ParseError("cover JSON needs a 'sets' list") from None
    return Cover.of([[sys.index(p) for p in s] for s in sets], sys.n)


@dataclass(frozen=True)
class CoverRelation:
    pairs: tuple[tuple[bool, ...], ...]
    transitive: bool

    def related(self, x: int, y: int) -> bool:
        return self.pairs[x][y]

    def subset_of(self, other: "CoverRelation") -> bool:
        return all(not a or b for ra, rb in zip(self.pairs, other.pairs) for a, b in zip(ra, rb))

    def first_not_in(self, other: "CoverRelation"):
        n = len(self.pairs)
        for x in range(n):
            for y in range(x + 1, n):
                if self.pairs[x][y] and not other.pairs[x][y]:
                    return x, y
        return None

    def off_diagonal_pair(self):
        n = len(self.pairs)
        for x in range(n):
            for y in range(x + 1, n):
                if self.pairs[x][y]:
                    return x, y
        return None

    def is_identity(self) -> bool:
        return self.off_diagonal_pair() is None


def _transitive(rel) -> bool:
    n = len(rel)
    return all(not (rel[x][y] and rel[y][z]) or rel[x][z]
               for x in range(n) for y in range(n) for z in range(n))


def cover_relation(sys: FiniteMetricSystem, cover: Cover) -> CoverRelation:
    """x ~ y iff {f^n x, f^n y} lies inside one member for every n."""
    n = sys.n
    if cover.n != n:
        raise ParseError("cover and system sizes differ")
    together = [[any(x in s and y in s for s in cover.sets) for y in range(n)] for x in range(n)]
    rel = [[False] * n for _ in range(n)]
    for x in range(n):
        rel[x][x] = True
        for y in range(x + 1, n):
            a, b = x, y
            ok = True
            for _ in range(sys.pair_period(x, y)):
                if not together[a][b]:
                    ok = False
                    break
                a, b = sys.map[a], sys.map[b]
            rel[x][y] = rel[y][x] = ok
    frozen = tuple(tuple(r) for r in rel)
    return CoverRelation(frozen, _transitive(frozen))


def cover_power(cover: Cover, k: int) -> Cover:
    """All unions C_1 u ... u C_k of chains with C_i meeting C_{i+1}."""
    if k < 1:
        raise ValueError("k must be positive")
    members = list(dict.fromkeys(cover.sets))
    states = {(s, s) for s in members}  # (union so far, last link)
    for _ in range(k - 1):
        states = {(union | nxt, nxt) for union, last in states
                  for nxt in members if last & nxt}
    unions = sorted({union for union, _ in states}, key=lambda s: (len(s), sorted(s)))
    return Cover(tuple(unions), cover.n)


@dataclass(frozen=True)
class USemiResult:
    holds: bool
    witness: Optional[tuple[int, int]]
    relation: CoverRelation
    power_relation: CoverRelation
    k: int = CERTIFIED_POWER


def is_U_semi_expansive(sys: FiniteMetricSystem, cover: Cover, k: int = CERTIFIED_POWER) -> USemiResult:
    """R(U^k) contained in R(U); k = 4 is the certified exponent, others are experiments."""
    rel = cover_relation(sys, cover)
    power_rel = cover_relation(sys, cover_power(cover, k))
    witness = power_rel.first_not_in(rel)
    holds = witness is None
    if holds:
        if power_rel != rel:
            raise InvariantViolation("R(U) is not contained in R(U^k)")
        if k >= 2 and not rel.transitive:
            raise InvariantViolation("R(U) = R(U^k) but R(U) is not transitive")
    return USemiResult(holds, witness, rel, power_rel, k)


def is_generator(sys: FiniteMetricSystem, cover: Cover):
    """(True, None) when R(cover) is the identity, else (False, offending pair)."""
    witness = cover_relation(sys, cover).off_diagonal_pair()
    return witness is None, witness


@dataclass(frozen=True)
class CoverPipelineResult:
    partition: Partition
    quotient: QuotientSystem
    quotient_cover: Cover
    generator: bool
    witness: Optional[tuple[int, int]] = None


def cover_quotient_pipeline(sys: FiniteMetricSystem, cover: Cover) -> CoverPipelineResult:
    """Quotient by R(U) and the quotient cover {q(U^(x))} with U(x) the star of x."""
    semi = is_U_semi_expansive(sys, cover)
    if not semi.holds:
        x, y = semi.witness
        raise NotUSemiExpansive(
            f"R(U^4) is not contained in R(U): {sys.points[x]}, {sys.points[y]}",
            witness={"kind": "cover_pair", "x": sys.points[x], "y": sys.points[y],
                     "cover": cover.to_json(sys.points)["sets"]})
    part = relation_partition(sys, semi.relation.related)
    q = build_quotient(sys, part)
    members = set()
    for x in range(sys.n):
        star = set().union(*(s for s in cover.sets if x in s))
        core = saturated_core(part, star)
        members.add(frozenset(part.class_of[y] for y in core))
    qcover = Cover(tuple(sorted(members, key=sorted)), q.quotient.n)
    ok, witness = is_generator(q.quotient, qcover)
    return CoverPipelineResult(part, q, qcover, ok, witness)


@dataclass(frozen=True)
class PullbackResult:
    radius: Fraction
    quotient_cover: Cover
    cover: Cover
    semi: USemiResult
    relation_matches: bool

    @property
    def holds(self) -> bool:
        return self.semi.holds and self.relation_matches


def pullback_cover(q: QuotientSystem, alpha_R) -> PullbackResult:
    """U = q^{-1}(U_R) with U_R the quotient balls of radius alpha_R/8.

    Open balls of radius alpha_R/8 have diameter below alpha_R/4, so a 4-chain
    of members spans less than alpha_R and the quotient's expansivity forces
    equality of classes.
    """
    alpha_R = parse_rational(alpha_R)
    Q = q.quotient
    if not is_expansive(Q, alpha_R):
        raise AlphaTooLarge(f"quotient is not {fmt_rational(alpha_R)}-expansive",
                            witness=quotient_pair_witness(q, alpha_R))
    radius = alpha_R / 8
    balls = {frozenset(b for b in range(Q.n) if Q.d(a, b) < radius) for a in range(Q.n)}
    qcover = Cover(tuple(sorted(balls, key=sorted)), Q.n)
    pulled = {frozenset(x for x in range(q.base.n) if q.projection[x] in ball) for ball in balls}
    cover = Cover(tuple(sorted(pulled, key=sorted)), q.base.n)
    semi = is_U_semi_expansive(q.base, cover)
    matches = semi.holds and relation_partition(q.base, semi.relation.related) == q.partition
    return PullbackResult(radius, qcover, cover, semi, matches)

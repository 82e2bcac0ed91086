"""The relation R(d, alpha), quotient systems and the Lewowicz metric.

The quotient space of a finite system is metrised by the Hausdorff distance
between classes. Any compatible metric would do on a finite space; Hausdorff
is canonical and stays exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import (AlphaTooLarge, BadThresholds, DegenerateMetric, InvariantViolation,
                     NotCompatible, NotSemiExpansive, NotTransitive, ParseError)
from .expansivity import close_pair_witness, expansivity_constant, is_expansive, is_semi_expansive
from .systems import FiniteMetricSystem, fmt_rational, parse_rational


@dataclass(frozen=True)
class Partition:
    classes: tuple[tuple[int, ...], ...]
    class_of: tuple[int, ...]
    # whether the generating system was alpha-semi expansive, when known
    semi_expansive: Optional[bool] = field(default=None, compare=False)

    @classmethod
    def from_classes(cls, classes, n: Optional[int] = None, semi_expansive=None) -> "Partition":
        blocks = [tuple(sorted(set(int(x) for x in c))) for c in classes]
        if any(not b for b in blocks):
            raise ParseError("partition has an empty class")
        blocks.sort()
        total = sum(len(b) for b in blocks)
        n = total if n is None else n
        class_of = [-1] * n
        for k, b in enumerate(blocks):
            for x in b:
                if not 0 <= x < n or class_of[x] != -1:
                    raise ParseError(f"partition classes overlap or leave range at point {x}")
                class_of[x] = k
        if total != n:
            raise ParseError("partition does not cover every point")
        return cls(tuple(blocks), tuple(class_of), semi_expansive)

    @classmethod
    def identity(cls, n: int) -> "Partition":
        return cls.from_classes([[x] for x in range(n)], n)

    @classmethod
    def total(cls, n: int) -> "Partition":
        return cls.from_classes([list(range(n))], n)

    @property
    def n(self) -> int:
        return len(self.class_of)

    def related(self, x: int, y: int) -> bool:
        return self.class_of[x] == self.class_of[y]

    def incompatibility(self, perm: Sequence[int]):
        """A pair x ~ y with f x not ~ f y, or None when compatible."""
        for block in self.classes:
            for y in block[1:]:
                if not self.related(perm[block[0]], perm[y]):
                    return block[0], y
        return None

    def image(self, perm: Sequence[int]) -> "Partition":
        return Partition.from_classes([[perm[x] for x in b] for b in self.classes], self.n)

    def to_json(self, points: Sequence[str]) -> dict:
        return {"classes": [[points[x] for x in b] for b in self.classes]}


def load_partition(data, sys: FiniteMetricSystem) -> Partition:
    try:
        classes = data["classes"]
    except (KeyError, TypeError):
        raise ParseError("partition JSON needs a 'classes' list") from None
    return Partition.from_classes([[sys.index(p) for p in c] for c in classes], sys.n)


def relation_partition(sys: FiniteMetricSystem, related, semi_expansive=None) -> Partition:
    """Partition from a reflexive symmetric predicate; NotTransitive if it is not one."""
    n = sys.n
    for y in range(n):
        for x in range(n):
            if x == y or not related(x, y):
                continue
            for z in range(n):
                if z != x and related(y, z) and not related(x, z):
                    names = [sys.points[v] for v in (x, y, z)]
                    raise NotTransitive(
                        f"relation is not transitive: {names[0]} ~ {names[1]} ~ {names[2]}"
                        f" but {names[0]} !~ {names[2]}",
                        witness={"kind": "intransitive_triple", "x": names[0], "y": names[1],
                                 "z": names[2]})
    seen = [False] * n
    classes = []
    for x in range(n):
        if seen[x]:
            continue
        block = [y for y in range(n) if related(x, y)]
        for y in block:
            seen[y] = True
        classes.append(block)
    return Partition.from_classes(classes, n, semi_expansive)


def lewowicz_relation(sys: FiniteMetricSystem, alpha) -> Partition:
    """Classes of x ~ y iff d(f^n x, f^n y) <= alpha for all n."""
    alpha = parse_rational(alpha)
    if alpha <= 0:
        raise BadThresholds("alpha must be positive")
    semi = is_semi_expansive(sys, alpha).holds
    try:
        part = relation_partition(sys, lambda x, y: sys.orbit_sup(x, y) <= alpha, semi)
    except NotTransitive as exc:
        exc.witness["alpha"] = fmt_rational(alpha)
        raise
    return part


def class_diameters(partition: Partition, sys: FiniteMetricSystem) -> list[Fraction]:
    return [max(sys.d(x, y) for x in b for y in b) for b in partition.classes]


def hausdorff(sys: FiniteMetricSystem, a: Sequence[int], b: Sequence[int]) -> Fraction:
    forward = max(min(sys.d(x, y) for y in b) for x in a)
    backward = max(min(sys.d(x, y) for x in a) for y in b)
    return max(forward, backward)


@dataclass(frozen=True)
class QuotientSystem:
    base: FiniteMetricSystem
    partition: Partition
    quotient: FiniteMetricSystem

    @property
    def projection(self) -> tuple[int, ...]:
        return self.partition.class_of

    def d_R(self, x: int, y: int) -> Fraction:
        """Quotient distance between the classes of two base points."""
        return self.quotient.d(self.projection[x], self.projection[y])

    def to_json(self) -> dict:
        from .systems import dump_system
        return {"partition": self.partition.to_json(self.base.points),
                "quotient": dump_system(self.quotient)}


def class_name(sys: FiniteMetricSystem, block: Sequence[int]) -> str:
    return "{" + ",".join(sys.points[x] for x in block) + "}"


def build_quotient(sys: FiniteMetricSystem, partition: Partition) -> QuotientSystem:
    if partition.n != sys.n:
        raise ParseError("partition and system sizes differ")
    bad = partition.incompatibility(sys.map)
    if bad is not None:
        x, y = bad
        raise NotCompatible(
            f"partition is not compatible with the map: {sys.points[x]} ~ {sys.points[y]} "
            f"but their images are not related",
            witness={"kind": "incompatible_pair", "x": sys.points[x], "y": sys.points[y],
                     "classes": partition.to_json(sys.points)["classes"]})
    blocks = partition.classes
    k = len(blocks)
    metric = [[Fraction(0)] * k for _ in range(k)]
    for i in range(k):
        for j in range(i + 1, k):
            h = hausdorff(sys, blocks[i], blocks[j])
            if h == 0:
                raise DegenerateMetric("two distinct classes at Hausdorff distance 0")
            metric[i][j] = metric[j][i] = h
    perm = tuple(partition.class_of[sys.map[b[0]]] for b in blocks)
    quotient = FiniteMetricSystem(tuple(class_name(sys, b) for b in blocks), metric, perm,
                                  name=f"{sys.name or 'M'}/R")
    q = QuotientSystem(sys, partition, quotient)
    for x in range(sys.n):
        if quotient.map[q.projection[x]] != q.projection[sys.map[x]]:
            raise InvariantViolation("projection does not intertwine the maps")
    return q


@dataclass(frozen=True)
class LewowiczMetricCertificate:
    alpha: Fraction
    K: Fraction
    d1: tuple[tuple[Fraction, ...], ...]
    system: FiniteMetricSystem
    verified_semi_expansive: bool
    verified_relation_match: bool

    def to_json(self) -> dict:
        return {"alpha": fmt_rational(self.alpha), "K": fmt_rational(self.K),
                "d1": [[fmt_rational(v) for v in row] for row in self.d1],
                "verified_semi_expansive": self.verified_semi_expansive,
                "verified_relation_match": self.verified_relation_match}


def lewowicz_metric_matrix(q: QuotientSystem, K: Fraction):
    n = q.base.n
    return tuple(tuple(q.d_R(x, y) + K * q.base.d(x, y) for y in range(n)) for x in range(n))


def quotient_pair_witness(q: QuotientSystem, alpha) -> Optional[dict]:
    """Two classes whose quotient orbits stay within alpha, tagged with the partition."""
    w = close_pair_witness(q.quotient, alpha)
    if w is not None:
        w["partition"] = q.partition.to_json(q.base.points)["classes"]
    return w


def lewowicz_metric(q: QuotientSystem, alpha) -> LewowiczMetricCertificate:
    """d1 = d_R([x],[y]) + K d(x,y) with K = alpha / (2 diam + 1).

    Under d1 the base is alpha-semi expansive and R(d1, alpha) is the given
    partition, whenever the quotient is alpha-expansive.
    """
    alpha = parse_rational(alpha)
    if alpha <= 0:
        raise BadThresholds("alpha must be positive")
    if not is_expansive(q.quotient, alpha):
        raise AlphaTooLarge(
            f"quotient is not {fmt_rational(alpha)}-expansive "
            f"(expansivity constants lie below {fmt_rational(expansivity_constant(q.quotient))})",
            witness=quotient_pair_witness(q, alpha))
    K = alpha / (2 * q.base.diameter + 1)
    d1 = lewowicz_metric_matrix(q, K)
    sys1 = q.base.with_metric(d1, name=f"{q.base.name or 'M'}[d1]")
    semi = is_semi_expansive(sys1, alpha).holds
    try:
        match = lewowicz_relation(sys1, alpha) == q.partition
    except NotTransitive:
        match = False
    return LewowiczMetricCertificate(alpha, K, d1, sys1, semi, match)


@dataclass(frozen=True)
class ExpansivityCoverResult:
    quotient: QuotientSystem
    cover: object  # covers.Cover on the quotient
    covers_space: bool
    valid: bool
    witness: Optional[tuple[int, int]] = None


def saturated_core(partition: Partition, members) -> list[int]:
    """{y : [y] is contained in members}."""
    members = set(members)
    return [y for y in range(partition.n)
            if all(z in members for z in partition.classes[partition.class_of[y]])]


def expansivity_cover(sys: FiniteMetricSystem, alpha, partition: Partition) -> ExpansivityCoverResult:
    """Quotient cover {q(U^_x)}, U_x = B_{alpha/2}(x), and its validity as an expansivity cover."""
    from .covers import Cover, cover_relation

    alpha = parse_rational(alpha)
    cert = is_semi_expansive(sys, alpha)
    if not cert.holds:
        raise NotSemiExpansive(f"not {fmt_rational(alpha)}-semi expansive",
                               witness=cert.to_json().get("witness"))
    if lewowicz_relation(sys, alpha) != partition:
        raise BadThresholds("partition is not R(d, alpha)")
    q = build_quotient(sys, partition)
    sets = []
    for x in range(sys.n):
        ball = [y for y in range(sys.n) if sys.d(x, y) < alpha / 2]
        core = saturated_core(partition, ball)
        sets.append(frozenset(partition.class_of[y] for y in core))
    members = sorted(set(s for s in sets if s), key=lambda s: sorted(s))
    covers_space = set().union(*members) == set(range(q.quotient.n))
    if not covers_space:
        raise InvariantViolation("quotient sets fail to cover the quotient")
    cover = Cover(tuple(members), q.quotient.n)
    rel = cover_relation(q.quotient, cover)
    witness = rel.off_diagonal_pair()
    return ExpansivityCoverResult(q, cover, covers_space, witness is None, witness)

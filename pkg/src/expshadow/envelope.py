"""Periodic truncation of the sequence space and the shadowing envelope.

The full space of bi-sequences is infinite even over a finite base, so we keep
the P-periodic sequences with P a multiple of the base order: the embedding
x -> (f^n x) lands inside, and the shift restricts to a rotation. Statements
are verified on this submodel only; larger P refines it.

For P-periodic sequences the weighted sum over all k in Z groups by residue:

    d(xi, eta) = sum_{r < P} c_r d(x_r, y_r),
    c_r = (2^-r + 2^(r-P)) / (1 - 2^-P) = (2^(P-r) + 2^r) / (2^P - 1),

and sum_r c_r = 3 = sum_k 2^-|k|.

Membership in the rho-space uses d(f x_k, x_{k+1}) <= rho (closed), while
pseudo-orbits use a strict < delta.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import BadParameters, BadPeriod, InvariantViolation, NoSuchRho, NotExpansive, ResourceLimit
from .expansivity import (ExpansivityCertificate, close_pair_witness, expansivity_constant,
                          is_eps_alpha_expansive, is_expansive)
from .graphs import LabeledGraph
from .quotients import QuotientSystem, build_quotient, lewowicz_relation
from .shadowing import (INF, decide_shadowing, largest_holding, pair_pseudo_orbit_expansiveness,
                        transition_values)
from .systems import FiniteMetricSystem, fmt_rational, parse_rational, scaled_integer_matrix

DEFAULT_ELEMENT_CAP = int(os.environ.get("EXPSHADOW_ELEMENT_CAP", "1000"))


def sigma_weights(P: int) -> tuple[Fraction, ...]:
    if P < 1:
        raise BadPeriod("period must be positive")
    den = 2**P - 1
    return tuple(Fraction(2 ** (P - r) + 2**r, den) for r in range(P))


def periodic_distance(base: FiniteMetricSystem, a: Sequence[int], b: Sequence[int]) -> Fraction:
    """Weighted distance between the periodic extensions of two finite words."""
    L = math.lcm(len(a), len(b))
    w = sigma_weights(L)
    return sum((w[r] * base.d(a[r % len(a)], b[r % len(b)]) for r in range(L)), Fraction(0))


def _rotate(seq, k=1):
    k %= len(seq)
    return tuple(seq[k:]) + tuple(seq[:k])


def _count_closed_walks(adj: list[list[bool]], length: int) -> int:
    n = len(adj)
    A = [[int(v) for v in row] for row in adj]
    R = [[int(i == j) for j in range(n)] for i in range(n)]
    k = length
    while k:
        if k & 1:
            R = [[sum(R[i][t] * A[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        A = [[sum(A[i][t] * A[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        k >>= 1
    return sum(R[i][i] for i in range(n))


def _closed_walks(adj: list[list[bool]], length: int) -> list[tuple[int, ...]]:
    n = len(adj)
    out = []
    cur = []

    def extend():
        if len(cur) == length:
            if adj[cur[-1]][cur[0]]:
                out.append(tuple(cur))
            return
        last = cur[-1]
        for y in range(n):
            if adj[last][y]:
                cur.append(y)
                extend()
                cur.pop()

    for x in range(n):
        cur.append(x)
        extend()
        cur.pop()
    return out


@dataclass(frozen=True)
class PeriodicSequenceSpace:
    base: FiniteMetricSystem
    period: int
    rho: Fraction
    elements: tuple[tuple[int, ...], ...]
    weights: tuple[Fraction, ...]
    system: FiniteMetricSystem

    def element_index(self, xi) -> int:
        xi = tuple(self.base.index(v) for v in xi)
        return self.system.index(self.element_name(xi))

    def element_name(self, xi) -> str:
        return "(" + ",".join(self.base.points[v] for v in xi) + ")"

    @property
    def size(self) -> int:
        return len(self.elements)


def _check_period(base: FiniteMetricSystem, P: int):
    if P < 1 or P % base.order:
        raise BadPeriod(f"period {P} is not a positive multiple of the map order {base.order}")


def build_periodic_sigma(base: FiniteMetricSystem, P: int, rho,
                         element_cap: int = DEFAULT_ELEMENT_CAP) -> PeriodicSequenceSpace:
    _check_period(base, P)
    rho = parse_rational(rho)
    if rho < 0:
        raise BadParameters("rho must be non-negative")
    n = base.n
    adj = [[base.d(base.map[x], y) <= rho for y in range(n)] for x in range(n)]
    count = _count_closed_walks(adj, P)
    if count > element_cap:
        raise ResourceLimit(f"period-{P} space at rho={fmt_rational(rho)} has {count} elements, "
                            f"cap is {element_cap}")
    elements = tuple(_closed_walks(adj, P))
    weights = sigma_weights(P)
    E = np.array(elements, dtype=np.int64).reshape(len(elements), P)
    M, den = scaled_integer_matrix(base.metric)
    wnum = [2 ** (P - r) + 2**r for r in range(P)]
    big = int(np.max(M)) * sum(wnum) if M.size else 0
    dtype = np.int64 if big < 2**61 else object
    dist = np.zeros((len(elements), len(elements)), dtype=dtype)
    Mt = M.astype(dtype)
    for r in range(P):
        col = E[:, r]
        dist = dist + Mt[np.ix_(col, col)] * wnum[r]
    scale = den * (2**P - 1)
    metric = tuple(tuple(Fraction(int(v), scale) for v in row) for row in dist)
    pos = {e: i for i, e in enumerate(elements)}
    shift = tuple(pos[_rotate(e)] for e in elements)
    names = tuple("(" + ",".join(base.points[v] for v in e) + ")" for e in elements)
    system = FiniteMetricSystem(names, metric, shift,
                                name=f"Sigma[{base.name or 'M'},P={P},rho={fmt_rational(rho)}]")
    return PeriodicSequenceSpace(base, P, rho, elements, weights, system)


def sigma_metric(space: PeriodicSequenceSpace, xi, eta) -> Fraction:
    xi = [space.base.index(v) for v in xi]
    eta = [space.base.index(v) for v in eta]
    if len(xi) != space.period or len(eta) != space.period:
        raise BadParameters("elements must have length P")
    return sum((c * space.base.d(a, b) for c, a, b in zip(space.weights, xi, eta)), Fraction(0))


def orbit_word(base: FiniteMetricSystem, x: int, P: int) -> tuple[int, ...]:
    return tuple(base.orbit(x, P))


@dataclass(frozen=True)
class Embedding:
    image: tuple[int, ...]       # base point -> element index
    injective: bool
    intertwines: bool


def embed(base: FiniteMetricSystem, space: PeriodicSequenceSpace) -> Embedding:
    """x -> (x, f x, ..., f^{P-1} x), checking injectivity and shift . embed = embed . f."""
    pos = {e: i for i, e in enumerate(space.elements)}
    image = []
    for x in range(base.n):
        word = orbit_word(base, x, space.period)
        if word not in pos:
            raise InvariantViolation(f"orbit of {base.points[x]} is not an element")
        image.append(pos[word])
    image = tuple(image)
    injective = len(set(image)) == base.n
    intertwines = all(space.system.map[image[x]] == image[base.map[x]] for x in range(base.n))
    return Embedding(image, injective, intertwines)


# -- shadowing of image pseudo-orbits -------------------------------------------------

def embedded_distance(base: FiniteMetricSystem, u: int, v: int) -> Fraction:
    """Distance between the embedded orbits of u and v."""
    return periodic_distance(base, orbit_word(base, u, base.order), orbit_word(base, v, base.order))


@dataclass(frozen=True)
class ImageShadowingReport:
    epsilon: Fraction
    delta: Fraction
    holds: bool
    pseudo_orbits: int
    worst_distance: Optional[Fraction]
    worst_orbit: Optional[tuple[int, ...]]
    rho_needed: Fraction
    in_space: bool
    shadow_points_exact: bool

    def to_json(self, points) -> dict:
        return {"epsilon": fmt_rational(self.epsilon), "delta": fmt_rational(self.delta),
                "holds": self.holds, "pseudo_orbits": self.pseudo_orbits,
                "worst_distance": None if self.worst_distance is None
                else fmt_rational(self.worst_distance),
                "worst_orbit": None if self.worst_orbit is None
                else [points[x] for x in self.worst_orbit],
                "rho_needed": fmt_rational(self.rho_needed), "in_space": self.in_space,
                "shadow_points_exact": self.shadow_points_exact}


def verify_image_shadowing(space: PeriodicSequenceSpace, epsilon, delta, max_Q: int,
                           element_cap: int = DEFAULT_ELEMENT_CAP) -> ImageShadowingReport:
    """Periodic delta-pseudo-orbits (iota x_n) of the shift are eps-shadowed by xi = (x_n).

    Checked for every period Q <= max_Q that is a multiple of the base order.
    """
    epsilon, delta = parse_rational(epsilon), parse_rational(delta)
    if epsilon <= 0 or delta <= 0:
        raise BadParameters("thresholds must be positive")
    base = space.base
    n = base.n
    # shift(iota u) = iota(f u), so the step condition compares iota(f x_n) with iota(x_{n+1})
    emb = [[embedded_distance(base, u, v) for v in range(n)] for u in range(n)]
    adj = [[emb[base.map[x]][y] < delta for y in range(n)] for x in range(n)]
    total, worst, worst_orbit, rho_needed = 0, None, None, Fraction(0)
    all_ok = exact = True
    for Q in range(base.order, max_Q + 1, base.order):
        count = _count_closed_walks(adj, Q)
        if total + count > element_cap:
            raise ResourceLimit(f"more than {element_cap} periodic pseudo-orbits to check")
        for xi in _closed_walks(adj, Q):
            total += 1
            rho_needed = max(rho_needed, max(base.d(base.map[xi[k]], xi[(k + 1) % Q])
                                             for k in range(Q)))
            far = max(periodic_distance(base, _rotate(xi, k), orbit_word(base, xi[k], base.order))
                      for k in range(Q))
            # the shadowing point is xi itself, as a sequence; nothing else is tried
            exact = exact and tuple(xi) == tuple(xi[k % Q] for k in range(Q))
            if worst is None or far > worst:
                worst, worst_orbit = far, xi
            if not far < epsilon:
                all_ok = False
    return ImageShadowingReport(epsilon, delta, all_ok, total, worst, worst_orbit, rho_needed,
                                rho_needed <= space.rho, exact)


# -- expansiveness of the rho-space ---------------------------------------------------

@dataclass(frozen=True)
class EnvelopeExpansiveness:
    epsilon: Fraction
    alpha: Fraction
    period: int
    rho: Fraction
    rho_sup: object                  # every rho in [rho, rho_sup) gives the same space
    route_rho: Optional[Fraction]    # largest rho certified via pairs of pseudo-orbits
    certificate: ExpansivityCertificate
    size: int

    def to_json(self) -> dict:
        return {"epsilon": fmt_rational(self.epsilon), "alpha": fmt_rational(self.alpha),
                "period": self.period, "rho": fmt_rational(self.rho),
                "rho_sup": fmt_rational(self.rho_sup),
                "route_rho": None if self.route_rho is None else fmt_rational(self.route_rho),
                "elements": self.size, "certificate": self.certificate.to_json()}


def envelope_expansiveness(base: FiniteMetricSystem, epsilon, alpha, P: Optional[int] = None,
                           element_cap: int = DEFAULT_ELEMENT_CAP) -> EnvelopeExpansiveness:
    """Largest critical rho with the period-P rho-space [eps, alpha]-expansive.

    Adding elements only adds pairs, so the property is monotone in rho and the
    scan stops at the first failure.
    """
    epsilon, alpha = parse_rational(epsilon), parse_rational(alpha)
    P = base.order if P is None else P
    _check_period(base, P)
    if not is_expansive(base, alpha):
        raise NotExpansive(f"base is not {fmt_rational(alpha)}-expansive",
                           witness=close_pair_witness(base, alpha))
    grid = sorted({Fraction(0), *transition_values(base)})
    best, best_cert, best_size, best_i = None, None, 0, -1
    first_fail = None
    for i, rho in enumerate(grid):
        try:
            space = build_periodic_sigma(base, P, rho, element_cap)
        except ResourceLimit:
            if best is None:
                raise
            break
        cert = is_eps_alpha_expansive(space.system, epsilon, alpha, ordered=False)
        if not cert.holds:
            first_fail = first_fail or cert.to_json().get("witness")
            break
        best, best_cert, best_size, best_i = rho, cert, space.size, i
    if best is None:
        # the rho = 0 space already fails; the witness is a pair of its elements
        witness = dict(first_fail, sigma={"period": P, "rho": "0"}) if first_fail else None
        raise NoSuchRho(f"no rho makes the period-{P} space [{fmt_rational(epsilon)},"
                        f"{fmt_rational(alpha)}]-expansive", witness=witness)
    rho_sup = grid[best_i + 1] if best_i + 1 < len(grid) else INF
    route = None
    for i, rho in enumerate(grid):
        # "<= rho" on the grid is "< next grid value"
        delta = grid[i + 1] if i + 1 < len(grid) else INF
        ok, _ = pair_pseudo_orbit_expansiveness(base, epsilon / 3, alpha, delta)
        if not ok:
            break
        route = rho
    if route is not None and route > best:
        raise InvariantViolation("pair pseudo-orbit route certifies a rho the direct check rejects")
    return EnvelopeExpansiveness(epsilon, alpha, P, best, rho_sup, route, best_cert, best_size)


# -- the envelope --------------------------------------------------------------------

@dataclass(frozen=True)
class EnvelopeResult:
    alpha: Fraction
    delta: Fraction
    rho: Fraction
    space: PeriodicSequenceSpace
    quotient: QuotientSystem
    mu: tuple[int, ...]
    injective: bool
    intertwines: bool
    expansivity_constant: object
    semi_expansive: bool
    moduli: tuple[tuple[Fraction, object, bool], ...]

    @property
    def holds(self) -> bool:
        return (self.injective and self.intertwines and self.expansivity_constant > 0
                and all(m > 0 for _, m, _ in self.moduli))

    def to_json(self) -> dict:
        Q = self.quotient.quotient
        return {"alpha": fmt_rational(self.alpha), "delta": fmt_rational(self.delta),
                "rho": fmt_rational(self.rho), "period": self.space.period,
                "space_elements": self.space.size, "envelope_points": Q.n,
                "singleton_classes": Q.n == self.space.size,
                "mu": {self.space.base.points[x]: Q.points[c] for x, c in enumerate(self.mu)},
                "injective": self.injective, "intertwines": self.intertwines,
                "expansivity_constant_sup": fmt_rational(self.expansivity_constant),
                "semi_expansive": self.semi_expansive,
                "moduli": [{"epsilon": fmt_rational(e), "sup_delta": fmt_rational(m),
                            "attained": a} for e, m, a in self.moduli],
                "holds": self.holds}


def image_restriction(base: FiniteMetricSystem, labels: Sequence[int], delta) -> LabeledGraph:
    """Base delta-pseudo-orbits, relabelled through ``labels`` (a map into another system)."""
    succ = tuple(tuple(y for y in range(base.n) if delta == INF or base.d(base.map[x], y) < delta)
                 for x in range(base.n))
    return LabeledGraph(tuple(labels), succ, base.points)


def envelope_modulus(base: FiniteMetricSystem, q: QuotientSystem, mu: Sequence[int], epsilon,
                     subset_cap: Optional[int] = None):
    """Sup of base delta' such that every delta'-pseudo-orbit is eps-shadowed through mu."""
    epsilon = parse_rational(epsilon)
    kw = {} if subset_cap is None else {"subset_cap": subset_cap}

    def holds(delta):
        return decide_shadowing(q.quotient, epsilon, INF,
                                restriction=image_restriction(base, mu, delta), **kw).holds

    return largest_holding(transition_values(base), holds)


def build_shadowing_envelope(base: FiniteMetricSystem, P: Optional[int] = None, alpha=None,
                             eps_grid=None, element_cap: int = DEFAULT_ELEMENT_CAP,
                             subset_cap: Optional[int] = None) -> EnvelopeResult:
    P = base.order if P is None else P
    _check_period(base, P)
    if alpha is None:
        const = expansivity_constant(base)
        alpha = Fraction(1) if const == INF else const / 2
    alpha = parse_rational(alpha)
    if not is_expansive(base, alpha):
        raise NotExpansive(f"base is not {fmt_rational(alpha)}-expansive",
                           witness=close_pair_witness(base, alpha))

    # delta <= alpha/4 with image pseudo-orbits alpha/4-shadowed by their own sequence
    space0 = build_periodic_sigma(base, P, 0, element_cap)
    emb_vals = sorted({embedded_distance(base, base.map[x], y)
                       for x in range(base.n) for y in range(base.n)} - {0})
    candidates = sorted({v for v in emb_vals if v <= alpha / 4} | {alpha / 4}, reverse=True)
    delta = None
    for c in candidates:
        if verify_image_shadowing(space0, alpha / 4, c, P, element_cap).holds:
            delta = c
            break
    if delta is None:
        raise InvariantViolation("true orbits failed image shadowing")

    ee = envelope_expansiveness(base, delta / 4, alpha, P, element_cap)
    space = build_periodic_sigma(base, P, ee.rho, element_cap)
    part = lewowicz_relation(space.system, alpha)
    q = build_quotient(space.system, part)
    emb = embed(base, space)
    mu = tuple(q.projection[e] for e in emb.image)
    injective = len(set(mu)) == base.n
    intertwines = all(q.quotient.map[mu[x]] == mu[base.map[x]] for x in range(base.n))
    grid = [parse_rational(e) for e in eps_grid] if eps_grid is not None else \
        [alpha / 4, alpha / 2, alpha]
    moduli = tuple((e, *envelope_modulus(base, q, mu, e, subset_cap)) for e in grid)
    return EnvelopeResult(alpha, delta, ee.rho, space, q, mu, injective, intertwines,
                          expansivity_constant(q.quotient), bool(part.semi_expansive), moduli)

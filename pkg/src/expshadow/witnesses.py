"""Standalone re-checking of failure witnesses emitted with exit code 1.

A witness names the system it lives on relative to the input system: an
optional ``map`` replaces the permutation, an optional ``partition`` moves to
the quotient, an optional ``sigma`` moves to a periodic sequence space. The
check then recomputes the violated condition from scratch.
"""

from __future__ import annotations

import math

from .errors import ParseError
from .systems import FiniteMetricSystem, check_permutation, fmt_rational, parse_rational


def _target(sys: FiniteMetricSystem, w: dict) -> FiniteMetricSystem:
    if "map" in w:
        sys = sys.with_map(check_permutation(w["map"], sys.n))
    if "partition" in w:
        from .quotients import Partition, build_quotient
        part = Partition.from_classes([[sys.index(p) for p in c] for c in w["partition"]], sys.n)
        sys = build_quotient(sys, part).quotient
    if "sigma" in w:
        from .envelope import build_periodic_sigma
        sys = build_periodic_sigma(sys, int(w["sigma"]["period"]), w["sigma"]["rho"]).system
    return sys


def _check_expansivity_pair(sys, w):
    x, y = sys.index(w["x"]), sys.index(w["y"])
    eps, alpha = parse_rational(w["epsilon"]), parse_rational(w["alpha"])
    D, d = sys.orbit_sup(x, y), sys.d(x, y)
    ok = D <= alpha and d >= eps
    return ok, f"D={fmt_rational(D)} <= {fmt_rational(alpha)} and d={fmt_rational(d)} >= {fmt_rational(eps)}"


def _check_orbit_pair(sys, w):
    x, y = sys.index(w["x"]), sys.index(w["y"])
    alpha = parse_rational(w["alpha"])
    D = sys.orbit_sup(x, y)
    return x != y and D <= alpha, f"distinct points with D={fmt_rational(D)} <= {fmt_rational(alpha)}"


def _check_triple(sys, w):
    x, y, z = (sys.index(w[k]) for k in "xyz")
    alpha = parse_rational(w["alpha"])
    D = sys.orbit_sup
    ok = D(x, y) <= alpha and D(y, z) <= alpha and D(x, z) > alpha
    return ok, f"x~y, y~z, D(x,z)={fmt_rational(D(x, z))} > {fmt_rational(alpha)}"


def _check_incompatible(sys, w):
    from .quotients import Partition
    part = Partition.from_classes([[sys.index(p) for p in c] for c in w["classes"]], sys.n)
    x, y = sys.index(w["x"]), sys.index(w["y"])
    ok = part.related(x, y) and not part.related(sys.map[x], sys.map[y])
    return ok, "x ~ y but f x, f y lie in different classes"


def _check_cover_pair(sys, w):
    from .covers import Cover, cover_power, cover_relation
    cover = Cover.of([[sys.index(p) for p in s] for s in w["cover"]], sys.n)
    k = int(w.get("k", 4))
    x, y = sys.index(w["x"]), sys.index(w["y"])
    in_power = cover_relation(sys, cover_power(cover, k)).related(x, y)
    in_cover = cover_relation(sys, cover).related(x, y)
    return in_power and not in_cover, f"related under U^{k}: {in_power}, under U: {in_cover}"


def _check_shadowing_path(sys, w):
    from .shadowing import verify_counterexample
    if "restriction_path" in w:
        raise ParseError("restricted counterexamples need the restriction graph; rerun the decision")
    path = [sys.index(p) for p in w["path"]]
    ok = verify_counterexample(sys, parse_rational(w["epsilon"]), parse_rational(w["delta"]), path)
    return ok, "pseudo-orbit block shadowed by no point"


def _check_no_shadowing_point(sys, w):
    g = check_permutation(w["g"], sys.n)
    x = sys.index(w["x"])
    radius = parse_rational(w["alpha"]) / 4
    cyc = [x]
    while g[cyc[-1]] != x:
        cyc.append(g[cyc[-1]])
    for z in range(sys.n):
        L = math.lcm(sys.period_of[z], len(cyc))
        a, b, good = z, x, True
        for _ in range(L):
            if not sys.d(a, b) < radius:
                good = False
                break
            a, b = sys.map[a], g[b]
        if good:
            return False, f"{sys.points[z]} shadows the g-orbit"
    return True, "no point stays within alpha/4 of the g-orbit"


CHECKS = {
    "expansivity_pair": _check_expansivity_pair,
    "orbit_pair": _check_orbit_pair,
    "intransitive_triple": _check_triple,
    "incompatible_pair": _check_incompatible,
    "cover_pair": _check_cover_pair,
    "shadowing_path": _check_shadowing_path,
    "no_shadowing_point": _check_no_shadowing_point,
}


def verify_witness(sys: FiniteMetricSystem, witness: dict) -> tuple[bool, str]:
    """Recheck a witness; accepts a whole exit-1 output and digs out its witness."""
    if "kind" not in witness:
        inner = witness.get("witness")
        if not isinstance(inner, dict):
            raise ParseError("no witness object found")
        witness = inner
    check = CHECKS.get(witness["kind"])
    if check is None:
        raise ParseError(f"unknown witness kind {witness['kind']!r}")
    return check(_target(sys, witness), witness)

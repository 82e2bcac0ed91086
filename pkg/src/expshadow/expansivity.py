"""[eps, alpha]-expansiveness: decision, uniform index, gap, region, constants.

Conventions: closeness of orbits uses ``<= alpha``, the conclusion uses
``< eps``. Both are kept exactly as stated in the definitions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import BadThresholds, NotExpansive
from .systems import FiniteMetricSystem, fmt_rational, parse_rational

INF = math.inf


@dataclass(frozen=True)
class ExpansivityCertificate:
    epsilon: Fraction
    alpha: Fraction
    holds: bool
    witness: Optional[tuple[int, int]] = None
    uniform_index: Optional[int] = None
    trivial: bool = False
    points: tuple[str, ...] = ()

    def __post_init__(self):
        assert self.holds == (self.witness is None)
        assert self.uniform_index is None or self.holds

    def to_json(self) -> dict:
        out = {
            "epsilon": fmt_rational(self.epsilon),
            "alpha": fmt_rational(self.alpha),
            "holds": self.holds,
            "trivial": self.trivial,
        }
        if self.witness is not None:
            x, y = self.witness
            out["witness"] = {"kind": "expansivity_pair", "epsilon": fmt_rational(self.epsilon),
                              "alpha": fmt_rational(self.alpha),
                              "x": self.points[x], "y": self.points[y]}
        if self.uniform_index is not None:
            out["uniform_index"] = self.uniform_index
        return out


def _thresholds(epsilon, alpha, ordered=True) -> tuple[Fraction, Fraction]:
    # uniform_index and the gap only need positive thresholds; eps > alpha is
    # meaningful there (the definition is still a statement about pairs)
    epsilon, alpha = parse_rational(epsilon), parse_rational(alpha)
    if epsilon <= 0:
        raise BadThresholds(f"epsilon must be positive, got {fmt_rational(epsilon)}")
    if alpha <= 0:
        raise BadThresholds(f"alpha must be positive, got {fmt_rational(alpha)}")
    if ordered and epsilon > alpha:
        raise BadThresholds(
            f"need epsilon <= alpha, got {fmt_rational(epsilon)} > {fmt_rational(alpha)}")
    return epsilon, alpha


def find_violation(sys: FiniteMetricSystem, epsilon: Fraction, alpha: Fraction):
    """First pair (lexicographic) with D(x,y) <= alpha and d(x,y) >= eps, or None."""
    for x, y in sys.pairs():
        if sys.orbit_sup(x, y) <= alpha and sys.d(x, y) >= epsilon:
            return x, y
    return None


def _uniform_index(sys: FiniteMetricSystem, epsilon: Fraction, alpha: Fraction) -> int:
    # For each pair that must be separated, the nearest time |n| at which the
    # orbits are more than alpha apart; the answer is the worst such pair.
    f, finv = sys.map, sys.inverse_map
    worst = 0
    for x, y in sys.pairs():
        if sys.d(x, y) < epsilon:
            continue
        fx, fy, bx, by = x, y, x, y
        n = 0
        while sys.d(fx, fy) <= alpha and sys.d(bx, by) <= alpha:
            n += 1
            fx, fy, bx, by = f[fx], f[fy], finv[bx], finv[by]
        worst = max(worst, n)
    return worst


def is_eps_alpha_expansive(sys: FiniteMetricSystem, epsilon, alpha,
                           ordered: bool = True) -> ExpansivityCertificate:
    """D(x,y) <= alpha implies d(x,y) < eps; ``ordered=False`` also accepts eps > alpha."""
    epsilon, alpha = _thresholds(epsilon, alpha, ordered)
    witness = find_violation(sys, epsilon, alpha)
    holds = witness is None
    return ExpansivityCertificate(
        epsilon, alpha, holds, witness,
        uniform_index=_uniform_index(sys, epsilon, alpha) if holds else None,
        trivial=holds and sys.diameter < epsilon,
        points=sys.points)


def uniform_index(sys: FiniteMetricSystem, epsilon, alpha) -> int:
    """Minimal N with: max_{|n|<=N} d(f^n x, f^n y) <= alpha implies d(x,y) < eps."""
    epsilon, alpha = _thresholds(epsilon, alpha, ordered=False)
    witness = find_violation(sys, epsilon, alpha)
    if witness is not None:
        x, y = witness
        raise NotExpansive(
            f"not [{fmt_rational(epsilon)},{fmt_rational(alpha)}]-expansive",
            witness={"kind": "expansivity_pair", "epsilon": fmt_rational(epsilon),
                     "alpha": fmt_rational(alpha), "x": sys.points[x], "y": sys.points[y]})
    return _uniform_index(sys, epsilon, alpha)


def expansiveness_gap(sys: FiniteMetricSystem, epsilon, alpha) -> tuple[Fraction, bool]:
    """Supremum of delta >= 0 with the system [eps - delta, alpha + delta]-expansive.

    A pair x != y breaks the property at delta exactly when
    delta >= max(D(x,y) - alpha, eps - d(x,y)); the diagonal breaks it once
    eps - delta reaches 0. The admissible set is therefore [0, s) with s the
    smallest of these breaking points, never attained.
    """
    epsilon, alpha = _thresholds(epsilon, alpha, ordered=False)
    witness = find_violation(sys, epsilon, alpha)
    if witness is not None:
        x, y = witness
        raise NotExpansive(
            f"not [{fmt_rational(epsilon)},{fmt_rational(alpha)}]-expansive",
            witness={"kind": "expansivity_pair", "epsilon": fmt_rational(epsilon),
                     "alpha": fmt_rational(alpha), "x": sys.points[x], "y": sys.points[y]})
    sup = epsilon
    for x, y in sys.pairs():
        sup = min(sup, max(sys.orbit_sup(x, y) - alpha, epsilon - sys.d(x, y)))
    return sup, False


def is_semi_expansive(sys: FiniteMetricSystem, alpha) -> ExpansivityCertificate:
    """alpha-semi expansive means [alpha/2, alpha]-expansive."""
    alpha = parse_rational(alpha)
    if alpha <= 0:
        raise BadThresholds(f"alpha must be positive, got {fmt_rational(alpha)}")
    return is_eps_alpha_expansive(sys, alpha / 2, alpha)


def is_expansive(sys: FiniteMetricSystem, alpha) -> bool:
    """alpha is an expansivity constant: D(x,y) <= alpha forces x == y."""
    alpha = parse_rational(alpha)
    return all(sys.orbit_sup(x, y) > alpha for x, y in sys.pairs())


def close_pair_witness(sys: FiniteMetricSystem, alpha) -> Optional[dict]:
    """Witness that alpha is not an expansivity constant: x != y with D(x,y) <= alpha."""
    alpha = parse_rational(alpha)
    for x, y in sys.pairs():
        if sys.orbit_sup(x, y) <= alpha:
            return {"kind": "orbit_pair", "alpha": fmt_rational(alpha),
                    "x": sys.points[x], "y": sys.points[y]}
    return None


def expansivity_constant(sys: FiniteMetricSystem):
    """Supremum of expansivity constants: min over x != y of D(x,y); INF for one point.

    Every alpha strictly below the returned value is an expansivity constant;
    the supremum itself is not.
    """
    return min((sys.orbit_sup(x, y) for x, y in sys.pairs()), default=INF)


@dataclass(frozen=True)
class RegionBand:
    """For alpha in [alpha_lo, alpha_hi): [eps, alpha]-expansive iff eps > eps_floor."""
    alpha_lo: Fraction
    alpha_hi: object
    eps_floor: Fraction

    def admits(self, epsilon, alpha) -> bool:
        return epsilon > self.eps_floor

    def contains_alpha(self, alpha) -> bool:
        return self.alpha_lo <= alpha < self.alpha_hi

    def to_json(self) -> dict:
        return {"alpha_from": fmt_rational(self.alpha_lo),
                "alpha_to": fmt_rational(self.alpha_hi),
                "epsilon_greater_than": fmt_rational(self.eps_floor)}


def expansiveness_region(sys: FiniteMetricSystem) -> list[RegionBand]:
    """Exact description of all admissible (eps, alpha) with eps <= alpha.

    Between consecutive D-values the set of pairs with D <= alpha is constant,
    so the minimal admissible eps is the largest d among those pairs (strictly
    exceeded). The first band starts at alpha = 0 (exclusive in practice).
    """
    cuts = sorted({sys.orbit_sup(x, y) for x, y in sys.pairs()})
    bounds = [Fraction(0)] + cuts
    bands = []
    for i, lo in enumerate(bounds):
        hi = bounds[i + 1] if i + 1 < len(bounds) else INF
        floor = max((sys.d(x, y) for x, y in sys.pairs() if sys.orbit_sup(x, y) <= lo),
                    default=Fraction(0))
        bands.append(RegionBand(lo, hi, floor))
    return bands


def region_admits(bands: list[RegionBand], epsilon, alpha) -> bool:
    epsilon, alpha = parse_rational(epsilon), parse_rational(alpha)
    for band in bands:
        if band.contains_alpha(alpha):
            return band.admits(epsilon, alpha)
    raise ValueError("alpha outside region bands")

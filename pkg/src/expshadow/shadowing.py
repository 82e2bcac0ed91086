"""Exact shadowing decisions, semi-Anosov certification and the Anosov quotient.

The set of delta-pseudo-orbits is the two-sided shift presented by the graph
x -> y iff d(f x, y) < delta. The set of sequences eps-shadowed by some true
orbit is presented by the tube automaton: one state per point w, the state
reads any x with d(w, x) < eps and moves to f w. (A state (z, k) of "orbit
point plus phase" is the same thing as the single point f^k z.)

Both presentations are trimmed, so containment of the shift spaces is
equivalent to containment of their finite block languages. That is decided by
running the subset construction of the tube automaton against the pseudo-orbit
graph; an empty subset is a finite chain no true orbit can follow.
"""

from __future__ import annotations

import math
import os
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

from .errors import AlphaTooLarge, BadThresholds, NotSemiAnosov, NotTransitive, ResourceLimit
from .expansivity import (ExpansivityCertificate, expansivity_constant, is_eps_alpha_expansive,
                          is_expansive)
from .graphs import LabeledGraph, trim_bi_essential
from .quotients import (QuotientSystem, build_quotient, lewowicz_metric_matrix, quotient_pair_witness,
                        lewowicz_relation)
from .systems import FiniteMetricSystem, fmt_rational, parse_rational

INF = math.inf
DEFAULT_SUBSET_CAP = int(os.environ.get("EXPSHADOW_SUBSET_CAP", "200000"))


def _positive(*values):
    out = []
    for v in values:
        v = parse_rational(v)
        if v <= 0:
            raise BadThresholds(f"thresholds must be positive, got {fmt_rational(v)}")
        out.append(v)
    return out


# -- graphs ------------------------------------------------------------------------

def full_graph(sys: FiniteMetricSystem) -> LabeledGraph:
    """Restriction graph allowing every sequence."""
    return LabeledGraph(tuple(range(sys.n)), tuple(tuple(range(sys.n)) for _ in range(sys.n)),
                        sys.points)


@dataclass(frozen=True)
class PseudoOrbitGraph:
    delta: Fraction
    graph: LabeledGraph      # nodes of the (restricted) graph, labelled by points
    trimmed: LabeledGraph    # bi-essential core, renumbered
    origin: tuple[int, ...]  # trimmed node -> node of ``graph``


def _strict_below(value, bound) -> bool:
    return bound == INF or value < bound


def pseudo_orbit_graph(sys: FiniteMetricSystem, delta, restriction: Optional[LabeledGraph] = None
                       ) -> PseudoOrbitGraph:
    """Edges x -> y iff d(f x, y) < delta, intersected with ``restriction`` and trimmed."""
    delta = delta if delta == INF else parse_rational(delta)
    base = restriction or full_graph(sys)
    lab = base.labels
    succ = tuple(tuple(w for w in ws if _strict_below(sys.d(sys.map[lab[v]], lab[w]), delta))
                 for v, ws in enumerate(base.succ))
    graph = LabeledGraph(lab, succ, base.names)
    core = trim_bi_essential({v: succ[v] for v in range(graph.size)})
    origin = tuple(sorted(core))
    renum = {v: i for i, v in enumerate(origin)}
    trimmed = LabeledGraph(tuple(lab[v] for v in origin),
                           tuple(tuple(renum[w] for w in core[v]) for v in origin),
                           tuple(base.names[v] for v in origin))
    return PseudoOrbitGraph(delta, graph, trimmed, origin)


@dataclass(frozen=True)
class TubeAutomaton:
    """State w reads x iff d(w, x) < eps and moves to f w."""

    epsilon: Fraction
    next_state: tuple[int, ...]
    accepts: tuple[int, ...]  # accepts[x] = bitmask of states reading x

    @classmethod
    def build(cls, sys: FiniteMetricSystem, epsilon) -> "TubeAutomaton":
        accepts = []
        for x in range(sys.n):
            mask = 0
            for w in range(sys.n):
                if sys.d(w, x) < epsilon:
                    mask |= 1 << w
            accepts.append(mask)
        return cls(epsilon, sys.map, tuple(accepts))

    @property
    def full(self) -> int:
        return (1 << len(self.next_state)) - 1

    def step(self, subset: int, symbol: int) -> int:
        live = subset & self.accepts[symbol]
        out = 0
        while live:
            low = live & -live
            out |= 1 << self.next_state[low.bit_length() - 1]
            live ^= low
        return out


# -- decision ------------------------------------------------------------------------

@dataclass(frozen=True)
class ShadowingCertificate:
    epsilon: Fraction
    delta: object
    holds: bool
    counterexample: Optional[tuple[int, ...]] = None       # point indices
    restriction_path: Optional[tuple[int, ...]] = None     # restriction node indices
    restricted: bool = False
    subsets_explored: int = 0
    points: tuple[str, ...] = ()

    def to_json(self) -> dict:
        out = {"epsilon": fmt_rational(self.epsilon), "delta": fmt_rational(self.delta),
               "restriction": "graph" if self.restricted else "all sequences",
               "holds": self.holds, "subsets_explored": self.subsets_explored}
        if self.counterexample is not None:
            out["counterexample"] = [self.points[x] for x in self.counterexample]
            out["witness"] = {"kind": "shadowing_path", "epsilon": fmt_rational(self.epsilon),
                              "delta": fmt_rational(self.delta),
                              "path": out["counterexample"]}
            if self.restricted:
                out["witness"]["restriction_path"] = list(self.restriction_path)
        return out


def decide_shadowing(sys: FiniteMetricSystem, epsilon, delta,
                     restriction: Optional[LabeledGraph] = None,
                     subset_cap: int = DEFAULT_SUBSET_CAP) -> ShadowingCertificate:
    """Exact eps-delta shadowing on the sequences of ``restriction`` (all sequences if None)."""
    (epsilon,) = _positive(epsilon)
    if delta != INF:
        (delta,) = _positive(delta)
    pog = pseudo_orbit_graph(sys, delta, restriction)
    G = pog.trimmed
    tube = TubeAutomaton.build(sys, epsilon)
    full = tube.full
    parent = {}
    queue = deque()
    for g in range(G.size):
        state = (g, full)
        parent[state] = None
        queue.append(state)
    subsets = {full}
    found = None
    while queue and found is None:
        g, S = queue.popleft()
        after = tube.step(S, G.labels[g])
        if after == 0:
            found = (g, S)
            break
        if after not in subsets:
            subsets.add(after)
            if len(subsets) > subset_cap:
                raise ResourceLimit(
                    f"subset construction exceeded {subset_cap} subsets; raise the cap")
        for h in G.succ[g]:
            nxt = (h, after)
            if nxt not in parent:
                parent[nxt] = (g, S)
                queue.append(nxt)
    common = dict(epsilon=epsilon, delta=delta, restricted=restriction is not None,
                  subsets_explored=len(subsets), points=sys.points)
    if found is None:
        return ShadowingCertificate(holds=True, **common)
    walk = []
    state = found
    while state is not None:
        walk.append(state[0])
        state = parent[state]
    walk.reverse()
    return ShadowingCertificate(
        holds=False,
        counterexample=tuple(G.labels[g] for g in walk),
        restriction_path=tuple(pog.origin[g] for g in walk),
        **common)


def block_shadowed_by(sys: FiniteMetricSystem, block: Sequence[int], epsilon) -> list[int]:
    """All z with d(f^i z, block[i]) < eps for every i."""
    out = []
    for z in range(sys.n):
        w = z
        ok = True
        for x in block:
            if not sys.d(w, x) < epsilon:
                ok = False
                break
            w = sys.map[w]
        if ok:
            out.append(z)
    return out


def verify_counterexample(sys: FiniteMetricSystem, epsilon, delta, path: Sequence[int],
                          restriction: Optional[LabeledGraph] = None,
                          restriction_path: Optional[Sequence[int]] = None) -> bool:
    """Replay a counterexample directly from the definitions.

    The path must be a delta-chain inside the bi-essential core (so it extends
    to a bi-infinite pseudo-orbit) and no point may eps-shadow it.
    """
    epsilon = parse_rational(epsilon)
    if not path:
        return False
    pog = pseudo_orbit_graph(sys, delta, restriction)
    alive = set(pog.origin)
    if restriction is None:
        nodes = list(path)
    else:
        if restriction_path is None or len(restriction_path) != len(path):
            return False
        nodes = list(restriction_path)
        if any(restriction.labels[v] != x for v, x in zip(nodes, path)):
            return False
    if any(v not in alive for v in nodes):
        return False
    if any(not pog.graph.has_edge(a, b) for a, b in zip(nodes, nodes[1:])):
        return False
    for a, b in zip(path, path[1:]):
        if not _strict_below(sys.d(sys.map[a], b), pog.delta):
            return False
    return not block_shadowed_by(sys, path, epsilon)


# -- independent periodic oracle ------------------------------------------------------

@dataclass(frozen=True)
class OracleResult:
    holds: bool
    cycle: Optional[tuple[int, ...]] = None
    periods_checked: int = 0


def periodic_shadowing_oracle(sys: FiniteMetricSystem, epsilon, delta, max_period: int) -> OracleResult:
    """Check every periodic delta-pseudo-orbit of period <= max_period for an eps-shadow.

    A p-periodic sequence is shadowed by z iff, for every residue r mod p,
    x_r lies within eps of f^n z for all n = r mod p below lcm(p, period(z)).
    Closed walks are enumerated depth-first carrying the set of surviving z,
    memoised on (position, start, current node, survivors).
    """
    epsilon, delta = _positive(epsilon, delta)
    if max_period < 1:
        raise BadThresholds("max_period must be at least 1")
    n = sys.n
    edge = [[sys.d(sys.map[x], y) < delta for y in range(n)] for x in range(n)]
    close = [[sys.d(w, x) < epsilon for x in range(n)] for w in range(n)]
    for p in range(1, max_period + 1):
        # box[r][x] = bitmask of z whose residue-r constraint admits x
        box = [[0] * n for _ in range(p)]
        for z in range(n):
            L = math.lcm(p, sys.period_of[z])
            allowed = [[True] * n for _ in range(p)]
            w = z
            for t in range(L):
                row = allowed[t % p]
                for x in range(n):
                    if row[x] and not close[w][x]:
                        row[x] = False
                w = sys.map[w]
            for r in range(p):
                for x in range(n):
                    if allowed[r][x]:
                        box[r][x] |= 1 << z

        @lru_cache(maxsize=None)
        def failing(i, start, cur, alive):
            # cur = x_i already placed, alive = z compatible with x_0..x_i
            if i == p - 1:
                return () if edge[cur][start] and alive == 0 else None
            for y in range(n):
                if edge[cur][y]:
                    rest = failing(i + 1, start, y, alive & box[i + 1][y])
                    if rest is not None:
                        return (y,) + rest
            return None

        full = (1 << n) - 1
        for x0 in range(n):
            rest = failing(0, x0, x0, full & box[0][x0])
            if rest is not None:
                return OracleResult(False, (x0,) + rest, p)
        failing.cache_clear()
    return OracleResult(True, None, max_period)


# -- modulus ---------------------------------------------------------------------------

def largest_holding(critical: Sequence[Fraction], holds) -> tuple[object, bool]:
    """Sup of delta with ``holds(delta)``, for a property monotone decreasing in delta.

    ``critical`` are the sorted positive values v for which edges "value < delta"
    switch on just above v; the property is constant on each (c_i, c_{i+1}].
    Returns (sup, attained), with INF when even the complete graph passes.
    """
    if not critical:
        return INF, False
    if holds(critical[-1] + 1):
        return INF, False
    lo, hi = 0, len(critical) - 1
    if not holds(critical[0]):
        return Fraction(0), False
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if holds(critical[mid]):
            lo = mid
        else:
            hi = mid - 1
    return critical[lo], True


def transition_values(sys: FiniteMetricSystem) -> list[Fraction]:
    return sorted({sys.d(sys.map[x], y) for x in range(sys.n) for y in range(sys.n)} - {0})


def shadowing_modulus(sys: FiniteMetricSystem, epsilon, subset_cap: int = DEFAULT_SUBSET_CAP):
    """(sup delta, attained) with eps-delta shadowing; INF when every delta works."""
    (epsilon,) = _positive(epsilon)
    return largest_holding(
        transition_values(sys),
        lambda delta: decide_shadowing(sys, epsilon, delta, subset_cap=subset_cap).holds)


# -- pairs of pseudo-orbits -----------------------------------------------------------

def pair_pseudo_orbit_expansiveness(sys: FiniteMetricSystem, epsilon, alpha, delta):
    """Pairs of delta-pseudo-orbits staying alpha-close are always eps-close?

    Returns (True, None) or (False, (x, y)) with (x, y) a node of the trimmed
    pair graph at distance >= eps.
    """
    epsilon, alpha = _positive(epsilon, alpha)
    if delta != INF:
        (delta,) = _positive(delta)
    n = sys.n
    nodes = [(x, y) for x in range(n) for y in range(n) if sys.d(x, y) <= alpha]
    step = [[y for y in range(n) if _strict_below(sys.d(sys.map[x], y), delta)] for x in range(n)]
    node_set = set(nodes)
    succ = {(x, y): [(a, b) for a in step[x] for b in step[y] if (a, b) in node_set]
            for x, y in nodes}
    core = trim_bi_essential(succ)
    for x, y in sorted(core):
        if sys.d(x, y) >= epsilon:
            return False, (x, y)
    return True, None


# -- semi-Anosov ----------------------------------------------------------------------

@dataclass(frozen=True)
class SemiAnosovCertificate:
    alpha: Fraction
    holds: bool
    delta: Optional[Fraction]
    expansive_above: Fraction          # [delta/4, alpha]-expansive iff delta > this
    shadowing_modulus: object          # alpha/4 - delta shadowing iff delta <= this
    binding: Optional[str] = None      # "expansiveness" or "shadowing" on failure
    expansivity: Optional[ExpansivityCertificate] = None
    shadowing: Optional[ShadowingCertificate] = None

    def to_json(self) -> dict:
        out = {"alpha": fmt_rational(self.alpha), "holds": self.holds,
               "delta": None if self.delta is None else fmt_rational(self.delta),
               "expansive_for_delta_above": fmt_rational(self.expansive_above),
               "shadowing_modulus_at_alpha_over_4": fmt_rational(self.shadowing_modulus)}
        if self.binding:
            out["binding"] = self.binding
        if self.expansivity is not None:
            out["expansivity"] = self.expansivity.to_json()
        if self.shadowing is not None:
            out["shadowing"] = self.shadowing.to_json()
        if not self.holds:
            sub = (self.expansivity if self.binding == "expansiveness" else self.shadowing)
            if sub is not None:
                out["witness"] = sub.to_json().get("witness")
        return out


def certify_semi_anosov(sys: FiniteMetricSystem, alpha,
                        subset_cap: int = DEFAULT_SUBSET_CAP) -> SemiAnosovCertificate:
    """Largest delta in (0, alpha/4] with [delta/4, alpha]-expansiveness and alpha/4 - delta shadowing.

    Expansiveness at eps = delta/4 holds iff delta/4 exceeds m, the largest
    d(x, y) over pairs with D(x, y) <= alpha, so it asks delta > 4m.
    Shadowing at (alpha/4, delta) holds iff delta <= the shadowing modulus s.
    The admissible deltas form (4m, min(s, alpha/4)].
    """
    (alpha,) = _positive(alpha)
    m = max((sys.d(x, y) for x, y in sys.pairs() if sys.orbit_sup(x, y) <= alpha),
            default=Fraction(0))
    s, _ = shadowing_modulus(sys, alpha / 4, subset_cap)
    top = alpha / 4 if s == INF else min(s, alpha / 4)
    if top > 4 * m:
        delta = top
        exp = is_eps_alpha_expansive(sys, delta / 4, alpha)
        sh = decide_shadowing(sys, alpha / 4, delta, subset_cap=subset_cap)
        if not (exp.holds and sh.holds):
            raise AssertionError("semi-Anosov threshold analysis disagrees with direct checks")
        return SemiAnosovCertificate(alpha, True, delta, 4 * m, s, None, exp, sh)
    if 4 * m >= alpha / 4:
        # even delta = alpha/4 leaves a pair with D <= alpha at distance >= delta/4
        exp = is_eps_alpha_expansive(sys, alpha / 16, alpha)
        return SemiAnosovCertificate(alpha, False, None, 4 * m, s, "expansiveness", exp, None)
    # expansiveness needs delta > 4m but shadowing already breaks just above s <= 4m
    probe = next((c for c in transition_values(sys) if c > 4 * m), None)
    probe = min(probe, alpha / 4) if probe is not None else alpha / 4
    sh = decide_shadowing(sys, alpha / 4, probe, subset_cap=subset_cap)
    return SemiAnosovCertificate(alpha, False, None, 4 * m, s, "shadowing", None, sh)


# -- Anosov quotient ----------------------------------------------------------------

def critical_epsilons(sys: FiniteMetricSystem) -> list[Fraction]:
    vals = sorted({sys.d(x, y) for x, y in sys.pairs()})
    if not vals:
        return [Fraction(1)]
    grid = {vals[0] / 2, vals[-1] * 2}
    grid.update(vals)
    grid.update((a + b) / 2 for a, b in zip(vals, vals[1:]))
    return sorted(grid)


@dataclass(frozen=True)
class AnosovQuotientResult:
    certificate: SemiAnosovCertificate
    quotient: QuotientSystem
    expansivity_constant: object
    moduli: tuple[tuple[Fraction, object, bool], ...]

    @property
    def all_moduli_positive(self) -> bool:
        return all(m > 0 for _, m, _ in self.moduli)

    def to_json(self) -> dict:
        return {"semi_anosov": self.certificate.to_json(),
                "quotient": self.quotient.to_json(),
                "quotient_expansivity_constant_sup": fmt_rational(self.expansivity_constant),
                "moduli": [{"epsilon": fmt_rational(e), "sup_delta": fmt_rational(m),
                            "attained": a} for e, m, a in self.moduli],
                "all_moduli_positive": self.all_moduli_positive}


def anosov_quotient_pipeline(sys: FiniteMetricSystem, alpha, eps_grid=None,
                             subset_cap: int = DEFAULT_SUBSET_CAP) -> AnosovQuotientResult:
    cert = certify_semi_anosov(sys, alpha, subset_cap)
    if not cert.holds:
        raise NotSemiAnosov(f"not {fmt_rational(cert.alpha)}-semi Anosov ({cert.binding} binds)",
                            witness=cert.to_json().get("witness"))
    part = lewowicz_relation(sys, cert.alpha)
    q = build_quotient(sys, part)
    grid = critical_epsilons(q.quotient) if eps_grid is None else [parse_rational(e) for e in eps_grid]
    moduli = tuple((e, *shadowing_modulus(q.quotient, e, subset_cap)) for e in grid)
    return AnosovQuotientResult(cert, q, expansivity_constant(q.quotient), moduli)


@dataclass(frozen=True)
class ReverseAnosovResult:
    alpha: Fraction
    delta: Fraction
    K: Fraction
    system: FiniteMetricSystem       # base under d1
    expansive: bool                  # [delta/4, alpha]-expansive under d1
    shadowing: bool                  # alpha/4 - delta shadowing under d1
    relation_matches: bool           # R(d1, alpha) equals the partition

    @property
    def holds(self) -> bool:
        return self.expansive and self.shadowing and self.relation_matches

    def to_json(self) -> dict:
        return {"alpha": fmt_rational(self.alpha), "delta": fmt_rational(self.delta),
                "K": fmt_rational(self.K), "expansive": self.expansive,
                "shadowing": self.shadowing, "relation_matches": self.relation_matches,
                "holds": self.holds}


def anosov_reverse(q: QuotientSystem, alpha, delta=None,
                   subset_cap: int = DEFAULT_SUBSET_CAP) -> ReverseAnosovResult:
    """From an Anosov quotient back to a semi-Anosov base: d1 = d_R + K d, K = delta/(4 diam + 1).

    ``alpha`` must be an expansivity constant of the quotient and the quotient
    must have the alpha/8 - delta shadowing property with delta <= alpha/4.
    """
    (alpha,) = _positive(alpha)
    Q = q.quotient
    if not is_expansive(Q, alpha):
        raise AlphaTooLarge(f"quotient is not {fmt_rational(alpha)}-expansive",
                            witness=quotient_pair_witness(q, alpha))
    if delta is None:
        s, _ = shadowing_modulus(Q, alpha / 8, subset_cap)
        delta = alpha / 4 if s == INF else min(s, alpha / 4)
    else:
        (delta,) = _positive(delta)
        if delta > alpha / 4:
            raise BadThresholds("need delta <= alpha/4")
        sh = decide_shadowing(Q, alpha / 8, delta, subset_cap=subset_cap)
        if not sh.holds:
            witness = sh.to_json()["witness"]
            witness["partition"] = q.partition.to_json(q.base.points)["classes"]
            raise NotSemiAnosov(
                f"quotient lacks the {fmt_rational(alpha / 8)}-{fmt_rational(delta)} shadowing property",
                witness=witness)
    K = delta / (4 * q.base.diameter + 1)
    sys1 = q.base.with_metric(lewowicz_metric_matrix(q, K), name=f"{q.base.name or 'M'}[d1]")
    exp = is_eps_alpha_expansive(sys1, delta / 4, alpha).holds
    sh = decide_shadowing(sys1, alpha / 4, delta, subset_cap=subset_cap).holds
    try:
        match = lewowicz_relation(sys1, alpha) == q.partition
    except NotTransitive:
        match = False
    return ReverseAnosovResult(alpha, delta, K, sys1, exp, sh, match)

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import finite_systems
import oracles
from corpus import critical_alphas, critical_distances
from expshadow.errors import AlphaTooLarge, BadThresholds, NotSemiAnosov, ResourceLimit
from expshadow.expansivity import is_eps_alpha_expansive
from expshadow.graphs import LabeledGraph, load_restriction, trim_bi_essential
from expshadow.quotients import build_quotient, lewowicz_relation
from expshadow.shadowing import (INF, anosov_quotient_pipeline, anosov_reverse, certify_semi_anosov,
                                 decide_shadowing, full_graph, pair_pseudo_orbit_expansiveness,
                                 periodic_shadowing_oracle, pseudo_orbit_graph, shadowing_modulus,
                                 transition_values, verify_counterexample)
from expshadow.witnesses import verify_witness

H = Fraction(1, 2)
T = Fraction(3, 2)


class TestTrim:
    def test_cycle_unchanged(self):
        g = {0: [1], 1: [2], 2: [0]}
        assert trim_bi_essential(g) == g

    def test_path_empty(self):
        assert trim_bi_essential({0: [1], 1: [2], 2: []}) == {}

    def test_tail_removed(self):
        g = {0: [1], 1: [2], 2: [0], 3: [0], 4: [3]}
        assert trim_bi_essential(g) == {0: [1], 1: [2], 2: [0]}

    @given(st.dictionaries(st.integers(0, 7), st.lists(st.integers(0, 7), max_size=3), min_size=1))
    def test_every_node_keeps_both_degrees(self, raw):
        g = {v: [w for w in ws if w in raw] for v, ws in raw.items()}
        core = trim_bi_essential(g)
        for v, ws in core.items():
            assert ws and all(w in core for w in ws)
            assert any(v in core[u] for u in core)
        # nodes on a cycle always survive
        for v in g:
            seen, frontier = set(), list(g[v])
            while frontier:
                u = frontier.pop()
                if u not in seen:
                    seen.add(u)
                    frontier.extend(g[u])
            if v in seen:
                assert v in core


class TestDecision:
    def test_examples(self, c3):
        assert decide_shadowing(c3, H, H).holds
        cert = decide_shadowing(c3, H, T)
        assert not cert.holds
        assert set(cert.counterexample) == {0}
        assert verify_counterexample(c3, H, T, cert.counterexample)
        assert verify_witness(c3, cert.to_json()["witness"])[0]
        assert decide_shadowing(c3, T, T).holds

    def test_bad_thresholds(self, c3):
        with pytest.raises(BadThresholds):
            decide_shadowing(c3, 0, 1)

    def test_subset_cap(self):
        from expshadow.fixtures import random_system
        s = random_system(7, seed=3, max_weight=4)
        with pytest.raises(ResourceLimit):
            decide_shadowing(s, Fraction(1, 2), 100, subset_cap=1)

    def test_restriction_to_everything_is_unrestricted(self, c3, l4):
        for s in (c3, l4):
            for e in (H, 1, T):
                for d in (H, T, 3):
                    assert decide_shadowing(s, e, d, full_graph(s)).holds == decide_shadowing(s, e, d).holds

    def test_restriction_to_one_loop(self, c3):
        # only the constant sequence at 0 is allowed; no orbit stays near it
        g = load_restriction({"nodes": ["u"], "labels": ["0"], "edges": [[0, 0]]}, c3)
        cert = decide_shadowing(c3, H, INF, g)
        assert not cert.holds and cert.restriction_path
        assert verify_counterexample(c3, H, INF, cert.counterexample, g, cert.restriction_path)
        # the true orbit as a restriction graph is shadowed
        g = LabeledGraph((0, 1, 2), ((1,), (2,), (0,)))
        assert decide_shadowing(c3, H, INF, g).holds

    def test_oracle_examples(self, c3):
        assert periodic_shadowing_oracle(c3, H, H, 6).holds
        res = periodic_shadowing_oracle(c3, H, T, 1)
        assert not res.holds and res.cycle == (0,)
        assert periodic_shadowing_oracle(c3, 2, 5, 3).holds


class TestModulus:
    def test_examples(self, c3, l4):
        assert shadowing_modulus(c3, H) == (1, True)
        assert shadowing_modulus(c3, T) == (INF, False)
        assert shadowing_modulus(l4, H)[0] == 1


class TestPairs:
    def test_examples(self, c3, pt):
        assert pair_pseudo_orbit_expansiveness(c3, 5, H, H) == (True, None)
        assert pair_pseudo_orbit_expansiveness(c3, 1, 1, T) == (False, (0, 1))
        assert pair_pseudo_orbit_expansiveness(pt, 1, 1, 1)[0]


class TestSemiAnosov:
    def test_examples(self, c3, pt):
        cert = certify_semi_anosov(c3, H)
        assert cert.holds and cert.delta == Fraction(1, 8)
        cert = certify_semi_anosov(c3, 4)
        assert not cert.holds and cert.binding == "expansiveness"
        assert verify_witness(c3, cert.to_json()["witness"])[0]
        assert certify_semi_anosov(pt, 1).holds

    def test_pipeline_examples(self, c3, pt):
        res = anosov_quotient_pipeline(c3, H, [H])
        assert res.quotient.quotient.n == 3
        assert res.moduli == ((H, Fraction(1), True),)
        res = anosov_quotient_pipeline(pt, 1)
        assert res.quotient.quotient.n == 1 and all(m == INF for _, m, _ in res.moduli)
        with pytest.raises(NotSemiAnosov):
            anosov_quotient_pipeline(c3, 4)

    def test_reverse_example(self, c3):
        q = build_quotient(c3, lewowicz_relation(c3, H))
        rev = anosov_reverse(q, H, Fraction(1, 8))
        assert rev.K == Fraction(1, 40)
        assert all(rev.system.d(x, y) == Fraction(41, 40) * c3.d(x, y)
                   for x in range(3) for y in range(3))
        assert rev.holds
        with pytest.raises(AlphaTooLarge):
            anosov_reverse(q, 1)


def _eps_delta_grid(s):
    ds = critical_distances(s) or [Fraction(1)]
    eps = sorted(set(ds) | {(a + b) / 2 for a, b in zip(ds, ds[1:])} | {ds[0] / 2, ds[-1] + 1})
    tv = transition_values(s) or [Fraction(1)]
    tv = [v for v in tv if v > 0] or [Fraction(1)]
    dl = sorted(set(tv) | {(a + b) / 2 for a, b in zip(tv, tv[1:])} | {tv[0] / 2, tv[-1] + 1})
    return eps, dl


def _core_blocks(s, delta, length):
    """All walks of a given length inside the bi-essential core, built without the library graph."""
    succ = {x: [y for y in range(s.n) if s.d(s.map[x], y) < delta] for x in range(s.n)}
    alive = set(succ)
    changed = True
    while changed:
        changed = False
        for v in list(alive):
            if not any(w in alive for w in succ[v]) or not any(v in succ[u] for u in alive):
                alive.discard(v)
                changed = True
    walks = [[v] for v in alive]
    for _ in range(length - 1):
        walks = [w + [u] for w in walks for u in succ[w[-1]] if u in alive]
    return walks


def _block_shadowed(s, block, eps):
    return any(all(s.d(oracles.iterate(s.map, z, i), x) < eps for i, x in enumerate(block))
               for z in range(s.n))


@given(finite_systems(max_n=5))
def test_decision_against_independent_oracles(s):
    eps_grid, delta_grid = _eps_delta_grid(s)
    for e in eps_grid[::2]:
        for d in delta_grid[::2]:
            cert = decide_shadowing(s, e, d)
            if cert.holds:
                assert oracles.shadowing_by_periodic(s, e, d, 4)
                assert all(_block_shadowed(s, b, e) for b in _core_blocks(s, d, 4))
            else:
                assert verify_counterexample(s, e, d, cert.counterexample)
                assert not _block_shadowed(s, cert.counterexample, e)


@given(finite_systems(max_n=5))
def test_library_oracle_matches_brute_force(s):
    eps_grid, delta_grid = _eps_delta_grid(s)
    for e in eps_grid[::2]:
        for d in delta_grid[::2]:
            assert periodic_shadowing_oracle(s, e, d, 4).holds == oracles.shadowing_by_periodic(s, e, d, 4)


@given(finite_systems(max_n=5))
def test_modulus_is_a_threshold(s):
    eps_grid, _ = _eps_delta_grid(s)
    tv = transition_values(s)
    for e in eps_grid[::2]:
        sup, attained = shadowing_modulus(s, e)
        if sup == INF:
            assert all(decide_shadowing(s, e, v + 1).holds for v in tv)
            continue
        assert sup > 0
        above = [v for v in tv if v > sup] + [sup + 1]
        assert not decide_shadowing(s, e, min(above)).holds
        if attained:
            assert decide_shadowing(s, e, sup).holds
        assert decide_shadowing(s, e, sup * Fraction(99, 100)).holds


@given(finite_systems(max_n=5))
def test_semi_anosov_delta_is_largest(s):
    for a in critical_alphas(s)[::2]:
        cert = certify_semi_anosov(s, a)
        if not cert.holds:
            continue
        d = cert.delta
        assert 0 < d <= a / 4
        assert is_eps_alpha_expansive(s, d / 4, a, ordered=False).holds
        assert decide_shadowing(s, a / 4, d).holds
        for bigger in [v for v in transition_values(s) if d < v <= a / 4] + \
                ([a / 4] if d < a / 4 else []):
            assert not (is_eps_alpha_expansive(s, bigger / 4, a, ordered=False).holds
                        and decide_shadowing(s, a / 4, bigger).holds)


@given(finite_systems(max_n=5))
def test_pair_route_implies_expansiveness(s):
    # surviving pairs of delta-pseudo-orbits inside alpha must be eps-close; with delta
    # at most the smallest positive transition only true orbits survive
    for a in critical_alphas(s)[::2]:
        ok, _ = pair_pseudo_orbit_expansiveness(s, a, a, min([v for v in transition_values(s) if v > 0],
                                                                default=Fraction(1)))
        if ok:
            assert is_eps_alpha_expansive(s, a, a).holds


def test_pseudo_orbit_graph_delta_inf(c3):
    pog = pseudo_orbit_graph(c3, INF)
    assert pog.trimmed.size == 3 and all(len(ws) == 3 for ws in pog.trimmed.succ)

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import finite_systems
import oracles
from corpus import critical_alphas
from expshadow.errors import BadParameters, NoShadowingPoint, PropertyFailure, TooLarge
from expshadow.expansivity import expansivity_constant
from expshadow.quotients import build_quotient, lewowicz_relation
from expshadow.shadowing import certify_semi_anosov
from expshadow.stability import build_semiconjugacy, permutations_within, stability_sweep
from expshadow.systems import c0_distance
from expshadow.witnesses import verify_witness

H = Fraction(1, 2)
STATS = {"checked": 0}


def _setup(s, alpha):
    part = lewowicz_relation(s, alpha)
    return part, build_quotient(s, part)


class TestSemiconjugacy:
    def test_unperturbed_gives_projection(self, c3):
        part, q = _setup(c3, H)
        res = build_semiconjugacy(c3, part, H, c3.map)
        assert res.q_g == q.projection
        assert res.verified_semiconjugacy and res.unique_in_neighborhood
        assert res.c0_distance_to_q == 0 and res.delta == Fraction(1, 8)

    @pytest.mark.parametrize("g", [(0, 1, 2), (2, 0, 1)])
    def test_far_perturbations_have_no_shadow(self, c3, g):
        part, _ = _setup(c3, H)
        with pytest.raises(NoShadowingPoint) as info:
            build_semiconjugacy(c3, part, H, g)
        ok, _ = verify_witness(c3, info.value.witness)
        assert ok

    def test_partition_must_match(self, c3):
        part, _ = _setup(c3, H)
        with pytest.raises(BadParameters):
            build_semiconjugacy(c3, part, 2, c3.map)


class TestSweep:
    def test_small_radius(self, c3):
        part, _ = _setup(c3, H)
        rep = stability_sweep(c3, part, H, Fraction(1, 8))
        assert rep.count == 1 and rep.success_rate == 1

    def test_large_radius(self, c3):
        part, _ = _setup(c3, H)
        rep = stability_sweep(c3, part, H, Fraction(3, 2))
        assert rep.count == 6 and rep.successes == 1
        assert [e.g for e in rep.entries if e.success] == [tuple(c3.map)]
        for e in rep.entries:
            if not e.success:
                assert verify_witness(c3, e.witness)[0]

    def test_point(self, pt):
        part, _ = _setup(pt, 1)
        rep = stability_sweep(pt, part, 1, 1)
        assert rep.count == 1 and rep.success_rate == 1

    def test_cap(self):
        from expshadow.fixtures import cycle
        s = cycle(9)
        with pytest.raises(TooLarge):
            stability_sweep(s, lewowicz_relation(s, H), H, 1, enumeration_cap=8)
        rep = stability_sweep(s, lewowicz_relation(s, H), H, 1, enumeration_cap=8, sample=3)
        assert rep.sampled and rep.count >= 1

    def test_parallel_matches_serial(self, prod):
        a = None
        for alpha in critical_alphas(prod):
            if certify_semi_anosov(prod, alpha).holds:
                a = alpha
                break
        assert a is not None
        part = lewowicz_relation(prod, a)
        r = 2 * max(prod.d(x, y) for x, y in prod.pairs())
        one = stability_sweep(prod, part, a, r, jobs=1)
        two = stability_sweep(prod, part, a, r, jobs=2)
        assert one.to_json() == two.to_json()


def test_permutations_within_is_exact(l4):
    import itertools
    for r in (Fraction(1), Fraction(2), Fraction(5, 2), Fraction(4)):
        brute = [p for p in itertools.permutations(range(l4.n)) if c0_distance(l4, p) < r]
        assert permutations_within(l4, r) == brute


@settings(max_examples=40)
@given(finite_systems(max_n=5), st.data())
def test_semiconjugacy_against_brute_force(s, data):
    alphas = [a for a in critical_alphas(s) if certify_semi_anosov(s, a).holds]
    if not alphas:
        return
    a = data.draw(st.sampled_from(alphas))
    part, q = _setup(s, a)
    perms = permutations_within(s, max(s.diameter, Fraction(1)))
    g = data.draw(st.sampled_from(perms))
    try:
        res = build_semiconjugacy(s, part, a, g, quotient=q)
    except PropertyFailure:
        return
    Q = q.quotient
    assert all(Q.map[res.q_g[x]] == res.q_g[g[x]] for x in range(s.n))
    # q_g(x) holds a point whose orbit stays alpha/4-close to the g-orbit of x
    L = oracles.full_order(s.map) * oracles.full_order(g)
    for x in range(s.n):
        assert any(part.class_of[z] == res.q_g[x] and
                   all(s.d(oracles.iterate(s.map, z, k), oracles.iterate(g, x, k)) < a / 4 for k in range(L))
                   for z in range(s.n))
    STATS["checked"] += 1
    alpha_R = expansivity_constant(Q)
    sols = oracles.semiconjugacies_in_ball(q, g, alpha_R / 2)
    if res.c0_distance_to_q < alpha_R / 2:
        assert tuple(res.q_g) in sols
        assert res.unique_in_neighborhood == (len(sols) == 1)
    else:
        assert res.unique_in_neighborhood == (len(sols) <= 1)


def test_brute_force_comparison_ran():
    # the property above must have compared at least a few real semiconjugacies
    test_semiconjugacy_against_brute_force()
    assert STATS["checked"] >= 5

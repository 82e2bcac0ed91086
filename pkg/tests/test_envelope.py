import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import finite_systems
import oracles
from corpus import systems
from expshadow.envelope import (build_periodic_sigma, build_shadowing_envelope, embed,
                                embedded_distance, envelope_expansiveness, envelope_modulus,
                                orbit_word, sigma_metric, sigma_weights, verify_image_shadowing)
from expshadow.errors import BadPeriod, NotExpansive, ResourceLimit
from expshadow.expansivity import is_eps_alpha_expansive
from expshadow.quotients import lewowicz_relation
from expshadow.shadowing import INF

H = Fraction(1, 2)


class TestWeights:
    def test_period_three(self):
        assert sigma_weights(3) == (Fraction(9, 7), Fraction(6, 7), Fraction(6, 7))

    @pytest.mark.parametrize("P", range(1, 11))
    def test_sum_is_three(self, P):
        w = sigma_weights(P)
        assert len(w) == P and sum(w) == 3
        # each weight is the sum over k = r mod P of 2^-|k|
        for r, c in enumerate(w):
            approx = sum(Fraction(1, 2 ** abs(k)) for k in range(-60 * P, 60 * P + 1) if k % P == r)
            assert abs(approx - c) < Fraction(1, 2 ** 50)


class TestSpace:
    def test_rho_zero_is_the_image(self, c3):
        sp = build_periodic_sigma(c3, 3, 0)
        assert sorted(sp.elements) == [(0, 1, 2), (1, 2, 0), (2, 0, 1)]
        emb = embed(c3, sp)
        assert all(sp.system.map[emb.image[x]] == emb.image[c3.map[x]] for x in range(3))

    def test_rho_one_is_everything(self, c3):
        sp = build_periodic_sigma(c3, 3, 1)
        assert sp.size == 27 and set(sp.elements) == set(itertools.product(range(3), repeat=3))

    def test_bad_period(self, c3):
        with pytest.raises(BadPeriod):
            build_periodic_sigma(c3, 2, 0)
        with pytest.raises(BadPeriod):
            build_periodic_sigma(c3, 0, 0)

    def test_cap(self, c3):
        with pytest.raises(ResourceLimit):
            build_periodic_sigma(c3, 3, 1, element_cap=26)

    def test_metric_examples(self, c3):
        sp = build_periodic_sigma(c3, 3, 1)
        assert sigma_metric(sp, ("0", "1", "2"), ("0", "1", "2")) == 0
        assert sigma_metric(sp, ("0", "1", "2"), ("1", "2", "0")) == 3
        assert sigma_metric(sp, ("0", "1", "2"), ("0", "1", "0")) == Fraction(6, 7)
        i, j = sp.element_index(("0", "1", "2")), sp.element_index(("0", "1", "0"))
        assert sp.system.d(i, j) == Fraction(6, 7)

    def test_embedding(self, c3):
        sp = build_periodic_sigma(c3, 3, 0)
        emb = embed(c3, sp)
        assert sp.elements[emb.image[0]] == (0, 1, 2)
        assert emb.injective and emb.intertwines


@settings(max_examples=25)
@given(finite_systems(max_n=4, max_weight=3))
def test_space_metric_matches_bi_infinite_sum(s):
    P = s.order
    if len(s.points) ** P > 300:
        return
    rho = max((s.d(s.map[x], y) for x in range(s.n) for y in range(s.n)), default=0)
    sp = build_periodic_sigma(s, P, rho)
    assert sp.size == s.n ** P
    for a in range(0, sp.size, max(1, sp.size // 6)):
        for b in range(0, sp.size, max(1, sp.size // 6)):
            total, tail = oracles.sigma_distance(s, sp.elements[a], sp.elements[b])
            assert total <= sp.system.d(a, b) <= total + tail
    # shift is rotation and a bijection
    assert sorted(sp.system.map) == list(range(sp.size))
    for i, e in enumerate(sp.elements):
        assert sp.elements[sp.system.map[i]] == e[1:] + e[:1]


@pytest.mark.parametrize("idx", range(20))
def test_sandwich_bound(idx, c3):
    base = c3 if idx == 0 else systems(20, max_n=6, offset=300)[idx]
    P = base.order
    sp = build_periodic_sigma(base, P, 0)
    emb = embed(base, sp)
    for x, y in itertools.product(range(base.n), repeat=2):
        D = base.orbit_sup(x, y)
        a, b = emb.image[x], emb.image[y]
        fx, fy = x, y
        for _ in range(P):
            assert base.d(fx, fy) <= sp.system.d(a, b) <= 3 * D
            a, b, fx, fy = sp.system.map[a], sp.system.map[b], base.map[fx], base.map[fy]


class TestImageShadowing:
    def test_examples(self, c3):
        sp = build_periodic_sigma(c3, 3, 1)
        rep = verify_image_shadowing(sp, 2, 4, 3)
        assert rep.holds and rep.worst_distance == Fraction(12, 7) and rep.in_space
        assert verify_image_shadowing(sp, 4, 4, 6).holds
        tiny = min(embedded_distance(c3, u, v) for u in range(3) for v in range(3) if u != v)
        rep = verify_image_shadowing(sp, Fraction(1, 100), tiny, 6)
        assert rep.holds and rep.worst_distance == 0
        assert not verify_image_shadowing(sp, Fraction(12, 7), 4, 3).holds

    def test_rho_zero_space_does_not_contain_constant_chain(self, c3):
        rep = verify_image_shadowing(build_periodic_sigma(c3, 3, 0), 2, 4, 3)
        assert rep.rho_needed == 1 and not rep.in_space


class TestEnvelopeExpansiveness:
    def test_c3(self, c3):
        ee = envelope_expansiveness(c3, 1, H, 3)
        assert ee.rho == 1 and ee.rho_sup == INF and ee.size == 27

    def test_rho_zero_conjugate_to_base(self, c3):
        sp = build_periodic_sigma(c3, 3, 0)
        emb = embed(c3, sp)
        for x, y in itertools.product(range(3), repeat=2):
            assert sp.system.orbit_sup(emb.image[x], emb.image[y]) == 3 * c3.orbit_sup(x, y)

    def test_point(self, pt):
        assert envelope_expansiveness(pt, 1, 1).rho_sup == INF

    def test_not_expansive(self, c3):
        with pytest.raises(NotExpansive):
            envelope_expansiveness(c3, 1, 2)

    @pytest.mark.parametrize("idx", range(8))
    def test_monotone_in_rho(self, idx):
        s = systems(8, max_n=4, offset=500)[idx]
        alpha = min(s.orbit_sup(x, y) for x, y in s.pairs() if x != y) / 2
        eps = alpha / 2
        try:
            ee = envelope_expansiveness(s, eps, alpha, element_cap=4000)
        except ResourceLimit:
            pytest.skip("space too large for the cap")
        assert is_eps_alpha_expansive(build_periodic_sigma(s, s.order, ee.rho, 4000).system,
                                      eps, alpha, ordered=False).holds
        if ee.rho_sup != INF:
            try:
                bigger = build_periodic_sigma(s, s.order, ee.rho_sup, 4000)
            except ResourceLimit:
                return
            assert not is_eps_alpha_expansive(bigger.system, eps, alpha, ordered=False).holds


class TestEnvelope:
    def test_c3(self, c3):
        env = build_shadowing_envelope(c3, 3, H, eps_grid=[Fraction(1, 4), Fraction(12, 7)])
        assert env.rho == 1 and env.space.size == 27
        assert env.quotient.quotient.n == 27
        assert env.injective and env.intertwines and env.holds
        assert tuple(env.space.elements[e] for e in env.mu) == ((0, 1, 2), (1, 2, 0), (2, 0, 1))
        assert [m for _, m, _ in env.moduli] == [1, 1]
        assert env.delta <= H / 4

    def test_envelope_property_fails_above_modulus(self, c3):
        env = build_shadowing_envelope(c3, 3, H, eps_grid=[Fraction(1, 4)])
        assert envelope_modulus(c3, env.quotient, env.mu, Fraction(1, 4)) == (1, True)

    def test_point(self, pt):
        env = build_shadowing_envelope(pt, 1)
        assert env.quotient.quotient.n == 1 and env.holds

    def test_partition_is_shift_compatible(self, c3, l4):
        for base in (c3, l4):
            env = build_shadowing_envelope(base)
            part = lewowicz_relation(env.space.system, env.alpha)
            assert part.incompatibility(env.space.system.map) is None

    def test_bad_period(self, c3):
        with pytest.raises(BadPeriod):
            build_shadowing_envelope(c3, 4)

    def test_orbit_word(self, c3):
        assert orbit_word(c3, 0, 6) == (0, 1, 2, 0, 1, 2)

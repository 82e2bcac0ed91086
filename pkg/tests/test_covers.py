import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import finite_systems
import oracles
from corpus import critical_alphas
from expshadow.covers import (Cover, cover_power, cover_quotient_pipeline, cover_relation,
                              is_generator, is_U_semi_expansive, pullback_cover)
from expshadow.errors import AlphaTooLarge, NotUSemiExpansive, ParseError
from expshadow.expansivity import is_semi_expansive
from expshadow.quotients import build_quotient, lewowicz_relation
from expshadow.witnesses import verify_witness

SINGLETONS = [[0], [1], [2]]
TRIANGLE = [[0, 1], [1, 2], [2, 0]]
L4_CHAIN = [[0, 1], [1, 2], [2, 3]]


def test_cover_validation():
    with pytest.raises(ParseError):
        Cover.of([[0], []], 2)
    with pytest.raises(ParseError):
        Cover.of([[0]], 2)


def test_relation_examples(c3, l4):
    rel = cover_relation(c3, Cover.of(SINGLETONS, 3))
    assert rel.is_identity() and rel.transitive
    rel = cover_relation(c3, Cover.of(TRIANGLE, 3))
    assert all(all(r) for r in rel.pairs) and rel.transitive
    rel = cover_relation(l4, Cover.of(L4_CHAIN, 4))
    assert rel.related(0, 1) and rel.related(1, 2) and not rel.related(0, 2)
    assert not rel.transitive


def test_power_examples():
    assert cover_power(Cover.of(SINGLETONS, 3), 4).canonical() == ((0,), (1,), (2,))
    assert (0, 1, 2) in cover_power(Cover.of(TRIANGLE, 3), 2).canonical()
    c = Cover.of(L4_CHAIN, 4)
    assert cover_power(c, 1).canonical() == c.canonical()


def test_u_semi_examples(c3, l4):
    assert is_U_semi_expansive(c3, Cover.of(SINGLETONS, 3)).holds
    assert is_U_semi_expansive(c3, Cover.of(TRIANGLE, 3)).holds
    res = is_U_semi_expansive(l4, Cover.of(L4_CHAIN, 4))
    assert not res.holds
    # (0, 3) is the pair the chain of all three members links; the first pair found is (0, 2)
    assert res.witness == (0, 2)
    assert res.power_relation.related(0, 3) and not res.relation.related(0, 3)


def test_generator_examples(c3, pt):
    assert is_generator(c3, Cover.of(SINGLETONS, 3)) == (True, None)
    assert is_generator(c3, Cover.of(TRIANGLE, 3)) == (False, (0, 1))
    assert is_generator(pt, Cover.of([[0]], 1)) == (True, None)


def test_pipeline_examples(c3, l4):
    res = cover_quotient_pipeline(c3, Cover.of(SINGLETONS, 3))
    assert res.quotient.quotient.n == 3 and res.generator
    assert res.quotient_cover.canonical() == ((0,), (1,), (2,))
    res = cover_quotient_pipeline(c3, Cover.of(TRIANGLE, 3))
    assert res.quotient.quotient.n == 1 and res.generator
    with pytest.raises(NotUSemiExpansive) as info:
        cover_quotient_pipeline(l4, Cover.of(L4_CHAIN, 4))
    assert verify_witness(l4, info.value.witness)[0]


def test_pullback_example(c3):
    q = build_quotient(c3, lewowicz_relation(c3, Fraction(1, 2)))
    res = pullback_cover(q, Fraction(1, 2))
    assert res.radius == Fraction(1, 16)
    assert res.cover.canonical() == ((0,), (1,), (2,))
    assert res.holds
    with pytest.raises(AlphaTooLarge):
        pullback_cover(q, 1)


@st.composite
def system_and_cover(draw):
    s = draw(finite_systems(max_n=6))
    sets = draw(st.lists(st.sets(st.integers(0, s.n - 1), min_size=1), min_size=1, max_size=s.n + 1))
    sets += [{x} for x in range(s.n) if not any(x in m for m in sets)]
    return s, Cover.of(sets, s.n)


@given(system_and_cover())
def test_relation_matches_window_oracle(sc):
    s, cover = sc
    rel = cover_relation(s, cover)
    for x in range(s.n):
        for y in range(s.n):
            assert rel.related(x, y) == oracles.cover_related(s, cover.sets, x, y)


@given(system_and_cover(), st.integers(1, 4))
def test_power_matches_chain_enumeration(sc, k):
    _, cover = sc
    assert set(cover_power(cover, k).sets) == oracles.chain_unions(list(dict.fromkeys(cover.sets)), k)


@given(system_and_cover())
def test_u_semi_implies_generator_quotient(sc):
    s, cover = sc
    res = is_U_semi_expansive(s, cover)
    if res.holds:
        assert res.relation == res.power_relation and res.relation.transitive
        assert cover_quotient_pipeline(s, cover).generator
    else:
        x, y = res.witness
        assert res.power_relation.related(x, y) and not res.relation.related(x, y)


@given(finite_systems(max_n=6))
def test_pullback_from_expansive_quotient(s):
    for a in critical_alphas(s):
        if not is_semi_expansive(s, a).holds:
            continue
        q = build_quotient(s, lewowicz_relation(s, a))
        c = min((q.quotient.orbit_sup(x, y) for x, y in q.quotient.pairs()), default=Fraction(2))
        assert pullback_cover(q, c / 2).holds


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_higher_powers_only_grow(c3, k):
    # R(U^k) is monotone in k for every cover of C3
    subsets = [s for r in (1, 2, 3) for s in itertools.combinations(range(3), r)]
    for r in range(1, 4):
        for fam in itertools.combinations(subsets, r):
            if set().union(*fam) != {0, 1, 2}:
                continue
            cover = Cover.of(fam, 3)
            lo = cover_relation(c3, cover_power(cover, k - 1))
            hi = cover_relation(c3, cover_power(cover, k))
            assert lo.subset_of(hi)

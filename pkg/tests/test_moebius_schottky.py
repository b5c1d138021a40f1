from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padic_mumford.localfield import INF, abs_value, padic
from padic_mumford.moebius import (
    MoebiusMap,
    apply,
    classify,
    fixed_points,
    from_fixed_points,
    involution,
    multiplier,
)
from padic_mumford.schottky import (
    Disc,
    GroupValidationError,
    LimitSetError,
    SchottkyGroup,
    abelianize,
    build_whittaker,
    reduce_word,
    whittaker_pair,
)

P = 5
entries = st.integers(min_value=-30, max_value=30)


def _mat(a, b, c, d):
    return MoebiusMap.from_rationals([[a, b], [c, d]], P)


@settings(max_examples=50)
@given(entries, entries, entries, entries, entries, entries, entries, entries, st.integers(-50, 50))
def test_composition_is_function_composition(a, b, c, d, e, f, g, h, z):
    if a * d - b * c == 0 or e * h - f * g == 0:
        return
    m, n = _mat(a, b, c, d), _mat(e, f, g, h)
    zz = padic(z, P)
    lhs = apply(m @ n, zz)
    rhs = apply(m, apply(n, zz))
    if lhs is INF or rhs is INF:
        assert lhs is rhs
    else:
        assert lhs == rhs


def test_inverse_and_identity():
    m = _mat(3, 1, 7, 2)
    assert (m @ m.inverse()).is_identity()
    assert classify(MoebiusMap.identity(P)) == "identity"


def test_fixed_points_and_multiplier_round_trip():
    A, R, mu = padic(Fraction(1, 3), P), padic(7, P), padic(25, P)
    m = from_fixed_points(A, R, mu)
    assert classify(m) == "hyperbolic"
    attr, rep = fixed_points(m)
    assert attr == A and rep == R
    assert multiplier(m) == mu
    assert abs_value(multiplier(m)) < 1


def test_involution_has_order_two():
    s = involution(padic(3, P), padic(8, P))
    assert (s @ s).is_identity()
    assert classify(s) == "elliptic"


def test_word_helpers():
    assert reduce_word((1, 2, -2, -1, 1)) == (1,)
    assert abelianize((1, 2, 1, -2), 2) == (2, 0)


def test_group_validates(genus_two_group):
    G = genus_two_group
    assert G.genus == 2
    assert G.limit_point_nesting(3) == []


def test_reduce_to_fundamental(genus_two_group):
    G = genus_two_group
    F = G.fundamental_domain()
    for z in (Fraction(3, 50), Fraction(2) + 5**3, Fraction(626)):
        zz = padic(z, P)
        zF, w = G.reduce_to_fundamental(zz)
        assert F.contains(zF)
        assert G.apply_word(w, zz) == zF


def test_overlapping_discs_rejected():
    gen = MoebiusMap.from_rationals([[25, 0], [0, 1]], P)
    with pytest.raises(GroupValidationError):
        SchottkyGroup(P, [gen], [Disc(padic(0, P), 0), Disc(padic(0, P), 0, True)]).validate()


def test_non_hyperbolic_generator_rejected():
    ell = involution(padic(1, P), padic(-1, P))
    with pytest.raises(GroupValidationError):
        SchottkyGroup(P, [ell], [Disc(padic(0, P), 2), Disc(padic(0, P), 0, True)]).validate()


def test_whittaker_relations():
    a, b = whittaker_pair(2, 2, P)
    W = build_whittaker([(5, -5), (a, b)], P)
    rel = W.relations_report()
    assert rel["ok"]
    assert W.schottky.genus == 2
    # first generator is z -> 25 z
    assert abs_value(multiplier(W.schottky.generators[0])) == Fraction(1, 25)


def test_limit_set_points_are_refused(genus_two_group):
    # 1/50 -> 1/2 -> inf, the repelling fixed point of the first generator
    with pytest.raises(LimitSetError):
        genus_two_group.reduce_to_fundamental(padic(Fraction(1, 50), P))

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from padic_mumford.localfield import (
    INF,
    NoSquareRoot,
    PadicNumber,
    PrecisionError,
    abs_rational,
    abs_value,
    padic,
    relative_digits,
    sqrt_if_exists,
    valuation_rational,
)

P = 5
small = st.fractions(min_value=-10**6, max_value=10**6, max_denominator=10**4)
nonzero = small.filter(lambda x: x != 0)


@given(small, small)
def test_addition_matches_rationals(x, y):
    assert padic(x, P) + padic(y, P) == padic(x + y, P)


@given(small, small)
def test_multiplication_matches_rationals(x, y):
    assert padic(x, P) * padic(y, P) == padic(x * y, P)


@given(small, nonzero)
def test_division_matches_rationals(x, y):
    assert padic(x, P) / padic(y, P) == padic(x / y, P)


@given(nonzero)
def test_absolute_value_is_p_power(x):
    assert abs_value(padic(x, P)) == abs_rational(x, P) == Fraction(P) ** -valuation_rational(x, P)


@given(nonzero, nonzero)
def test_ultrametric_inequality(x, y):
    s = padic(x, P) + padic(y, P)
    if not s.is_zero:
        assert abs_value(s) <= max(abs_value(padic(x, P)), abs_value(padic(y, P)))


@given(st.fractions(min_value=-1000, max_value=1000, max_denominator=50).filter(lambda x: x != 0))
def test_rational_reconstruction_round_trip(x):
    assert padic(x, P).lift_rational() == x


def test_known_digits():
    # -1 = 4 + 4*5 + 4*25 + ...
    assert padic(-1, P).digits(5) == [4] * 5
    assert padic(Fraction(1, 5), P).valuation == -1


def test_square_root_convention():
    r = sqrt_if_exists(padic(-1, P))
    assert r * r == padic(-1, P)
    assert r.digits(1)[0] in (1, 2)
    assert sqrt_if_exists(padic(25, P)) == padic(5, P)


def test_square_root_refusals():
    with pytest.raises(NoSquareRoot):
        sqrt_if_exists(padic(5, P))
    with pytest.raises(NoSquareRoot):
        sqrt_if_exists(padic(2, P))


def test_cancellation_loses_valuation():
    x = padic(1, P, 10)
    y = padic(1 + 5**12, P, 20)
    d = x - y
    assert d.is_inexact_zero
    with pytest.raises(PrecisionError):
        d.valuation


def test_exact_zero_and_infinity():
    z = PadicNumber.zero(P)
    assert z.is_zero and abs_value(z) == 0
    assert padic("inf", P) is INF
    assert relative_digits(padic(3, P), padic(3 + 5**7, P)) == 7


def test_mixing_primes_is_rejected():
    with pytest.raises(ValueError):
        padic(1, 5) + padic(1, 7)

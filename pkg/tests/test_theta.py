from fractions import Fraction

import pytest

from padic_mumford.localfield import padic, relative_digits
from padic_mumford.theta import (
    Character,
    ConvergenceError,
    PeriodMatrix,
    SquareRootError,
    ThetaCalculus,
    invariant_function,
    riemann_theta,
    theta_gamma,
    theta_series,
)

P = 5


@pytest.fixture(scope="module")
def tate(rank_one):
    calc = ThetaCalculus(rank_one, 8)
    return calc, calc.period_matrix()


def test_u_has_closed_form(tate):
    calc, _ = tate
    x0 = calc.base_point.lift_rational()
    for z in (Fraction(2), Fraction(7, 5), Fraction(11, 3)):
        assert relative_digits(calc.u((1,), padic(z, P)), padic(x0 / z, P)) >= calc.digits


def test_period_is_the_multiplier(tate):
    calc, PM = tate
    assert relative_digits(PM.Q[0][0], padic(25, P)) >= calc.digits
    assert relative_digits(PM.P[0], padic(5, P)) >= calc.digits


def test_theta_product_vanishes_at_its_zero(rank_one):
    calc = ThetaCalculus(rank_one, 6)
    T = calc.theta(Fraction(3), Fraction(4))
    assert T.evaluate(padic(3, P)).value.is_zero
    assert not T.evaluate(padic(2, P)).value.is_zero


def test_automorphy_factor_is_a_character(tate):
    calc, _ = tate
    a, b = Fraction(3), Fraction(4)
    one = calc.automorphy_factor(a, b, (1,))
    two = calc.automorphy_factor(a, b, (1, 1))
    assert relative_digits(two, one * one) >= calc.digits - 2


def test_invariant_function_is_invariant(tate, rank_one):
    calc, PM = tate
    c = Character((padic(Fraction(2, 3), P),))
    c1 = Character((padic(Fraction(3, 7), P),))
    c2 = Character((padic(Fraction(6, 11), P),))
    z = padic(2, P)
    gz = rank_one.apply_word((-1,), z)
    f = invariant_function(calc, PM, c, c1, c2, z)
    fg = invariant_function(calc, PM, c, c1, c2, gz)
    assert relative_digits(f, fg) >= calc.digits - 4


def test_theta_series_direct_sum():
    PM = PeriodMatrix.from_periods([[padic(25, P)]])
    w = Fraction(3, 7)
    sv = theta_series(PM, [padic(w, P)], 3)
    assert sv.value == padic(sum(Fraction(5) ** (n * n) * w**n for n in range(-3, 4)), P)
    assert sv.omitted == Fraction(1, 5**16)
    assert theta_gamma(PM, Character((padic(w, P),)), 3).value == sv.value


def test_square_root_refusal():
    with pytest.raises(SquareRootError):
        PeriodMatrix.from_periods([[padic(5, P)]])
    with pytest.raises(SquareRootError):
        PeriodMatrix.from_periods([[padic(50, P)]])


def test_divergent_period_refused():
    with pytest.raises(ConvergenceError):
        PeriodMatrix.from_periods([[padic(2, P)]])


def test_riemann_theta_refuses_unconverged_box(tate):
    calc, PM = tate
    with pytest.raises(ConvergenceError):
        riemann_theta(calc, PM, Character((padic(Fraction(1, 5**9), P),)), padic(2, P), 1)


def test_character_algebra():
    a = Character((padic(2, P), padic(3, P)))
    b = Character((padic(4, P), padic(Fraction(1, 3), P)))
    assert (a * b / b).agrees_with(a, 30)
    assert (a * a.inverse()).is_trivial(30)
    assert a.on_exponents((2, -1)) == padic(Fraction(4, 3), P)

from fractions import Fraction

import pytest

from padic_mumford.geometry import Ball
from padic_mumford.hyperelliptic import (
    FixtureError,
    curve_from_config,
    default_probes,
    find_base_character,
    fit_standard_function,
    make_fixture,
    pole_cut,
)
from padic_mumford.localfield import abs_value, padic, relative_digits

P = 5
# frozen: divisor of F = sum 2[a_i] - 2[b_i] for the pairs (5, -5), (1/3, 7/11)
F_DIVISOR_G2 = {Fraction(5): 2, Fraction(-5): -2, Fraction(1, 3): 2, Fraction(7, 11): -2}


def test_half_periods(curve_g2, curve_g3):
    for curve in (curve_g2, curve_g3):
        assert curve.steen.ok
        assert curve.half.group_check(curve.digits)


def test_base_character_search_matches_fixture(curve_g2):
    found, transcript = find_base_character(curve_g2)
    assert found.agrees_with(curve_g2.base, curve_g2.digits)
    assert transcript


def test_standard_function_divisor(curve_g2):
    C, divisor = fit_standard_function(curve_g2)
    assert C == 1
    assert {pt.lift_rational(): n for pt, n in divisor} == F_DIVISOR_G2


def test_x_is_invariant_under_the_hyperelliptic_involution(curve_g2):
    # s_0(z) = 1/z, and both 4 and 1/4 lie in F
    x1, x2 = curve_g2.x(padic(4, P)), curve_g2.x(padic(Fraction(1, 4), P))
    assert relative_digits(x1, x2) >= curve_g2.digits


def test_branch_points_are_distinct(curve_g2):
    bp = curve_g2.branch_points()
    assert bp.distinct(curve_g2.digits)
    # 2g points x(a_i), x(b_i), plus e_1 = x(-1); the last one is x(1) = infinity
    assert len(bp.finite) == 2 * curve_g2.genus
    assert bp.at_minus_one.valuation == 3


@pytest.mark.parametrize("name", ["g2", "g3"])
def test_frozen_forms_match_the_series(name, request):
    cfg = request.getfixturevalue(f"cfg_{name}")
    curve = request.getfixturevalue(f"curve_{name}")
    m = cfg.hyperelliptic["exponents"]
    omega = cfg.omega_spec()
    for z in default_probes(curve)[:4]:
        assert omega.value(z) == curve.omega_abs(z, m)


def test_pole_cut_balls(curve_g2):
    balls = pole_cut(curve_g2.W)
    assert [b.center.lift_rational() for b in balls] == [Fraction(-5), Fraction(7, 11)]
    assert all(isinstance(b, Ball) for b in balls)


def test_fixture_validation(cfg_g2):
    with pytest.raises(FixtureError):
        make_fixture([(0, 2), (2, 2)], P, m=[1, 1])
    plain = cfg_g2.__class__(**{**cfg_g2.__dict__, "whittaker": None})
    with pytest.raises(FixtureError):
        curve_from_config(plain)


def test_fixture_multiplier_matches_group(cfg_g2, model_g2):
    assert abs_value(cfg_g2.kernel_spec().multiplier) == Fraction(1, 25)
    assert cfg_g2.hyperelliptic["half_period_group"] is True

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padic_mumford.geometry import (
    Ball,
    GeometryError,
    InconsistentFormError,
    OmegaSpec,
    exact_log_p,
    fit_divisor,
    measure_ball,
    measure_region,
    shell_slope,
    zero_ball_integral,
)
from padic_mumford.localfield import abs_value, padic

P = 5


def _ball(c, k):
    return Ball(padic(c, P), k)


def test_zero_ball_integral_closed_form():
    # integral over Z_5 of |x|^2 = (1 - 1/5) / (1 - 5^-3)
    assert zero_ball_integral(P, 2, 0) == Fraction(4, 5) / (1 - Fraction(1, 125))
    assert zero_ball_integral(P, 0, 3) == Fraction(1, 125)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.tuples(st.integers(0, 124), st.integers(1, 3)), min_size=1, max_size=3, unique_by=lambda t: t[0]),
    st.integers(0, 124),
)
def test_measure_is_additive_over_children(zeros, center):
    omega = OmegaSpec(Fraction(1), [(padic(a, P), n) for a, n in zeros],
                      hole_factors=[(_ball(0, 2), -1)])
    B = _ball(center, 1)
    assert measure_ball(omega, B) == sum(measure_ball(omega, ch) for ch in B.children())


def test_hole_factor_weight():
    omega = OmegaSpec(Fraction(1), [(padic(5, P), 2)], hole_factors=[(_ball(0, 2), -2)])
    # inside the cap the factor is r_H^e = 25^2
    assert omega.hole_weight(padic(0, P)) == 625
    assert omega.hole_weight(padic(1, P)) == 1


def test_degree_validation():
    omega = OmegaSpec(Fraction(1), [(padic(5, P), 2)])
    omega.validate_degree(2)
    with pytest.raises(GeometryError):
        omega.validate_degree(3)


def test_ball_relations():
    big, small = _ball(0, 1), _ball(10, 2)
    assert big.contains_ball(small)
    assert _ball(1, 1).disjoint_from(_ball(2, 1))
    assert len(big.children()) == P
    assert big.haar() == Fraction(1, 5)


def test_tree_mass_equals_region_measure(model_g2):
    T = model_g2.tree()
    assert T.total_mass() == measure_region(model_g2.omega, model_g2.F)
    for v in T.massive():
        assert T.retraction_vertex(v.rep).id == v.id


def test_tree_dump_fields(model_g2):
    nodes = model_g2.tree().to_json()["nodes"]
    assert {"id", "center", "k", "nu", "neighbors"} <= set(nodes[0])
    assert model_g2.tree().to_dot().startswith("graph")


def test_retraction_rejects_points_outside_F(model_g2):
    with pytest.raises(GeometryError):
        model_g2.tree().retraction_vertex(padic(Fraction(1, 125), P))


def test_exact_log():
    assert exact_log_p(Fraction(1, 125), P) == -3
    with pytest.raises(InconsistentFormError):
        exact_log_p(Fraction(2), P)


def test_fit_divisor_recovers_a_synthetic_form():
    a, b = padic(3, P), padic(Fraction(1, 2), P)
    hole = _ball(0, 2)

    def absval(z):
        return 5 * abs_value(z - a) ** 2 * abs_value(z - b) ** -2 * max(abs_value(z), hole.haar()) ** -1

    assert shell_slope(absval, a, (4, 5, 6)) == 2
    probes = [padic(x, P) for x in (1, 2, 4, 6, 7, 5, 10, 15)]
    C, divisor, factors = fit_divisor(absval, [a, b, padic(1, P)], probes, holes=[hole])
    assert C == 5
    assert [(pt.lift_rational(), n) for pt, n in divisor] == [(3, 2), (Fraction(1, 2), -2)]
    assert [(H.k, e) for H, e in factors] == [(2, -1)]

from fractions import Fraction

import numpy as np
import pytest

from padic_mumford.genus import EndProfile, GenusError, estimate_order
from padic_mumford.heat import (
    Generator,
    HeatError,
    cauchy_residual,
    holding_times,
    sample_paths,
    semigroup,
    solve_cauchy,
)

P = 5


def test_generator_rejects_negative_rates():
    with pytest.raises(HeatError):
        Generator(np.array([[1.0, -1.0], [1.0, -1.0]]), np.ones(2))
    with pytest.raises(HeatError):
        Generator(np.array([[-1.0, 1.0], [1.0, -1.0]]), np.array([1.0, 0.0]))


def test_stationary_law_is_invariant(model_g3):
    gen = model_g3.generator()
    pi = gen.stationary()
    assert np.allclose(pi @ semigroup(gen, 3.0), pi, atol=1e-12)


def test_cauchy_problem(model_g2):
    gen = model_g2.generator()
    h0 = np.linspace(-1, 1, gen.size)
    sol = solve_cauchy(gen, h0, [0.0, 0.5, 5.0])
    assert np.allclose(sol.states[0], h0)
    assert cauchy_residual(gen, h0, 0.5) < 1e-6
    # heat flow relaxes toward the nu-average
    avg = float(gen.stationary() @ h0)
    assert np.abs(sol.states[-1] - avg).max() < np.abs(h0 - avg).max()


def test_sampler_is_deterministic(model_g2):
    gen = model_g2.generator()
    a = [p.to_json() for p in sample_paths(gen, 0, 5.0, 20, seed=4)]
    b = [p.to_json() for p in sample_paths(gen, 0, 5.0, 20, seed=4)]
    c = [p.to_json() for p in sample_paths(gen, 0, 5.0, 20, seed=5)]
    assert a == b and a != c


def test_holding_times_have_the_exit_rate(model_g2):
    gen = model_g2.generator()
    rate = -gen.L[0, 0]
    times = holding_times(gen, 0, 200_000, seed=1)
    assert abs(times.mean() * rate - 1) < 0.01


def _profile(increments):
    degs = [Fraction(0)]
    for d in increments:
        degs.append(degs[-1] + d)
    return EndProfile(0, "5", list(range(len(degs))), degs)


def test_order_from_geometric_increments():
    # increments p^-(n+1) j with n = 2
    prof = _profile([Fraction(1, 5 ** (3 * j)) for j in range(8)])
    n, period, ratios = estimate_order(prof, P)
    assert (n, period) == (2, 1)


def test_order_with_alternating_increments():
    # two interleaved geometric sequences: period 2, ratio p^(2 (n + 1)) with n = 2
    incs = [Fraction(3 if j % 2 else 7, 5 ** (3 * j)) for j in range(12)]
    n, period, _ = estimate_order(_profile(incs), P)
    assert (n, period) == (2, 2)


def test_unstable_profile_raises():
    incs = [Fraction(1, j * j + 1) for j in range(10)]
    with pytest.raises(GenusError):
        estimate_order(_profile(incs), P)

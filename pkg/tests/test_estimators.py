import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from padic_mumford.estimators import HeatSemigroup, SpectralGenusEstimator


def test_params_and_clone():
    est = SpectralGenusEstimator(depth=12, levels=20)
    assert est.get_params() == {"depth": 12, "levels": 20}
    twin = clone(est).set_params(levels=30)
    assert twin.levels == 30 and est.levels == 20


def test_genus_estimator(cfg_g2, cfg_g3):
    est = SpectralGenusEstimator().fit([cfg_g2, cfg_g3])
    assert est.predict().tolist() == [2, 3]
    assert est.multiplier_abs_ == ["1/25", "1/25"]
    assert est.score([cfg_g2], [2]) == 1.0


def test_unfitted_estimators_refuse():
    with pytest.raises(NotFittedError):
        SpectralGenusEstimator().predict()
    with pytest.raises(NotFittedError):
        HeatSemigroup().transform(np.ones((1, 3)))


def test_invalid_parameters():
    with pytest.raises(ValueError):
        SpectralGenusEstimator(levels=2).fit([])
    with pytest.raises(TypeError):
        SpectralGenusEstimator().fit([42])


def test_heat_transformer(cfg_g2):
    heat = HeatSemigroup(t=0.7).fit(cfg_g2)
    n = heat.n_features_in_
    ones = np.ones((3, n))
    assert np.allclose(heat.transform(ones), ones)
    delta = np.zeros((1, n))
    delta[0, 0] = 1.0
    out = heat.transform(delta)
    assert out.shape == (1, n)
    # exp(tL) conserves the nu-weighted mass
    pi = heat.stationary()
    assert np.isclose(out[0] @ pi, delta[0] @ pi)
    with pytest.raises(ValueError):
        heat.transform(np.ones((1, n + 1)))
    with pytest.raises(ValueError):
        HeatSemigroup(t=1.0).fit([cfg_g2, cfg_g2])

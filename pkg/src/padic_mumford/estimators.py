"""scikit-learn style front ends.

Inputs are curve configurations (``CurveConfig`` objects or paths to TOML files)
rather than feature matrices, so only the parameter handling and the fitted-state
checks of sklearn are reused.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from padic_mumford import config as config_mod
from padic_mumford.heat import semigroup
from padic_mumford.pipeline import CurveModel


def _as_config(item) -> config_mod.CurveConfig:
    if isinstance(item, config_mod.CurveConfig):
        return item
    if isinstance(item, (str, Path)):
        return config_mod.load(item)
    raise TypeError(f"expected a CurveConfig or a path, got {type(item).__name__}")


def _as_configs(X) -> list:
    if isinstance(X, (config_mod.CurveConfig, str, Path)):
        X = [X]
    return [_as_config(x) for x in X]


class SpectralGenusEstimator(BaseEstimator):
    """Recovers the genus of each configured curve from the degree increments of
    its diffusion operator.

    After ``fit`` the per-curve reports are in ``reports_`` and the recovered
    genera in ``genus_``.
    """

    def __init__(self, depth: int | None = None, levels: int = 24):
        self.depth = depth
        self.levels = levels

    def _report(self, cfg):
        return CurveModel.from_config(cfg).genus(self.depth, self.levels)

    def fit(self, X, y=None):
        if self.levels < 4:
            raise ValueError("levels must be at least 4 to see a period")
        self.reports_ = [self._report(cfg) for cfg in _as_configs(X)]
        self.genus_ = np.array([r.genus for r in self.reports_], dtype=int)
        self.multiplier_abs_ = [r.multiplier_abs for r in self.reports_]
        return self

    def predict(self, X=None) -> np.ndarray:
        check_is_fitted(self, "reports_")
        if X is None:
            return self.genus_.copy()
        return np.array([self._report(cfg).genus for cfg in _as_configs(X)], dtype=int)

    def score(self, X, y) -> float:
        """Fraction of curves whose genus is recovered exactly."""
        return float(np.mean(self.predict(X) == np.asarray(y)))


class HeatSemigroup(TransformerMixin, BaseEstimator):
    """Applies exp(tL) to vertex functions of one curve's truncated tree.

    ``fit`` takes a configuration; ``transform`` takes an array of shape
    (n_functions, n_vertices) and returns the evolved functions.
    """

    def __init__(self, t: float = 1.0, depth: int | None = None):
        self.t = t
        self.depth = depth

    def fit(self, X, y=None):
        if self.t < 0:
            raise ValueError("t must be nonnegative")
        cfgs = _as_configs(X)
        if len(cfgs) != 1:
            raise ValueError("HeatSemigroup fits exactly one curve")
        self.model_ = CurveModel.from_config(cfgs[0])
        self.generator_ = self.model_.generator(self.depth)
        self.n_features_in_ = self.generator_.size
        self.transition_ = semigroup(self.generator_, self.t)
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "transition_")
        H = check_array(X, dtype=float)
        if H.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} vertex values, got {H.shape[1]}")
        return H @ self.transition_.T

    def stationary(self) -> np.ndarray:
        check_is_fitted(self, "generator_")
        return self.generator_.stationary()

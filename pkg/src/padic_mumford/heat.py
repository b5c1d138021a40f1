"""Heat semigroup exp(tL) on vertex functions, Cauchy problems, Feller checks and
jump-path sampling for the Markov chain generated by L."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from padic_mumford.kernelop import OperatorMatrix, laplacian_array


class HeatError(ValueError):
    pass


@dataclass
class Generator:
    """A reversible generator L with stationary weights nu (nu(v) L(v, w) symmetric)."""

    L: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        self.L = np.asarray(self.L, dtype=float)
        self.nu = np.asarray(self.nu, dtype=float)
        n = self.L.shape[0]
        if self.L.shape != (n, n) or self.nu.shape != (n,):
            raise HeatError("generator and weights have inconsistent shapes")
        if np.any(self.nu <= 0):
            raise HeatError("weights must be positive")
        off = self.L - np.diag(np.diag(self.L))
        if np.any(off < 0):
            raise HeatError("off-diagonal rates must be nonnegative")
        root = np.sqrt(self.nu)
        sym = (root[:, None] * self.L) / root[None, :]
        self._sym = (sym + sym.T) / 2
        self._evals, self._evecs = np.linalg.eigh(self._sym)
        # conditioning of the similarity transform decides whether the spectral route is safe
        self._spectral_ok = root.max() / root.min() < 1e12

    @classmethod
    def from_operator(cls, M: OperatorMatrix) -> "Generator":
        return cls(laplacian_array(M), np.array([float(x) for x in M.nu]))

    @property
    def size(self) -> int:
        return self.L.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._evals

    def stationary(self) -> np.ndarray:
        return self.nu / self.nu.sum()


def semigroup(gen: Generator, t: float) -> np.ndarray:
    """P_t = exp(tL) through the symmetric similarity D^(1/2) L D^(-1/2)."""
    if t < 0:
        raise HeatError("time must be nonnegative")
    if t == 0:
        return np.eye(gen.size)
    if gen._spectral_ok:
        root = np.sqrt(gen.nu)
        core = (gen._evecs * np.exp(t * gen._evals)) @ gen._evecs.T
        P = core / root[:, None] * root[None, :]
    else:
        P = expm(t * gen.L)
    return P


@dataclass
class HeatSolution:
    times: list
    states: np.ndarray  # one row per time

    def mass(self, nu: np.ndarray) -> np.ndarray:
        return self.states @ nu

    def to_csv(self) -> str:
        n = self.states.shape[1]
        lines = ["t," + ",".join(f"v{i}" for i in range(n))]
        for t, row in zip(self.times, self.states):
            lines.append(f"{t!r}," + ",".join(repr(float(x)) for x in row))
        return "\n".join(lines) + "\n"


def solve_cauchy(gen: Generator, h0, times) -> HeatSolution:
    """h(t) = P_t h0 for each requested time."""
    h0 = np.asarray(h0, dtype=float)
    if h0.shape != (gen.size,) or not np.all(np.isfinite(h0)):
        raise HeatError("initial condition must be a finite vertex function")
    times = [float(t) for t in times]
    states = np.array([semigroup(gen, t) @ h0 for t in times])
    return HeatSolution(times, states)


def cauchy_residual(gen: Generator, h0, t: float, rel_step: float = 1e-6) -> float:
    """max |(h(t + dt) - h(t))/dt - L h(t)| with dt = rel_step * t."""
    dt = rel_step * t
    a = semigroup(gen, t) @ h0
    b = semigroup(gen, t + dt) @ h0
    return float(np.max(np.abs((b - a) / dt - gen.L @ a)))


# -- sampling ---------------------------------------------------------------


@dataclass
class JumpPath:
    times: list  # jump times, starting with 0
    vertices: list
    seed: int
    absorbed: bool = False

    def state_at(self, t: float) -> int:
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        return self.vertices[i]

    def to_json(self) -> dict:
        return {"times": self.times, "vertices": self.vertices, "seed": self.seed, "absorbed": self.absorbed}


def _jump_tables(gen: Generator):
    rates = -np.diag(gen.L)
    cum = []
    for v in range(gen.size):
        row = np.clip(gen.L[v].copy(), 0, None)
        row[v] = 0.0
        total = row.sum()
        cum.append(np.cumsum(row / total) if total > 0 else None)
    return rates, cum


def sample_path(gen: Generator, v0: int, horizon: float, seed: int, _tables=None, _rng=None) -> JumpPath:
    """Gillespie simulation up to ``horizon``."""
    if horizon <= 0:
        raise HeatError("horizon must be positive")
    rates, cum = _tables or _jump_tables(gen)
    rng = _rng or np.random.default_rng(seed)
    t, v = 0.0, int(v0)
    times, verts = [0.0], [v]
    while True:
        rate = rates[v]
        if rate < 1e-14 or cum[v] is None:
            return JumpPath(times, verts, seed, absorbed=True)
        t += rng.exponential(1.0 / rate)
        if t > horizon:
            return JumpPath(times, verts, seed)
        v = int(min(np.searchsorted(cum[v], rng.random(), side="right"), gen.size - 1))
        times.append(t)
        verts.append(v)


def sample_paths(gen: Generator, v0: int, horizon: float, n: int, seed: int):
    tables = _jump_tables(gen)
    rng = np.random.default_rng(seed)
    return [sample_path(gen, v0, horizon, seed, tables, rng) for _ in range(n)]


def occupation_at(gen: Generator, v0: int, t: float, n: int, seed: int) -> np.ndarray:
    """Empirical law of the chain at time t over n sampled paths."""
    counts = np.zeros(gen.size)
    for path in sample_paths(gen, v0, t, n, seed):
        counts[path.vertices[-1]] += 1
    return counts / n


def holding_times(gen: Generator, v: int, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.exponential(1.0 / -gen.L[v, v], size=n)


# -- Feller certificate -----------------------------------------------------


@dataclass
class FellerReport:
    max_at_argmax: float
    resolvent_residual: float
    eta: float
    contraction: dict
    passed: bool

    def to_json(self) -> dict:
        return {
            "max_at_argmax": self.max_at_argmax,
            "resolvent_residual": self.resolvent_residual,
            "eta": self.eta,
            "contraction": {str(k): v for k, v in self.contraction.items()},
            "passed": self.passed,
        }


def feller_certificate(gen: Generator, seed: int = 0, trials: int = 100, times=(0.1, 1.0, 10.0)) -> FellerReport:
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(trials):
        psi = rng.standard_normal(gen.size)
        v = int(np.argmax(psi))
        worst = max(worst, float((gen.L @ psi)[v]))
    eta = 2 * float(np.max(-np.diag(gen.L))) + 1.0
    h = rng.standard_normal(gen.size)
    u = np.linalg.solve(eta * np.eye(gen.size) - gen.L, h)
    resid = float(np.max(np.abs(eta * u - gen.L @ u - h)))
    contraction = {t: float(np.max(np.abs(semigroup(gen, t)).sum(axis=1))) for t in times}
    ok = worst <= 1e-12 and resid < 1e-10 and all(c <= 1 + 1e-9 for c in contraction.values())
    return FellerReport(worst, resid, eta, contraction, ok)

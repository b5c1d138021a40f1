"""From a curve configuration to trees, operators, spectra, genus reports and heat
generators.  Shared by the command line and the estimator wrappers."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from padic_mumford.config import CurveConfig
from padic_mumford.genus import recover_genus
from padic_mumford.geometry import OmegaSpec, SkeletonTree, measure_region
from padic_mumford.heat import Generator
from padic_mumford.kernelop import (
    KernelError,
    KernelSpec,
    OperatorMatrix,
    hs_diagnostic,
    operator_tree,
    orthogonality_suite,
    self_adjointness_defect,
    spectrum,
    wavelet_eigencheck,
    wavelets_in_fiber,
    weight_matrix,
)
from padic_mumford.schottky import FundamentalDomain, SchottkyGroup


@dataclass
class CurveModel:
    config: CurveConfig
    group: SchottkyGroup
    F: FundamentalDomain
    spec: KernelSpec
    omega: OmegaSpec
    ends: list
    _operators: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_config(cls, cfg: CurveConfig) -> "CurveModel":
        G = cfg.group()
        return cls(cfg, G, G.fundamental_domain(), cfg.kernel_spec(), cfg.omega_spec(), cfg.end_points())

    @property
    def genus_of_group(self) -> int:
        return self.group.genus

    def tree(self, depth: int | None = None) -> SkeletonTree:
        return self.operator(depth).tree

    def operator(self, depth: int | None = None) -> OperatorMatrix:
        depth = self.config.tree_depth if depth is None else depth
        if depth not in self._operators:
            T = operator_tree(self.F, self.ends, depth, self.omega, self.spec)
            self._operators[depth] = weight_matrix(self.spec, T)
        return self._operators[depth]

    def spectrum(self, depth: int | None = None, tolerance: float = 1e-10):
        return spectrum(self.operator(depth), tolerance)

    def genus(self, depth: int | None = None, levels: int = 24):
        M = self.operator(depth)
        return recover_genus(self.spec, M.tree, levels, spectrum(M))

    def generator(self, depth: int | None = None) -> Generator:
        return Generator.from_operator(self.operator(depth))

    def hs(self, depths=None):
        base = self.config.tree_depth
        depths = depths or [base, base + 2, base + 4]
        return hs_diagnostic([self.operator(d) for d in depths])


def _random_vertex_functions(n: int, rng, count: int):
    # small rationals keep the exact arithmetic cheap
    return [[Fraction(int(x), 7) for x in rng.integers(-20, 21, size=n)] for _ in range(count)]


def verify_operator(model: CurveModel, depth: int | None = None, seed: int = 0, wavelet_tol: float = 1e-8) -> dict:
    """Operator-level property suites: exact symmetry, self-adjointness, spectrum
    structure, wavelet eigenvalues and the orthogonality identities."""
    M = model.operator(depth)
    rng = np.random.default_rng(seed)
    out = {}
    out["symmetric_exact"] = M.is_symmetric()
    defects = [self_adjointness_defect(M, f, g) for f, g in zip(
        _random_vertex_functions(M.size, rng, 50), _random_vertex_functions(M.size, rng, 50))]
    out["self_adjoint_exact"] = all(d == 0 for d in defects)
    rep = spectrum(M)
    tol = model.config.tolerances["eigenvalue"]
    out["spectrum"] = {
        "max_eigenvalue": rep.max_eigenvalue,
        "nonpositive": rep.max_eigenvalue <= tol,
        "zero_modes": rep.zero_modes,
        "accumulation_candidates": len(rep.accumulation_candidates),
        "ends": len(model.ends),
    }
    waves = []
    for idx in range(M.size):
        waves.extend(wavelets_in_fiber(M, idx, 2))
    degs = M.degrees()
    errs = []
    for psi in waves:
        target = -float(degs[M.index_of(M.tree.retraction_vertex(psi.ball.center).id)])
        try:
            ratio = wavelet_eigencheck(M, psi, rel_tol=wavelet_tol)
        except KernelError:
            errs.append(float("inf"))
            continue
        errs.append(abs(ratio - target) / abs(target))
    out["wavelets_checked"] = len(waves)
    out["wavelet_eigen_max_rel_error"] = max(errs) if errs else None
    orth = orthogonality_suite(M, waves[:12], model.config.tolerances["quadrature"])
    out["orthogonality"] = {"passed": orth.passed, "checks": len(orth.checks)}
    out["fiber_mass_matches_region"] = M.tree.total_mass() == measure_region(model.omega, model.F)
    out["passed"] = bool(
        out["symmetric_exact"]
        and out["self_adjoint_exact"]
        and out["spectrum"]["nonpositive"]
        and out["spectrum"]["zero_modes"] == 1
        and out["spectrum"]["accumulation_candidates"] == out["spectrum"]["ends"]
        and (out["wavelet_eigen_max_rel_error"] or 0) <= wavelet_tol
        and orth.passed
    )
    return out

"""The diffusion kernel, the weight matrix on the skeleton, its Laplacian,
Kozyrev wavelets and spectral diagnostics.

The operator acts through the retracted kernel: a point is first sent to its
fiber, and the kernel between two fibers is the factored model evaluated at
the difference of their representative points. Within one fiber the model is
evaluated at the fiber's own scale p^k.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from padic_mumford.geometry import Ball, OmegaSpec, SkeletonTree, build_tree, measure_ball
from padic_mumford.localfield import PadicNumber, abs_value, padic


class KernelError(ValueError):
    pass


class MeasureZeroInput(KernelError):
    """The kernel was asked for a displacement that is zero to working precision."""


def _v(x: PadicNumber) -> float:
    return math.inf if x.is_zero else x.val


def canonical_sign(d: PadicNumber) -> PadicNumber:
    """Pick d or -d: leading unit digit at most (p-1)/2, or unit = 1 mod 4 when p = 2."""
    if d.is_zero:
        return d
    if d.p == 2:
        return d if d.prec < 2 or d.unit % 4 == 1 else -d
    return d if d.unit % d.p <= (d.p - 1) // 2 else -d


@dataclass
class KernelSpec:
    """|f| as C prod |d - a|^m_a / prod |d - b|^m_b, a pole cut and a rescaling multiplier."""

    C: Fraction
    zeros: list
    poles: list
    pole_balls: list = field(default_factory=list)
    multiplier: PadicNumber | None = None

    def __post_init__(self):
        self.C = Fraction(self.C)
        if self.C <= 0:
            raise KernelError("kernel scale must be positive")
        if sum(m for _, m in self.zeros) != sum(m for _, m in self.poles):
            raise KernelError("divisor of f must have degree zero")
        if self.multiplier is not None and self.multiplier.val <= 0:
            raise KernelError("multiplier must have |mu| < 1")

    @property
    def period(self) -> int | None:
        return None if self.multiplier is None else self.multiplier.val

    def divisor(self):
        return [(z, m) for z, m in self.zeros] + [(z, -m) for z, m in self.poles]

    def rescale(self, d: PadicNumber) -> PadicNumber:
        """Bring d into p^-e < |d| <= 1 with powers of the multiplier."""
        if self.multiplier is None:
            return d
        n = math.floor(d.val / self.multiplier.val)
        return d / self.multiplier**n if n else d

    def normalize(self, d: PadicNumber) -> PadicNumber:
        """Rescaled displacement with the sign fixed, so d and -d look the same."""
        return canonical_sign(self.rescale(d))

    def value(self, d: PadicNumber) -> Fraction:
        if d.is_zero:
            raise MeasureZeroInput("displacement vanishes to working precision")
        d = self.normalize(d)
        if any(b.contains(d) for b in self.pole_balls):
            return Fraction(1)
        out = self.C
        for z, m in self.zeros:
            diff = d - z
            if diff.is_zero:
                return Fraction(0)
            out *= abs_value(diff) ** m
        for z, m in self.poles:
            diff = d - z
            if diff.is_zero:
                raise KernelError("displacement hits a pole outside the pole cut")
            out /= abs_value(diff) ** m
        return out

    def stable_radius(self, d: PadicNumber) -> float:
        """An exponent T with value(d + e) = value(d) whenever v(e) > T + v-shift of d."""
        dd = self.normalize(d)
        T = dd.val
        for z, _ in self.zeros + self.poles:
            gap = _v(dd - z)
            if gap != math.inf:
                T = max(T, gap)
        for b in self.pole_balls:
            T = max(T, b.k if b.contains(dd) else _v(dd - b.center))
        return T + (d.val - dd.val)

    def exact_hit_order(self, d: PadicNumber) -> int:
        """Order of the zero that the normalized d sits on, 0 if none."""
        dd = self.normalize(d)
        if any(b.contains(dd) for b in self.pole_balls):
            return 0
        return sum(m for z, m in self.zeros if (dd - z).is_zero)

    def to_json(self) -> dict:
        return {
            "C": str(self.C),
            "zeros": [[str(z.lift_rational()), m] for z, m in self.zeros],
            "poles": [[str(z.lift_rational()), m] for z, m in self.poles],
            "pole_balls": [b.to_json() for b in self.pole_balls],
            "multiplier": None if self.multiplier is None else str(self.multiplier.lift_rational()),
        }


def kernel_H(spec: KernelSpec, x, y) -> Fraction:
    """Pointwise |f(x - y)| with the pole cut and rescaling applied."""
    return spec.value(x - y)


# -- fibers and the operator ---------------------------------------------


@dataclass(frozen=True)
class Fiber:
    """What the retracted kernel needs to know about a fiber."""

    rep: PadicNumber
    k: int
    nu: Fraction


def tree_fibers(tree: SkeletonTree):
    return [Fiber(v.rep, v.k, v.nu) for v in tree.massive()]


def fiber_kernel(spec: KernelSpec, a: Fiber, b: Fiber) -> Fraction:
    if a is b or (a.k == b.k and (a.rep - b.rep).is_zero):
        return self_kernel(spec, a)
    return spec.value(a.rep - b.rep)


def self_kernel(spec: KernelSpec, a: Fiber) -> Fraction:
    """Kernel within one fiber: the model at p^k u for the first digit u where it is finite and nonzero."""
    p = a.rep.p
    for u in range(1, p):
        try:
            val = spec.value(padic(Fraction(p) ** a.k * u, p, a.rep.prec))
        except KernelError:
            continue
        if val > 0:
            return val
    raise KernelError(f"no admissible displacement at scale p^{a.k}")


def shell_fiber(tree: SkeletonTree, end: int, level: int) -> Fiber:
    """The annulus of S[end] at exponent ``level`` beyond the core, as a fiber."""
    a = tree.S[end]
    p = tree.p
    outer = Ball(a, level)
    nu = measure_ball(tree.omega, outer) - measure_ball(tree.omega, Ball(a, level + 1))
    return Fiber(a + padic(Fraction(p) ** level * tree.ray_digit, p, a.prec), level, nu)


def _divisor_points(spec: KernelSpec):
    return [z for z, _ in spec.zeros + spec.poles] + [b.center for b in spec.pole_balls]


def representative_filter(spec: KernelSpec, S):
    """Accept a core representative r only if no normalized a - r sits on the divisor of f,
    for a in S and for every representative accepted before."""
    points = _divisor_points(spec)
    chosen = list(S)

    def accept(r: PadicNumber) -> bool:
        for a in chosen:
            d = a - r
            if d.is_zero:
                return False
            dd = spec.normalize(d)
            if any((dd - z).is_zero for z in points):
                return False
        chosen.append(r)
        return True

    return accept


def operator_tree(F, S, depth: int, omega: OmegaSpec, spec: KernelSpec) -> SkeletonTree:
    """A skeleton whose representatives keep the retracted kernel off the divisor of f."""
    p = S[0].p if S else F.outer.center.p
    return build_tree(F, S, depth, omega, admissible_ray_digit(spec, p), representative_filter(spec, S))


def admissible_ray_digit(spec: KernelSpec, p: int, prec: int = 64) -> int:
    """First digit t for which no normalized p^r t lands exactly on a zero or pole of the model.

    Displacements between annuli of one ray tend to p^r t, so this keeps the kernel
    along a ray from decaying into a zero of f.
    """
    points = _divisor_points(spec)
    if spec.multiplier is not None:
        scales = range(spec.multiplier.val)
    else:
        scales = sorted({int(z.val) for z in points if not z.is_zero})
    for t in range(1, p):
        probes = [spec.normalize(padic(Fraction(p) ** r * t, p, prec)) for r in scales]
        if all(not (d - z).is_zero for d in probes for z in points):
            return t
    raise KernelError("every ray digit hits the divisor of f")


@dataclass
class OperatorMatrix:
    """Exact weight matrix m(vw), fiber masses and degrees on the truncated tree."""

    tree: SkeletonTree
    spec: KernelSpec
    vertex_ids: list
    kernel: list  # K(v, w), rationals
    nu: list
    m: list

    @property
    def size(self) -> int:
        return len(self.nu)

    def row_mass(self, i: int) -> Fraction:
        return sum(self.m[i], Fraction(0))

    def degrees(self):
        return [self.row_mass(i) / self.nu[i] for i in range(self.size)]

    def total_mass(self) -> Fraction:
        return sum((self.row_mass(i) for i in range(self.size)), Fraction(0))

    def is_symmetric(self) -> bool:
        n = self.size
        return all(self.m[i][j] == self.m[j][i] for i in range(n) for j in range(i + 1, n))

    def index_of(self, vertex_id: int) -> int:
        return self.vertex_ids.index(vertex_id)

    def apply(self, values):
        """Exact action of the generator on a vertex function (list of rationals)."""
        L = laplacian(self)
        return [sum((L[i][j] * values[j] for j in range(self.size)), Fraction(0)) for i in range(self.size)]

    def inner(self, f, g) -> Fraction:
        return sum((self.nu[i] * f[i] * g[i] for i in range(self.size)), Fraction(0))


def weight_matrix(spec: KernelSpec, tree: SkeletonTree) -> OperatorMatrix:
    verts = tree.massive()
    fibers = [Fiber(v.rep, v.k, v.nu) for v in verts]
    n = len(fibers)
    K = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            val = fiber_kernel(spec, fibers[i], fibers[j])
            if val <= 0:
                raise KernelError(f"kernel vanishes between vertices {verts[i].id} and {verts[j].id}")
            K[i][j] = K[j][i] = val
    nu = [f.nu for f in fibers]
    m = [[K[i][j] * nu[i] * nu[j] for j in range(n)] for i in range(n)]
    return OperatorMatrix(tree, spec, [v.id for v in verts], K, nu, m)


def laplacian(M: OperatorMatrix):
    """L(v, w) = m(vw)/nu(v) off the diagonal, rows summing to zero exactly."""
    n = M.size
    L = []
    for i in range(n):
        row = [M.m[i][j] / M.nu[i] for j in range(n)]
        row[i] = (M.m[i][i] - M.row_mass(i)) / M.nu[i]
        L.append(row)
    return L


def laplacian_array(M: OperatorMatrix) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in laplacian(M)])


def symmetrized_generator(M: OperatorMatrix) -> np.ndarray:
    """D^(1/2) L D^(-1/2), which is symmetric because m is."""
    n = M.size
    out = np.empty((n, n))
    for i in range(n):
        mi = M.row_mass(i)
        for j in range(n):
            val = M.m[i][j] - (mi if i == j else 0)
            out[i, j] = float(val) / math.sqrt(float(M.nu[i]) * float(M.nu[j]))
    return out


# -- degree with closed-form ray tails -----------------------------------


def _ray_tail(spec: KernelSpec, tree: SkeletonTree, x: Fiber, end: int, start: int) -> Fraction:
    """Sum over the annuli of S[end] at levels >= start of K(x, annulus) nu(annulus).

    Past a computable level the terms form an exact geometric series: the kernel
    either settles or, when the limiting displacement is itself a zero of order s,
    decays like p^(-s j), and the annulus masses decay like p^(-(n+1) j).
    """
    a = tree.S[end]
    limit_disp = x.rep - a
    if limit_disp.is_zero:
        raise MeasureZeroInput("fiber representative sits on a puncture")
    stable = spec.stable_radius(limit_disp)
    J = max(start, x.k + 1, int(math.floor(stable)) + 1)
    terms = []
    for j in range(start, J + 2):
        sh = shell_fiber(tree, end, j)
        terms.append(fiber_kernel(spec, x, sh) * sh.nu)
    head, tJ, tJ1 = sum(terms[:-2], Fraction(0)), terms[-2], terms[-1]
    order = next((n for z, n in tree.omega.zeros if (z - a).is_zero), 0)
    hit = spec.exact_hit_order(limit_disp)
    ratio = Fraction(tree.p) ** (-(hit + order + 1))
    if tJ1 != ratio * tJ:
        raise KernelError("ray tail is not yet geometric; deepen the stabilization level")
    return head + tJ / (1 - ratio)


def degree_of_fiber(spec: KernelSpec, tree: SkeletonTree, x: Fiber) -> Fraction:
    """Exact deg over the untruncated skeleton: tree fibers plus full ray tails."""
    total = Fraction(0)
    for v in tree.massive():
        if v.kind == "tail":
            continue
        total += fiber_kernel(spec, x, Fiber(v.rep, v.k, v.nu)) * v.nu
    for end in range(len(tree.S)):
        tail = tree.ray(end)[-1]
        total += _ray_tail(spec, tree, x, end, tail.k)
    return total


def fiber_of_point(tree: SkeletonTree, x) -> Fiber:
    """The fiber of x in the untruncated skeleton."""
    x = padic(x, tree.p)
    v = tree.retraction_vertex(x)
    if v.kind != "tail":
        return Fiber(v.rep, v.k, v.nu)
    a = tree.S[v.end]
    return shell_fiber(tree, v.end, int(_v(x - a)))


def degree(spec: KernelSpec, tree: SkeletonTree, x) -> Fraction:
    """deg(x) = integral over F of H(x, y)|omega(y)|, exact."""
    return degree_of_fiber(spec, tree, fiber_of_point(tree, x))


def truncated_degree(M: OperatorMatrix, x) -> Fraction:
    """The degree inside the depth-D model, where ray tails are lumped into one vertex."""
    v = M.tree.retraction_vertex(padic(x, M.tree.p))
    return M.degrees()[M.index_of(v.id)]


# -- wavelets ------------------------------------------------------------


@dataclass(frozen=True)
class WaveletSpec:
    """psi(x) = mu(B)^(-1/2) exp(2 pi i j t/p) on B(c, k), t the first digit of (x - c)/p^k."""

    ball: Ball
    j: int

    def __post_init__(self):
        if not 1 <= self.j < self.ball.p:
            raise KernelError("wavelet index must be a nonzero residue")

    def digit(self, x: PadicNumber) -> int | None:
        B = self.ball
        if not B.contains(x):
            return None
        d = x - B.center
        if d.is_zero or d.val > B.k:
            return 0
        return d.unit % B.p

    def value(self, x: PadicNumber) -> complex:
        t = self.digit(x)
        if t is None:
            return 0j
        p = self.ball.p
        return math.sqrt(p**self.ball.k) * cmath.exp(2j * math.pi * self.j * t / p)

    def value_on(self, ball: Ball) -> complex:
        """psi is constant on balls inside a child of B or disjoint from B."""
        if self.ball.disjoint_from(ball):
            return 0j
        if ball.k <= self.ball.k:
            raise KernelError("wavelet is not constant on this ball")
        return self.value(ball.center)


def wavelet_integral(omega: OmegaSpec, psi: WaveletSpec, weight=lambda ball: 1) -> complex:
    """Integral of psi |omega| over its support, summing over the p child balls."""
    return sum(psi.value_on(ch) * float(measure_ball(omega, ch)) * weight(ch) for ch in psi.ball.children())


def wavelet_haar_mean(psi: WaveletSpec) -> complex:
    return sum(psi.value_on(ch) * float(ch.haar()) for ch in psi.ball.children())


def wavelet_inner(omega: OmegaSpec, a: WaveletSpec, b: WaveletSpec) -> complex:
    """<a, b> in L^2(|omega|), by refining to children of the smaller ball."""
    if a.ball.disjoint_from(b.ball):
        return 0j
    small = a.ball if a.ball.k >= b.ball.k else b.ball
    return sum(
        a.value_on(ch) * b.value_on(ch).conjugate() * float(measure_ball(omega, ch)) for ch in small.children()
    )


def _host_index(M: OperatorMatrix, psi: WaveletSpec) -> int:
    tree = M.tree
    if any(psi.ball.contains(a) for a in tree.S):
        raise KernelError("wavelet support meets a puncture")
    hosts = {tree.retraction_vertex(ch.center).id for ch in psi.ball.children()}
    hosts.add(tree.retraction_vertex(psi.ball.center).id)
    if len(hosts) != 1:
        raise KernelError("wavelet support straddles two fibers")
    return M.index_of(hosts.pop())


def apply_to_wavelet(M: OperatorMatrix, psi: WaveletSpec, x) -> complex:
    """(H_f psi)(x) by quadrature over the cells where the integrand is constant."""
    tree = M.tree
    x = padic(x, tree.p)
    i = M.index_of(tree.retraction_vertex(x).id)
    h = _host_index(M, psi)
    # the retracted kernel is constant on psi's support
    integral = float(M.kernel[i][h]) * wavelet_integral(tree.omega, psi)
    return integral - float(M.degrees()[i]) * psi.value(x)


def wavelet_eigencheck(M: OperatorMatrix, psi: WaveletSpec, probes=3, rel_tol=1e-8) -> float:
    """The common ratio (H_f psi)(x)/psi(x) over probe points of B; checked against -deg."""
    h = _host_index(M, psi)
    ratios = []
    for ch in psi.ball.children()[:probes] if probes <= psi.ball.p else psi.ball.children():
        ratios.append(apply_to_wavelet(M, psi, ch.center) / psi.value(ch.center))
    ref = ratios[0]
    for r in ratios[1:]:
        if abs(r - ref) > rel_tol * max(1.0, abs(ref)):
            raise KernelError("probe ratios disagree")
    target = -float(M.degrees()[h])
    if abs(ref - target) > rel_tol * abs(target):
        raise KernelError(f"wavelet ratio {ref} differs from -deg = {target}")
    return ref.real


def wavelets_in_fiber(M: OperatorMatrix, vertex_index: int, count: int, extra_depth: int = 1):
    """Deterministic wavelets whose support lies in one fiber and avoids the punctures."""
    tree = M.tree
    vid = M.vertex_ids[vertex_index]
    v = tree.vertices[vid]
    removed = tree.removed_children(v)
    out = []
    for ch in v.ball.children():
        if any(r.key() == ch.key() for r in removed) or any(ch.contains(a) for a in tree.S):
            continue
        balls = [ch]
        for _ in range(extra_depth - 1):
            balls = [c for b in balls for c in b.children()]
        for B in balls:
            for j in range(1, tree.p):
                out.append(WaveletSpec(B, j))
                if len(out) >= count:
                    return out
    return out


# -- spectrum ------------------------------------------------------------


@dataclass
class SpectrumReport:
    eigenvalues: list
    zero_modes: int
    ends: list
    end_sequences: list
    end_limits: list
    accumulation_candidates: list
    wavelet_eigenvalues: dict
    tolerance: float

    @property
    def max_eigenvalue(self) -> float:
        return max(self.eigenvalues)

    def to_json(self) -> dict:
        return {
            "eigenvalues": self.eigenvalues,
            "zero_modes": self.zero_modes,
            "ends": self.ends,
            "end_limits": self.end_limits,
            "accumulation_candidates": self.accumulation_candidates,
            "wavelet_eigenvalues": {str(k): v for k, v in self.wavelet_eigenvalues.items()},
        }


def end_degree_sequence(spec: KernelSpec, tree: SkeletonTree, end: int, levels):
    return [degree_of_fiber(spec, tree, shell_fiber(tree, end, k)) for k in levels]


def spectrum(M: OperatorMatrix, tolerance: float = 1e-10, limit_levels: int = 40) -> SpectrumReport:
    sym = symmetrized_generator(M)
    if not np.allclose(sym, sym.T, rtol=0, atol=1e-12 * max(1.0, np.abs(sym).max())):
        raise KernelError("symmetrized generator is not symmetric")
    try:
        evals = np.linalg.eigvalsh(sym)
    except np.linalg.LinAlgError as exc:
        raise KernelError(f"eigensolver failed: {exc}") from exc
    scale = max(1.0, float(np.abs(evals).max()))
    zero_modes = int(np.sum(np.abs(evals) <= tolerance * scale))
    tree, spec = M.tree, M.spec
    seqs, limits = [], []
    for end in range(len(tree.S)):
        start = tree.ray(end)[0].k
        seq = end_degree_sequence(spec, tree, end, range(start, start + limit_levels))
        seqs.append([-float(d) for d in seq])
        limits.append(-float(seq[-1]))
    clusters: list = []
    for lim in limits:
        if not any(abs(lim - c) <= 10 * tolerance * max(1.0, abs(c)) for c in clusters):
            clusters.append(lim)
    degs = M.degrees()
    waves = {vid: -float(degs[i]) for i, vid in enumerate(M.vertex_ids)}
    return SpectrumReport(
        sorted(float(e) for e in evals),
        zero_modes,
        [str(a.lift_rational()) for a in tree.S],
        seqs,
        limits,
        clusters,
        waves,
        tolerance,
    )


# -- Hilbert-Schmidt diagnostic ------------------------------------------


def hs_partial_sum(M: OperatorMatrix) -> Fraction:
    """sum over v of nu(v)^-1 <A eta_v, A eta_v>, with (A eta_v)(x) = K(x, v) nu(v)."""
    n = M.size
    total = Fraction(0)
    for v in range(n):
        norm = sum((M.nu[u] * (M.kernel[u][v] * M.nu[v]) ** 2 for u in range(n)), Fraction(0))
        total += norm / M.nu[v]
    return total


@dataclass
class HSReport:
    depths: list
    partial_sums: list
    increments: list
    verdict: str

    def to_json(self) -> dict:
        return {
            "depths": self.depths,
            "partial_sums": [float(s) for s in self.partial_sums],
            "increments": [float(d) for d in self.increments],
            "verdict": self.verdict,
        }


def hs_diagnostic(matrices) -> HSReport:
    """Classify the partial sums over increasing depths as converging or diverging."""
    matrices = list(matrices)
    if len(matrices) < 3:
        raise KernelError("need at least three depths")
    sums = [hs_partial_sum(M) for M in matrices]
    incs = [abs(b - a) for a, b in zip(sums, sums[1:])]
    nonzero = [d for d in incs if d != 0]
    decaying = all(b <= a / 2 for a, b in zip(nonzero, nonzero[1:]))
    if not nonzero or decaying:
        verdict = "converging"
    else:
        verdict = "diverging"
    return HSReport([M.tree.depth for M in matrices], sums, incs, verdict)


# -- identity suite ------------------------------------------------------


def vertex_action_by_quadrature(M: OperatorMatrix, w: int, v: int) -> Fraction:
    """<H_f eta_w, eta_v> by evaluating H_f eta_w pointwise at v's representative."""
    tree = M.tree
    x = tree.vertices[M.vertex_ids[v]].rep
    xi = M.index_of(tree.retraction_vertex(x).id)
    kernel_row = M.kernel[xi]
    eta_x = 1 if xi == w else 0
    value = sum((kernel_row[u] * ((1 if u == w else 0) - eta_x) * M.nu[u] for u in range(M.size)), Fraction(0))
    return value * M.nu[v]


@dataclass
class OrthogonalityReport:
    checks: list  # (name, observed, expected, ok)

    @property
    def passed(self) -> bool:
        return all(ok for *_, ok in self.checks)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {"name": n, "observed": str(o), "expected": str(e), "ok": ok} for n, o, e, ok in self.checks
            ],
        }


def orthogonality_suite(M: OperatorMatrix, wavelets, tol: float = 1e-8) -> OrthogonalityReport:
    omega = M.tree.omega
    checks = []
    n = M.size
    for v in range(n):
        for w in range(n):
            got = vertex_action_by_quadrature(M, w, v)
            want = M.m[v][w] - (M.row_mass(v) if v == w else 0)
            checks.append((f"vertex {v},{w}", got, want, got == want))
    degs = M.degrees()

    def close(z, target, scale):
        return abs(z - target) <= tol * max(1.0, scale)

    hosts = [_host_index(M, psi) for psi in wavelets]
    for psi, h in zip(wavelets, hosts):
        mass = float(measure_ball(omega, psi.ball))
        for v in range(n):
            # H_f eta_v is constant on supp psi
            hv = float(M.kernel[h][v] * M.nu[v]) - (float(degs[h]) if v == h else 0.0)
            z = hv * wavelet_integral(omega, psi).conjugate()
            checks.append((f"eta{v}.psi", z, 0, close(z, 0, abs(hv) * mass)))
            # H_f psi = -deg psi, integrated over the fiber of v
            z = -float(degs[h]) * wavelet_integral(omega, psi) if v == h else 0j
            checks.append((f"psi.eta{v}", z, 0, close(z, 0, float(degs[h]) * mass)))
    for a, ha in zip(wavelets, hosts):
        for b in wavelets:
            z = -float(degs[ha]) * wavelet_inner(omega, a, b)
            same = a.ball.key() == b.ball.key() and a.j == b.j
            want = -float(degs[ha]) * float(omega.value(a.ball.center)) if same else 0.0
            checks.append((f"psi.psi {a.ball}/{a.j} {b.ball}/{b.j}", z, want, close(z, want, abs(want) + float(degs[ha]))))
    return OrthogonalityReport(checks)


def self_adjointness_defect(M: OperatorMatrix, f, g) -> Fraction:
    """<f, H g> - <H f, g> in L^2(nu), exact."""
    return M.inner(f, M.apply(g)) - M.inner(M.apply(f), g)


def constancy_violations(spec: KernelSpec, tree: SkeletonTree, samples_per_fiber: int = 3):
    """Pairs of fibers on which the pointwise kernel is not constant, with the sampled values."""
    verts = tree.massive()
    samples = {}
    for v in verts:
        pts = []
        removed = tree.removed_children(v)
        for ch in v.ball.children():
            if any(r.key() == ch.key() for r in removed) or any(ch.contains(a) for a in tree.S):
                continue
            pts.append(ch.center)
            pts.extend(c.center for c in ch.children()[1:samples_per_fiber])
            if len(pts) >= samples_per_fiber:
                break
        samples[v.id] = pts[:samples_per_fiber]
    out = []
    for v in verts:
        for w in verts:
            if v.id == w.id:
                continue
            vals = set()
            for x in samples[v.id]:
                for y in samples[w.id]:
                    try:
                        vals.add(spec.value(x - y))
                    except KernelError:
                        vals.add(None)
            if len(vals) > 1:
                out.append((v.id, w.id, sorted(str(s) for s in vals)))
    return out

"""Hyperelliptic Mumford curves from Whittaker groups.

Half-period characters, invariant functions with divisors steered onto the
ramification points, the uniformising series x(z), the form omega_0 and its
twists, and assembly of complete kernel/measure fixtures.

Characters are taken against the base point 1 (a fixed point of s_0) with the
ordering c_{a 1} := character_of(1, a); with this order c_{a_i 1}^2 is the
period character of gamma_i and c_{a_i 1}(gamma_i) serves as the root of the
diagonal period.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from padic_mumford.geometry import (
    Ball,
    InconsistentFormError,
    OmegaSpec,
    exact_log_p,
    fit_divisor,
    hole_probes,
    omega_factor,
)
from padic_mumford.kernelop import KernelSpec
from padic_mumford.localfield import INF, PadicNumber, abs_value, agrees_relative, padic
from padic_mumford.schottky import WhittakerGroup, build_whittaker, whittaker_pair
from padic_mumford.theta import (
    Character,
    ConvergenceError,
    PeriodMatrix,
    ThetaCalculus,
    candidate_points,
    theta_series,
)


class FixtureError(ValueError):
    """The hyperelliptic data fails one of its defining relations."""


# -- half periods -----------------------------------------------------------


@dataclass
class SteenReport:
    square_is_period: list  # [i] -> bool, c_{a_i}^2 == c_{gamma_i}
    ratio_is_sign: list  # [i][j] -> bool, (c_{b_i}/c_{a_i})(gamma_j) == (-1)^delta_ij
    diagonal_roots: list
    digits: float

    @property
    def ok(self) -> bool:
        return all(self.square_is_period) and all(all(r) for r in self.ratio_is_sign)

    def to_json(self) -> dict:
        return {
            "square_is_period": self.square_is_period,
            "ratio_is_sign": self.ratio_is_sign,
            "diagonal_roots": [str(r.lift_rational()) for r in self.diagonal_roots],
            "digits": self.digits,
            "ok": self.ok,
        }


def _sign(s: int, p: int) -> PadicNumber:
    return padic(s, p)


class HalfPeriods:
    """The characters c_I = prod_{i in I} c_{b_i a_i}, where c_{b_i a_i} = c_{b_i 1} / c_{a_i 1}.

    Multiplying f_Gamma by c_{b_i a_i} trades the theta zero at a_i for one at b_i.
    """

    def __init__(self, a_chars, b_chars, periods):
        self.a_chars = list(a_chars)
        self.b_chars = list(b_chars)
        self.periods = list(periods)
        self.swaps = [b / a for a, b in zip(self.a_chars, self.b_chars)]

    @property
    def genus(self) -> int:
        return len(self.swaps)

    def of(self, subset) -> Character:
        p = self.swaps[0].values[0].p
        c = Character.trivial(self.genus, p)
        for i in sorted(set(subset)):
            c = c * self.swaps[i]
        return c

    def subsets(self):
        g = self.genus
        return [s for r in range(g + 1) for s in itertools.combinations(range(g), r)]

    def group_check(self, digits: float) -> bool:
        """c_I c_J == c_{I xor J} for all pairs of subsets."""
        subs = self.subsets()
        return all(
            (self.of(I) * self.of(J)).agrees_with(self.of(set(I) ^ set(J)), digits) for I in subs for J in subs
        )


def steen_relations_check(calc: ThetaCalculus, W: WhittakerGroup):
    """Check the half-period relations; returns (report, HalfPeriods)."""
    g, p = W.genus, W.p
    one = padic(1, p, calc.group.prec)
    ca = [calc.character_of(one, a) for a, _ in W.ramification]
    cb = [calc.character_of(one, b) for _, b in W.ramification]
    cg = [calc.period_character((i + 1,)) for i in range(g)]
    d = calc.digits
    squares = [(ca[i] * ca[i]).agrees_with(cg[i], d) for i in range(g)]
    signs = []
    for i in range(g):
        ratio = cb[i] / ca[i]
        signs.append([agrees_relative(ratio.values[j], _sign(-1 if i == j else 1, p), d) for j in range(g)])
    roots = [ca[i].values[i] for i in range(g)]
    return SteenReport(squares, signs, roots, d), HalfPeriods(ca, cb, cg)


# -- the curve --------------------------------------------------------------


@dataclass
class SeriesPoint:
    value: PadicNumber
    derivative: PadicNumber | None
    tail: Fraction  # largest |term| on the outermost word shell


class HyperellipticCurve:
    """Theta machinery for one Whittaker group, with the base character c_0 chosen
    so that the theta divisor sits on the ramification points."""

    def __init__(self, W: WhittakerGroup, N: int | None = None, theta_box: int = 4, base_character=None):
        self.W = W
        self.group = W.schottky
        self.p = W.p
        self.theta_box = theta_box
        self.calc = ThetaCalculus(self.group, N, base_point=1)
        self.steen, self.half = steen_relations_check(self.calc, W)
        if not self.steen.ok:
            raise FixtureError(f"half-period relations fail: {self.steen.to_json()}")
        Q = [[self.half.periods[i].values[j] for j in range(self.genus)] for i in range(self.genus)]
        self.PM = PeriodMatrix.from_periods(Q, self.steen.diagonal_roots)
        self._u: dict = {}
        self.base = base_character if base_character is not None else find_base_character(self)[0]

    @property
    def genus(self) -> int:
        return self.W.genus

    @property
    def digits(self) -> float:
        return self.calc.digits

    def _key(self, z):
        return z.key(self.group.prec)

    def u_vector(self, z) -> list:
        z = padic(z, self.p, self.group.prec)
        k = self._key(z)
        if k not in self._u:
            self._u[k] = [self.calc.u((i + 1,), z) for i in range(self.genus)]
        return self._u[k]

    def theta(self, c: Character, z) -> PadicNumber:
        """vartheta(c; z), raising if the lattice box left a term of size >= 1."""
        weights = [cv * uv for cv, uv in zip(c.values, self.u_vector(z))]
        sv = theta_series(self.PM, weights, self.theta_box)
        if sv.omitted >= abs_value(sv.value) if not sv.value.is_zero else sv.omitted >= 1:
            raise ConvergenceError("theta lattice box too small for this point")
        return sv.value

    def f_gamma(self, c: Character, z) -> PadicNumber:
        """f_Gamma(c; z) = vartheta(c_0 c; z)."""
        return self.theta(self.base * c, z)

    def divisor_steering(self, I, J, K, z) -> PadicNumber:
        """f_{I,J,K}(z) = f(c_I) f(c_J c_K) / (f(c_I c_J) f(c_K)), with characters
        multiplied literally (no reduction modulo periods)."""
        cI, cJ, cK = (self.half.of(s) for s in (I, J, K))
        num = self.f_gamma(cI, z) * self.f_gamma(cJ * cK, z)
        den = self.f_gamma(cI * cJ, z) * self.f_gamma(cK, z)
        if den.is_zero:
            raise ZeroDivisionError("a steering denominator vanishes at this point")
        return num / den

    def standard_function(self, z) -> PadicNumber:
        """F(z) = prod_i f_{{}, {i}, {i}}(z), with divisor sum 2([a_i] - [b_i])."""
        out = padic(1, self.p)
        for i in range(self.genus):
            out = out * self.divisor_steering((), (i,), (i,), z)
        return out

    # -- the uniformising series -------------------------------------------
    def _orbit_with_derivatives(self, z, N: int):
        """(word, gamma z, gamma'(z)) over reduced words of length <= N, in a fixed order."""
        G = self.group
        one = padic(1, self.p, G.prec)
        out = [((), z, one)]
        shell = list(out)
        for _ in range(N):
            nxt = []
            for w, pt, der in shell:
                for x in G.letters():
                    if w and w[0] == -x:
                        continue
                    m = G.letter(x)
                    nxt.append(((x,) + w, m(pt), der * m.derivative(pt)))
            out.extend(nxt)
            shell = nxt
        return out

    def _one_orbit(self, N: int):
        key = ("one", N)
        if key not in self._u:
            self._u[key] = [pt for _, pt, _ in self._orbit_with_derivatives(padic(1, self.p, self.group.prec), N)]
        return self._u[key]

    def gerritzen(self, z, N: int | None = None, derivative: bool = True) -> SeriesPoint:
        """x(z) = 1 + 4 sum_gamma [h(gamma z) - h(gamma 1)] with h(w) = 1/(w-1) + 1/(w-1)^2,
        the identity term taken without subtraction; optionally also x'(z).

        ``z`` must lie in the fundamental domain and off the orbit of 1.
        """
        N = self.calc.N if N is None else N
        z = padic(z, self.p, self.group.prec)
        key = ("x", self._key(z), N)
        hit = self._u.get(key)
        if hit is not None and (hit.derivative is not None or not derivative):
            return hit
        if not self.group.fundamental_domain().contains(z):
            raise ValueError("x is evaluated on the fundamental domain; reduce the point first")
        ones = self._one_orbit(N)
        total = padic(1, self.p)
        dtotal = PadicNumber.zero(self.p)
        tail = Fraction(0)
        for (w, gz, der), g1 in zip(self._orbit_with_derivatives(z, N), ones):
            r = gz - 1
            if r.is_zero:
                raise ZeroDivisionError("point lies on the polar orbit of x")
            inv = 1 / r
            term = inv + inv * inv
            if w:
                s = 1 / (g1 - 1)
                term = term - s - s * s
            term = 4 * term
            dterm = -4 * der * (inv * inv + 2 * inv * inv * inv) if derivative else None
            total = total + term
            if derivative:
                dtotal = dtotal + dterm
            if len(w) == N:
                for t in (term, dterm) if derivative else (term,):
                    if not t.is_zero:
                        tail = max(tail, abs_value(t))
        out = SeriesPoint(total, dtotal if derivative else None, tail)
        self._u[key] = out
        return out

    def x(self, z, N: int | None = None) -> PadicNumber:
        """Gamma-invariant x, reducing z into the fundamental domain first."""
        zf, _ = self.group.reduce_to_fundamental(padic(z, self.p, self.group.prec))
        sp = self.gerritzen(zf, N, derivative=False)
        if not sp.value.is_zero and sp.tail >= abs_value(sp.value):
            raise ConvergenceError("x series tail is not below the value; raise the word length")
        return sp.value

    def branch_points(self) -> "BranchData":
        key = "branch"
        if key not in self._u:
            minus = self.x(padic(-1, self.p, self.group.prec))
            evens = [self.x(a) for a, _ in self.W.ramification]
            odds = [self.x(b) for _, b in self.W.ramification]
            self._u[key] = BranchData(minus, evens, odds)
        return self._u[key]

    # -- differential forms --------------------------------------------------
    def omega0_abs(self, z) -> Fraction:
        """|omega_0(z)| = |x'(z)| / |y(z)| with |y|^2 = prod over all finite branch points |x - e|.

        The series puts e_1 = x(-1) at a small nonzero constant rather than at 0,
        so it enters as an ordinary branch point.
        """
        sp = self.gerritzen(z)
        x, dx = sp.value, sp.derivative
        if sp.tail >= min(abs_value(x), abs_value(dx)):
            raise ConvergenceError("x series not converged at this point")
        bd = self.branch_points()
        ysq = Fraction(1)
        for e in [bd.at_minus_one] + bd.finite:
            ysq *= abs_value(x - e)
        s = exact_log_p(ysq, self.p)
        if s % 2:
            raise InconsistentFormError("|y|^2 is an odd power of p; branch points are off")
        return abs_value(dx) / Fraction(self.p) ** (s // 2)

    def omega_abs(self, z, m) -> Fraction:
        """|prod_i (x - e_{2i})^{m_i} omega_0| at z."""
        if len(m) != self.genus or any(k < 0 for k in m):
            raise ValueError("need one nonnegative exponent per ramification pair")
        x = self.gerritzen(z, derivative=False).value
        out = self.omega0_abs(z)
        for e, k in zip(self.branch_points().evens, m):
            if k:
                out *= abs_value(x - e) ** k
        return out


@dataclass
class BranchData:
    """e_1 = x(-1), e_{2i} = x(a_i) and e_{2i+1} = x(b_i); x(1) is infinite."""

    at_minus_one: PadicNumber
    evens: list
    odds: list

    @property
    def finite(self) -> list:
        return [e for pair in zip(self.evens, self.odds) for e in pair]

    def distinct(self, digits: float) -> bool:
        pts = [self.at_minus_one] + self.finite
        return all(not agrees_relative(a, b, digits) for i, a in enumerate(pts) for b in pts[i + 1 :])

    def to_json(self) -> dict:
        return {
            "e_1": str(self.at_minus_one.lift_rational()),
            "e_even": [str(e.lift_rational()) for e in self.evens],
            "e_odd": [str(e.lift_rational()) for e in self.odds],
        }


def find_base_character(curve: HyperellipticCurve, probe=None):
    """Search c_0 over prod_{i in I} c_{a_i} times sign vectors for the character
    whose theta vanishes at every a_i and not at a generic point.

    Returns (character, transcript).  Vanishing is judged by valuation: at least
    half the working digits above the generic value.
    """
    g, p = curve.genus, curve.p
    if probe is None:
        probe = candidate_points(curve.group, 1, avoid=[a for pair in curve.W.ramification for a in pair])[0]
    need = curve.digits / 2
    transcript = []
    for I in itertools.product((0, 1), repeat=g):
        for signs in itertools.product((1, -1), repeat=g):
            c = Character.trivial(g, p)
            for i in range(g):
                if I[i]:
                    c = c * curve.half.a_chars[i]
            c = Character(tuple(v * _sign(s, p) for v, s in zip(c.values, signs)))
            try:
                ref = curve.theta(c, probe)
                vals = [curve.theta(c, a) for a, _ in curve.W.ramification]
            except ConvergenceError:
                continue
            if ref.is_zero:
                continue
            gaps = [(v.val if not v.is_zero else INF) for v in vals]
            row = {"I": list(I), "signs": list(signs), "generic_val": ref.val,
                   "vals_at_a": [x if x is not INF else "inf" for x in gaps]}
            transcript.append(row)
            if all(x is INF or x - ref.val >= need for x in gaps):
                row["chosen"] = True
                return c, transcript
    raise FixtureError("no base character puts the theta divisor on the ramification points")


# -- fitted fixtures ----------------------------------------------------------


def ramification_candidates(W: WhittakerGroup):
    p, prec = W.p, W.schottky.prec
    pts = [x for pair in W.ramification for x in pair]
    return pts + [padic(1, p, prec), padic(-1, p, prec)]


def default_probes(curve: HyperellipticCurve, count: int = 6):
    """Generic points of F plus points on every annulus around every hole."""
    avoid = ramification_candidates(curve.W)
    F = curve.group.fundamental_domain()
    return candidate_points(curve.group, count, avoid=avoid) + hole_probes(F, avoid)


def _hole_balls(curve: HyperellipticCurve):
    return [Ball(h.center, h.k) for h in curve.group.fundamental_domain().holes]


def fit_standard_function(curve: HyperellipticCurve, probes=None, levels=(5, 6, 7)):
    """Factored |F| from shell slopes, checked against the target sum 2([a_i] - [b_i])."""
    probes = default_probes(curve) if probes is None else probes
    C, divisor, factors = fit_divisor(
        lambda z: abs_value(curve.standard_function(z)), ramification_candidates(curve.W), probes, levels,
        _hole_balls(curve),
    )
    if factors:
        raise FixtureError("F is Gamma-invariant, yet its absolute value shows hole factors")
    target = {}
    for a, b in curve.W.ramification:
        target[a.key(20)] = 2
        target[b.key(20)] = -2
    got = {pt.key(20): n for pt, n in divisor}
    if got != target:
        raise FixtureError(f"fitted divisor of F differs from the target: {[(str(pt.lift_rational()), n) for pt, n in divisor]}")
    return C, divisor


def pole_cut(W: WhittakerGroup, margin: int = 2) -> list:
    """Balls around each b_i, two levels inside the last level shared with another special point."""
    pts = ramification_candidates(W)
    balls = []
    for _, b in W.ramification:
        sep = max((b - q).val for q in pts if q is not b and not (b - q).is_zero)
        balls.append(Ball(b, sep + margin))
    return balls


def kernel_from_fit(W: WhittakerGroup, C: Fraction, divisor) -> KernelSpec:
    zeros = [(pt, n) for pt, n in divisor if n > 0]
    poles = [(pt, -n) for pt, n in divisor if n < 0]
    mu = padic(W.schottky.multipliers()[0].lift_rational(), W.p, W.schottky.prec)
    return KernelSpec(C, zeros, poles, pole_cut(W), mu)


def fit_omega(curve: HyperellipticCurve, m, probes=None, levels=(5, 6, 7)) -> OmegaSpec:
    """Factored |omega| for omega = prod (x - e_{2i})^{m_i} omega_0 with sum m_i = g - 1.

    The orders at a_i come out as 2 m_i since each a_i is a ramification point of x.
    """
    if sum(m) != curve.genus - 1:
        raise FixtureError(f"exponents must sum to g - 1 = {curve.genus - 1}, got {sum(m)}")
    probes = default_probes(curve) if probes is None else probes
    spec = omega_factor(
        lambda z: curve.omega_abs(z, m), ramification_candidates(curve.W), probes, curve.genus, levels,
        _hole_balls(curve),
    )
    want = {a.key(20): 2 * k for (a, _), k in zip(curve.W.ramification, m) if k}
    got = {pt.key(20): n for pt, n in spec.zeros}
    if got != want:
        raise FixtureError("fitted zeros of omega differ from 2 m_i at a_i")
    return spec


def fit_omega0(curve: HyperellipticCurve, probes=None, levels=(5, 6, 7)) -> OmegaSpec:
    """Factored |omega_0|: one zero of order 2g - 2 at z = 1."""
    probes = default_probes(curve) if probes is None else probes
    spec = omega_factor(
        curve.omega0_abs, ramification_candidates(curve.W), probes, curve.genus, levels, _hole_balls(curve)
    )
    if len(spec.zeros) != 1 or not (spec.zeros[0][0] - 1).is_zero:
        raise FixtureError("omega_0 does not have its only zero at 1")
    return spec


def make_fixture(centers, p: int = 5, m=None, N: int | None = None, theta_box: int = 4,
                 tree_depth: int = 10, name: str = "", with_omega0: bool = False):
    """Fit F and omega for the Whittaker group with generators given by (center, e)
    pairs, and package everything as a CurveConfig with its validation transcript."""
    from padic_mumford.config import CurveConfig

    pairs = [whittaker_pair(c, e, p) for c, e in centers]
    W = build_whittaker(pairs, p)
    g = W.genus
    if m is None:
        m = [1] * (g - 1) + [0]
    if len(m) != g or sum(m) != g - 1 or min(m) < 0:
        raise FixtureError(f"need {g} nonnegative exponents summing to g - 1 = {g - 1}, got {list(m)}")
    curve = HyperellipticCurve(W, N, theta_box)
    C_F, div_F = fit_standard_function(curve)
    kspec = kernel_from_fit(W, C_F, div_F)
    omega = fit_omega(curve, m)
    transcript = {
        "exponents": list(m),
        "centers": [[str(Fraction(c)), e] for c, e in centers],
        "word_len": curve.calc.N,
        "digits": curve.digits,
        "steen": curve.steen.to_json(),
        "half_period_group": curve.half.group_check(curve.digits),
        "base_character": [str(v.lift_rational()) for v in curve.base.values],
        "branch_points": curve.branch_points().to_json(),
        "standard_function_divisor": [[str(pt.lift_rational()), n] for pt, n in div_F],
    }
    if with_omega0:
        transcript["omega0"] = fit_omega0(curve).to_json()
    G = W.schottky
    cfg = CurveConfig(
        p=p,
        generators=[[[Fraction(x) for x in row] for row in gm.to_rows()] for gm in G.generators],
        discs=[{"center": Fraction(d.center.lift_rational()), "k": d.k, "outside": d.outside} for d in G.discs],
        kernel=kspec.to_json(),
        omega=omega.to_json(),
        ends=[pt.lift_rational() for pt, _ in omega.zeros],
        whittaker=[(Fraction(a), Fraction(b)) for a, b in pairs],
        word_len=curve.calc.N,
        tree_depth=tree_depth,
        theta_box=theta_box,
        name=name or f"whittaker-g{g}-p{p}",
        hyperelliptic=transcript,
    )
    return cfg, curve


def curve_from_config(cfg) -> HyperellipticCurve:
    """Rebuild the theta machinery of a fixture, reusing its frozen base character."""
    if not cfg.whittaker:
        raise FixtureError("configuration has no Whittaker data")
    frozen = (cfg.hyperelliptic or {}).get("base_character")
    base = None
    if frozen:
        base = Character(tuple(padic(Fraction(v), cfg.p, cfg.prec) for v in frozen))
    return HyperellipticCurve(cfg.whittaker_group(), cfg.word_len, cfg.theta_box, base_character=base)

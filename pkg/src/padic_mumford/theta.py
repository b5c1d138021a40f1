"""Theta products over a Schottky group, automorphy factors, periods and the
Riemann theta series.

Every product is taken in cross-ratio form against an anchor point zeta,

    theta(a, b; z) = prod_gamma (z - gamma a)(zeta - gamma b) / ((z - gamma b)(zeta - gamma a)),

which converges even when infinity is a limit point.  The anchor only rescales
theta by a constant, so automorphy factors and periods do not depend on it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from padic_mumford.localfield import (
    INF,
    NoSquareRoot,
    PadicNumber,
    abs_value,
    agrees_relative,
    padic,
    relative_digits,
    sqrt_if_exists,
)
from padic_mumford.schottky import SchottkyGroup, abelianize, reduce_word


class ConvergenceError(ArithmeticError):
    """A truncated series or product has not converged."""


class PoleError(ZeroDivisionError):
    """Evaluation point lies on the polar orbit."""


def default_word_length(genus: int) -> int:
    return 8 if genus <= 2 else 5


def _log_p_of_power(x: Fraction, p: int) -> int:
    """k with x = p^k (x a power of p)."""
    k, num, den = 0, x.numerator, x.denominator
    while num % p == 0:
        num //= p
        k += 1
    while den % p == 0:
        den //= p
        k -= 1
    if num != 1 or den != 1:
        raise ValueError(f"{x} is not a power of {p}")
    return k


def candidate_points(G: SchottkyGroup, count: int, avoid=(), min_sep: int = 2):
    """Deterministic points of the fundamental domain, pairwise and from ``avoid``
    separated (v(x - y) < min_sep)."""
    F = G.fundamental_domain()
    p, out = G.p, []
    avoid = [a for a in avoid if a is not INF]
    for den in range(1, 60):
        for num in range(-60, 61):
            q = Fraction(num, den)
            if q.denominator != den or q == 0:
                continue
            z = padic(q, p, G.prec)
            if not F.contains(z):
                continue
            if any((z - a).is_zero or (z - a).val >= min_sep for a in avoid + out):
                continue
            out.append(z)
            if len(out) == count:
                return out
    raise ValueError("could not find enough generic points in F")


def default_base_point(G: SchottkyGroup) -> PadicNumber:
    """A unit u in F with |u - 1| = 1."""
    F = G.fundamental_domain()
    for t in itertools.chain(range(2, G.p - 1), range(G.p + 2, 40)):
        for q in (Fraction(t), Fraction(1, t), Fraction(t, G.p + 1)):
            z = padic(q, G.p, G.prec)
            if z.valuation == 0 and (z - 1).valuation == 0 and F.contains(z):
                return z
    return candidate_points(G, 1)[0]


@dataclass
class ThetaValue:
    value: PadicNumber
    tail: Fraction  # max |factor - 1| over the outermost shell

    @property
    def converged(self) -> bool:
        return self.tail < 1

    @property
    def digits(self) -> float:
        if self.tail == 0:
            return float("inf")
        return -_log_p_of_power(self.tail, self.value.p)

    def to_json(self) -> dict:
        v = self.value
        return {
            "value": v.to_json(),
            "valuation": None if v.is_zero else v.valuation,
            "tail_estimate": str(self.tail),
        }


class ThetaProduct:
    """theta(a, b; z) truncated to reduced words of length <= N."""

    def __init__(self, group: SchottkyGroup, a, b, N: int | None = None, anchor=None):
        self.group = group
        p, prec = group.p, group.prec
        self.a, self.b = padic(a, p, prec), padic(b, p, prec)
        self.N = default_word_length(group.genus) if N is None else N
        if anchor is None:
            reps = []
            for x in (self.a, self.b):
                try:
                    reps.append(group.reduce_to_fundamental(x)[0])
                except Exception:
                    pass
            anchor = candidate_points(group, 1, avoid=reps)[0]
        self.anchor = padic(anchor, p, prec)

    @cached_property
    def _orbits(self):
        oa = self.group.orbit(self.a, self.N)
        ob = self.group.orbit(self.b, self.N)
        return [(len(w), pa, pb) for (w, pa), (_, pb) in zip(oa, ob)]

    @cached_property
    def _raw_orbits(self):
        p = self.group.p
        zeta = _raw(self.anchor)
        out = []
        for length, ga, gb in self._orbits:
            ra, rb = _raw(ga), _raw(gb)
            shell = None
            if length == self.N:
                dab, dza = _rsub(ra, rb, p), _rsub(zeta, ra, p)
                shell = (None if dab is None else dab[0], dza[0])
            out.append((ra, rb, shell))
        return out

    @cached_property
    def _anchor_factor(self) -> PadicNumber:
        return self._raw_product(_raw(self.anchor))[0]

    def _raw_product(self, rz):
        """prod (z - gamma a)/(z - gamma b) over the orbit, on raw triples."""
        p, prec = self.group.p, self.group.prec
        mod = p**prec
        nv = nu = 0
        dv = 0
        nu, du = 1, 1
        best = rz[2]
        zero = False
        tail_v = None
        for ra, rb, shell in self._raw_orbits:
            fb = _rsub(rz, rb, p)
            if fb is None:
                raise PoleError(f"z lies on the orbit of the pole {self.b!r}")
            fa = _rsub(rz, ra, p)
            if fa is None:
                zero = True
                continue
            nv += fa[0]
            nu = nu * fa[1] % mod
            dv += fb[0]
            du = du * fb[1] % mod
            best = min(best, fa[2], fb[2])
            if shell is not None and shell[0] is not None:
                # v(factor - 1) = v(z - zeta) + v(ga - gb) - v(z - gb) - v(zeta - ga)
                tv = shell[0] - fb[0] - shell[1]
                if tail_v is None or tv < tail_v:
                    tail_v = tv
        if zero:
            return PadicNumber.zero(p), tail_v
        q = nu * pow(du, -1, mod) % mod
        return PadicNumber(p, nv - dv, q, best), tail_v

    def evaluate(self, z) -> ThetaValue:
        p = self.group.p
        z = padic(z, p, self.group.prec)
        if self.a.agrees_with(self.b):
            return ThetaValue(padic(1, p, self.group.prec), Fraction(0))
        prod, tail_v = self._raw_product(_raw(z))
        dz = z - self.anchor
        if tail_v is None or dz.is_zero:
            tail = Fraction(0)
        else:
            tail = Fraction(p) ** -(tail_v + dz.val)
        if prod.is_zero:
            return ThetaValue(prod, tail)
        return ThetaValue(prod / self._anchor_factor, tail)

    def __call__(self, z) -> PadicNumber:
        return self.evaluate(z).value


def _raw(x: PadicNumber):
    if x.is_zero:
        raise ValueError("orbit point is zero to precision")
    return (x.val, x.unit, x.prec)


def _rsub(a, b, p):
    """a - b on (valuation, unit, relative precision) triples; None if zero to precision."""
    va, ua, pa = a
    vb, ub, pb = b
    n = min(va + pa, vb + pb)
    m = min(va, vb)
    if n <= m:
        return None
    s = (ua * p ** (va - m) - ub * p ** (vb - m)) % p ** (n - m)
    if s == 0:
        return None
    k = 0
    while s % p == 0:
        s //= p
        k += 1
    return (m + k, s, n - m - k)


# -- characters ----------------------------------------------------------


@dataclass(frozen=True)
class Character:
    """Homomorphism from the Schottky group to Q_p^x, given on generators."""

    values: tuple

    @classmethod
    def trivial(cls, g: int, p: int) -> "Character":
        return cls(tuple(padic(1, p) for _ in range(g)))

    @property
    def genus(self) -> int:
        return len(self.values)

    def __call__(self, word) -> PadicNumber:
        return self.on_exponents(abelianize(word, self.genus))

    def on_exponents(self, n) -> PadicNumber:
        out = padic(1, self.values[0].p)
        for c, k in zip(self.values, n):
            if k:
                out = out * c**k
        return out

    def __mul__(self, other: "Character") -> "Character":
        return Character(tuple(x * y for x, y in zip(self.values, other.values)))

    def inverse(self) -> "Character":
        return Character(tuple(x.inverse() for x in self.values))

    def __truediv__(self, other: "Character") -> "Character":
        return self * other.inverse()

    def agrees_with(self, other: "Character", digits: float) -> bool:
        return all(agrees_relative(x, y, digits) for x, y in zip(self.values, other.values))

    def is_trivial(self, digits: float) -> bool:
        return all(agrees_relative(x, padic(1, x.p), digits) for x in self.values)

    def to_json(self):
        return [x.to_json() for x in self.values]


# -- automorphy factors, u_alpha, periods --------------------------------


class ThetaCalculus:
    """Automorphy factors, multiplicative periods and the Riemann theta for one group.

    Theta products are cached per (a, b).  ``digits`` is the number of relative
    p-adic digits two truncated quantities must share to count as equal; it is
    derived from the tail estimates and capped by precision/4.
    """

    def __init__(self, group: SchottkyGroup, N: int | None = None, base_point=None, samples=None):
        self.group = group
        self.N = default_word_length(group.genus) if N is None else N
        self.base_point = padic(base_point, group.p, group.prec) if base_point is not None else default_base_point(group)
        if samples is None:
            samples = candidate_points(group, 3, avoid=[self.base_point])
        self.samples = [padic(s, group.p, group.prec) for s in samples]
        self._cache: dict = {}
        self._aux = None
        self.worst_tail = Fraction(0)

    @property
    def p(self) -> int:
        return self.group.p

    @property
    def digits(self) -> float:
        cap = self.group.prec // 4
        if self.worst_tail == 0:
            return cap
        return min(cap, -_log_p_of_power(self.worst_tail, self.p))

    def theta(self, a, b) -> ThetaProduct:
        a, b = padic(a, self.p, self.group.prec), padic(b, self.p, self.group.prec)
        key = (a.key(self.group.prec), b.key(self.group.prec))
        T = self._cache.get(key)
        if T is None:
            T = ThetaProduct(self.group, a, b, self.N)
            self._cache[key] = T
        return T

    def _eval(self, T: ThetaProduct, z) -> PadicNumber:
        tv = T.evaluate(z)
        if not tv.converged:
            raise ConvergenceError(f"theta shell deviation {tv.tail} >= 1; increase word length")
        if tv.tail > self.worst_tail:
            self.worst_tail = tv.tail
        return tv.value

    def _agree(self, xs, what: str) -> PadicNumber:
        for x in xs[1:]:
            if not agrees_relative(xs[0], x, self.digits):
                raise ConvergenceError(f"{what} depends on the sample point beyond tolerance")
        return xs[0]

    def automorphy_factor(self, a, b, alpha) -> PadicNumber:
        """c(a, b; alpha) = theta(z) / theta(alpha z), checked at two sample points."""
        alpha = reduce_word(alpha)
        if not alpha:
            return padic(1, self.p)
        T = self.theta(a, b)
        vals = []
        for z in self._samples_avoiding(a, b)[:2]:
            vals.append(self._eval(T, z) / self._eval(T, self.group.apply_word(alpha, z)))
        return self._agree(vals, "automorphy factor")

    def character_of(self, a, b) -> Character:
        return Character(tuple(self.automorphy_factor(a, b, (i + 1,)) for i in range(self.group.genus)))

    def _samples_avoiding(self, *pts):
        reps = []
        for x in pts:
            x = padic(x, self.p, self.group.prec)
            try:
                reps.append(self.group.reduce_to_fundamental(x)[0])
            except Exception:
                reps.append(x)
        good = [z for z in self.samples if all((z - r).is_zero is False and (z - r).val < 2 for r in reps)]
        if len(good) < 2:
            good = candidate_points(self.group, 3, avoid=reps + [self.base_point])
        return good

    def _aux_point(self, *avoid) -> PadicNumber:
        """Auxiliary point a for u_alpha = theta(a, alpha a; .), away from the F-images of ``avoid``."""
        reps = []
        for x in avoid:
            try:
                reps.append(self.group.reduce_to_fundamental(x)[0])
            except Exception:
                reps.append(x)
        if self._aux is None:
            self._aux = candidate_points(self.group, 1, avoid=self.samples + [self.base_point])[0]
        if all(not (self._aux - r).is_zero and (self._aux - r).val < 2 for r in reps):
            return self._aux
        return candidate_points(self.group, 1, avoid=reps + [self.base_point])[0]

    def u(self, alpha, z, aux=None) -> PadicNumber:
        """u_alpha(z) = theta(a, alpha a; z), normalised so that u_alpha(x_0) = 1."""
        alpha = reduce_word(alpha)
        z = padic(z, self.p, self.group.prec)
        if not alpha:
            return padic(1, self.p)
        a = aux if aux is not None else self._aux_point(z)
        T = self.theta(a, self.group.apply_word(alpha, a))
        return self._eval(T, z) / self._eval(T, self.base_point)

    def period(self, alpha, beta) -> PadicNumber:
        """Q(c_alpha, c_beta) = u_alpha(z) / u_alpha(beta z), checked at two points."""
        alpha, beta = reduce_word(alpha), reduce_word(beta)
        if not alpha or not beta:
            return padic(1, self.p)
        vals = []
        for z in self.samples[:2]:
            bz = self.group.apply_word(beta, z)
            a = self._aux_point(z, bz)
            # the normalisation u_alpha(x_0) = 1 cancels in this ratio
            T = self.theta(a, self.group.apply_word(alpha, a))
            vals.append(self._eval(T, z) / self._eval(T, bz))
        return self._agree(vals, "period pairing")

    def period_character(self, alpha) -> Character:
        """c_alpha, the automorphy factor of u_alpha, as Q(alpha, gamma_j)."""
        return Character(tuple(self.period(alpha, (j + 1,)) for j in range(self.group.genus)))

    def abel_jacobi(self, z) -> Character:
        """t(z) = c(z, x_0; .)."""
        return self.character_of(z, self.base_point)

    def period_matrix(self, diagonal_roots=None) -> "PeriodMatrix":
        g = self.group.genus
        Q = [[self.period((i + 1,), (j + 1,)) for j in range(g)] for i in range(g)]
        return PeriodMatrix.from_periods(Q, diagonal_roots)


# -- period matrix and Riemann theta -------------------------------------


class SquareRootError(ValueError):
    """A diagonal period has no square root in Q_p."""


@dataclass
class PeriodMatrix:
    Q: list
    P: list  # chosen square roots of the diagonal

    @classmethod
    def from_periods(cls, Q, diagonal_roots=None) -> "PeriodMatrix":
        g = len(Q)
        for i in range(g):
            if abs_value(Q[i][i]) >= 1:
                raise ConvergenceError(f"|Q_{i}{i}| >= 1: theta series would not converge")
        if diagonal_roots is None:
            roots = []
            for i in range(g):
                try:
                    roots.append(sqrt_if_exists(Q[i][i]))
                except NoSquareRoot as exc:
                    raise SquareRootError(f"square root of diagonal period Q_{i}{i} not in Q_p: {exc}") from None
        else:
            roots = list(diagonal_roots)
        return cls([list(r) for r in Q], roots)

    @property
    def genus(self) -> int:
        return len(self.Q)

    def symmetric(self, digits: float) -> bool:
        g = self.genus
        return all(agrees_relative(self.Q[i][j], self.Q[j][i], digits) for i in range(g) for j in range(g))

    def quadratic(self, n) -> PadicNumber:
        """P(n, n) = prod P_ii^(n_i^2) prod_{i<j} Q_ij^(n_i n_j)."""
        g = self.genus
        out = padic(1, self.Q[0][0].p)
        for i in range(g):
            if n[i]:
                out = out * self.P[i] ** (n[i] * n[i])
            for j in range(i + 1, g):
                if n[i] * n[j]:
                    out = out * self.Q[i][j] ** (n[i] * n[j])
        return out

    def bilinear(self, n, m) -> PadicNumber:
        """c_n(m) = prod Q_ij^(n_i m_j)."""
        g = self.genus
        out = padic(1, self.Q[0][0].p)
        for i in range(g):
            for j in range(g):
                if n[i] * m[j]:
                    out = out * self.Q[i][j] ** (n[i] * m[j])
        return out

    def character(self, n) -> Character:
        g = self.genus
        return Character(tuple(self.bilinear(n, tuple(int(i == j) for i in range(g))) for j in range(g)))


def _lattice(g: int, box: int):
    return itertools.product(range(-box, box + 1), repeat=g)


@dataclass
class SeriesValue:
    value: PadicNumber
    omitted: Fraction  # largest |term| on the first omitted shell


def theta_series(PM: PeriodMatrix, weights, box: int) -> SeriesValue:
    """sum over |n_i| <= box of P(n, n) prod weights_i^n_i."""
    g = PM.genus
    p = PM.Q[0][0].p
    total = PadicNumber.zero(p)
    omitted = Fraction(0)
    for n in _lattice(g, box + 1):
        term = PM.quadratic(n)
        for w, k in zip(weights, n):
            if k:
                term = term * w**k
        if max(abs(k) for k in n) <= box:
            total = total + term
        elif not term.is_zero:
            omitted = max(omitted, abs_value(term))
    return SeriesValue(total, omitted)


def theta_gamma(PM: PeriodMatrix, c: Character, box: int = 4) -> SeriesValue:
    """theta_Gamma(c) = sum_n P(n, n) c^n."""
    return theta_series(PM, c.values, box)


def xi(PM: PeriodMatrix, n, c: Character) -> PadicNumber:
    """xi_{c_alpha}(c) = P(c_alpha, c_alpha) c(alpha) for alpha with abelianization n."""
    return PM.quadratic(n) * c.on_exponents(n)


def riemann_theta(calc: ThetaCalculus, PM: PeriodMatrix, c: Character, z, box: int = 4) -> SeriesValue:
    """vartheta(c; z) = sum_n P(n, n) prod (c_i u_i(z))^n_i."""
    g = calc.group.genus
    z = padic(z, calc.p, calc.group.prec)
    weights = [c.values[i] * calc.u((i + 1,), z) for i in range(g)]
    sv = theta_series(PM, weights, box)
    if sv.omitted >= 1:
        raise ConvergenceError("Riemann theta series not converging on this box")
    return sv


def invariant_function(calc: ThetaCalculus, PM: PeriodMatrix, c, c1, c2, z, box: int = 4) -> PadicNumber:
    """f(z) = vartheta(c) vartheta(c1 c2) / (vartheta(c c1) vartheta(c2))."""
    num = riemann_theta(calc, PM, c, z, box).value * riemann_theta(calc, PM, c1 * c2, z, box).value
    den = riemann_theta(calc, PM, c * c1, z, box).value * riemann_theta(calc, PM, c2, z, box).value
    if den.is_zero:
        raise PoleError("a theta factor in the denominator vanishes at z")
    return num / den


def vanishes_identically(calc, PM, c: Character, probes, box: int = 4, digits: int | None = None) -> bool:
    """True when vartheta(c; .) is below tolerance at every probe point."""
    digits = calc.group.prec // 2 if digits is None else digits
    for z in probes:
        v = riemann_theta(calc, PM, c, z, box).value
        if not v.is_zero and v.valuation < digits:
            return False
    return True


# -- functional equations ---------------------------------------------------


@dataclass
class IdentityCheck:
    name: str
    cases: int
    worst_digits: float  # fewest relative digits of agreement over the cases
    required: float

    @property
    def ok(self) -> bool:
        return self.cases > 0 and self.worst_digits >= self.required

    def to_json(self) -> dict:
        worst = self.worst_digits if self.worst_digits != float("inf") else "exact"
        return {"name": self.name, "cases": self.cases, "worst_digits": worst,
                "required": self.required, "ok": self.ok}


class _Tally:
    def __init__(self, name: str, required: float):
        self.name, self.required, self.cases, self.worst = name, required, 0, float("inf")

    def add(self, x: PadicNumber, y: PadicNumber):
        self.cases += 1
        self.worst = min(self.worst, relative_digits(x, y))

    def result(self) -> IdentityCheck:
        req = self.required() if callable(self.required) else self.required
        return IdentityCheck(self.name, self.cases, self.worst, req)


def _generator_pairs(g: int):
    return [((i + 1,), (j + 1,)) for i in range(g) for j in range(g)]


def functional_equation_suite(calc: ThetaCalculus, PM: PeriodMatrix, c: Character | None = None,
                              points=None, box: int = 4, digits: float | None = None):
    """Check the theta identities to ``digits`` relative digits.

    By default the requirement is calc.digits read after every evaluation is done,
    so it reflects the worst truncation tail the suite actually met.

    Covered: the character property of automorphy factors, independence of c_gamma
    from the point a, multiplicativity of u, symmetry of Q, the quadratic-form
    identity for P, FE1 for theta_Gamma and FE3 for vartheta.
    """
    G, p, g = calc.group, calc.p, calc.group.genus
    if points is None:
        points = candidate_points(G, 2, avoid=[calc.base_point] + calc.samples)
    if c is None:
        c = Character(tuple(padic(Fraction(1, k + 2), p) * padic(1 + p, p) for k in range(g)))
    need = (lambda: calc.digits) if digits is None else digits
    words = [(1,), (-1,)] + [(i + 1,) for i in range(1, g)] + [(1, 2 if g > 1 else 1)]

    char = _Tally("automorphy_character", need)
    a, b = points[0], points[1]
    for w1 in words:
        for w2 in words[:2]:
            lhs = calc.automorphy_factor(a, b, w1 + w2)
            char.add(lhs, calc.automorphy_factor(a, b, w1) * calc.automorphy_factor(a, b, w2))

    indep = _Tally("period_character_independent_of_point", need)
    others = candidate_points(G, 2, avoid=[calc.base_point] + list(points) + calc.samples)
    for i in range(g):
        gam = (i + 1,)
        x1, x2 = others[0], others[1]
        for j in range(g):
            indep.add(calc.automorphy_factor(x1, G.apply_word(gam, x1), (j + 1,)),
                      calc.automorphy_factor(x2, G.apply_word(gam, x2), (j + 1,)))

    umul = _Tally("u_multiplicative", need)
    for z in points:
        for al, be in _generator_pairs(g):
            umul.add(calc.u(al + be, z), calc.u(al, z) * calc.u(be, z))

    qsym = _Tally("period_symmetric", need)
    for i in range(g):
        for j in range(i + 1, g):
            qsym.add(PM.Q[i][j], PM.Q[j][i])
    if g == 1:
        qsym.add(calc.period((1,), (1,)), PM.Q[0][0])

    pair = _Tally("pairing_factor", need)
    for n in itertools.product(range(-1, 2), repeat=g):
        for m in itertools.product(range(-1, 2), repeat=g):
            nm = tuple(x + y for x, y in zip(n, m))
            pair.add(PM.quadratic(nm), PM.quadratic(n) * PM.bilinear(n, m) * PM.quadratic(m))

    fe1 = _Tally("FE1", need)
    base = theta_gamma(PM, c, box).value
    for i in range(g):
        e = tuple(int(k == i) for k in range(g))
        shifted = theta_gamma(PM, c * PM.character(e), box).value
        fe1.add(shifted, xi(PM, e, c).inverse() * base)

    fe3 = _Tally("FE3", need)
    for z in points:
        for i in range(g):
            alpha = (i + 1,)
            e = tuple(int(k == i) for k in range(g))
            lhs = riemann_theta(calc, PM, c, G.apply_word((-(i + 1),), z), box).value
            rhs = riemann_theta(calc, PM, c, z, box).value
            rhs = rhs / (c.on_exponents(e) * PM.quadratic(e) * calc.u(alpha, z))
            fe3.add(lhs, rhs)

    return [t.result() for t in (char, indep, umul, qsym, pair, fe1, fe3)]

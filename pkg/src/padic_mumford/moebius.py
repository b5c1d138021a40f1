"""Linear fractional transformations of P^1(Q_p)."""

from __future__ import annotations

from fractions import Fraction

from padic_mumford.localfield import (
    DEFAULT_PRECISION,
    INF,
    NoSquareRoot,
    PadicNumber,
    PrecisionError,
    padic,
    sqrt_if_exists,
)


class NotRationalError(ValueError):
    """Fixed points of a map are not Q_p-rational."""


def _shift(x: PadicNumber, k: int) -> PadicNumber:
    if x.exact_zero:
        return x
    return PadicNumber(x.p, x.val + k, x.unit, x.prec) if x.unit else PadicNumber(x.p, x.val + k, 0, 0)


def _val(x: PadicNumber) -> float:
    return float("inf") if x.is_zero else x.val


class MoebiusMap:
    """z -> (a z + b) / (c z + d), entries up to a common scalar.

    Entries are rescaled by a power of p so that the smallest valuation is 0.
    """

    __slots__ = ("a", "b", "c", "d", "p")

    def __init__(self, a, b, c, d, p: int | None = None, prec: int = DEFAULT_PRECISION):
        if p is None:
            p = next(x.p for x in (a, b, c, d) if isinstance(x, PadicNumber))
        a, b, c, d = (padic(x, p, prec) for x in (a, b, c, d))
        det = a * d - b * c
        if det.is_zero:
            raise ValueError("degenerate Moebius map: determinant vanishes")
        m = min(_val(x) for x in (a, b, c, d))
        if m != 0:
            a, b, c, d = (_shift(x, -m) for x in (a, b, c, d))
        self.a, self.b, self.c, self.d, self.p = a, b, c, d, p

    @classmethod
    def from_rationals(cls, rows, p: int, prec: int = DEFAULT_PRECISION) -> "MoebiusMap":
        (a, b), (c, d) = rows
        return cls(*(PadicNumber.from_rational(Fraction(x), p, prec) for x in (a, b, c, d)), p=p)

    @classmethod
    def identity(cls, p: int, prec: int = DEFAULT_PRECISION) -> "MoebiusMap":
        return cls.from_rationals([[1, 0], [0, 1]], p, prec)

    @property
    def det(self) -> PadicNumber:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> PadicNumber:
        return self.a + self.d

    def entries(self):
        return self.a, self.b, self.c, self.d

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        a, b, c, d = self.entries()
        e, f, g, h = other.entries()
        return MoebiusMap(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h, p=self.p)

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a, p=self.p)

    def conjugate_by(self, g: "MoebiusMap") -> "MoebiusMap":
        """g . self . g^-1"""
        return g @ self @ g.inverse()

    def __call__(self, z):
        return apply(self, z)

    def projectively_equal(self, other: "MoebiusMap", digits: int | None = None) -> bool:
        x, y = self.entries(), other.entries()
        for i in range(4):
            for j in range(i + 1, 4):
                if not (x[i] * y[j]).agrees_with(x[j] * y[i], digits):
                    return False
        return True

    def is_identity(self, digits: int | None = None) -> bool:
        return self.projectively_equal(MoebiusMap.identity(self.p), digits)

    def derivative(self, z) -> PadicNumber:
        den = self.c * z + self.d
        return self.det / (den * den)

    def to_rows(self) -> list[list[str]]:
        return [[str(x.lift_rational()) for x in row] for row in ((self.a, self.b), (self.c, self.d))]

    def __repr__(self):
        return f"MoebiusMap({self.a!r}, {self.b!r}; {self.c!r}, {self.d!r})"


def apply(m: MoebiusMap, z):
    """Projective action, with m(inf) = a/c and m(-d/c) = inf."""
    if z is INF:
        if m.c.is_zero:
            return INF
        return m.a / m.c
    den = m.c * z + m.d
    if den.is_zero:
        return INF
    return (m.a * z + m.b) / den


def classify(m: MoebiusMap) -> str:
    """One of 'identity', 'hyperbolic', 'elliptic', 'parabolic'."""
    if m.b.is_zero and m.c.is_zero and m.a.agrees_with(m.d):
        return "identity"
    tr, det = m.trace, m.det
    if tr.is_zero:
        if tr.is_inexact_zero and tr.val < 4:
            raise PrecisionError("trace indeterminate")
        return "elliptic"
    disc = tr * tr - 4 * det
    if disc.is_zero:
        return "parabolic"
    # |tr|^2 / |det| > 1
    if det.valuation - 2 * tr.valuation > 0:
        return "hyperbolic"
    return "elliptic"


def _eigen_for(m: MoebiusMap, z) -> PadicNumber:
    # eigenvalue of the eigenvector (z, 1) or (1, 0) at infinity
    return m.a if z is INF else m.c * z + m.d


def fixed_points(m: MoebiusMap):
    """Roots of c z^2 + (d - a) z - b = 0, attracting point first for hyperbolic m."""
    if classify(m) == "identity":
        raise ValueError("identity has no isolated fixed points")
    a, b, c, d = m.entries()
    if c.is_zero:
        if a.agrees_with(d):
            pts = (INF, INF)
        else:
            pts = (b / (a - d), INF)
    else:
        disc = (a - d) * (a - d) + 4 * b * c
        if disc.is_zero:
            z = (a - d) / (2 * c)
            return (z, z)
        try:
            r = sqrt_if_exists(disc)
        except NoSquareRoot as exc:
            raise NotRationalError(f"fixed points not Q_{m.p}-rational: {exc}") from None
        pts = ((a - d + r) / (2 * c), (a - d - r) / (2 * c))
    if pts[0] is INF and pts[1] is INF:
        return pts
    l0, l1 = _eigen_for(m, pts[0]), _eigen_for(m, pts[1])
    if not l0.is_zero and not l1.is_zero and l1.valuation < l0.valuation:
        pts = (pts[1], pts[0])
    return pts


def multiplier(m: MoebiusMap) -> PadicNumber:
    """Derivative at the attracting fixed point; |mu| < 1."""
    if classify(m) != "hyperbolic":
        raise ValueError("multiplier is defined for hyperbolic maps only")
    attr, rep = fixed_points(m)
    return _eigen_for(m, rep) / _eigen_for(m, attr)


def from_fixed_points(attracting, repelling, mu) -> MoebiusMap:
    """The hyperbolic map with the given fixed points and multiplier."""
    p = mu.p if isinstance(mu, PadicNumber) else attracting.p
    one = padic(1, p)
    mu = padic(mu, p)
    if repelling is INF:
        # z -> attracting + mu (z - attracting)
        return MoebiusMap(mu, attracting - mu * attracting, 0 * one, one, p=p)
    if attracting is INF:
        return from_fixed_points(repelling, INF, mu).inverse()
    # T(z) = (z - A)/(z - R); T^-1 . diag(mu, 1) . T
    t = MoebiusMap(one, -attracting, one, -repelling, p=p)
    return t.inverse() @ MoebiusMap(mu, 0 * one, 0 * one, one, p=p) @ t


def involution(a, b) -> MoebiusMap:
    """The order-two map with fixed points a and b."""
    p = a.p
    if b is INF:
        return MoebiusMap(-1, 2 * a, 0, 1, p=p)
    return MoebiusMap(a + b, -2 * a * b, 2, -(a + b), p=p)

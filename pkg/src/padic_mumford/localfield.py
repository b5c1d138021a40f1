"""Arithmetic in Q_p with relative-precision tracking.

A nonzero element is stored as ``p**val * unit`` where ``unit`` is an
integer modulo ``p**prec`` not divisible by ``p``.  ``prec`` counts the
p-adic digits known beyond the valuation.  Results of arithmetic never
claim more digits than the operands justify.

An *inexact zero* arises when a subtraction cancels every known digit; it
knows only a lower bound ``val`` on its valuation, and asking for its
absolute value raises :class:`PrecisionError`.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

DEFAULT_PRECISION = 64


class PrecisionError(ArithmeticError):
    """Raised when the tracked precision cannot decide a question."""


class NoSquareRoot(ValueError):
    """Raised when an element has no square root in Q_p."""


def valuation_int(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def valuation_rational(x, p: int) -> int:
    x = Fraction(x)
    return valuation_int(x.numerator, p) - valuation_int(x.denominator, p)


def abs_rational(x, p: int) -> Fraction:
    """|x|_p for a rational x, exact."""
    x = Fraction(x)
    if x == 0:
        return Fraction(0)
    return Fraction(p) ** (-valuation_rational(x, p))


class _Infinity:
    """The point at infinity of P^1."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("padic-infinity")

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def is_inf(z) -> bool:
    return z is INF


_POWERS: dict = {}


def _ppow(p: int, n: int) -> int:
    key = (p, n)
    r = _POWERS.get(key)
    if r is None:
        r = _POWERS[key] = p**n
    return r


class PadicNumber:
    __slots__ = ("p", "val", "unit", "prec", "exact_zero")

    def __init__(self, p: int, val: int, unit: int, prec: int, exact_zero: bool = False):
        self.p = p
        self.exact_zero = exact_zero
        if exact_zero:
            self.val, self.unit, self.prec = 0, 0, 0
            return
        if prec > 0:
            unit %= _ppow(p, prec)
        if prec <= 0 or unit == 0:
            # inexact zero: only the absolute precision val + prec is known
            self.val, self.unit, self.prec = val + max(prec, 0), 0, 0
            return
        if unit % p == 0:
            v = valuation_int(unit, p)
            unit //= _ppow(p, v)
            val += v
            prec -= v
        self.val, self.unit, self.prec = val, unit, prec

    @classmethod
    def _unit(cls, p: int, val: int, unit: int, prec: int) -> "PadicNumber":
        # trusted constructor: unit already reduced and prime to p
        x = object.__new__(cls)
        x.p, x.val, x.unit, x.prec, x.exact_zero = p, val, unit, prec, False
        return x

    # -- construction -------------------------------------------------
    @classmethod
    def zero(cls, p: int) -> "PadicNumber":
        return cls(p, 0, 0, 0, exact_zero=True)

    @classmethod
    def from_rational(cls, x, p: int, prec: int = DEFAULT_PRECISION) -> "PadicNumber":
        x = Fraction(x)
        if x == 0:
            return cls.zero(p)
        num, den = x.numerator, x.denominator
        v = 0
        while num % p == 0:
            num //= p
            v += 1
        while den % p == 0:
            den //= p
            v -= 1
        mod = p**prec
        return cls(p, v, num * pow(den, -1, mod) % mod, prec)

    @classmethod
    def from_digits(cls, p: int, valuation: int, digits) -> "PadicNumber":
        digits = list(digits)
        unit = sum(d * p**i for i, d in enumerate(digits))
        return cls(p, valuation, unit, len(digits))

    # -- predicates ---------------------------------------------------
    @property
    def is_zero(self) -> bool:
        """True for exact zero and for zero-to-precision."""
        return self.exact_zero or self.unit == 0

    @property
    def is_inexact_zero(self) -> bool:
        return not self.exact_zero and self.unit == 0

    @property
    def absprec(self) -> int | None:
        """Absolute precision: the element is known modulo p**absprec."""
        if self.exact_zero:
            return None
        return self.val + self.prec

    @property
    def valuation(self) -> int:
        if self.exact_zero:
            raise PrecisionError("valuation of exact zero is infinite")
        if self.unit == 0:
            raise PrecisionError(f"valuation indeterminate (all digits below p^{self.val} are zero)")
        return self.val

    def abs(self) -> Fraction:
        return abs_value(self)

    def digits(self, n: int | None = None) -> list[int]:
        n = self.prec if n is None else min(n, self.prec)
        out, u = [], self.unit
        for _ in range(n):
            u, r = divmod(u, self.p)
            out.append(r)
        return out

    # -- helpers ------------------------------------------------------
    def _coerce(self, other) -> "PadicNumber":
        if isinstance(other, PadicNumber):
            if other.p != self.p:
                raise ValueError(f"mixing primes {self.p} and {other.p}")
            return other
        if isinstance(other, (int, Rational)):
            prec = self.prec if self.prec else DEFAULT_PRECISION
            return PadicNumber.from_rational(other, self.p, max(prec, DEFAULT_PRECISION))
        return NotImplemented

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.exact_zero:
            return other
        if other.exact_zero:
            return self
        p = self.p
        n = min(self.val + self.prec, other.val + other.prec)
        m = min(self.val, other.val)
        if n <= m:
            return PadicNumber(p, n, 0, 0)
        s = self.unit * _ppow(p, self.val - m) + other.unit * _ppow(p, other.val - m)
        return PadicNumber(p, m, s, n - m)

    __radd__ = __add__

    def __neg__(self):
        if self.exact_zero or self.unit == 0:
            return self
        return PadicNumber._unit(self.p, self.val, _ppow(self.p, self.prec) - self.unit, self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.exact_zero or other.exact_zero:
            return PadicNumber.zero(self.p)
        if self.unit == 0 or other.unit == 0:
            # zero known to absolute precision of the product
            return PadicNumber(self.p, self.val + other.val, 0, 0)
        prec = min(self.prec, other.prec)
        return PadicNumber._unit(self.p, self.val + other.val, self.unit * other.unit % _ppow(self.p, prec), prec)

    __rmul__ = __mul__

    def inverse(self) -> "PadicNumber":
        if self.is_zero:
            raise ZeroDivisionError("division by a p-adic zero (exact or to precision)")
        mod = _ppow(self.p, self.prec)
        return PadicNumber._unit(self.p, -self.val, pow(self.unit, -1, mod), self.prec)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return PadicNumber.from_rational(1, self.p, self.prec or DEFAULT_PRECISION)
        if self.exact_zero:
            return self
        if self.unit == 0:
            return PadicNumber(self.p, self.val * n, 0, 0)
        return PadicNumber(self.p, self.val * n, pow(self.unit, n, self.p**self.prec), self.prec)

    # -- comparison ---------------------------------------------------
    def agrees_with(self, other, digits: int | None = None) -> bool:
        """Equality modulo p**N, N the common absolute precision (capped by ``digits``)."""
        other = self._coerce(other)
        diff = self - other
        if diff.exact_zero:
            return True
        if diff.unit == 0:
            return True
        if digits is None:
            return False
        return diff.val >= digits

    def __eq__(self, other):
        if other is INF:
            return False
        if not isinstance(other, (PadicNumber, int, Rational)):
            return NotImplemented
        return self.agrees_with(other)

    __hash__ = None

    def key(self, digits: int) -> tuple:
        """Hashable truncation used for deduplication."""
        if self.is_zero:
            return ("zero",)
        return (self.val, self.unit % self.p ** min(digits, self.prec))

    def __repr__(self):
        if self.exact_zero:
            return "0"
        if self.unit == 0:
            return f"O({self.p}^{self.val})"
        ds = self.digits(8)
        tail = "..." if self.prec > 8 else ""
        return f"{self.p}^{self.val}*({' '.join(map(str, ds))}{tail})"

    # -- serialization ------------------------------------------------
    def to_json(self) -> dict:
        if self.exact_zero:
            return {"valuation": None, "digits": []}
        return {"valuation": self.val, "digits": self.digits()}

    def sqrt(self) -> "PadicNumber":
        return sqrt_if_exists(self)

    def lift_rational(self) -> Fraction:
        """Rational reconstruction p**val * u/w with small u, w (for display and tests)."""
        if self.is_zero:
            return Fraction(0)
        mod = self.p**self.prec
        r0, r1, s0, s1 = mod, self.unit, 0, 1
        bound = int(mod**0.5) if mod < 2**1000 else 1 << (mod.bit_length() // 2)
        while r1 > bound:
            q = r0 // r1
            r0, r1 = r1, r0 - q * r1
            s0, s1 = s1, s0 - q * s1
        return Fraction(r1, s1) * Fraction(self.p) ** self.val


def padic(x, p: int, prec: int = DEFAULT_PRECISION):
    """Coerce an int, Fraction, rational string or PadicNumber into Q_p (INF passes through)."""
    if x is INF or isinstance(x, PadicNumber):
        return x
    if isinstance(x, str):
        if x.strip().lower() in ("inf", "infinity", "∞"):
            return INF
        x = Fraction(x)
    return PadicNumber.from_rational(x, p, prec)


def abs_value(x: PadicNumber) -> Fraction:
    """|x| = p**(-v(x)); exact zero gives 0."""
    if x.exact_zero:
        return Fraction(0)
    return Fraction(x.p) ** (-x.valuation)


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def sqrt_if_exists(x: PadicNumber) -> PadicNumber:
    """A square root of x in Q_p, or :class:`NoSquareRoot`.

    For odd p the returned root has leading digit in ``1..(p-1)/2``.
    """
    p = x.p
    if x.exact_zero:
        return x
    v = x.valuation
    if v % 2:
        raise NoSquareRoot(f"odd valuation {v}: no square root in Q_{p}")
    u, prec = x.unit, x.prec
    if p == 2:
        if prec >= 3 and u % 8 != 1:
            raise NoSquareRoot("unit not 1 mod 8: no square root in Q_2")
        if prec < 3:
            raise PrecisionError("too few digits to decide a 2-adic square")
        # bitwise lift: r odd, r^2 = u mod 2^(k+1) -> fix bit k
        r = 1
        for k in range(2, prec):
            if (r * r - u) % 2 ** (k + 1):
                r += 2 ** (k - 1)
        return PadicNumber(2, v // 2, r, prec - 1)
    if legendre(u, p) != 1:
        raise NoSquareRoot(f"unit is a non-residue mod {p}: no square root in Q_{p}")
    r = next(t for t in range(1, p) if (t * t - u) % p == 0)
    if r > (p - 1) // 2:
        r = p - r
    k = 1
    while k < prec:
        k = min(2 * k, prec)
        mod = p**k
        r = (r - (r * r - u) * pow(2 * r, -1, mod)) % mod
    return PadicNumber(p, v // 2, r, prec)


def relative_digits(x: PadicNumber, y: PadicNumber) -> float:
    """How many leading p-adic digits x and y share: v(x - y) - v(x)."""
    if x.is_zero:
        return float("inf") if y.is_zero else float("-inf")
    d = x - y
    if d.exact_zero:
        return float("inf")
    return d.val - x.val


def agrees_relative(x: PadicNumber, y: PadicNumber, digits: float) -> bool:
    if x.is_zero and y.is_zero:
        return True
    if x.is_zero or y.is_zero:
        return False
    return relative_digits(x, y) >= digits

"""Schottky groups over Q_p: ping-pong discs, reduced words, limit points,
reduction to a good fundamental domain, and Whittaker (involution) groups."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from padic_mumford.localfield import DEFAULT_PRECISION, INF, PadicNumber, PrecisionError, padic
from padic_mumford.moebius import (
    MoebiusMap,
    apply,
    classify,
    fixed_points,
    from_fixed_points,
    involution,
    multiplier,
)


class GroupValidationError(ValueError):
    """The generators and discs do not form a valid ping-pong configuration."""


class LimitSetError(ArithmeticError):
    """A point cannot be separated from the limit set at working precision."""


# -- discs ---------------------------------------------------------------


def _dist_val(x: PadicNumber, y: PadicNumber) -> float:
    """v(x - y), +inf when equal to precision."""
    d = x - y
    if d.is_zero:
        return float("inf")
    return d.val


@dataclass(frozen=True)
class Disc:
    """The ball {|z - center| <= p^-k}, or its complement in P^1 when ``outside``."""

    center: PadicNumber
    k: int
    outside: bool = False

    def contains(self, z) -> bool:
        if z is INF:
            return self.outside
        inside = _dist_val(z, self.center) >= self.k
        return inside != self.outside

    def complement(self) -> "Disc":
        return Disc(self.center, self.k, not self.outside)

    def same_as(self, other: "Disc") -> bool:
        return (
            self.outside == other.outside
            and self.k == other.k
            and _dist_val(self.center, other.center) >= self.k
        )

    def disjoint_from(self, other: "Disc") -> bool:
        if self.outside and other.outside:
            return False
        if self.outside:
            return other.disjoint_from(self)
        if other.outside:
            # ball inside the complement's hole
            return self.k >= other.k and _dist_val(self.center, other.center) >= other.k
        return _dist_val(self.center, other.center) < min(self.k, other.k)

    def to_json(self) -> dict:
        return {"center": str(self.center.lift_rational()), "k": self.k, "outside": self.outside}

    def __repr__(self):
        kind = "co-ball" if self.outside else "ball"
        return f"Disc({kind}, center={self.center.lift_rational()}, k={self.k})"


def _pole(m: MoebiusMap):
    if m.c.is_zero:
        return INF
    return -m.d / m.c


def disc_image(m: MoebiusMap, disc: Disc) -> Disc:
    """Exact image of a disc under a Moebius map (balls go to balls or co-balls)."""
    pole = _pole(m)
    has_pole = disc.contains(pole)
    if has_pole:
        return disc_image(m, disc.complement()).complement()
    if not disc.outside:
        c = disc.center
        scale = m.det.valuation - 2 * (m.c * c + m.d).valuation
        return Disc(apply(m, c), disc.k + scale)
    # complement of B(c, k) is tau(B(0, 1 - k)) with tau(w) = c + 1/w
    p = m.p
    tau = MoebiusMap(disc.center, 1, 1, 0, p=p)
    return disc_image(m @ tau, Disc(PadicNumber.zero(p), 1 - disc.k))


# -- words ---------------------------------------------------------------

Word = tuple  # signed 1-based generator indices, leftmost letter applied last


def is_reduced(word: Word) -> bool:
    return all(word[i] != -word[i + 1] for i in range(len(word) - 1))


def word_inverse(word: Word) -> Word:
    return tuple(-x for x in reversed(word))


def reduce_word(word) -> Word:
    out: list[int] = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def abelianize(word: Word, g: int) -> tuple[int, ...]:
    n = [0] * g
    for x in word:
        n[abs(x) - 1] += 1 if x > 0 else -1
    return tuple(n)


# -- fundamental domain --------------------------------------------------


@dataclass(frozen=True)
class FundamentalDomain:
    """F = outer ball minus the finite ping-pong discs."""

    outer: Disc
    holes: tuple

    def contains(self, z) -> bool:
        if z is INF or not self.outer.contains(z):
            return False
        return not any(h.contains(z) for h in self.holes)


# -- groups --------------------------------------------------------------


@dataclass
class SchottkyGroup:
    """Free group on hyperbolic generators with validated ping-pong discs.

    ``discs[i]`` is the attracting disc of generator i and ``discs[g + i]``
    its repelling disc; generator i maps the complement of the repelling disc
    onto the attracting disc.
    """

    p: int
    generators: list
    discs: list
    prec: int = DEFAULT_PRECISION
    _inverses: list = field(default=None, repr=False)

    def __post_init__(self):
        if self._inverses is None:
            self._inverses = [m.inverse() for m in self.generators]

    @property
    def genus(self) -> int:
        return len(self.generators)

    def letter(self, x: int) -> MoebiusMap:
        return self.generators[x - 1] if x > 0 else self._inverses[-x - 1]

    def attracting_disc(self, x: int) -> Disc:
        """Disc containing the image of any point outside the letter's source disc."""
        g = self.genus
        return self.discs[x - 1] if x > 0 else self.discs[g - x - 1]

    def word_map(self, word: Word) -> MoebiusMap:
        m = MoebiusMap.identity(self.p, self.prec)
        for x in word:
            m = m @ self.letter(x)
        return m

    def apply_word(self, word: Word, z):
        for x in reversed(word):
            z = apply(self.letter(x), z)
        return z

    # -- validation ------------------------------------------------------
    def validate(self) -> "SchottkyGroup":
        g = self.genus
        if len(self.discs) != 2 * g:
            raise GroupValidationError(f"expected {2 * g} discs, got {len(self.discs)}")
        for i, m in enumerate(self.generators):
            kind = classify(m)
            if kind != "hyperbolic":
                raise GroupValidationError(f"generator {i + 1} is {kind}, not hyperbolic")
        for i in range(2 * g):
            for j in range(i + 1, 2 * g):
                if not self.discs[i].disjoint_from(self.discs[j]):
                    raise GroupValidationError(f"ping-pong discs {i} and {j} overlap")
        for i, m in enumerate(self.generators):
            src, dst = self.discs[g + i], self.discs[i]
            img = disc_image(m, src.complement())
            if not img.same_as(dst):
                raise GroupValidationError(
                    f"generator {i + 1} maps the exterior of {src} onto {img}, not {dst}"
                )
            attr, rep = fixed_points(m)
            if not dst.contains(attr) or not src.contains(rep):
                raise GroupValidationError(f"fixed points of generator {i + 1} are not in its discs")
        self.fundamental_domain()
        return self

    def fundamental_domain(self) -> FundamentalDomain:
        outs = [d for d in self.discs if d.outside]
        if len(outs) != 1:
            raise GroupValidationError("exactly one disc must contain infinity")
        holes = tuple(d for d in self.discs if not d.outside)
        return FundamentalDomain(outs[0].complement(), holes)

    # -- enumeration -----------------------------------------------------
    def letters(self):
        g = self.genus
        return [x for i in range(1, g + 1) for x in (i, -i)]

    def enumerate_words(self, max_len: int):
        """All reduced words of length <= max_len with their matrices."""
        if max_len < 0:
            raise ValueError("max_len must be nonnegative")
        out = [((), MoebiusMap.identity(self.p, self.prec))]
        shell = list(out)
        for _ in range(max_len):
            nxt = []
            for w, m in shell:
                for x in self.letters():
                    if w and w[-1] == -x:
                        continue
                    nxt.append((w + (x,), m @ self.letter(x)))
            out.extend(nxt)
            shell = nxt
        return out

    def orbit(self, z, max_len: int):
        """Pairs (word, word(z)) over reduced words of length <= max_len.

        Built by prepending letters, so only point evaluations are needed.
        """
        out = [((), z)]
        shell = list(out)
        for _ in range(max_len):
            nxt = []
            for w, pt in shell:
                for x in self.letters():
                    if w and w[0] == -x:
                        continue
                    nxt.append(((x,) + w, apply(self.letter(x), pt)))
            out.extend(nxt)
            shell = nxt
        return out

    def limit_points(self, max_len: int, digits: int | None = None):
        """Images of generator fixed points under words of length <= max_len, deduplicated."""
        digits = digits if digits is not None else self.prec // 2
        seen, out = set(), []
        for i in range(self.genus):
            for f in fixed_points(self.generators[i]):
                for _, pt in self.orbit(f, max_len):
                    key = "inf" if pt is INF else pt.key(digits)
                    if key not in seen:
                        seen.add(key)
                        out.append(pt)
        return out

    def limit_point_nesting(self, max_len: int) -> list:
        """Violations of: w(fixed point) lies in the disc of the leading letter of
        the reduced infinite word it represents.  Empty list means all nested."""
        bad = []
        for i in range(self.genus):
            attr, rep = fixed_points(self.generators[i])
            for f, tail in ((attr, i + 1), (rep, -(i + 1))):
                for w, pt in self.orbit(f, max_len):
                    if not w:
                        continue
                    # w . tail^infinity: strip trailing letters cancelled by the tail
                    ww = list(w)
                    while ww and ww[-1] == -tail:
                        ww.pop()
                    lead = ww[0] if ww else tail
                    if not self.attracting_disc(lead).contains(pt):
                        bad.append((w, f, pt))
        return bad

    def reduce_to_fundamental(self, z, max_steps: int = 200):
        """(z_F, w) with z_F in F and apply_word(w, z) = z_F."""
        F = self.fundamental_domain()
        g = self.genus
        word: list[int] = []
        for _ in range(max_steps + 1):
            if F.contains(z):
                return z, tuple(reversed(word))
            for i in range(g):
                if self.discs[i].contains(z):
                    x = -(i + 1)
                    break
                if self.discs[g + i].contains(z):
                    x = i + 1
                    break
            else:
                raise LimitSetError(f"point {z!r} is outside F yet in no ping-pong disc")
            z = apply(self.letter(x), z)
            word.append(x)
        raise LimitSetError("point indistinguishable from limit set within the step bound")

    # -- normalization ---------------------------------------------------
    def normalized(self) -> "SchottkyGroup":
        """Conjugate so that the first generator fixes 0 (attracting) and infinity."""
        attr, rep = fixed_points(self.generators[0])
        if rep is INF and not attr is INF and attr.is_zero:
            return self
        one = padic(1, self.p, self.prec)
        if rep is INF:
            h = MoebiusMap(one, -attr, 0 * one, one, p=self.p)
        elif attr is INF:
            raise GroupValidationError("attracting fixed point at infinity")
        else:
            h = MoebiusMap(one, -attr, one, -rep, p=self.p)
        gens = [m.conjugate_by(h) for m in self.generators]
        discs = [disc_image(h, d) for d in self.discs]
        return SchottkyGroup(self.p, gens, discs, self.prec).validate()

    def multipliers(self):
        return [multiplier(m) for m in self.generators]

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "generators": [m.to_rows() for m in self.generators],
            "discs": [d.to_json() for d in self.discs],
        }


def pingpong_discs(m: MoebiusMap, r: int | None = None):
    """(attracting disc, repelling disc) for a hyperbolic map.

    In the coordinate w = (z - A)/(z - R) the map is w -> mu w; the discs are
    {|w| <= p^-r} and {|w| > p^(e - r)} with e = v(mu) and 1 <= r <= e.
    """
    attr, rep = fixed_points(m)
    e = multiplier(m).valuation
    if r is None:
        r = e if rep is INF else e // 2 + 1
    if not 1 <= r <= e:
        raise GroupValidationError(f"disc parameter r={r} outside [1, {e}]")
    if rep is INF:
        return Disc(attr, r), Disc(attr, r - e, outside=True)
    sep = (attr - rep).valuation
    return Disc(attr, r + sep), Disc(rep, e - r + 1 + sep)


# -- Whittaker groups ----------------------------------------------------


@dataclass
class WhittakerGroup:
    """Involutions s_0..s_g, s_0 fixing +-1, with Schottky generators s_i s_0."""

    p: int
    involutions: list
    ramification: list  # (a_i, b_i) fixed points of s_i
    schottky: SchottkyGroup

    @property
    def genus(self) -> int:
        return len(self.ramification)

    def relations_report(self) -> dict:
        s0 = self.involutions[0]
        out = {"involution_order_two": [], "conjugation_inverts": []}
        for s in self.involutions:
            out["involution_order_two"].append((s @ s).is_identity())
        for gm in self.schottky.generators:
            out["conjugation_inverts"].append((s0 @ gm @ s0 @ gm).is_identity())
        out["ok"] = all(out["involution_order_two"]) and all(out["conjugation_inverts"])
        return out


def build_whittaker(pairs, p: int, radii=None, prec: int = DEFAULT_PRECISION) -> WhittakerGroup:
    """Whittaker group from ramification pairs (a_i, b_i) with s_0(z) = 1/z.

    The first pair must be (sqrt(q), -sqrt(q)) so that the first Schottky
    generator is z -> q z.
    """
    s0 = MoebiusMap.from_rationals([[0, 1], [1, 0]], p, prec)
    invs, ram, gens, att, rep = [s0], [], [], [], []
    for idx, (a, b) in enumerate(pairs):
        a, b = padic(a, p, prec), padic(b, p, prec)
        s = involution(a, b)
        gm = s @ s0
        if classify(gm) != "hyperbolic":
            raise GroupValidationError(f"s_{idx + 1} s_0 is not hyperbolic")
        d_plus, d_minus = pingpong_discs(gm, None if radii is None else radii[idx])
        invs.append(s)
        ram.append((a, b))
        gens.append(gm)
        att.append(d_plus)
        rep.append(d_minus)
    G = SchottkyGroup(p, gens, att + rep, prec).validate()
    W = WhittakerGroup(p, invs, ram, G)
    rel = W.relations_report()
    if not rel["ok"]:
        raise GroupValidationError(f"Whittaker relations fail: {rel}")
    return W


def whittaker_pair(center, e: int, p: int, prec: int = DEFAULT_PRECISION):
    """Ramification pair of s_i when s_i s_0 has attracting point ``center`` and multiplier p^e.

    ``center`` = 0 gives (p^(e/2), -p^(e/2)); otherwise the repelling point is
    1/center and the pair sits at w = +-center p^(e/2) in the coordinate
    w = (z - A)/(z - 1/A).
    """
    if e % 2:
        raise ValueError("multiplier exponent must be even for rational ramification points")
    h = Fraction(p) ** (e // 2)
    A = Fraction(center)
    if A == 0:
        return h, -h
    R = 1 / A
    out = []
    for w in (A * h, -A * h):
        out.append((A - w * R) / (1 - w))
    return tuple(out)


def hyperbolic_from_center(center, e: int, p: int, prec: int = DEFAULT_PRECISION) -> MoebiusMap:
    A = padic(Fraction(center), p, prec)
    mu = padic(Fraction(p) ** e, p, prec)
    if Fraction(center) == 0:
        return from_fixed_points(A, INF, mu)
    return from_fixed_points(A, padic(1 / Fraction(center), p, prec), mu)

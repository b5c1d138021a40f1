"""Balls of Q_p, the measure |omega| with exact ball integrals, and the truncated
skeleton tree of F minus S with its fibers.

Convention: Ball(c, k) = {x : |x - c| <= p^-k}; larger k means a smaller ball.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from padic_mumford.localfield import DEFAULT_PRECISION, INF, PadicNumber, abs_value, padic
from padic_mumford.schottky import FundamentalDomain


class GeometryError(ValueError):
    pass


def _v(x: PadicNumber) -> float:
    return float("inf") if x.is_zero else x.val


@dataclass(frozen=True)
class Ball:
    center: PadicNumber
    k: int

    @property
    def p(self) -> int:
        return self.center.p

    def contains(self, z) -> bool:
        if z is INF:
            return False
        return _v(z - self.center) >= self.k

    def contains_ball(self, other: "Ball") -> bool:
        return other.k >= self.k and self.contains(other.center)

    def disjoint_from(self, other: "Ball") -> bool:
        return _v(self.center - other.center) < min(self.k, other.k)

    def children(self):
        p = self.p
        step = padic(Fraction(p) ** self.k, p, self.center.prec or 64)
        return [Ball(self.center + t * step, self.k + 1) for t in range(p)]

    def haar(self) -> Fraction:
        return Fraction(self.p) ** (-self.k)

    def key(self):
        """Hashable identity of the ball."""
        c = self.center
        if c.is_zero or c.val >= self.k:
            return (self.k, 0, 0)
        mod = self.p ** (self.k - c.val)
        return (self.k, c.val, c.unit % mod)

    def to_json(self) -> dict:
        return {"center": str(self.center.lift_rational()), "k": self.k}

    def __repr__(self):
        return f"Ball({self.center.lift_rational()}, k={self.k})"


# -- |omega| --------------------------------------------------------------


@dataclass
class OmegaSpec:
    """|omega(x)| = C prod |x - a|^n_a prod max(|x - c_H|, r_H)^e_H on F.

    The second product runs over holes H = B(c_H, r_H) of F.  A differential is
    not Gamma-invariant as a function of x, so its absolute value can carry such
    factors; capping at the hole radius keeps integrals over hole balls finite
    and leaves values on F untouched.
    """

    C: Fraction
    zeros: list  # [(PadicNumber, int)]
    basis_coefficients: list | None = None
    hole_factors: list = field(default_factory=list)  # [(Ball, int)]

    def __post_init__(self):
        self.C = Fraction(self.C)
        if self.C <= 0:
            raise GeometryError("omega scale C must be positive")
        for a, n in self.zeros:
            if not isinstance(a, PadicNumber):
                raise GeometryError("zeros of omega must be Q_p-rational points")
            if n < 0:
                raise GeometryError("zero orders must be nonnegative")

    @property
    def p(self) -> int:
        return self.zeros[0][0].p if self.zeros else None

    @property
    def degree(self) -> int:
        return sum(n for _, n in self.zeros)

    def validate_degree(self, genus: int) -> "OmegaSpec":
        if self.degree != 2 * genus - 2:
            raise GeometryError(f"omega has {self.degree} zeros, expected 2g - 2 = {2 * genus - 2}")
        return self

    def hole_weight(self, x: PadicNumber) -> Fraction:
        out = Fraction(1)
        for H, e in self.hole_factors:
            if e:
                d = x - H.center
                out *= (H.haar() if d.is_zero else max(abs_value(d), H.haar())) ** e
        return out

    def value(self, x: PadicNumber) -> Fraction:
        out = self.C * self.hole_weight(x)
        for a, n in self.zeros:
            if n:
                d = x - a
                if d.is_zero:
                    return Fraction(0)
                out *= abs_value(d) ** n
        return out

    def to_json(self) -> dict:
        out = {"C": str(self.C), "zeros": [[str(a.lift_rational()), n] for a, n in self.zeros]}
        if self.hole_factors:
            out["hole_factors"] = [
                {"center": str(H.center.lift_rational()), "k": H.k, "e": e} for H, e in self.hole_factors
            ]
        return out


def zero_ball_integral(p: int, n: int, k: int) -> Fraction:
    """integral over B(a, k) of |x - a|^n dx = (1 - 1/p) p^(-k(n+1)) / (1 - p^(-(n+1)))."""
    P = Fraction(p)
    return (1 - 1 / P) * P ** (-k * (n + 1)) / (1 - P ** (-(n + 1)))


def measure_ball(omega: OmegaSpec, B: Ball) -> Fraction:
    """Exact integral of |omega| over B."""
    unresolved = [H for H, e in omega.hole_factors if e and H.k > B.k and B.contains(H.center)]
    inside = [(a, n) for a, n in omega.zeros if n and B.contains(a)]
    if unresolved or len(inside) > 1:
        return sum((measure_ball(omega, ch) for ch in B.children()), Fraction(0))
    if not inside:
        return omega.value(B.center) * B.haar()
    a, n = inside[0]
    const = omega.C * omega.hole_weight(a)
    for b, m in omega.zeros:
        if m and b is not a:
            d = a - b
            if d.is_zero:
                raise GeometryError("repeated zero of omega")
            const *= abs_value(d) ** m
    return const * zero_ball_integral(B.p, n, B.k)


def measure_region(omega: OmegaSpec, F: FundamentalDomain) -> Fraction:
    """Integral of |omega| over F = outer ball minus holes."""
    outer = Ball(F.outer.center, F.outer.k)
    total = measure_ball(omega, outer)
    for h in F.holes:
        total -= measure_ball(omega, Ball(h.center, h.k))
    return total


# -- tree ----------------------------------------------------------------


@dataclass
class TreeVertex:
    id: int
    ball: Ball
    kind: str  # "core", "ray" or "tail"
    parent: int | None
    children: list = field(default_factory=list)
    end: int | None = None  # index into S for ray and tail vertices
    nu: Fraction = Fraction(0)
    rep: PadicNumber | None = None

    @property
    def k(self) -> int:
        return self.ball.k

    def neighbors(self):
        return ([self.parent] if self.parent is not None else []) + list(self.children)


@dataclass
class SkeletonTree:
    """Truncated skeleton T_S(D) with fibers U(v) and masses nu(v)."""

    F: FundamentalDomain
    S: list
    depth: int
    omega: OmegaSpec
    vertices: list
    core_level: list  # per end a in S: the level where the ray toward a starts
    holes: list
    ray_digit: int = 1  # representatives on rays are a + t p^k with this t

    @property
    def p(self) -> int:
        return self.vertices[0].ball.p

    def __len__(self):
        return len(self.vertices)

    def massive(self):
        """Vertices whose fiber has positive mass; these carry the operator."""
        return [v for v in self.vertices if v.nu > 0]

    def total_mass(self) -> Fraction:
        return sum((v.nu for v in self.vertices), Fraction(0))

    def ray(self, end: int):
        """Vertices on the ray toward S[end], ordered by level."""
        return sorted((v for v in self.vertices if v.end == end), key=lambda v: v.k)

    def retraction_vertex(self, x) -> TreeVertex:
        x = padic(x, self.p)
        if not self.F.contains(x):
            raise GeometryError("point is not in F")
        for a in self.S:
            if (x - a).is_zero:
                raise GeometryError("point coincides with a puncture in S")
        v = self.vertices[0]
        while True:
            nxt = next((self.vertices[c] for c in v.children if self.vertices[c].ball.contains(x)), None)
            if nxt is None:
                return v
            v = nxt

    def fiber_contains(self, v: TreeVertex, x) -> bool:
        try:
            return self.retraction_vertex(x).id == v.id
        except GeometryError:
            return False

    def removed_children(self, v: TreeVertex):
        """Child balls of v that are not part of its fiber (child vertices and holes)."""
        out = [self.vertices[c].ball for c in v.children]
        out += [h for h in self.holes if h.k == v.k + 1 and v.ball.contains(h.center)]
        return out

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "ends": [str(a.lift_rational()) for a in self.S],
            "nodes": [
                {
                    "id": v.id,
                    "center": str(v.ball.center.lift_rational()),
                    "k": v.k,
                    "kind": v.kind,
                    "nu": str(v.nu),
                    "neighbors": v.neighbors(),
                }
                for v in self.vertices
            ],
        }

    def to_dot(self) -> str:
        lines = ["graph skeleton {"]
        for v in self.vertices:
            label = f"{v.ball.center.lift_rational()}|k={v.k}"
            shape = "box" if v.kind == "tail" else "ellipse"
            lines.append(f'  v{v.id} [label="{label}", shape={shape}];')
        for v in self.vertices:
            for c in v.children:
                lines.append(f"  v{v.id} -- v{c};")
        lines.append("}")
        return "\n".join(lines)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _core_level(a: PadicNumber, others, holes, k0: int) -> int:
    lvl = k0
    for b in others:
        lvl = max(lvl, int(_v(a - b)))
    for h in holes:
        lvl = max(lvl, min(int(_v(a - h.center)), h.k - 1))
    return lvl


def build_tree(
    F: FundamentalDomain, S, depth: int, omega: OmegaSpec, ray_digit: int = 1, rep_filter=None
) -> SkeletonTree:
    """The skeleton of F minus S, with each ray cut ``depth`` levels past the core.

    ``rep_filter(point)`` may veto candidate representatives of core fibers; the
    first free child center it accepts is used, falling back to the first free one.
    """
    if depth < 1:
        raise GeometryError("tree depth must be at least 1")
    outer = Ball(F.outer.center, F.outer.k)
    holes = [Ball(h.center, h.k) for h in F.holes]
    S = list(S)
    for a in S:
        if not F.contains(a):
            raise GeometryError(f"puncture {a.lift_rational()} is not in F")
    k0 = outer.k
    balls: dict = {}

    def add(ball: Ball, kind: str, end=None):
        key = ball.key()
        if key not in balls:
            balls[key] = (ball, kind, end)
        elif kind == "core" and balls[key][1] != "core":
            balls[key] = (balls[key][0], "core", None)

    for h in holes:
        if not outer.contains_ball(h):
            raise GeometryError("hole not inside the outer ball")
        for k in range(k0, h.k):
            add(Ball(h.center, k), "core")
    levels = []
    for i, a in enumerate(S):
        core = _core_level(a, [b for j, b in enumerate(S) if j != i], holes, k0)
        levels.append(core)
        for k in range(k0, core + 1):
            add(Ball(a, k), "core")
        for k in range(core + 1, core + depth + 1):
            add(Ball(a, k), "tail" if k == core + depth else "ray", i)
    if not balls:
        add(outer, "core")

    ordered = sorted(balls.values(), key=lambda t: (t[0].k, t[0].key()))
    vertices: list[TreeVertex] = []
    for ball, kind, end in ordered:
        parent = None
        for u in reversed(vertices):
            if u.k == ball.k - 1 and u.ball.contains(ball.center):
                parent = u.id
                break
        if parent is None and vertices:
            raise GeometryError("skeleton is not connected")
        v = TreeVertex(len(vertices), ball, kind, parent, end=end if kind != "core" else None)
        vertices.append(v)
        if parent is not None:
            vertices[parent].children.append(v.id)

    if not 1 <= ray_digit < outer.p:
        raise GeometryError("ray digit must be a nonzero residue")
    tree = SkeletonTree(F, S, depth, omega, vertices, levels, holes, ray_digit)
    for v in vertices:
        if v.kind == "tail":
            v.nu = measure_ball(omega, v.ball)
        else:
            removed = tree.removed_children(v)
            v.nu = measure_ball(omega, v.ball) - sum((measure_ball(omega, b) for b in removed), Fraction(0))
        if v.nu < 0:
            raise GeometryError(f"negative mass at vertex {v.id}")
        # every residue disc may be occupied, leaving a fiber with no Q_p-points
        v.rep = _representative(tree, v, rep_filter) if v.nu > 0 else None
    return tree


def _representative(tree: SkeletonTree, v: TreeVertex, rep_filter=None) -> PadicNumber:
    """A deterministic point of the fiber U(v): c + t p^k for the first free child."""
    if v.kind != "core":
        step = padic(Fraction(tree.p) ** v.k * tree.ray_digit, tree.p, v.ball.center.prec)
        return tree.S[v.end] + step
    removed = tree.removed_children(v)
    free = [
        ch.center
        for ch in v.ball.children()
        if not any(r.key() == ch.key() for r in removed) and not any(ch.contains(a) for a in tree.S)
    ]
    if free:
        return next((c for c in free if rep_filter is None or rep_filter(c)), free[0])
    raise GeometryError(f"fiber of vertex {v.id} has no free child ball")


# -- fitting |omega| and |f| from samples --------------------------------


class InconsistentFormError(GeometryError):
    pass


def exact_log_p(value: Fraction, p: int) -> int:
    """s with value = p^s, raising if value is not a power of p."""
    if value <= 0:
        raise InconsistentFormError("absolute value is not positive")
    num, den, s = value.numerator, value.denominator, 0
    while num % p == 0:
        num, s = num // p, s + 1
    while den % p == 0:
        den, s = den // p, s - 1
    if num != den:
        raise InconsistentFormError(f"{value} is not a power of {p}")
    return s


def shell_slope(absval, center: PadicNumber, levels, digit: int = 1) -> int:
    """Order of vanishing at ``center``: the constant slope of log_p|w| along shells."""
    p = center.p
    logs = []
    for k in levels:
        z = center + padic(Fraction(p) ** k * digit, p, center.prec)
        logs.append(exact_log_p(absval(z), p))
    slopes = {b - a for a, b in zip(logs, logs[1:])}
    if len(slopes) != 1:
        raise InconsistentFormError(f"slope toward {center.lift_rational()} is not constant: {logs}")
    return -slopes.pop()


def hole_probes(F: FundamentalDomain, avoid=(), per_level: int = 1):
    """Points of F on every annulus around every hole, for identifying hole factors."""
    p = F.outer.center.p
    prec = DEFAULT_PRECISION
    out = []
    for h in F.holes:
        for j in range(F.outer.k, h.k):
            found = 0
            for t in range(1, p):
                z = h.center + padic(Fraction(p) ** j * t, p, prec)
                if not F.contains(z) or any((z - a).is_zero for a in avoid):
                    continue
                if any((z - q).is_zero for q in out):
                    continue
                out.append(z)
                found += 1
                if found == per_level:
                    break
    return out


def _solve_integer(rows, rhs):
    """Integer solution of rows @ x = rhs, verified exactly; None when there is none."""
    A = np.array(rows, dtype=float)
    b = np.array(rhs, dtype=float)
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    xi = [int(round(v)) for v in x]
    for r, y in zip(rows, rhs):
        if sum(c * v for c, v in zip(r, xi)) != y:
            return None
    return xi


def fit_divisor(absval, candidates, probes, levels=(5, 6, 7), holes=()):
    """(C, [(point, order)], [(hole, exponent)]) with
    |w(z)| = C prod |z - a|^order prod max(|z - c_H|, r_H)^e_H on the probes.

    Orders may be negative for poles; candidates with slope zero are dropped.
    Hole columns that coincide on every probe are merged into the first one.
    """
    divisor = []
    for c in candidates:
        n = shell_slope(absval, c, levels)
        if n:
            divisor.append((c, n))
    p = probes[0].p
    residual = []
    for z in probes:
        base = Fraction(1)
        for a, n in divisor:
            base *= abs_value(z - a) ** n
        residual.append(exact_log_p(absval(z) / base, p))
    holes = list(holes)
    columns, kept = [], []
    for H in holes:
        col = [exact_log_p(max(abs_value(z - H.center), H.haar()), p) for z in probes]
        if any(col) and col not in columns:
            columns.append(col)
            kept.append(H)
    rows = [[1] + [col[i] for col in columns] for i in range(len(probes))]
    sol = _solve_integer(rows, residual)
    if sol is None:
        raise InconsistentFormError(f"no integer hole exponents explain the probe values: {residual}")
    C = Fraction(p) ** sol[0]
    factors = [(H, e) for H, e in zip(kept, sol[1:]) if e]
    return C, divisor, factors


def omega_factor(absval, candidates, probes, genus: int, levels=(5, 6, 7), holes=()) -> OmegaSpec:
    """Factored form of |omega| from its pointwise absolute value, degree-checked."""
    C, divisor, factors = fit_divisor(absval, candidates, probes, levels, holes)
    if any(n < 0 for _, n in divisor):
        raise InconsistentFormError("a holomorphic form cannot have poles in F")
    return OmegaSpec(C, divisor, hole_factors=factors).validate_degree(genus)

"""Zero orders of omega at the ends, and the genus, from exact degree increments
along each ray."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from padic_mumford.geometry import SkeletonTree
from padic_mumford.kernelop import KernelSpec, degree_of_fiber, shell_fiber


class GenusError(ValueError):
    pass


@dataclass
class EndProfile:
    end: int
    point: str
    levels: list
    degrees: list  # exact rationals

    @property
    def increments(self):
        return [b - a for a, b in zip(self.degrees, self.degrees[1:])]


def degree_profile(spec: KernelSpec, tree: SkeletonTree, end: int, levels) -> EndProfile:
    """Exact deg on the annuli |x - a| = p^-k of the end a = S[end]."""
    levels = list(levels)
    first = tree.core_level[end] + 1
    if not levels or min(levels) < first:
        raise GenusError(f"levels must start past the core, at {first} or deeper")
    degs = [degree_of_fiber(spec, tree, shell_fiber(tree, end, k)) for k in levels]
    return EndProfile(end, str(tree.S[end].lift_rational()), levels, degs)


def _exact_log(ratio: Fraction, p: int) -> int | None:
    """s with ratio = p^s exactly, else None."""
    if ratio <= 0:
        return None
    num, den = ratio.numerator, ratio.denominator
    s = 0
    while num % p == 0:
        num //= p
        s += 1
    while den % p == 0:
        den //= p
        s -= 1
    return s if num == den == 1 else None


def estimate_order(profile: EndProfile, p: int, max_period: int = 6, runs: int = 3) -> tuple:
    """(n_a, period) from the smallest period e' with three equal exact ratios p^(e'(n_a+1))."""
    inc = profile.increments
    for period in range(1, max_period + 1):
        if len(inc) < period + runs:
            break
        tail = [_exact_log(inc[i] / inc[i + period], p) if inc[i + period] else None for i in range(len(inc) - period)]
        last = tail[-runs:]
        if None in last or len(set(last)) != 1 or last[0] % period:
            continue
        s = last[0] // period
        if s < 1:
            continue
        return s - 1, period, last
    raise GenusError("degree increments have not stabilized; deepen the profile")


@dataclass
class GenusReport:
    ends: list
    orders: list
    periods: list
    genus: int
    multiplier_abs: str
    accumulation_candidates: int | None
    confidence: list

    def to_json(self) -> dict:
        return {
            "ends": self.ends,
            "n_a": self.orders,
            "genus": self.genus,
            "sum_n_a": sum(self.orders),
            "multiplier_abs": self.multiplier_abs,
            "periods": self.periods,
            "accumulation_candidates": self.accumulation_candidates,
            "confidence": self.confidence,
        }


def recover_genus(spec: KernelSpec, tree: SkeletonTree, levels: int = 24, spectrum_report=None) -> GenusReport:
    p = tree.p
    orders, periods, conf = [], [], []
    for end in range(len(tree.S)):
        start = tree.core_level[end] + 1
        prof = degree_profile(spec, tree, end, range(start, start + levels))
        n, period, ratios = estimate_order(prof, p)
        orders.append(n)
        periods.append(period)
        conf.append({"ratios_log_p": ratios, "stable_runs": len(ratios)})
    total = sum(orders)
    if total % 2:
        raise GenusError(f"zero orders sum to {total}, which is odd")
    if len(set(periods)) > 1:
        raise GenusError(f"ends disagree on the increment period: {periods}")
    count = None
    if spectrum_report is not None:
        count = len(spectrum_report.accumulation_candidates)
        if count != len(tree.S):
            raise GenusError(f"{count} accumulation candidates for {len(tree.S)} ends")
    mult = str(Fraction(1, p ** periods[0])) if periods else "1"
    return GenusReport(
        [str(a.lift_rational()) for a in tree.S], orders, periods, total // 2 + 1, mult, count, conf
    )


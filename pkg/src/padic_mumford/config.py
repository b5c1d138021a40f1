"""Curve configurations: TOML in, validated objects out.

All rationals are stored as strings ("7/11") so nothing passes through floats.
"""

from __future__ import annotations

import copy
import re
from importlib import resources
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import tomli
import tomli_w

from padic_mumford.geometry import Ball, OmegaSpec
from padic_mumford.kernelop import KernelSpec
from padic_mumford.localfield import DEFAULT_PRECISION, padic
from padic_mumford.moebius import MoebiusMap
from padic_mumford.schottky import Disc, SchottkyGroup, build_whittaker

DEFAULT_TOLERANCES = {
    "eigenvalue": 1e-9,
    "wavelet": 1e-8,
    "quadrature": 1e-8,
    "row_sum": 1e-9,
    "semigroup": 1e-8,
    "sigma": 3.0,
}


class ConfigError(ValueError):
    """Malformed configuration, with the line of the offending key when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def _rat(x, where: str) -> Fraction:
    try:
        return Fraction(str(x))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{where}: {x!r} is not a rational number") from None


@dataclass
class CurveConfig:
    p: int
    generators: list  # 2x2 rational matrices
    discs: list  # dicts with center, k, outside
    kernel: dict
    omega: dict
    ends: list  # rationals, the set S
    whittaker: list | None = None  # ramification pairs (a_i, b_i)
    word_len: int | None = None
    tree_depth: int = 10
    theta_box: int = 4
    prec: int = DEFAULT_PRECISION
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int = 0
    name: str = ""
    hyperelliptic: dict | None = None  # exponents m and the fitting transcript
    source: str | None = None  # raw text, for line lookups

    # -- objects -----------------------------------------------------------
    def group(self) -> SchottkyGroup:
        if self.whittaker:
            return build_whittaker(self.whittaker, self.p, prec=self.prec).schottky
        gens = [MoebiusMap.from_rationals(m, self.p, self.prec) for m in self.generators]
        discs = [Disc(padic(d["center"], self.p, self.prec), d["k"], d.get("outside", False)) for d in self.discs]
        return SchottkyGroup(self.p, gens, discs, self.prec).validate()

    def whittaker_group(self):
        if not self.whittaker:
            raise ConfigError("configuration has no Whittaker data")
        return build_whittaker(self.whittaker, self.p, prec=self.prec)

    def kernel_spec(self) -> KernelSpec:
        k, p, prec = self.kernel, self.p, self.prec
        mu = k.get("multiplier")
        return KernelSpec(
            Fraction(k["C"]),
            [(padic(Fraction(z), p, prec), int(m)) for z, m in k["zeros"]],
            [(padic(Fraction(z), p, prec), int(m)) for z, m in k["poles"]],
            [Ball(padic(Fraction(b["center"]), p, prec), int(b["k"])) for b in k.get("pole_balls", [])],
            None if mu is None else padic(Fraction(mu), p, prec),
        )

    def omega_spec(self) -> OmegaSpec:
        holes = [
            (Ball(padic(Fraction(h["center"]), self.p, self.prec), int(h["k"])), int(h["e"]))
            for h in self.omega.get("hole_factors", [])
        ]
        return OmegaSpec(
            Fraction(self.omega["C"]),
            [(padic(Fraction(z), self.p, self.prec), int(n)) for z, n in self.omega["zeros"]],
            hole_factors=holes,
        )

    def end_points(self) -> list:
        return [padic(a, self.p, self.prec) for a in self.ends]

    # -- serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "p": self.p,
            "prec": self.prec,
            "seed": self.seed,
            "truncation": {"tree_depth": self.tree_depth, "theta_box": self.theta_box},
            "tolerances": dict(self.tolerances),
            "group": {
                "generators": [[[str(Fraction(x)) for x in row] for row in m] for m in self.generators],
                "discs": [
                    {"center": str(d["center"]), "k": int(d["k"]), "outside": bool(d.get("outside", False))}
                    for d in self.discs
                ],
            },
            "kernel": copy.deepcopy(self.kernel),
            "omega": copy.deepcopy(self.omega),
            "ends": [str(Fraction(a)) for a in self.ends],
        }
        if self.word_len is not None:
            out["truncation"]["word_len"] = self.word_len
        if self.whittaker:
            out["group"]["whittaker"] = [[str(Fraction(a)), str(Fraction(b))] for a, b in self.whittaker]
        if self.hyperelliptic:
            out["hyperelliptic"] = copy.deepcopy(self.hyperelliptic)
        return out

    def dumps(self) -> str:
        return tomli_w.dumps(self.to_dict())

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())


def _line_of(source: str | None, key: str) -> int | None:
    if not source:
        return None
    pat = re.compile(rf"^\s*(\[+\s*)?{re.escape(key)}\b")
    for i, line in enumerate(source.splitlines(), 1):
        if pat.search(line):
            return i
    return None


def _require(table: dict, key: str, where: str, source):
    if key not in table:
        raise ConfigError(f"missing key '{key}' in {where}", _line_of(source, where.split(".")[-1]))
    return table[key]


def _check_kernel(k: dict, source) -> dict:
    for key in ("C", "zeros", "poles"):
        _require(k, key, "kernel", source)
    _rat(k["C"], "kernel.C")
    for name in ("zeros", "poles"):
        for item in k[name]:
            if not (isinstance(item, list) and len(item) == 2 and isinstance(item[1], int)):
                raise ConfigError(f"kernel.{name} entries are [point, order] pairs", _line_of(source, name))
            _rat(item[0], f"kernel.{name}")
    for b in k.get("pole_balls", []):
        _rat(_require(b, "center", "kernel.pole_balls", source), "kernel.pole_balls.center")
        _require(b, "k", "kernel.pole_balls", source)
    return k


def from_dict(data: dict, source: str | None = None) -> CurveConfig:
    p = _require(data, "p", "top level", source)
    if not isinstance(p, int) or p < 2:
        raise ConfigError("p must be a prime integer", _line_of(source, "p"))
    group = _require(data, "group", "top level", source)
    whittaker = group.get("whittaker")
    if whittaker is not None:
        whittaker = [(_rat(a, "group.whittaker"), _rat(b, "group.whittaker")) for a, b in whittaker]
    generators = [[[_rat(x, "group.generators") for x in row] for row in m] for m in group.get("generators", [])]
    discs = []
    for d in group.get("discs", []):
        _rat(_require(d, "center", "group.discs", source), "group.discs.center")
        discs.append({"center": Fraction(str(d["center"])), "k": int(_require(d, "k", "group.discs", source)),
                      "outside": bool(d.get("outside", False))})
    if not whittaker and not generators:
        raise ConfigError("group needs generators or whittaker pairs", _line_of(source, "group"))
    omega = _require(data, "omega", "top level", source)
    _rat(_require(omega, "C", "omega", source), "omega.C")
    trunc = data.get("truncation", {})
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(data.get("tolerances", {}))
    return CurveConfig(
        p=p,
        generators=generators,
        discs=discs,
        kernel=_check_kernel(_require(data, "kernel", "top level", source), source),
        omega=omega,
        ends=[_rat(a, "ends") for a in _require(data, "ends", "top level", source)],
        whittaker=whittaker,
        word_len=trunc.get("word_len"),
        tree_depth=int(trunc.get("tree_depth", 10)),
        theta_box=int(trunc.get("theta_box", 4)),
        prec=int(data.get("prec", DEFAULT_PRECISION)),
        tolerances=tol,
        seed=int(data.get("seed", 0)),
        name=str(data.get("name", "")),
        hyperelliptic=data.get("hyperelliptic"),
        source=source,
    )


def loads(text: str) -> CurveConfig:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        # errors at end of document carry no position; blame the last line
        line = int(m.group(1)) if m else max(1, len(text.rstrip("\n").splitlines()))
        raise ConfigError(f"TOML syntax: {exc}", line) from None
    return from_dict(data, text)


def load(path) -> CurveConfig:
    return loads(Path(path).read_text())


def fixture_names() -> list:
    """Names of the curve configurations shipped with the package."""
    root = resources.files("padic_mumford") / "fixtures"
    return sorted(f.name[:-5] for f in root.iterdir() if f.name.endswith(".toml"))


def load_fixture(name: str) -> CurveConfig:
    """Load a shipped fixture such as ``"fixture-g2"``."""
    res = resources.files("padic_mumford") / "fixtures" / f"{name}.toml"
    if not res.is_file():
        raise ConfigError(f"no packaged fixture named {name!r}; available: {fixture_names()}")
    return loads(res.read_text())

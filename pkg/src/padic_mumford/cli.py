"""Command line entry point.

Exit codes: 0 success, 2 validation failure, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from padic_mumford import config as config_mod
from padic_mumford.genus import GenusError
from padic_mumford.geometry import GeometryError
from padic_mumford.heat import HeatError, feller_certificate, sample_paths, solve_cauchy
from padic_mumford.hyperelliptic import FixtureError, curve_from_config, make_fixture
from padic_mumford.kernelop import KernelError
from padic_mumford.localfield import PrecisionError, padic
from padic_mumford.pipeline import CurveModel, verify_operator
from padic_mumford.schottky import GroupValidationError, LimitSetError
from padic_mumford.theta import (
    Character,
    ConvergenceError,
    SquareRootError,
    ThetaCalculus,
    functional_equation_suite,
    riemann_theta,
)

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


class VerificationFailed(Exception):
    pass


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, default=str) + "\n"


def _load(args) -> config_mod.CurveConfig:
    cfg = config_mod.load(args.config)
    if getattr(args, "word_len", None) is not None:
        cfg.word_len = args.word_len
    if getattr(args, "theta_box", None) is not None:
        cfg.theta_box = args.theta_box
    if getattr(args, "depth", None) is not None:
        cfg.tree_depth = args.depth
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    return cfg


def _rationals(text: str):
    return [Fraction(t) for t in text.split(",") if t.strip()]


# -- commands -----------------------------------------------------------------


def cmd_verify(args) -> int:
    cfg = _load(args)
    model = CurveModel.from_config(cfg)
    report = {"config": cfg.name, "group": {"genus": model.group.genus, "valid": True}}
    report["operator"] = verify_operator(model, seed=cfg.seed, wavelet_tol=cfg.tolerances["wavelet"])
    ok = report["operator"]["passed"]
    if not args.skip_theta:
        calc, PM = _theta_setup(cfg, model)
        checks = functional_equation_suite(calc, PM, box=cfg.theta_box)
        report["theta"] = [c.to_json() for c in checks]
        ok = ok and all(c.ok for c in checks)
    report["genus"] = model.genus().to_json()
    ok = ok and report["genus"]["genus"] == model.group.genus
    report["passed"] = ok
    _emit(args, _json(report))
    if not ok:
        raise VerificationFailed("one or more suites failed")
    return EXIT_OK


def _theta_setup(cfg, model):
    if cfg.whittaker:
        curve = curve_from_config(cfg)
        return curve.calc, curve.PM
    calc = ThetaCalculus(model.group, cfg.word_len)
    return calc, calc.period_matrix()


def cmd_theta(args) -> int:
    cfg = _load(args)
    model = CurveModel.from_config(cfg)
    p, prec = cfg.p, cfg.prec
    z = padic(Fraction(args.z), p, prec)
    out = {}
    if args.kind == "product":
        calc = ThetaCalculus(model.group, cfg.word_len)
        T = calc.theta(Fraction(args.a), Fraction(args.b))
        out = T.evaluate(z).to_json()
    else:
        values = _rationals(args.character) if args.character else [Fraction(1)] * model.group.genus
        c = Character(tuple(padic(v, p, prec) for v in values))
        if args.kind == "riemann":
            calc, PM = _theta_setup(cfg, model)
            sv = riemann_theta(calc, PM, c, z, cfg.theta_box)
            value, tail = sv.value, sv.omitted
        else:
            curve = curve_from_config(cfg)
            value = curve.standard_function(z) if args.kind == "standard-function" else curve.f_gamma(c, z)
            tail = None
        out = {"value": value.to_json(), "valuation": None if value.is_zero else value.valuation,
               "tail_estimate": None if tail is None else str(tail)}
    _emit(args, _json(out))
    return EXIT_OK


def cmd_tree(args) -> int:
    cfg = _load(args)
    T = CurveModel.from_config(cfg).tree()
    _emit(args, T.to_dot() + "\n" if args.emit == "dot" else T.dumps() + "\n")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    cfg = _load(args)
    rep = CurveModel.from_config(cfg).spectrum(tolerance=args.tolerance or 1e-10)
    if args.emit == "csv":
        lines = ["index,eigenvalue"] + [f"{i},{e!r}" for i, e in enumerate(rep.eigenvalues)]
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit(args, _json(rep.to_json()))
    return EXIT_OK


def _initial_condition(text: str | None, n: int) -> np.ndarray:
    """constant, delta:v, or a file of one value per vertex."""
    if text is None or text == "constant":
        return np.ones(n)
    if text.startswith("delta:"):
        v = int(text.split(":", 1)[1])
        if not 0 <= v < n:
            raise HeatError(f"vertex {v} out of range 0..{n - 1}")
        h0 = np.zeros(n)
        h0[v] = 1.0
        return h0
    vals = [float(Fraction(t)) for t in Path(text).read_text().replace(",", " ").split()]
    if len(vals) != n:
        raise HeatError(f"initial condition has {len(vals)} entries for {n} vertices")
    return np.array(vals)


def cmd_heat(args) -> int:
    cfg = _load(args)
    gen = CurveModel.from_config(cfg).generator()
    times = [float(t) for t in args.t_grid.split(",")]
    sol = solve_cauchy(gen, _initial_condition(args.h0, gen.size), times)
    if args.emit == "json":
        feller = feller_certificate(gen, seed=cfg.seed)
        _emit(args, _json({"times": sol.times, "states": sol.states.tolist(), "feller": feller.to_json()}))
    else:
        _emit(args, sol.to_csv())
    return EXIT_OK


def cmd_sample_paths(args) -> int:
    cfg = _load(args)
    gen = CurveModel.from_config(cfg).generator()
    paths = sample_paths(gen, args.v0, args.horizon, args.n, cfg.seed)
    _emit(args, "".join(json.dumps(pth.to_json()) + "\n" for pth in paths))
    return EXIT_OK


def cmd_genus(args) -> int:
    cfg = _load(args)
    rep = CurveModel.from_config(cfg).genus(levels=args.levels)
    _emit(args, _json(rep.to_json()))
    return EXIT_OK


def cmd_make_fixture(args) -> int:
    centers = []
    for item in args.centers.split(","):
        c, e = item.split(":")
        centers.append((Fraction(c), int(e)))
    m = [int(x) for x in args.m.split(",")] if args.m else None
    cfg, _ = make_fixture(centers, args.p, m, args.word_len, args.theta_box or 4, args.depth or 10,
                          args.name or "", with_omega0=args.with_omega0)
    if args.seed is not None:
        cfg.seed = args.seed
    _emit(args, cfg.dumps())
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def _common(sp, config: bool = True):
    if config:
        sp.add_argument("config", help="curve configuration (TOML)")
    sp.add_argument("--out", help="write the result here instead of stdout")
    sp.add_argument("--depth", type=int, help="tree depth D past the core")
    sp.add_argument("--word-len", type=int, help="theta truncation: maximal word length")
    sp.add_argument("--theta-box", type=int, help="lattice box for the Riemann theta series")
    sp.add_argument("--tolerance", type=float, help="zero-eigenvalue tolerance")
    sp.add_argument("--seed", type=int, help="random seed")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="padic-mumford", description="Heat operators on Mumford curves.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("verify", help="run every property suite on a configuration")
    _common(sp)
    sp.add_argument("--skip-theta", action="store_true", help="skip the theta functional equations")
    sp.add_argument("--emit", choices=["json"], default="json")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("theta", help="evaluate theta products, the Riemann theta or F")
    _common(sp)
    sp.add_argument("--kind", choices=["product", "riemann", "f-gamma", "standard-function"], default="product")
    sp.add_argument("--a", default="0")
    sp.add_argument("--b", default="1")
    sp.add_argument("--z", required=True)
    sp.add_argument("--character", help="comma-separated character values on the generators")
    sp.add_argument("--emit", choices=["json"], default="json")
    sp.set_defaults(func=cmd_theta)

    sp = sub.add_parser("tree", help="emit the truncated skeleton tree")
    _common(sp)
    sp.add_argument("--emit", choices=["json", "dot"], default="json")
    sp.set_defaults(func=cmd_tree)

    sp = sub.add_parser("spectrum", help="eigenvalues and accumulation candidates")
    _common(sp)
    sp.add_argument("--emit", choices=["json", "csv"], default="json")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("heat", help="solve the Cauchy problem on vertex functions")
    _common(sp)
    sp.add_argument("--t-grid", default="0,0.1,1,10")
    sp.add_argument("--h0", default="constant", help="constant, delta:v, or a file with one value per vertex")
    sp.add_argument("--emit", choices=["csv", "json"], default="csv")
    sp.set_defaults(func=cmd_heat)

    sp = sub.add_parser("sample-paths", help="sample jump paths of the Markov chain")
    _common(sp)
    sp.add_argument("--n", type=int, default=10)
    sp.add_argument("--horizon", type=float, default=1.0)
    sp.add_argument("--v0", type=int, default=0)
    sp.add_argument("--emit", choices=["jsonl"], default="jsonl")
    sp.set_defaults(func=cmd_sample_paths)

    sp = sub.add_parser("genus", help="recover the genus from degree increments")
    _common(sp)
    sp.add_argument("--levels", type=int, default=24)
    sp.add_argument("--emit", choices=["json"], default="json")
    sp.set_defaults(func=cmd_genus)

    hp = sub.add_parser("hyperelliptic", help="hyperelliptic fixture tools")
    hsub = hp.add_subparsers(dest="action", required=True)
    sp = hsub.add_parser("make-fixture", help="fit F and omega for a Whittaker group and emit a config")
    _common(sp, config=False)
    sp.add_argument("--centers", required=True, help="center:e pairs, e.g. 0:2,2:2")
    sp.add_argument("--p", type=int, default=5)
    sp.add_argument("--m", help="exponents m_i summing to g - 1")
    sp.add_argument("--name")
    sp.add_argument("--with-omega0", action="store_true")
    sp.add_argument("--emit", choices=["toml"], default="toml")
    sp.set_defaults(func=cmd_make_fixture)
    return ap


INVALID = (config_mod.ConfigError, GroupValidationError, FixtureError, GeometryError, KernelError,
           HeatError, SquareRootError, VerificationFailed, FileNotFoundError)
NUMERIC = (ConvergenceError, GenusError, LimitSetError, PrecisionError, np.linalg.LinAlgError)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NUMERIC as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except INVALID as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

"""Diffusion operators, spectra and genus recovery on Mumford curves over Q_p."""

from padic_mumford.localfield import INF, PadicNumber, PrecisionError, padic
from padic_mumford.moebius import MoebiusMap
from padic_mumford.schottky import Disc, SchottkyGroup, WhittakerGroup, build_whittaker

__all__ = [
    "INF",
    "PadicNumber",
    "PrecisionError",
    "padic",
    "MoebiusMap",
    "Disc",
    "SchottkyGroup",
    "WhittakerGroup",
    "build_whittaker",
]

__version__ = "0.1.0"

"""Numerical laboratory for the small-capillarity regime of capillary fluids:
spectral/finite-difference solvers, an automated multi-scale expansion
builder with boundary layers, energy diagnostics, and a sweep harness."""

from . import bkw, dynamics, energy, fields, grids, harness, jets, laws, layers
from .grids import Grid, halfline_1d, periodic_1d, periodic_2d
from .laws import LawPair, qhd_gp, nls_gp

__all__ = [
    "Grid",
    "LawPair",
    "bkw",
    "dynamics",
    "energy",
    "fields",
    "grids",
    "halfline_1d",
    "harness",
    "jets",
    "laws",
    "layers",
    "nls_gp",
    "periodic_1d",
    "periodic_2d",
    "qhd_gp",
]

"""Computational grids.

Three kinds are supported:

* ``periodic-1d`` -- nodes x_j = j L / n on [0, L), spectral transforms;
* ``periodic-2d`` -- tensor product of two periodic axes (square, same n);
* ``halfline-1d`` -- nodes x_j = j L / (n - 1) on [0, L], boundary node at 0,
  finite differences.

Periodic point counts must be powers of two so FFT sizes stay friendly and
refinement studies halve cleanly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ShapeError

PERIODIC_1D = "periodic-1d"
PERIODIC_2D = "periodic-2d"
HALFLINE_1D = "halfline-1d"

_KINDS = (PERIODIC_1D, PERIODIC_2D, HALFLINE_1D)


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform grid of one of the supported kinds.

    ``length`` is the period L for periodic kinds and the truncation X_max
    for the half line.  ``points`` is the number of nodes per axis.
    """

    kind: str
    length: float
    points: int

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if self.length <= 0:
            raise ValueError("grid length must be positive")
        if self.kind in (PERIODIC_1D, PERIODIC_2D):
            if not _is_power_of_two(self.points):
                raise ValueError("periodic grids require a power-of-two point count")
        elif self.points < 8:
            raise ValueError("half-line grids need at least 8 nodes")

    @property
    def dim(self) -> int:
        return 2 if self.kind == PERIODIC_2D else 1

    @property
    def periodic(self) -> bool:
        return self.kind in (PERIODIC_1D, PERIODIC_2D)

    @property
    def spacing(self) -> float:
        if self.periodic:
            return self.length / self.points
        return self.length / (self.points - 1)

    @property
    def shape(self) -> tuple:
        return (self.points,) * self.dim

    def nodes(self, axis: int = 0) -> np.ndarray:
        """1-d array of node coordinates along ``axis``."""
        if axis >= self.dim:
            raise DimensionError(f"axis {axis} on a {self.dim}-d grid")
        if self.periodic:
            return np.arange(self.points) * self.spacing
        return np.linspace(0.0, self.length, self.points)

    def meshgrid(self):
        """Coordinate arrays shaped like a field on this grid."""
        axes = [self.nodes(a) for a in range(self.dim)]
        if self.dim == 1:
            return (axes[0],)
        return np.meshgrid(*axes, indexing="ij")

    def wavenumbers(self, axis: int = 0) -> np.ndarray:
        """FFT wavenumbers 2*pi*fftfreq along ``axis`` (periodic only)."""
        if not self.periodic:
            raise DimensionError("wavenumbers are defined on periodic grids only")
        return 2.0 * np.pi * np.fft.fftfreq(self.points, d=self.spacing)

    def check_same(self, other: "Grid"):
        if self != other:
            raise ShapeError(f"grid mismatch: {self} vs {other}")


def periodic_1d(length: float = 2.0 * np.pi, points: int = 128) -> Grid:
    return Grid(PERIODIC_1D, length, points)


def periodic_2d(length: float = 2.0 * np.pi, points: int = 64) -> Grid:
    return Grid(PERIODIC_2D, length, points)


def halfline_1d(length: float, points: int) -> Grid:
    return Grid(HALFLINE_1D, length, points)
